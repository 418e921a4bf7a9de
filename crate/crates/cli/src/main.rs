//! `otfs-papr`: PAPR and error-rate experiments for precoded OTFS.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use otfs_core::experiment::{self, ExperimentConfig};
use otfs_core::{papr, GreedyPrecoder, InfoVector, Modem};

use config::Overrides;
use output::Writer;

#[derive(Debug, Parser)]
#[command(
    name = "otfs-papr",
    version,
    about = "PAPR reduction experiments for OTFS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// PAPR of random frames per method: samples, CCDF curve and readouts.
    Ccdf(RunArgs),
    /// SER/BER versus SNR over a doubly dispersive channel.
    ErrorRate(RunArgs),
    /// SER/BER versus maximum Doppler shift at a fixed SNR.
    DopplerSweep(RunArgs),
    /// PAPR at CCDF 0.1 while M or N sweeps.
    ScalingTable(RunArgs),
    /// Precode one frame and print it with its PAPR before and after.
    Precode(PrecodeArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat TOML file with experiment keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write a matplotlib script that plots the CSV output.
    #[arg(long)]
    plot_script: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct PrecodeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// File of whitespace-separated symbol indices in 0..D, delay index
    /// fastest. Without it a random frame is drawn from the seed.
    #[arg(long)]
    symbols: Option<PathBuf>,
    /// Frame index of the random frame.
    #[arg(long, default_value_t = 0)]
    frame: usize,
    #[command(flatten)]
    overrides: Overrides,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ccdf(args) => ccdf(&args),
        Command::ErrorRate(args) => error_rate(&args, "error-rate"),
        Command::DopplerSweep(args) => error_rate(&args, "doppler-sweep"),
        Command::ScalingTable(args) => scaling(&args),
        Command::Precode(args) => precode(&args),
    }
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, Writer)> {
    let cfg = config::load(args.config.as_deref(), &args.overrides)?;
    let writer = Writer::new(&cfg)?;
    Ok((cfg, writer))
}

fn ccdf(args: &RunArgs) -> Result<()> {
    let (cfg, out) = load(args)?;
    let run = experiment::run_ccdf(&cfg)?;
    let meta = out.metadata("ccdf", &[])?;
    let mut files = Vec::new();
    for mc in &run.methods {
        let samples = format!("ccdf_{}_samples.csv", mc.method);
        let curve = format!("ccdf_{}_curve.csv", mc.method);
        out.write(&samples, &meta, |w| {
            experiment::csv::write_papr_samples(w, mc)
        })?;
        out.write(&curve, &meta, |w| experiment::csv::write_ccdf_curve(w, mc))?;
        files.push((mc.method.to_string(), curve));
        println!(
            "{:<11} PAPR@CCDF0.5 = {:6.3} dB  PAPR@CCDF0.1 = {:6.3} dB  mean flips = {:.2}",
            mc.method.name(),
            mc.papr_at_0p5,
            mc.papr_at_0p1,
            mc.mean_flips
        );
    }
    out.write("ccdf_readout.csv", &meta, |w| {
        output::write_readout(w, &run)
    })?;
    if let Some(path) = &args.plot_script {
        output::write_text(path, &output::ccdf_plot_script(out.dir(), &files))?;
    }
    Ok(())
}

fn error_rate(args: &RunArgs, command: &str) -> Result<()> {
    let (cfg, out) = load(args)?;
    let run = if command == "doppler-sweep" {
        experiment::run_doppler_sweep(&cfg)?
    } else {
        experiment::run_error_rate(&cfg)?
    };
    let failures: u64 = run.rows.iter().map(|r| r.solver_failures).sum();
    let meta = out.metadata(command, &[format!("solver_failures = {failures}")])?;
    let file = format!("{}.csv", command.replace('-', "_"));
    out.write(&file, &meta, |w| {
        experiment::csv::write_error_rates(w, &run.rows)
    })?;
    for r in &run.rows {
        println!(
            "{:<11} snr = {:>5} dB  nu_max = {:>6} Hz  SER = {:.4e}  BER = {:.4e}",
            r.method.name(),
            r.snr_db,
            r.nu_max_hz,
            r.counts.ser(),
            r.counts.ber()
        );
    }
    if failures > 0 {
        eprintln!("warning: {failures} frame/point pairs dropped after equalizer failure");
    }
    if let Some(path) = &args.plot_script {
        let x = if command == "doppler-sweep" {
            "nu_max_hz"
        } else {
            "snr_db"
        };
        output::write_text(
            path,
            &output::error_rate_plot_script(&out.dir().join(&file), x),
        )?;
    }
    Ok(())
}

fn scaling(args: &RunArgs) -> Result<()> {
    let (cfg, out) = load(args)?;
    let rows = experiment::run_scaling_table(&cfg)?;
    let meta = out.metadata("scaling-table", &[])?;
    out.write("scaling_table.csv", &meta, |w| {
        experiment::csv::write_scaling(w, &rows)
    })?;
    for r in &rows {
        println!(
            "M = {:>3}  N = {:>3}  {:<11} {:6.3} dB",
            r.m,
            r.n,
            r.method.name(),
            r.papr_db_at_0p1
        );
    }
    if let Some(path) = &args.plot_script {
        output::write_text(
            path,
            &output::scaling_plot_script(&out.dir().join("scaling_table.csv")),
        )?;
    }
    Ok(())
}

fn read_indices(path: &Path) -> Result<Vec<usize>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .with_context(|| format!("bad symbol index '{t}'"))
        })
        .collect()
}

fn precode(args: &PrecodeArgs) -> Result<()> {
    let cfg = config::load(args.config.as_deref(), &args.overrides)?;
    let params = cfg.params()?;
    let alphabet = cfg.alphabet()?;
    let u = match &args.symbols {
        Some(path) => {
            let idx = read_indices(path)?;
            if idx.len() != params.len() {
                bail!(
                    "{} holds {} symbols, the grid needs M*N = {}",
                    path.display(),
                    idx.len(),
                    params.len()
                );
            }
            InfoVector::from_indices(&idx, alphabet)?
        }
        None => experiment::draw_info(&cfg, args.frame)?,
    };
    let before = papr(&Modem::new(params).modulate(&u)?)?;
    let res = GreedyPrecoder::new(params).precode(&u, &cfg.greedy())?;
    println!("index,k,l,re,im,ring");
    for (i, x) in res.x_star.iter().enumerate() {
        let ring = if x.norm() > 1.5 * alphabet.amplitude() {
            2
        } else {
            1
        };
        println!(
            "{i},{},{},{:.6},{:.6},{ring}",
            i / params.m(),
            i % params.m(),
            x.re,
            x.im
        );
    }
    println!("# PAPR before = {:.4} dB", before.db);
    println!("# PAPR after  = {:.4} dB", res.papr_star.db);
    println!(
        "# iterations = {}, flips = {:?}",
        res.iterations_used, res.flips
    );
    Ok(())
}
