//! Output files: `#` metadata, CSV bodies and optional plot scripts.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use otfs_core::experiment::{csv, CcdfRun, ExperimentConfig};
use otfs_core::rng::GENERATOR;

pub struct Writer {
    dir: PathBuf,
    config_echo: String,
    seed: u64,
}

impl Writer {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let dir = PathBuf::from(&cfg.output_path);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir,
            config_echo: crate::config::echo(cfg)?,
            seed: cfg.seed,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Header comment lines: tool, command, seed, generator, extras, then the
    /// effective configuration. Contains nothing run-dependent.
    pub fn metadata(&self, command: &str, extra: &[String]) -> Result<Vec<String>> {
        let mut lines = vec![
            format!("tool = otfs-papr {}", env!("CARGO_PKG_VERSION")),
            format!("command = {command}"),
            format!("seed = {}", self.seed),
            format!("generator = {GENERATOR}"),
        ];
        lines.extend_from_slice(extra);
        lines.push("config:".into());
        lines.push(self.config_echo.clone());
        Ok(lines)
    }

    pub fn write(
        &self,
        name: &str,
        meta: &[String],
        body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        csv::write_metadata(&mut w, meta)
            .and_then(|_| body(&mut w))
            .and_then(|_| w.flush())
            .with_context(|| format!("writing {}", path.display()))
    }
}

pub fn write_readout<W: Write>(w: &mut W, run: &CcdfRun) -> io::Result<()> {
    writeln!(
        w,
        "method,papr_db_at_ccdf_0p5,papr_db_at_ccdf_0p1,mean_flips"
    )?;
    for mc in &run.methods {
        writeln!(
            w,
            "{},{:.4},{:.4},{:.4}",
            mc.method, mc.papr_at_0p5, mc.papr_at_0p1, mc.mean_flips
        )?;
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

const PREAMBLE: &str = "import pandas as pd\nimport matplotlib.pyplot as plt\n\n";

pub fn ccdf_plot_script(dir: &Path, curves: &[(String, String)]) -> String {
    let mut s = String::from(PREAMBLE);
    s.push_str("fig, ax = plt.subplots()\n");
    for (label, file) in curves {
        s.push_str(&format!(
            "d = pd.read_csv({:?}, comment='#')\nax.semilogy(d.threshold_db, d.ccdf, label={label:?})\n",
            dir.join(file).display().to_string()
        ));
    }
    s.push_str(
        "ax.set_xlabel('PAPR threshold (dB)')\nax.set_ylabel('CCDF')\nax.set_ylim(1e-3, 1)\nax.grid(True, which='both')\nax.legend()\nplt.show()\n",
    );
    s
}

pub fn error_rate_plot_script(file: &Path, x: &str) -> String {
    format!(
        "{PREAMBLE}d = pd.read_csv({:?}, comment='#')\nfig, ax = plt.subplots()\n\
         for method, g in d.groupby('method', sort=False):\n    ax.semilogy(g.{x}, g.ser, marker='o', label=method)\n\
         ax.set_xlabel('{x}')\nax.set_ylabel('SER')\nax.grid(True, which='both')\nax.legend()\nplt.show()\n",
        file.display().to_string()
    )
}

pub fn scaling_plot_script(file: &Path) -> String {
    format!(
        "{PREAMBLE}d = pd.read_csv({:?}, comment='#')\nx = 'M' if d.M.nunique() > 1 else 'N'\nfig, ax = plt.subplots()\n\
         for method, g in d.groupby('method', sort=False):\n    ax.plot(g[x], g.papr_db_at_ccdf_0p1, marker='o', label=method)\n\
         ax.set_xscale('log', base=2)\nax.set_xlabel(x)\nax.set_ylabel('PAPR at CCDF 0.1 (dB)')\nax.grid(True)\nax.legend()\nplt.show()\n",
        file.display().to_string()
    )
}
