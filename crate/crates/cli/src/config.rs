//! Config loading: a flat TOML file, then same-named flags on top.

use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use otfs_core::experiment::ExperimentConfig;
use serde::Serialize;

/// One optional flag per config key. Values that are set replace the
/// corresponding key from the file.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Overrides {
    /// Delay bins per frame.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Doppler bins per frame.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Subcarrier spacing in Hz.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_f: Option<f64>,
    /// PSK order.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulation: Option<usize>,
    /// Constellation amplitude.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Comma-separated list of none, proposed, companding, icf, dft.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frames: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Greedy pass cap; 0 runs to convergence.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// μ-law compression parameter.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// ICF clip level above RMS in dB.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icf_clip_db: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icf_iterations: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icf_oversample: Option<usize>,
    /// delay or doppler.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dft_axis: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dft_blocks: Option<usize>,
    /// Comma-separated SNR points in dB; `inf` disables noise.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_max_hz: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_snr_db: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_max_list: Option<Vec<f64>>,
    /// etu, single, identity or inline.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_delays_ns: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_powers_db: Option<Vec<f64>>,
    /// Symbol energy assumed by the equalizer; 0 means amplitude².
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub es: Option<f64>,
    /// m or n.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_values: Option<Vec<usize>>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, short = 'o')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

/// Defaults, then the file (if any), then the flags.
pub fn load(file: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            text.parse::<toml::Table>()
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => toml::Table::new(),
    };
    let flags = toml::Table::try_from(overrides).context("encoding command-line overrides")?;
    table.extend(flags);
    let cfg: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .context("invalid configuration")?;
    cfg.validate().context("invalid configuration")?;
    Ok(cfg)
}

/// The effective configuration as TOML, for output metadata.
pub fn echo(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).context("encoding configuration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use otfs_core::baselines::SpreadAxis;
    use otfs_core::experiment::Method;
    use std::io::Write;

    #[test]
    fn flags_override_file_values() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "m = 8\nn = 4\nmethods = [\"none\", \"dft\"]\ndft_axis = \"doppler\"\nseed = 9"
        )
        .unwrap();
        let flags = Overrides {
            n: Some(8),
            snr_db: Some(vec![f64::INFINITY]),
            ..Default::default()
        };
        let cfg = load(Some(f.path()), &flags).unwrap();
        assert_eq!((cfg.m, cfg.n, cfg.seed), (8, 8, 9));
        assert_eq!(cfg.methods, vec![Method::None, Method::Dft]);
        assert_eq!(cfg.dft_axis, SpreadAxis::Doppler);
        assert_eq!(cfg.snr_db, vec![f64::INFINITY]);
        assert_eq!(cfg.frames, ExperimentConfig::default().frames);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "frame = 10").unwrap();
        assert!(load(Some(f.path()), &Overrides::default()).is_err());
        let flags = Overrides {
            profile: Some("rural".into()),
            ..Default::default()
        };
        assert!(load(None, &flags).is_err());
        let flags = Overrides {
            frames: Some(0),
            ..Default::default()
        };
        assert!(load(None, &flags).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = ExperimentConfig::default();
        let back: ExperimentConfig = toml::from_str(&echo(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
