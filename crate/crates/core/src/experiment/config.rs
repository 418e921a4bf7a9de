use serde::{Deserialize, Serialize};

use crate::baselines::{CompandingConfig, DftSpreadConfig, IcfConfig, SpreadAxis};
use crate::channel::PathProfile;
use crate::error::{Error, Result};
use crate::frame::{FrameParams, PskAlphabet};
use crate::precoder::GreedyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Uncompensated OTFS.
    None,
    /// Greedy two-ring amplitude precoding.
    Proposed,
    Companding,
    Icf,
    Dft,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::None,
        Method::Proposed,
        Method::Companding,
        Method::Icf,
        Method::Dft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Proposed => "proposed",
            Method::Companding => "companding",
            Method::Icf => "icf",
            Method::Dft => "dft",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// Nine-path Extended Typical Urban.
    #[default]
    Etu,
    /// One unit-variance Rayleigh path.
    Single,
    /// Deterministic unit gain, no delay, no Doppler.
    Identity,
    /// Delays and powers taken from `profile_delays_ns` / `profile_powers_db`.
    Inline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    M,
    #[default]
    N,
}

/// Flat experiment description; every field maps to one config key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub delta_f: f64,
    /// PSK order `D`.
    pub modulation: usize,
    pub amplitude: f64,
    pub methods: Vec<Method>,
    pub frames: usize,
    pub seed: u64,
    /// Greedy pass cap; 0 runs until no single toggle improves the PAPR.
    pub max_iter: usize,
    pub mu: f64,
    pub icf_clip_db: f64,
    pub icf_iterations: usize,
    pub icf_oversample: usize,
    pub dft_axis: SpreadAxis,
    pub dft_blocks: usize,
    pub snr_db: Vec<f64>,
    pub nu_max_hz: f64,
    /// SNR of the Doppler sweep.
    pub sweep_snr_db: f64,
    pub nu_max_list: Vec<f64>,
    pub profile: ProfileKind,
    pub profile_delays_ns: Vec<f64>,
    pub profile_powers_db: Vec<f64>,
    /// Symbol energy assumed by the MMSE regularizer; 0 means `A²`.
    pub es: f64,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<usize>,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Directory the command-line runner writes into.
    pub output_path: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let icf = IcfConfig::default();
        let dft = DftSpreadConfig::default();
        Self {
            m: 16,
            n: 16,
            delta_f: 15e3,
            modulation: 2,
            amplitude: 1.0,
            methods: vec![Method::None, Method::Proposed],
            frames: 1000,
            seed: 1,
            max_iter: 5,
            mu: CompandingConfig::default().mu,
            icf_clip_db: icf.clip_ratio_db,
            icf_iterations: icf.iterations,
            icf_oversample: icf.oversample_factor,
            dft_axis: dft.axis,
            dft_blocks: dft.blocks,
            snr_db: vec![0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0],
            nu_max_hz: 300.0,
            sweep_snr_db: 18.0,
            nu_max_list: (0..=8).map(|i| 300.0 * i as f64).collect(),
            profile: ProfileKind::Etu,
            profile_delays_ns: Vec::new(),
            profile_powers_db: Vec::new(),
            es: 0.0,
            sweep_axis: SweepAxis::N,
            sweep_values: vec![4, 8, 16, 32, 64],
            workers: 0,
            output_path: "results".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<FrameParams> {
        FrameParams::new(self.m, self.n, self.delta_f)
    }

    pub fn alphabet(&self) -> Result<PskAlphabet> {
        PskAlphabet::new(self.modulation, self.amplitude)
    }

    pub fn greedy(&self) -> GreedyConfig {
        GreedyConfig::new(self.max_iter).unwrap_or_else(|_| GreedyConfig::until_converged())
    }

    pub fn companding(&self) -> CompandingConfig {
        CompandingConfig { mu: self.mu }
    }

    pub fn icf(&self) -> IcfConfig {
        IcfConfig {
            clip_ratio_db: self.icf_clip_db,
            iterations: self.icf_iterations,
            oversample_factor: self.icf_oversample,
        }
    }

    pub fn dft(&self) -> DftSpreadConfig {
        DftSpreadConfig {
            axis: self.dft_axis,
            blocks: self.dft_blocks,
        }
    }

    /// `None` for the deterministic identity channel.
    pub fn path_profile(&self) -> Result<Option<PathProfile>> {
        Ok(match self.profile {
            ProfileKind::Etu => Some(PathProfile::etu()),
            ProfileKind::Single => Some(PathProfile::single_path()),
            ProfileKind::Identity => None,
            ProfileKind::Inline => Some(PathProfile::new(
                self.profile_delays_ns.clone(),
                self.profile_powers_db.clone(),
            )?),
        })
    }

    pub fn symbol_energy(&self) -> f64 {
        if self.es > 0.0 {
            self.es
        } else {
            self.amplitude * self.amplitude
        }
    }

    /// Checks everything the selected methods and runners depend on.
    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        let alphabet = self.alphabet()?;
        alphabet.bits_per_symbol()?;
        if self.frames == 0 {
            return Err(Error::Parameter("frames must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Parameter("no methods selected".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::Parameter(format!("method '{m}' listed twice")));
            }
            match m {
                Method::Companding => self.companding().validate()?,
                Method::Icf => self.icf().validate()?,
                Method::Dft => {
                    self.dft().block_len(&params)?;
                }
                Method::None | Method::Proposed => {}
            }
        }
        if self.es < 0.0 || !self.es.is_finite() {
            return Err(Error::Parameter(format!(
                "es must be a finite non-negative value, got {}",
                self.es
            )));
        }
        if self
            .snr_db
            .iter()
            .chain([&self.sweep_snr_db])
            .any(|s| s.is_nan())
        {
            return Err(Error::Parameter("SNR values must not be NaN".into()));
        }
        if self
            .nu_max_list
            .iter()
            .chain([&self.nu_max_hz])
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::Parameter(
                "Doppler values must be finite and non-negative".into(),
            ));
        }
        self.path_profile()?;
        Ok(())
    }

    /// Copy of this config on another grid size.
    pub fn with_grid(&self, m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            ..self.clone()
        }
    }
}
