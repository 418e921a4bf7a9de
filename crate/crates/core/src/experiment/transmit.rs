use num_complex::Complex64;

use crate::baselines::{mu_compand, mu_expand, DftSpreader, Icf};
use crate::error::Result;
use crate::frame::{InfoVector, TimeDomainFrame};
use crate::modem::Modem;
use crate::precoder::{GreedyConfig, GreedyPrecoder};

use super::config::{ExperimentConfig, Method};

/// Output of one transmit chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmitted {
    pub samples: TimeDomainFrame,
    /// Companding peak reference, shared with the receiver.
    pub peak_ref: f64,
    /// Committed greedy flips; zero for other methods.
    pub flips: usize,
}

/// Transmit chain and matching receiver-side inverse of one method.
#[derive(Clone)]
pub struct Transmitter {
    method: Method,
    modem: Modem,
    precoder: Option<(GreedyPrecoder, GreedyConfig)>,
    icf: Option<Icf>,
    spreader: Option<DftSpreader>,
    cfg: ExperimentConfig,
}

impl Transmitter {
    pub fn new(method: Method, cfg: &ExperimentConfig) -> Result<Self> {
        let params = cfg.params()?;
        Ok(Self {
            method,
            modem: Modem::new(params),
            precoder: (method == Method::Proposed)
                .then(|| (GreedyPrecoder::new(params), cfg.greedy())),
            icf: if method == Method::Icf {
                Some(Icf::new(cfg.icf(), &params)?)
            } else {
                None
            },
            spreader: if method == Method::Dft {
                Some(DftSpreader::new(cfg.dft(), &params)?)
            } else {
                None
            },
            cfg: cfg.clone(),
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn transmit(&self, u: &InfoVector) -> Result<Transmitted> {
        let mut peak_ref = 0.0;
        let mut flips = 0;
        let samples = match self.method {
            Method::None => self.modem.modulate(u)?,
            Method::Proposed => {
                let (precoder, greedy) = self
                    .precoder
                    .as_ref()
                    .expect("precoder built for this method");
                let res = precoder.precode(u, greedy)?;
                flips = res.flips.len();
                self.modem.modulate(&res.x_star)?
            }
            Method::Companding => {
                let s = self.modem.modulate(u)?;
                peak_ref = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
                mu_compand(&s, &self.cfg.companding(), peak_ref)?
            }
            Method::Icf => {
                let s = self.modem.modulate(u)?;
                self.icf
                    .as_ref()
                    .expect("ICF built for this method")
                    .apply(&s)?
            }
            Method::Dft => {
                let spread = self
                    .spreader
                    .as_ref()
                    .expect("spreader built for this method")
                    .spread(u)?;
                self.modem.modulate(&spread)?
            }
        };
        Ok(Transmitted {
            samples,
            peak_ref,
            flips,
        })
    }

    /// Maps an equalized time-domain estimate back to delay-Doppler symbol
    /// estimates ready for phase detection.
    pub fn recover(&self, z: &[Complex64], tx: &Transmitted) -> Result<Vec<Complex64>> {
        match self.method {
            Method::None | Method::Proposed | Method::Icf => self.modem.demodulate(z),
            Method::Companding => {
                let expanded = mu_expand(z, &self.cfg.companding(), tx.peak_ref)?;
                self.modem.demodulate(&expanded.frame)
            }
            Method::Dft => {
                let y = self.modem.demodulate(z)?;
                self.spreader
                    .as_ref()
                    .expect("spreader built for this method")
                    .despread(&y)
            }
        }
    }
}
