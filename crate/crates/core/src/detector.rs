//! Name-keyed registry of outlier detectors.
//!
//! The CLI and the benchmark harness never call a fitting routine directly;
//! they look a detector up by name (`rssl-ld`, `rssl-hd`, `mcd`, or anything
//! registered later) and drive it through the [`Detector`] trait.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;
use crate::mcd::{mcd_fit, McdConfig};
use crate::rssl::{self, DetectionResult, RsslConfig};

pub const RSSL_LD: &str = "rssl-ld";
pub const RSSL_HD: &str = "rssl-hd";
pub const MCD: &str = "mcd";

pub trait Detector: Send + Sync {
    fn name(&self) -> &str;

    /// Fit on `data` and label every row. All randomness comes from `seed`.
    fn detect(&self, data: &DataMatrix, seed: u64) -> Result<DetectionResult>;
}

/// Settings shared by every detector a registry can build.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    pub rssl: RsslConfig,
    pub mcd: McdConfig,
    /// Cutoff tail probability; overrides `rssl.alpha`.
    pub alpha: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self { rssl: RsslConfig::default(), mcd: McdConfig::default(), alpha: 0.05 }
    }
}

pub struct RsslLd {
    config: RsslConfig,
}

impl RsslLd {
    pub fn new(config: RsslConfig) -> Self {
        Self { config }
    }
}

impl Detector for RsslLd {
    fn name(&self) -> &str {
        RSSL_LD
    }

    fn detect(&self, data: &DataMatrix, seed: u64) -> Result<DetectionResult> {
        rssl::fit_ld(data, &RsslConfig { seed, ..self.config.clone() })
    }
}

pub struct RsslHd {
    config: RsslConfig,
}

impl RsslHd {
    pub fn new(config: RsslConfig) -> Self {
        Self { config }
    }
}

impl Detector for RsslHd {
    fn name(&self) -> &str {
        RSSL_HD
    }

    fn detect(&self, data: &DataMatrix, seed: u64) -> Result<DetectionResult> {
        rssl::fit_hd(data, &RsslConfig { seed, ..self.config.clone() })
    }
}

/// Raw MCD estimate with a `χ²_p(1-α)` cutoff.
pub struct McdDetector {
    config: McdConfig,
    alpha: f64,
}

impl McdDetector {
    pub fn new(config: McdConfig, alpha: f64) -> Self {
        Self { config, alpha }
    }
}

impl Detector for McdDetector {
    fn name(&self) -> &str {
        MCD
    }

    fn detect(&self, data: &DataMatrix, seed: u64) -> Result<DetectionResult> {
        let fit = mcd_fit(data, &McdConfig { seed, ..self.config.clone() })?;
        let distances = fit.estimate.distances(data)?;
        let cutoff = rssl::cutoff(fit.estimate.df, self.alpha)?;
        let labels = distances.iter().map(|&d| u8::from(d > cutoff)).collect();
        Ok(DetectionResult { estimate: fit.estimate, distances, cutoff, labels })
    }
}

type Factory = Box<dyn Fn(&DetectorParams) -> Box<dyn Detector> + Send + Sync>;

pub struct DetectorRegistry {
    factories: BTreeMap<String, Factory>,
}

impl fmt::Debug for DetectorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DetectorRegistry").field("names", &self.names()).finish()
    }
}

impl Default for DetectorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl DetectorRegistry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry
            .register(RSSL_LD, |p| Box::new(RsslLd::new(RsslConfig { alpha: p.alpha, ..p.rssl.clone() })))
            .and_then(|r| {
                r.register(RSSL_HD, |p| Box::new(RsslHd::new(RsslConfig { alpha: p.alpha, ..p.rssl.clone() })))
            })
            .and_then(|r| r.register(MCD, |p| Box::new(McdDetector::new(p.mcd.clone(), p.alpha))))
            .expect("builtin names are distinct");
        registry
    }

    pub fn register<F>(&mut self, name: &str, factory: F) -> Result<&mut Self>
    where
        F: Fn(&DetectorParams) -> Box<dyn Detector> + Send + Sync + 'static,
    {
        if self.factories.contains_key(name) {
            return Err(Error::Config(format!("detector {name:?} is already registered")));
        }
        self.factories.insert(name.to_string(), Box::new(factory));
        Ok(self)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, name: &str, params: &DetectorParams) -> Result<Box<dyn Detector>> {
        let factory = self.factories.get(name).ok_or_else(|| {
            Error::Config(format!("unknown detector {name:?}; available: {}", self.names().join(", ")))
        })?;
        Ok(factory(params))
    }
}

/// Regime selection as exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ld,
    Hd,
    Mcd,
    /// `hd` when `n < p`, otherwise `ld`.
    Auto,
}

impl Mode {
    pub fn detector_name(self, n: usize, p: usize) -> &'static str {
        match self {
            Mode::Ld => RSSL_LD,
            Mode::Hd => RSSL_HD,
            Mode::Mcd => MCD,
            Mode::Auto if n < p => RSSL_HD,
            Mode::Auto => RSSL_LD,
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ld" => Ok(Mode::Ld),
            "hd" => Ok(Mode::Hd),
            "mcd" => Ok(Mode::Mcd),
            "auto" => Ok(Mode::Auto),
            other => Err(Error::Config(format!("unknown mode {other:?}; expected ld, hd, mcd or auto"))),
        }
    }
}
