//! TOML experiment configuration.
//!
//! Every key is optional; an empty document gives the reference setup on
//! `[-1,1]^2`. Model parameters are overridden by symbol name:
//!
//! ```toml
//! n = 16
//! dt = 0.2
//! params.D_g = 0.35
//!
//! [sweep]
//! n = [4, 8, 16]
//! dt = [10.0]
//! scalings = [{}, { D_g = 100.0 }]
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{EigenOptions, SolverOptions};
use crate::model::ModelParams;
use crate::nonlocal::NonlocalOptions;
use crate::stepper::{NonlocalMode, SchemeVariant, StepperOptions};
use crate::Rect;

/// Horizon of the reference run.
pub const FULL_HORIZON: f64 = 100.0;
/// Shorter default horizon for the scheme comparison.
pub const SCHEME_DIFF_HORIZON: f64 = 20.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            lower: [-1.0, -1.0],
            upper: [1.0, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenConfig {
    pub tol: f64,
    pub max_krylov: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        let e = EigenOptions::default();
        Self {
            tol: e.tol,
            max_krylov: e.max_krylov,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub dt: Vec<f64>,
    /// Multiplicative factors on named parameters; `{}` is the unscaled set.
    pub scalings: Vec<BTreeMap<String, f64>>,
    /// Time steps analysed per tuple, starting from step 1.
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: vec![4, 8, 16],
            dt: vec![0.2],
            scalings: vec![BTreeMap::new()],
            steps: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub n: Vec<usize>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { n: vec![4, 8, 16] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub dt: f64,
    /// `None` picks the per-command default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub snapshots: Vec<f64>,
    pub variant: SchemeVariant,
    pub nonlocal_mode: NonlocalMode,
    pub parallel: bool,
    pub domain: DomainConfig,
    pub params: BTreeMap<String, f64>,
    pub nonlocal: NonlocalOptions,
    pub solver: SolverConfig,
    pub eigen: EigenConfig,
    pub sweep: SweepConfig,
    pub calibration: CalibrationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 16,
            dt: 0.2,
            t_end: None,
            seed: 0x5eed,
            out: PathBuf::from("out"),
            snapshots: vec![0.0, 3.0, 10.0],
            variant: SchemeVariant::Amended,
            nonlocal_mode: NonlocalMode::Taylor,
            parallel: true,
            domain: DomainConfig::default(),
            params: BTreeMap::new(),
            nonlocal: NonlocalOptions::default(),
            solver: SolverConfig::default(),
            eigen: EigenConfig::default(),
            sweep: SweepConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_config(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 1 {
            return bad("n must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if let Some(t) = self.t_end {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("t_end = {t} must be non-negative"));
            }
        }
        if self.snapshots.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return bad("snapshot times must be non-negative".into());
        }
        if self.domain.upper[0] <= self.domain.lower[0] || self.domain.upper[1] <= self.domain.lower[1] {
            return bad("domain upper corner must exceed lower corner".into());
        }
        for name in self.params.keys() {
            if name == "dt" || name == "t_end" {
                return bad(format!("`params.{name}` is not allowed; set `{name}` at the top level"));
            }
        }
        if !(self.solver.tol > 0.0) || !(self.eigen.tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.nonlocal.quad_n == 0 {
            return bad("nonlocal.quad_n must be positive".into());
        }
        if self.sweep.n.iter().any(|&n| n < 1) || self.sweep.dt.iter().any(|&d| !(d > 0.0)) {
            return bad("sweep entries need n >= 1 and dt > 0".into());
        }
        if self.sweep.steps < 1 {
            return bad("sweep.steps must be at least 1".into());
        }
        for s in &self.sweep.scalings {
            let mut p = ModelParams::default();
            for (k, v) in s {
                let base = p.get(k).map_err(|e| Error::Config(e.to_string()))?;
                p.set(k, base * v).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        self.model_params().map(|_| ())
    }

    /// Defaults with the overrides, `dt` and the resolved horizon applied.
    pub fn model_params(&self) -> Result<ModelParams> {
        let mut p = ModelParams::default();
        for (k, v) in &self.params {
            p.set(k, *v).map_err(|e| Error::Config(e.to_string()))?;
        }
        p.dt = self.dt;
        p.t_end = self.t_end.unwrap_or(FULL_HORIZON);
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }

    pub fn domain_rect(&self) -> Rect {
        Rect::new(self.domain.lower, self.domain.upper)
    }

    pub fn stepper_options(&self) -> StepperOptions {
        StepperOptions {
            variant: self.variant,
            nonlocal_mode: self.nonlocal_mode,
            nonlocal: self.nonlocal,
            solver: SolverOptions {
                tol: self.solver.tol,
                max_iter: self.solver.max_iter,
            },
            parallel: self.parallel,
        }
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.eigen.tol,
            max_krylov: self.eigen.max_krylov,
            seed: self.seed,
        }
    }

    /// Copy with `t_end` fixed, so the echo reproduces the run.
    pub fn resolved(&self, t_end: f64) -> Self {
        Self {
            t_end: Some(t_end),
            ..self.clone()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
