use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::admissibility::SearchOptions;
use crate::ensemble::InitialLaw;
use crate::error::{KcboError, Result};
use crate::params::{KineticParams, NoiseKind, DEFAULT_DT};

/// Everything an experiment needs. Read from TOML; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Explicit parameters. When absent they come from the admissibility search.
    pub params: Option<KineticParams>,
    pub search: SearchConfig,
    pub objective: String,
    pub dim: usize,
    /// Ensemble sizes; single-size experiments use the first entry.
    pub j: Vec<usize>,
    pub replicas: usize,
    pub horizon: f64,
    pub record_stride: u64,
    pub seed: u64,
    pub initial: InitialLaw,
    /// Moment orders for the decay diagnostics.
    pub p_list: Vec<f64>,
    /// Start of the fit window as a fraction of the horizon.
    pub t0_fraction: f64,
    pub poc: PocConfig,
    pub stability: StabilityConfig,
    pub wm: WmConfig,
    pub contrast: ContrastConfig,
    pub concentration: ConcentrationConfig,
    pub optimize: OptimizeConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub alpha: f64,
    pub noise: NoiseKind,
    pub dt: f64,
    pub budget: usize,
    /// Require the propagation-of-chaos and stability conditions as well.
    pub coupled: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            noise: NoiseKind::Isotropic,
            dt: DEFAULT_DT,
            budget: 5000,
            coupled: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PocConfig {
    /// Initial moments of order `2r` are assumed.
    pub r: f64,
    /// Reference ensemble size; must be at least `16·max J`.
    pub n_ref: usize,
    /// Also rerun the largest `J` with a doubled reference to gauge proxy bias.
    pub proxy_check: bool,
}

impl Default for PocConfig {
    fn default() -> Self {
        Self {
            r: 4.0,
            n_ref: 8192,
            proxy_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub q: f64,
    /// Two or more perturbation sizes for the extrapolation to zero.
    pub epsilons: Vec<f64>,
    /// Size of the unperturbed twin control run.
    pub control_j: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            epsilons: vec![0.05, 0.1],
            control_j: 128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WmConfig {
    pub proxy_size: usize,
}

impl Default for WmConfig {
    fn default() -> Self {
        Self { proxy_size: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContrastConfig {
    pub p: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for ContrastConfig {
    fn default() -> Self {
        Self { p: 2.0, b: 1.0, c: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationConfig {
    /// Exponential weight; defaults to `λ₂/2`.
    pub kappa: Option<f64>,
    /// Excursion height `A` above the mean initial functional.
    pub excursion: f64,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            kappa: None,
            excursion: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    /// Known minimizer; the origin when absent.
    pub target: Option<Vec<f64>>,
    pub success_radius: f64,
    /// Also run the first-order scheme with the same σ and α.
    pub first_order: bool,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            target: None,
            success_radius: 0.3,
            first_order: false,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: None,
            search: SearchConfig::default(),
            objective: "cosine_well".into(),
            dim: 2,
            j: vec![256],
            replicas: 20,
            horizon: 50.0,
            record_stride: 100,
            seed: 1,
            initial: InitialLaw::default(),
            p_list: vec![2.0, 8.0],
            t0_fraction: 0.1,
            poc: PocConfig::default(),
            stability: StabilityConfig::default(),
            wm: WmConfig::default(),
            contrast: ContrastConfig::default(),
            concentration: ConcentrationConfig::default(),
            optimize: OptimizeConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| KcboError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KcboError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| KcboError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KcboError::Config(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.j.is_empty() || self.j.contains(&0) {
            return bad("j must list positive ensemble sizes".into());
        }
        if self.record_stride == 0 {
            return bad("record_stride must be positive".into());
        }
        if !(0.0..1.0).contains(&self.t0_fraction) {
            return bad(format!("t0_fraction must lie in [0, 1), got {}", self.t0_fraction));
        }
        if self.p_list.iter().any(|&p| !(p >= 2.0 && p.is_finite())) {
            return bad("p_list entries must be at least 2".into());
        }
        if let Some(p) = &self.params {
            p.validate()?;
        }
        Ok(())
    }

    /// `p_list` with 2 first and no duplicates.
    pub fn orders(&self) -> Vec<f64> {
        let mut out = vec![2.0];
        for &p in &self.p_list {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            alpha: self.search.alpha,
            noise: self.search.noise,
            dt: self.search.dt,
            poc_r: self.search.coupled.then_some(self.poc.r),
            stability_q: self.search.coupled.then_some(self.stability.q),
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0_fraction * self.horizon
    }
}
