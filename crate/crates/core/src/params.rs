use serde::{Deserialize, Serialize};

use crate::error::{KcboError, Result};

/// Choice of the diffusion operator `S` acting on the displacement from consensus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `S(x) = |x| I_d`.
    Isotropic,
    /// `S(x) = diag(x)`.
    Anisotropic,
}

impl NoiseKind {
    /// Trace factor `τ(S)`: `d` for isotropic noise, `1` for anisotropic noise.
    pub fn tau(self, dim: usize) -> f64 {
        match self {
            NoiseKind::Isotropic => dim as f64,
            NoiseKind::Anisotropic => 1.0,
        }
    }

    /// `χ_S = τ(S) + p - 2`.
    pub fn chi(self, dim: usize, p: f64) -> f64 {
        self.tau(dim) + p - 2.0
    }
}

/// Default integrator step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Full parameterization of the kinetic particle system: mass, friction,
/// noise strength, inverse temperature, noise operator and time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticParams {
    pub mass: f64,
    pub friction: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub noise: NoiseKind,
    pub dt: f64,
}

impl KineticParams {
    pub fn new(
        mass: f64,
        friction: f64,
        sigma: f64,
        alpha: f64,
        noise: NoiseKind,
        dt: f64,
    ) -> Result<Self> {
        let params = Self {
            mass,
            friction,
            sigma,
            alpha,
            noise,
            dt,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks positivity of every field and the explicit-scheme guard `dt ≤ m/(2γ)`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KcboError::InvalidParams(msg));
        let all = [self.mass, self.friction, self.sigma, self.alpha, self.dt];
        if all.iter().any(|v| !v.is_finite()) {
            return bad(format!("non-finite field in {self:?}"));
        }
        if self.mass <= 0.0 {
            return bad(format!("mass must be positive, got {}", self.mass));
        }
        if self.friction <= 0.0 {
            return bad(format!("friction must be positive, got {}", self.friction));
        }
        if self.sigma < 0.0 {
            return bad(format!("sigma must be nonnegative, got {}", self.sigma));
        }
        if self.alpha < 0.0 {
            return bad(format!("alpha must be nonnegative, got {}", self.alpha));
        }
        if self.dt <= 0.0 {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.dt > self.max_stable_dt() {
            return bad(format!(
                "dt = {} exceeds the stability guard m/(2γ) = {}",
                self.dt,
                self.max_stable_dt()
            ));
        }
        Ok(())
    }

    /// Largest step accepted by [`validate`](Self::validate).
    pub fn max_stable_dt(&self) -> f64 {
        self.mass / (2.0 * self.friction)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}
