use serde::{Deserialize, Serialize};

use crate::error::{KcboError, Result};
use crate::rng::RngStream;

/// Positions and velocities of `J` particles in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    dim: usize,
    pub(crate) positions: Vec<f64>,
    pub(crate) velocities: Vec<f64>,
    pub(crate) time: f64,
    pub(crate) steps: u64,
}

impl ParticleEnsemble {
    pub fn new(dim: usize, positions: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(KcboError::ZeroDimension);
        }
        if positions.is_empty() {
            return Err(KcboError::EmptyEnsemble);
        }
        if positions.len() % dim != 0 || positions.len() != velocities.len() {
            return Err(KcboError::ShapeMismatch(format!(
                "positions ({}) and velocities ({}) must both be J×{dim}",
                positions.len(),
                velocities.len()
            )));
        }
        if positions.iter().chain(&velocities).any(|v| !v.is_finite()) {
            return Err(KcboError::Numerical("non-finite initial state".into()));
        }
        Ok(Self {
            dim,
            positions,
            velocities,
            time: 0.0,
            steps: 0,
        })
    }

    /// `J` particles at rest at `point`.
    pub fn at_rest(point: &[f64], count: usize) -> Result<Self> {
        let dim = point.len();
        let positions = point.repeat(count);
        Self::new(dim, positions, vec![0.0; count * dim])
    }

    /// Draws `count` i.i.d. particles from `law`.
    pub fn sample(law: &InitialLaw, count: usize, dim: usize, stream: &mut RngStream) -> Result<Self> {
        let mut positions = vec![0.0; count * dim];
        let mut velocities = vec![0.0; count * dim];
        for j in 0..count {
            for k in 0..dim {
                positions[j * dim + k] = law.position.draw(stream);
            }
            for k in 0..dim {
                velocities[j * dim + k] = law.velocity.draw(stream);
            }
        }
        Self::new(dim, positions, velocities)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Number of integrator steps taken.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn position(&self, j: usize) -> &[f64] {
        &self.positions[j * self.dim..(j + 1) * self.dim]
    }

    pub fn velocity(&self, j: usize) -> &[f64] {
        &self.velocities[j * self.dim..(j + 1) * self.dim]
    }

    /// Adds `shift` to every position.
    pub fn translate(&mut self, shift: &[f64]) {
        assert_eq!(shift.len(), self.dim);
        for row in self.positions.chunks_exact_mut(self.dim) {
            for (x, c) in row.iter_mut().zip(shift) {
                *x += c;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().chain(&self.velocities).all(|v| v.is_finite())
    }

    pub(crate) fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.positions.len() == other.positions.len()
    }
}

/// One-dimensional marginal used coordinatewise for initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Gaussian { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
    Point { value: f64 },
}

impl Marginal {
    pub fn draw(&self, stream: &mut RngStream) -> f64 {
        match *self {
            Marginal::Gaussian { mean, std } => mean + std * stream.normal(),
            Marginal::Uniform { lo, hi } => stream.uniform(lo, hi),
            Marginal::Point { value } => value,
        }
    }
}

/// Product law for `(X_0, V_0)`; each coordinate is drawn independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialLaw {
    pub position: Marginal,
    pub velocity: Marginal,
}

impl Default for InitialLaw {
    /// Standard Gaussian in both position and velocity.
    fn default() -> Self {
        Self {
            position: Marginal::Gaussian { mean: 0.0, std: 1.0 },
            velocity: Marginal::Gaussian { mean: 0.0, std: 1.0 },
        }
    }
}
