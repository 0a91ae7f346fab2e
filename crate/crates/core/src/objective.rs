//! Test objectives with certified bounds `f_lower ≤ f ≤ f_upper` and a global
//! Lipschitz constant.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{KcboError, Result};

pub type ObjectiveFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Ackley,
    TanhRastrigin,
    TanhQuadratic,
    CosineWell,
    Custom(ObjectiveFn),
}

/// A bounded, globally Lipschitz objective `f: R^d → R`.
#[derive(Clone)]
pub struct ObjectiveSpec {
    name: String,
    dim: usize,
    f_lower: f64,
    f_upper: f64,
    lipschitz: f64,
    kind: Kind,
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("f_lower", &self.f_lower)
            .field("f_upper", &self.f_upper)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

pub const OBJECTIVE_NAMES: [&str; 4] = ["ackley", "tanh_rastrigin", "tanh_quadratic", "cosine_well"];

/// Builds one of the shipped objectives in dimension `dim`.
///
/// * `ackley`: standard Ackley, range `[0, 20 + e)`, `L_f = (4 + 2πe)/√d`.
/// * `tanh_rastrigin`: `tanh(R(x)/(10d))` with `R` the Rastrigin function, range `[0, 1)`;
///   `L_f` is a radial upper bound on the gradient norm.
/// * `tanh_quadratic`: `tanh(|x|²)`, range `[0, 1)`, `L_f = max_r 2r sech²(r²)`.
/// * `cosine_well`: `1 - (1/d) Σ cos(x_i)`, range `[0, 2]`, `L_f = 1/√d`.
pub fn make_objective(name: &str, dim: usize) -> Result<ObjectiveSpec> {
    if !OBJECTIVE_NAMES.contains(&name) {
        return Err(KcboError::UnknownObjective(name.to_string()));
    }
    if dim == 0 {
        return Err(KcboError::ZeroDimension);
    }
    let d = dim as f64;
    let spec = match name {
        "ackley" => ObjectiveSpec {
            name: name.into(),
            dim,
            f_lower: 0.0,
            f_upper: 20.0 + E,
            lipschitz: (4.0 + 2.0 * PI * E) / d.sqrt(),
            kind: Kind::Ackley,
        },
        "tanh_quadratic" => ObjectiveSpec {
            name: name.into(),
            dim,
            f_lower: 0.0,
            f_upper: 1.0,
            lipschitz: tanh_quadratic_lipschitz(),
            kind: Kind::TanhQuadratic,
        },
        "cosine_well" => ObjectiveSpec {
            name: name.into(),
            dim,
            f_lower: 0.0,
            f_upper: 2.0,
            lipschitz: 1.0 / d.sqrt(),
            kind: Kind::CosineWell,
        },
        "tanh_rastrigin" => {
            ObjectiveSpec {
                name: name.into(),
                dim,
                f_lower: 0.0,
                f_upper: 1.0,
                lipschitz: tanh_rastrigin_lipschitz(d),
                kind: Kind::TanhRastrigin,
            }
        }
        _ => unreachable!(),
    };
    Ok(spec)
}

impl ObjectiveSpec {
    /// Wraps an arbitrary function with caller-declared bounds.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        f_lower: f64,
        f_upper: f64,
        lipschitz: f64,
        f: ObjectiveFn,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(KcboError::ZeroDimension);
        }
        if !(f_lower.is_finite() && f_upper.is_finite() && f_lower <= f_upper) {
            return Err(KcboError::InvalidParams(format!(
                "objective bounds must be finite with f_lower ≤ f_upper, got [{f_lower}, {f_upper}]"
            )));
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(KcboError::InvalidParams(format!(
                "Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        Ok(Self {
            name: name.into(),
            dim,
            f_lower,
            f_upper,
            lipschitz,
            kind: Kind::Custom(f),
        })
    }

    /// `x ↦ f(x - shift)`, with the same bounds and Lipschitz constant.
    pub fn shifted(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim, "shift has wrong dimension");
        let inner = self.clone();
        let shift = shift.to_vec();
        let f: ObjectiveFn = Arc::new(move |x: &[f64]| {
            let y: Vec<f64> = x.iter().zip(&shift).map(|(a, c)| a - c).collect();
            inner.eval(&y)
        });
        Self {
            name: format!("{}_shifted", self.name),
            dim: self.dim,
            f_lower: self.f_lower,
            f_upper: self.f_upper,
            lipschitz: self.lipschitz,
            kind: Kind::Custom(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn f_lower(&self) -> f64 {
        self.f_lower
    }

    pub fn f_upper(&self) -> f64 {
        self.f_upper
    }

    /// `f̄ - f̲`.
    pub fn range(&self) -> f64 {
        self.f_upper - self.f_lower
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Ackley => ackley(x),
            Kind::TanhRastrigin => {
                let d = x.len() as f64;
                let r: f64 = x
                    .iter()
                    .map(|&xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
                    .sum::<f64>()
                    + 10.0 * d;
                (r / (10.0 * d)).tanh()
            }
            Kind::TanhQuadratic => x.iter().map(|xi| xi * xi).sum::<f64>().tanh(),
            Kind::CosineWell => {
                let d = x.len() as f64;
                1.0 - x.iter().map(|xi| xi.cos()).sum::<f64>() / d
            }
            Kind::Custom(f) => f(x),
        }
    }
}

fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|xi| xi * xi).sum::<f64>() / d;
    let cs = x.iter().map(|xi| (2.0 * PI * xi).cos()).sum::<f64>() / d;
    let v = -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E;
    // The exact minimum is 0; rounding can leave a tiny negative residue at the origin.
    v.max(0.0)
}

/// `max_{r ≥ 0} 2r·sech²(r²)`. With `u = r²` the maximizer solves `4u·tanh(u) = 1`.
fn tanh_quadratic_lipschitz() -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 4.0 * mid * mid.tanh() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let sech = 1.0 / u.cosh();
    2.0 * u.sqrt() * sech * sech
}

/// Radial upper bound on `|∇ tanh(R/(10d))|`.
///
/// `R(x) ≥ |x|²` and `|∇R(x)| ≤ 2|x| + 20π√d`, so the gradient norm is at most
/// `g(r) = sech²(r²/(10d))(2r + 20π√d)/(10d)` with `r = |x|`. `g` is maximized on a
/// fine grid and padded by the grid's worst-case slope error.
fn tanh_rastrigin_lipschitz(d: f64) -> f64 {
    let scale = 10.0 * d;
    let g = |r: f64| {
        let s = 1.0 / (r * r / scale).cosh();
        s * s * (2.0 * r + 20.0 * PI * d.sqrt()) / scale
    };
    let r_max = 10.0 * scale.sqrt();
    let n = 200_000;
    let h = r_max / n as f64;
    let best = (0..=n).map(|i| g(i as f64 * h)).fold(0.0, f64::max);
    // |g'| ≤ (2 + 2·(2r/scale)·(2r + 20π√d))/scale on the grid range
    let slope = (2.0 + 4.0 * r_max / scale * (2.0 * r_max + 20.0 * PI * d.sqrt())) / scale;
    best + slope * h
}
