//! Centered–shifted variables, Lyapunov functionals, coupling energies, moments and
//! distance estimators.

use serde::{Deserialize, Serialize};

use crate::consensus::weighted_consensus;
use crate::ensemble::ParticleEnsemble;
use crate::error::{KcboError, Result};
use crate::objective::ObjectiveSpec;
use crate::params::KineticParams;
use crate::reduce::{pairwise_mean_by, row_mean};

/// Centered positions `Y = X - m_X` and shifted velocities `Ẑ = (V - m_V) - Y/γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedState {
    pub dim: usize,
    pub y: Vec<f64>,
    pub z_hat: Vec<f64>,
}

impl ShiftedState {
    pub fn count(&self) -> usize {
        self.y.len() / self.dim
    }
}

pub fn centered_shifted(ens: &ParticleEnsemble, gamma: f64) -> ShiftedState {
    let dim = ens.dim();
    let y = centered(ens.positions(), dim);
    let mut z_hat = centered(ens.velocities(), dim);
    for (z, y) in z_hat.iter_mut().zip(&y) {
        *z -= y / gamma;
    }
    ShiftedState { dim, y, z_hat }
}

/// `x^j - mean(x)`, row-major.
pub fn centered(data: &[f64], dim: usize) -> Vec<f64> {
    let mean = row_mean(data, dim);
    let mut out = data.to_vec();
    for row in out.chunks_exact_mut(dim) {
        for (v, m) in row.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    out
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `|x|^p`, with `|x|^2` computed without a square root.
#[inline]
fn norm_pow(x: &[f64], p: f64) -> f64 {
    let sq = dot(x, x);
    if p == 2.0 {
        sq
    } else {
        sq.powf(0.5 * p)
    }
}

fn rows(data: &[f64], dim: usize) -> usize {
    assert!(dim > 0 && data.len() % dim == 0, "bad row-major shape");
    data.len() / dim
}

/// `a₂ = 9/(2m) + 1/γ²`.
pub fn psi2_weight(mass: f64, gamma: f64) -> f64 {
    4.5 / mass + 1.0 / (gamma * gamma)
}

/// `a_p = (1/p)(1 - m(p-2)/γ²)`.
pub fn lp_weight(p: f64, mass: f64, gamma: f64) -> f64 {
    (1.0 - mass * (p - 2.0) / (gamma * gamma)) / p
}

/// ψ₂ coercivity: `γ² > 7m/6`.
pub fn psi2_coercive(mass: f64, gamma: f64) -> bool {
    gamma * gamma > 7.0 * mass / 6.0
}

/// `(1/J) Σ [a₂|Y|² + |Ẑ|² + (5/γ)⟨Y, Ẑ⟩]`.
pub fn psi2_functional(state: &ShiftedState, params: &KineticParams) -> Result<f64> {
    let (m, g) = (params.mass, params.friction);
    if !psi2_coercive(m, g) {
        return Err(KcboError::Admissibility(format!(
            "ψ₂ needs γ² > 7m/6, got γ = {g}, m = {m}"
        )));
    }
    Ok(quadratic_form(&state.y, &state.z_hat, state.dim, psi2_weight(m, g), 5.0 / g))
}

/// `(1/J) Σ [a|x|² + |v|² + b⟨x, v⟩]`.
fn quadratic_form(x: &[f64], v: &[f64], dim: usize, a: f64, b: f64) -> f64 {
    let n = rows(x, dim);
    pairwise_mean_by(n, |j| {
        let (xj, vj) = (&x[j * dim..(j + 1) * dim], &v[j * dim..(j + 1) * dim]);
        a * dot(xj, xj) + dot(vj, vj) + b * dot(xj, vj)
    })
}

/// `φ_{a,p}(x, v) = a|x|^p + |v|^p + (m/γ)|x|^{p-2}⟨x, v⟩`; the last term is 0 at `x = 0`.
pub fn phi(x: &[f64], v: &[f64], a: f64, p: f64, mass: f64, gamma: f64) -> f64 {
    let sq = dot(x, x);
    let cross = if sq == 0.0 {
        0.0
    } else if p == 2.0 {
        dot(x, v)
    } else {
        sq.powf(0.5 * (p - 2.0)) * dot(x, v)
    };
    a * norm_pow(x, p) + norm_pow(v, p) + mass / gamma * cross
}

/// `(1/J) Σ φ_{a,p}(x^j, v^j)`.
pub fn phi_functional(x: &[f64], v: &[f64], dim: usize, a: f64, p: f64, params: &KineticParams) -> f64 {
    assert!(p >= 2.0, "p must be at least 2");
    assert_eq!(x.len(), v.len(), "x and v differ in shape");
    let n = rows(x, dim);
    pairwise_mean_by(n, |j| {
        phi(
            &x[j * dim..(j + 1) * dim],
            &v[j * dim..(j + 1) * dim],
            a,
            p,
            params.mass,
            params.friction,
        )
    })
}

/// `L_p = (1/J) Σ φ_{a_p,p}(Y, Ẑ)` for `p > 2`; ψ₂ for `p = 2`.
pub fn lyapunov_lp(state: &ShiftedState, p: f64, params: &KineticParams) -> Result<f64> {
    if p == 2.0 {
        return psi2_functional(state, params);
    }
    if p < 2.0 {
        return Err(KcboError::InvalidParams(format!("p must be at least 2, got {p}")));
    }
    let a = lp_weight(p, params.mass, params.friction);
    if a <= 0.0 {
        return Err(KcboError::Admissibility(format!(
            "a_p = {a} ≤ 0 for p = {p}: needs γ² > m(p-2)"
        )));
    }
    Ok(phi_functional(&state.y, &state.z_hat, state.dim, a, p, params))
}

/// Coupling-energy weight `a = 1/2 + 1/m`.
pub fn coupling_weight(mass: f64) -> f64 {
    0.5 + 1.0 / mass
}

/// Coupling energy of a difference state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEnergy {
    /// `(1/J) Σ φ_{a,2}(δX, δV) - (1/m)|mean δX|²`.
    pub e: f64,
    /// `(1/J) Σ (|δX|² + |δV|²)`.
    pub e_hat: f64,
}

pub fn coupling_energy(dx: &[f64], dv: &[f64], dim: usize, params: &KineticParams) -> Result<CouplingEnergy> {
    let (m, g) = (params.mass, params.friction);
    if g <= m / std::f64::consts::SQRT_2 {
        return Err(KcboError::Admissibility(format!(
            "coupling energy needs γ > m/√2, got γ = {g}, m = {m}"
        )));
    }
    assert_eq!(dx.len(), dv.len(), "δX and δV differ in shape");
    let mean = row_mean(dx, dim);
    let e = quadratic_form(dx, dv, dim, coupling_weight(m), m / g) - dot(&mean, &mean) / m;
    Ok(CouplingEnergy {
        e,
        e_hat: coupling_error(dx, dv, dim),
    })
}

/// `Ê = (1/J) Σ (|δX|² + |δV|²)`; no preconditions.
pub fn coupling_error(dx: &[f64], dv: &[f64], dim: usize) -> f64 {
    let n = rows(dx, dim);
    pairwise_mean_by(n, |j| {
        let r = j * dim..(j + 1) * dim;
        dot(&dx[r.clone()], &dx[r.clone()]) + dot(&dv[r.clone()], &dv[r])
    })
}

/// The two blocks of the coupling energy: fluctuations and center of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBlocks {
    /// `(1/J) Σ φ_{a,2}(δX - mean δX, δV - mean δV)`.
    pub fluctuation: f64,
    /// `φ_{a - 1/m, 2}(mean δX, mean δV)`.
    pub center_of_mass: f64,
}

pub fn coupling_energy_blocks(dx: &[f64], dv: &[f64], dim: usize, params: &KineticParams) -> EnergyBlocks {
    let (m, g) = (params.mass, params.friction);
    let a = coupling_weight(m);
    let fx = centered(dx, dim);
    let fv = centered(dv, dim);
    let mx = row_mean(dx, dim);
    let mv = row_mean(dv, dim);
    EnergyBlocks {
        fluctuation: quadratic_form(&fx, &fv, dim, a, m / g),
        center_of_mass: phi(&mx, &mv, a - 1.0 / m, 2.0, m, g),
    }
}

/// Coefficients of the unshifted comparison functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LstdCoefficients {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LstdCoefficients {
    /// Ties `a = γc/(pm)`, leaving `b` and `c` free.
    pub fn tied(p: f64, b: f64, c: f64, params: &KineticParams) -> Self {
        Self {
            p,
            a: params.friction * c / (p * params.mass),
            b,
            c,
        }
    }
}

/// `(1/J) Σ (a|X - m_X|^p + b|V|^p + c|X - m_X|^{p-2}⟨X - m_X, V⟩)` with raw velocities.
pub fn lstd_functional(ens: &ParticleEnsemble, k: &LstdCoefficients) -> f64 {
    assert!(k.p >= 2.0, "p must be at least 2");
    let dim = ens.dim();
    let xc = centered(ens.positions(), dim);
    let v = ens.velocities();
    pairwise_mean_by(ens.count(), |j| {
        let r = j * dim..(j + 1) * dim;
        let (x, v) = (&xc[r.clone()], &v[r]);
        let sq = dot(x, x);
        let cross = if sq == 0.0 { 0.0 } else { sq.powf(0.5 * (k.p - 2.0)) * dot(x, v) };
        k.a * norm_pow(x, k.p) + k.b * norm_pow(v, k.p) + k.c * cross
    })
}

/// `𝔐_p = (1/J) Σ |x^j - mean|^p`.
pub fn centered_moment(data: &[f64], dim: usize, p: f64) -> f64 {
    let n = rows(data, dim);
    let mean = row_mean(data, dim);
    pairwise_mean_by(n, |j| {
        let sq: f64 = data[j * dim..(j + 1) * dim]
            .iter()
            .zip(&mean)
            .map(|(x, m)| (x - m) * (x - m))
            .sum();
        if p == 2.0 {
            sq
        } else {
            sq.powf(0.5 * p)
        }
    })
}

/// `(1/J) Σ |x^j|^p`.
pub fn raw_moment(data: &[f64], dim: usize, p: f64) -> f64 {
    let n = rows(data, dim);
    pairwise_mean_by(n, |j| norm_pow(&data[j * dim..(j + 1) * dim], p))
}

/// `(1/J) Σ |δX^j|²`: the squared W₂ cost of the synchronous coupling.
pub fn coupled_w2_bound(dx: &[f64], dim: usize) -> f64 {
    raw_moment(dx, dim, 2.0)
}

/// Exact squared W₂ between two equal-size 1-D empirical measures (sorted matching).
pub fn exact_w2_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(KcboError::ShapeMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(KcboError::EmptyEnsemble);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    Ok(pairwise_mean_by(sa.len(), |j| (sa[j] - sb[j]).powi(2)))
}

/// What goes into a [`LyapunovReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSpec {
    /// Orders for `L_p`, `𝔐_p` and raw position moments (2 is always included).
    pub p_list: Vec<f64>,
    pub lstd: Option<LstdCoefficients>,
}

impl Default for ReportSpec {
    fn default() -> Self {
        Self {
            p_list: vec![2.0, 8.0],
            lstd: None,
        }
    }
}

/// One snapshot of every diagnostic.
///
/// Per-order fields hold `(p, value)` pairs in `ReportSpec::p_list` order. A functional
/// whose coercivity precondition fails is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub t: f64,
    pub l2: Option<f64>,
    pub lp: Vec<(f64, Option<f64>)>,
    pub lstd: Option<f64>,
    pub m2_x: f64,
    pub m2_v: f64,
    pub mp_x: Vec<(f64, f64)>,
    pub mp_v: Vec<(f64, f64)>,
    pub raw_x: Vec<(f64, f64)>,
    pub raw_v2: f64,
    pub delta_alpha_norm: f64,
    pub coupling_e: Option<f64>,
    pub coupling_ehat: Option<f64>,
}

/// Column label for an order: `8` for integers, `2.5` otherwise.
pub fn order_label(p: f64) -> String {
    if p.fract() == 0.0 && p.abs() < 1e15 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

impl LyapunovReport {
    pub fn mp_x(&self, p: f64) -> Option<f64> {
        lookup(&self.mp_x, p)
    }

    pub fn mp_v(&self, p: f64) -> Option<f64> {
        lookup(&self.mp_v, p)
    }

    pub fn raw_x(&self, p: f64) -> Option<f64> {
        lookup(&self.raw_x, p)
    }

    pub fn lp(&self, p: f64) -> Option<f64> {
        self.lp.iter().find(|(q, _)| *q == p).and_then(|(_, v)| *v)
    }

    /// Column names, `t` first. Per-order columns are `Lp_{p}`, `Mp_X_{p}`, `Mp_V_{p}`
    /// and `raw_X_{p}`.
    pub fn column_names(&self) -> Vec<String> {
        self.columns().into_iter().map(|(k, _)| k).collect()
    }

    /// `(name, value)` pairs in CSV order; `None` for undefined entries.
    pub fn columns(&self) -> Vec<(String, Option<f64>)> {
        let mut out = vec![
            ("t".to_string(), Some(self.t)),
            ("L2".to_string(), self.l2),
        ];
        for (p, v) in &self.lp {
            out.push((format!("Lp_{}", order_label(*p)), *v));
        }
        out.push(("Lstd".into(), self.lstd));
        out.push(("M2_X".into(), Some(self.m2_x)));
        out.push(("M2_V".into(), Some(self.m2_v)));
        for (p, v) in &self.mp_x {
            out.push((format!("Mp_X_{}", order_label(*p)), Some(*v)));
        }
        for (p, v) in &self.mp_v {
            out.push((format!("Mp_V_{}", order_label(*p)), Some(*v)));
        }
        for (p, v) in &self.raw_x {
            out.push((format!("raw_X_{}", order_label(*p)), Some(*v)));
        }
        out.push(("raw_V2".into(), Some(self.raw_v2)));
        out.push(("delta_alpha_norm".into(), Some(self.delta_alpha_norm)));
        out.push(("coupling_E".into(), self.coupling_e));
        out.push(("coupling_Ehat".into(), self.coupling_ehat));
        out
    }

    /// Field-wise average of equally shaped reports (pairwise, fixed order).
    ///
    /// An optional field is `Some` only when it is `Some` in every input.
    pub fn mean(reports: &[LyapunovReport]) -> Option<LyapunovReport> {
        let first = reports.first()?;
        let n = reports.len();
        let avg = |f: &dyn Fn(&LyapunovReport) -> f64| pairwise_mean_by(n, |i| f(&reports[i]));
        let avg_opt = |f: &dyn Fn(&LyapunovReport) -> Option<f64>| {
            if reports.iter().all(|r| f(r).is_some()) {
                Some(pairwise_mean_by(n, |i| f(&reports[i]).unwrap_or(0.0)))
            } else {
                None
            }
        };
        let avg_pairs = |f: &dyn Fn(&LyapunovReport) -> &Vec<(f64, f64)>| {
            f(first)
                .iter()
                .enumerate()
                .map(|(k, (p, _))| (*p, pairwise_mean_by(n, |i| f(&reports[i])[k].1)))
                .collect::<Vec<_>>()
        };
        Some(LyapunovReport {
            t: first.t,
            l2: avg_opt(&|r| r.l2),
            lp: first
                .lp
                .iter()
                .enumerate()
                .map(|(k, (p, _))| (*p, avg_opt(&|r| r.lp[k].1)))
                .collect(),
            lstd: avg_opt(&|r| r.lstd),
            m2_x: avg(&|r| r.m2_x),
            m2_v: avg(&|r| r.m2_v),
            mp_x: avg_pairs(&|r| &r.mp_x),
            mp_v: avg_pairs(&|r| &r.mp_v),
            raw_x: avg_pairs(&|r| &r.raw_x),
            raw_v2: avg(&|r| r.raw_v2),
            delta_alpha_norm: avg(&|r| r.delta_alpha_norm),
            coupling_e: avg_opt(&|r| r.coupling_e),
            coupling_ehat: avg_opt(&|r| r.coupling_ehat),
        })
    }
}

fn lookup(pairs: &[(f64, f64)], p: f64) -> Option<f64> {
    pairs.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
}

/// Builds a [`LyapunovReport`] for `ens`; coupling fields are left empty.
pub fn lyapunov_report(
    ens: &ParticleEnsemble,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    spec: &ReportSpec,
) -> Result<LyapunovReport> {
    let dim = ens.dim();
    let state = centered_shifted(ens, params.friction);
    let ok = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(KcboError::Admissibility(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let l2 = ok(psi2_functional(&state, params))?;
    let mut lp = Vec::new();
    let mut mp_x = Vec::new();
    let mut mp_v = Vec::new();
    let mut raw_x = Vec::new();
    for &p in &spec.p_list {
        lp.push((p, ok(lyapunov_lp(&state, p, params))?));
        mp_x.push((p, centered_moment(ens.positions(), dim, p)));
        mp_v.push((p, centered_moment(ens.velocities(), dim, p)));
        raw_x.push((p, raw_moment(ens.positions(), dim, p)));
    }
    let consensus = weighted_consensus(ens.positions(), dim, params.alpha, objective)?;
    let mean = row_mean(ens.positions(), dim);
    let delta: Vec<f64> = mean.iter().zip(&consensus.point).map(|(a, b)| a - b).collect();
    Ok(LyapunovReport {
        t: ens.time(),
        l2,
        lp,
        lstd: spec.lstd.as_ref().map(|k| lstd_functional(ens, k)),
        m2_x: centered_moment(ens.positions(), dim, 2.0),
        m2_v: centered_moment(ens.velocities(), dim, 2.0),
        mp_x,
        mp_v,
        raw_x,
        raw_v2: raw_moment(ens.velocities(), dim, 2.0),
        delta_alpha_norm: norm(&delta),
        coupling_e: None,
        coupling_ehat: None,
    })
}
