//! The Gibbs-weighted consensus point `M_α`, the displacement `Δ_α`, and the
//! matrix-free noise operator `S`.

use crate::error::{KcboError, Result};
use crate::objective::ObjectiveSpec;
use crate::params::NoiseKind;
use crate::reduce::{pairwise_row_sum, pairwise_sum, row_mean};

/// Weighted mean of an empirical measure with weights `∝ exp(-α f(x_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusPoint {
    pub point: Vec<f64>,
    /// `log((1/J) Σ_j exp(-α f(x_j)))`.
    pub log_partition: f64,
}

/// Reusable buffers for repeated consensus evaluations on ensembles of a fixed size.
#[derive(Debug, Default, Clone)]
pub struct ConsensusScratch {
    weights: Vec<f64>,
    offsets: Vec<f64>,
}

impl ConsensusScratch {
    /// Normalized weights from the last evaluation.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `M_α(μ)` for the empirical measure of the `J × dim` row-major `positions`.
///
/// Weights are computed with the max-shift (log-sum-exp) so that `α(f̄ - f̲)` in the
/// hundreds neither underflows nor overflows. An ensemble whose objective values all
/// coincide gets uniform weights.
pub fn weighted_consensus(
    positions: &[f64],
    dim: usize,
    alpha: f64,
    objective: &ObjectiveSpec,
) -> Result<ConsensusPoint> {
    let mut scratch = ConsensusScratch::default();
    let mut point = vec![0.0; dim];
    let log_partition = consensus_into(positions, dim, alpha, objective, &mut scratch, &mut point)?;
    Ok(ConsensusPoint {
        point,
        log_partition,
    })
}

/// Allocation-free core of [`weighted_consensus`]: writes `M_α` into `out` and returns
/// the log partition.
pub fn consensus_into(
    positions: &[f64],
    dim: usize,
    alpha: f64,
    objective: &ObjectiveSpec,
    scratch: &mut ConsensusScratch,
    out: &mut [f64],
) -> Result<f64> {
    if dim == 0 || positions.len() % dim != 0 || out.len() != dim {
        return Err(KcboError::ShapeMismatch(format!(
            "positions of length {} with dim {dim}",
            positions.len()
        )));
    }
    let count = positions.len() / dim;
    if count == 0 {
        return Err(KcboError::EmptyEnsemble);
    }
    let weights = &mut scratch.weights;
    weights.clear();
    weights.extend(positions.chunks_exact(dim).map(|x| -alpha * objective.eval(x)));
    let shift = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(KcboError::Numerical(format!("non-finite log-weight maximum {shift}")));
    }
    for w in weights.iter_mut() {
        *w = (*w - shift).exp();
    }
    let total = pairwise_sum(weights);
    if !(total.is_finite() && total >= 1.0) {
        return Err(KcboError::Numerical(format!("weight normalizer {total}")));
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    // Sum offsets from the heaviest particle: exact when all particles coincide, and
    // less cancellation when the cloud sits far from the origin.
    let anchor = weights
        .iter()
        .enumerate()
        .fold(0, |best, (j, w)| if *w > weights[best] { j } else { best });
    let base = &positions[anchor * dim..(anchor + 1) * dim];
    let offsets = &mut scratch.offsets;
    offsets.clear();
    for row in positions.chunks_exact(dim) {
        offsets.extend(row.iter().zip(base).map(|(x, b)| x - b));
    }
    pairwise_row_sum(offsets, dim, Some(weights), out);
    for (o, b) in out.iter_mut().zip(base) {
        *o += b;
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(KcboError::Numerical("non-finite consensus point".into()));
    }
    Ok(shift + total.ln() - (count as f64).ln())
}

/// `Δ_α(μ) = m_X(μ) - M_α(μ)`.
pub fn delta_alpha(
    positions: &[f64],
    dim: usize,
    alpha: f64,
    objective: &ObjectiveSpec,
) -> Result<Vec<f64>> {
    let consensus = weighted_consensus(positions, dim, alpha, objective)?;
    let mean = row_mean(positions, dim);
    Ok(mean.iter().zip(&consensus.point).map(|(m, c)| m - c).collect())
}

/// `S(x) dW` written into `out`: `|x| dW` (isotropic) or `x ⊙ dW` (anisotropic).
#[inline]
pub fn apply_noise(x: &[f64], kind: NoiseKind, dw: &[f64], out: &mut [f64]) {
    match kind {
        NoiseKind::Isotropic => {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (o, w) in out.iter_mut().zip(dw) {
                *o = norm * w;
            }
        }
        NoiseKind::Anisotropic => {
            for ((o, xi), w) in out.iter_mut().zip(x).zip(dw) {
                *o = xi * w;
            }
        }
    }
}

/// Allocating form of [`apply_noise`].
pub fn noise_matrix_apply(x: &[f64], kind: NoiseKind, dw: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    apply_noise(x, kind, dw, &mut out);
    out
}

/// `τ(S)`.
pub fn tau(kind: NoiseKind, dim: usize) -> f64 {
    kind.tau(dim)
}
