//! Pairwise (tree) summation.
//!
//! Every ensemble-level sum in the crate goes through these helpers, so the
//! accumulation order is a fixed function of the input length. Rounding error
//! grows like `O(log n)` instead of `O(n)`, which matters for moment sums at
//! `J ~ 1e5`.

const LEAF: usize = 16;

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i in range`.
pub fn pairwise_sum_by<F>(start: usize, end: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64,
{
    let n = end - start;
    if n <= LEAF {
        return (start..end).map(f).sum();
    }
    let mid = start + n / 2;
    pairwise_sum_by(start, mid, f) + pairwise_sum_by(mid, end, f)
}

/// Mean of `f(i)` over `0..n` with pairwise accumulation. Returns 0 for `n == 0`.
pub fn pairwise_mean_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    if n == 0 {
        return 0.0;
    }
    pairwise_sum_by(0, n, &f) / n as f64
}

/// Weighted row sum `Σ_j w_j · row_j` of a row-major `n × dim` array, written into `out`.
///
/// With `weights = None` every row has weight one.
pub fn pairwise_row_sum(data: &[f64], dim: usize, weights: Option<&[f64]>, out: &mut [f64]) {
    debug_assert_eq!(out.len(), dim);
    let n = data.len() / dim;
    out.iter_mut().for_each(|o| *o = 0.0);
    let depth = (usize::BITS - n.leading_zeros()) as usize + 1;
    let mut scratch = vec![0.0; dim * depth];
    row_sum_rec(data, dim, weights, 0, n, out, &mut scratch);
}

fn row_sum_rec(
    data: &[f64],
    dim: usize,
    weights: Option<&[f64]>,
    start: usize,
    end: usize,
    out: &mut [f64],
    scratch: &mut [f64],
) {
    let n = end - start;
    if n <= LEAF {
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in start..end {
            let w = weights.map_or(1.0, |w| w[j]);
            let row = &data[j * dim..(j + 1) * dim];
            for (o, x) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
        return;
    }
    let mid = start + n / 2;
    row_sum_rec(data, dim, weights, start, mid, out, scratch);
    let (right, rest) = scratch.split_at_mut(dim);
    row_sum_rec(data, dim, weights, mid, end, right, rest);
    for (o, r) in out.iter_mut().zip(right.iter()) {
        *o += r;
    }
}

/// Row mean of a row-major `n × dim` array.
pub fn row_mean(data: &[f64], dim: usize) -> Vec<f64> {
    let n = data.len() / dim;
    let mut out = vec![0.0; dim];
    if n == 0 {
        return out;
    }
    pairwise_row_sum(data, dim, None, &mut out);
    out.iter_mut().for_each(|o| *o /= n as f64);
    out
}
