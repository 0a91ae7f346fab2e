use serde_json::json;

use crate::admissibility::{decay_rate, Profile};
use crate::diagnostics::ReportSpec;
use crate::error::{KcboError, Result};
use crate::reduce::pairwise_mean_by;

use super::fit::wilson_interval;
use super::{
    blowup_guard, config_json, prepare, simulate_replicas, ExperimentConfig, ExperimentOutput, ReplicaCount,
    Status, Summary, Table, Verdict,
};

const WILSON_Z: f64 = 1.96;

/// Tail frequency of `sup_t e^{κt} L₂(t) ≥ ℒ₂(0) + A` over replicas, per ensemble size.
///
/// `ℒ₂(0)` is estimated by the replica mean of `L₂(0)` at each size; the supremum runs
/// over recorded times.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let setup = prepare(cfg, &[Profile::CenteredDecay(2.0)])?;
    let lambda2 = decay_rate(2.0, &setup.params, &setup.objective)?;
    let kappa = cfg.concentration.kappa.unwrap_or(0.5 * lambda2);
    if kappa >= lambda2 {
        return Err(KcboError::Admissibility(format!("κ = {kappa} must be below λ₂ = {lambda2}")));
    }
    let a = cfg.concentration.excursion;
    let spec = ReportSpec {
        p_list: vec![2.0],
        lstd: None,
    };

    let mut table = Table::new(vec![
        "J".into(),
        "frequency".into(),
        "wilson_lo".into(),
        "wilson_hi".into(),
        "mean_L2_0".into(),
    ]);
    let mut count = ReplicaCount::default();
    let mut freqs = Vec::new();
    for (k, &j) in cfg.j.iter().enumerate() {
        let (runs, c) = simulate_replicas(cfg, &setup, j, k, &spec)?;
        blowup_guard(&c)?;
        count.add(c);
        let l2 = |r: &crate::diagnostics::LyapunovReport| r.l2.unwrap_or(f64::NAN);
        let mean0 = pairwise_mean_by(runs.len(), |i| l2(&runs[i][0]));
        let hits = runs
            .iter()
            .filter(|run| {
                let sup = run.iter().map(|r| (kappa * r.t).exp() * l2(r)).fold(f64::NEG_INFINITY, f64::max);
                sup >= mean0 + a
            })
            .count();
        let n = runs.len();
        let (lo, hi) = wilson_interval(hits, n, WILSON_Z);
        let freq = hits as f64 / n as f64;
        table.push(vec![Some(j as f64), Some(freq), Some(lo), Some(hi), Some(mean0)]);
        freqs.push(freq);
    }
    let monotone = freqs.windows(2).all(|w| w[1] <= w[0]);
    Ok(ExperimentOutput {
        summary: Summary {
            experiment: "concentration".into(),
            config: config_json(cfg, &setup.params),
            constants: setup.report.constants.clone(),
            fits: Default::default(),
            verdicts: vec![Verdict::new(
                "frequency_non_increasing",
                Status::Diagnostic,
                format!("frequencies {freqs:?} non-increasing in J: {monotone}"),
            )],
            replicas: count,
            results: json!({ "j": cfg.j, "frequency": freqs, "kappa": kappa, "excursion": a, "non_increasing": monotone }),
        },
        series: table,
    })
}
