use serde_json::json;

use crate::admissibility::Profile;
use crate::dynamics::{ConsensusSource, CoupledPair};
use crate::ensemble::ParticleEnsemble;
use crate::error::{KcboError, Result};
use crate::parallel::map_replicas;

use super::fit::fit_power_law;
use super::poc::{mean_records, run_coupled, sup_error};
use super::{
    blowup_guard, collect_replicas, config_json, fits_map, prepare, stream, ExperimentConfig, ExperimentOutput,
    Purpose, ReplicaCount, Status, Summary, Table, Verdict,
};

/// Least-squares intercept and slope of `y` on `x` (two or more points).
fn line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Stability of two particle systems on the same Brownian motions.
///
/// The second system starts from the first one's samples translated by `ε·(1,…,1)/√d`,
/// so the initial coupling error is exactly `ε²`. For each `J` the time-sup of the mean
/// coupling error is regressed on the initial error across the configured `ε` values
/// (same seeds for every `ε`), and the intercept at zero initial error is taken as the
/// `J`-dependent remainder.
pub fn run_stability_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let q = cfg.stability.q;
    let eps = &cfg.stability.epsilons;
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(KcboError::Config("stability.epsilons needs two or more positive values".into()));
    }
    let setup = prepare(cfg, &[Profile::Stability(q)])?;
    let (params, objective) = (&setup.params, &setup.objective);
    let dim = cfg.dim;
    let unit = vec![1.0 / (dim as f64).sqrt(); dim];

    // control: no perturbation, the two systems must coincide bitwise
    let jc = cfg.stability.control_j;
    let mut init = stream(cfg.seed, Purpose::Initial, usize::MAX >> 40, 0);
    let a = ParticleEnsemble::sample(&cfg.initial, jc, dim, &mut init)?;
    let mut twin = CoupledPair::new(a.clone(), a, ConsensusSource::Empirical)?;
    let mut noise = stream(cfg.seed, Purpose::Noise, usize::MAX >> 40, 0);
    let control = run_coupled(&mut twin, params, objective, cfg.horizon, cfg.record_stride, &mut noise)?;
    let bitwise = control.iter().all(|r| r.2 == 0.0)
        && twin.position_gap().iter().chain(twin.velocity_gap().iter()).all(|d| *d == 0.0);
    let mut verdicts = vec![Verdict::new(
        "twin_control",
        if bitwise { Status::PassTrivial } else { Status::Fail },
        format!("ε = 0 at J = {jc}: sup Ê = {:e} over {} records", sup_error(&control), control.len()),
    )];

    let mut table = Table::new(vec![
        "t".into(),
        "J".into(),
        "epsilon".into(),
        "coupling_E".into(),
        "coupling_Ehat".into(),
    ]);
    let mut count = ReplicaCount::default();
    let mut remainders = Vec::new();
    let mut per_j = Vec::new();
    for (k, &j) in cfg.j.iter().enumerate() {
        let mut initial_errors = Vec::new();
        let mut sups = Vec::new();
        for &e in eps {
            let shift: Vec<f64> = unit.iter().map(|u| e * u).collect();
            let results = map_replicas(cfg.replicas, |r| {
                let mut init = stream(cfg.seed, Purpose::Initial, k, r);
                let a = ParticleEnsemble::sample(&cfg.initial, j, dim, &mut init)?;
                let mut b = a.clone();
                b.translate(&shift);
                let mut pair = CoupledPair::new(a, b, ConsensusSource::Empirical)?;
                let mut noise = stream(cfg.seed, Purpose::Noise, k, r);
                run_coupled(&mut pair, params, objective, cfg.horizon, cfg.record_stride, &mut noise)
            });
            let (runs, c) = collect_replicas(results)?;
            blowup_guard(&c)?;
            count.add(c);
            let records = mean_records(&runs);
            for (t, en, eh) in &records {
                table.push(vec![Some(*t), Some(j as f64), Some(e), *en, Some(*eh)]);
            }
            initial_errors.push(records[0].2);
            sups.push(sup_error(&records));
        }
        let (intercept, slope) = line(&initial_errors, &sups);
        remainders.push(intercept);
        per_j.push(json!({
            "j": j,
            "epsilons": eps,
            "initial_error": initial_errors,
            "sup_error": sups,
            "amplification": slope,
            "remainder": intercept,
        }));
    }

    let js: Vec<f64> = cfg.j.iter().map(|&j| j as f64).collect();
    let decreasing = remainders.windows(2).all(|w| w[1] < w[0]);
    let fit = fit_power_law(&js, &remainders);
    let limit = -0.6 * q;
    let detail_rem = remainders.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", ");
    match &fit {
        Ok(f) => verdicts.push(Verdict::new(
            "stability_remainder",
            Status::from_bool(decreasing && f.dropped == 0 && f.slope <= limit),
            format!(
                "remainders [{detail_rem}]; strictly decreasing: {decreasing}; slope {:.4} (limit {limit}), r² {:.4}",
                f.slope, f.r_squared
            ),
        )),
        Err(e) => verdicts.push(Verdict::new(
            "stability_remainder",
            Status::Fail,
            format!("remainders [{detail_rem}]; strictly decreasing: {decreasing}; fit failed: {e}"),
        )),
    }

    Ok(ExperimentOutput {
        summary: Summary {
            experiment: "stability".into(),
            config: config_json(cfg, params),
            constants: setup.report.constants.clone(),
            fits: fits_map(vec![("remainder_vs_j".into(), fit.ok())]),
            verdicts,
            replicas: count,
            results: json!({ "per_j": per_j, "remainder": remainders, "q": q }),
        },
        series: table,
    })
}
