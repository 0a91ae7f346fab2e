use serde_json::json;

use crate::admissibility::Profile;
use crate::consensus::weighted_consensus;
use crate::dynamics::{em_step_first_order, em_step_with, steps_for, FirstOrderEnsemble, StepScratch};
use crate::ensemble::ParticleEnsemble;
use crate::error::Result;
use crate::objective::ObjectiveSpec;
use crate::parallel::map_replicas;
use crate::params::KineticParams;
use crate::reduce::pairwise_mean_by;

use super::{
    blowup_guard, collect_replicas, config_json, resolve, stream, ExperimentConfig, ExperimentOutput, Purpose,
    Status, Summary, Table, Verdict,
};

/// Required share of successful replicas.
const SUCCESS_SHARE: f64 = 0.8;

struct Trace {
    times: Vec<f64>,
    values: Vec<f64>,
    final_point: Vec<f64>,
}

fn consensus_value(positions: &[f64], dim: usize, params: &KineticParams, f: &ObjectiveSpec) -> Result<(Vec<f64>, f64)> {
    let m = weighted_consensus(positions, dim, params.alpha, f)?.point;
    let v = f.eval(&m);
    Ok((m, v))
}

fn kinetic_trace(mut ens: ParticleEnsemble, cfg: &ExperimentConfig, params: &KineticParams, f: &ObjectiveSpec, r: usize) -> Result<Trace> {
    let mut noise = stream(cfg.seed, Purpose::Noise, 0, r);
    let n = steps_for(cfg.horizon, params.dt);
    let mut scratch = StepScratch::default();
    let (mut m, v) = consensus_value(ens.positions(), cfg.dim, params, f)?;
    let mut trace = Trace { times: vec![0.0], values: vec![v], final_point: Vec::new() };
    for k in 1..=n {
        em_step_with(&mut ens, params, f, &mut noise, &mut scratch)?;
        if k % cfg.record_stride == 0 || k == n {
            let (mk, vk) = consensus_value(ens.positions(), cfg.dim, params, f)?;
            trace.times.push(ens.time());
            trace.values.push(vk);
            m = mk;
        }
    }
    trace.final_point = m;
    Ok(trace)
}

fn first_order_trace(positions: Vec<f64>, cfg: &ExperimentConfig, params: &KineticParams, f: &ObjectiveSpec, r: usize) -> Result<Trace> {
    let mut ens = FirstOrderEnsemble::new(cfg.dim, positions)?;
    let mut noise = stream(cfg.seed, Purpose::Noise, 1, r);
    let n = steps_for(cfg.horizon, params.dt);
    let mut scratch = StepScratch::default();
    let (mut m, v) = consensus_value(ens.positions(), cfg.dim, params, f)?;
    let mut trace = Trace { times: vec![0.0], values: vec![v], final_point: Vec::new() };
    for k in 1..=n {
        em_step_first_order(&mut ens, params, f, &mut noise, &mut scratch)?;
        if k % cfg.record_stride == 0 || k == n {
            let (mk, vk) = consensus_value(ens.positions(), cfg.dim, params, f)?;
            trace.times.push(k as f64 * params.dt);
            trace.values.push(vk);
            m = mk;
        }
    }
    trace.final_point = m;
    Ok(trace)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Runs the kinetic scheme (and optionally the first-order baseline) on each replica and
/// reports the final consensus point, its objective value and the per-record trace.
pub fn run_optimize(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let setup = resolve(cfg, &[Profile::Admissibility(2.0)])?;
    let (params, f) = (&setup.params, &setup.objective);
    let target = cfg.optimize.target.clone().unwrap_or_else(|| vec![0.0; cfg.dim]);
    let j = cfg.j[0];
    let first_order = cfg.optimize.first_order;

    let results = map_replicas(cfg.replicas, |r| -> Result<(Trace, Option<Trace>)> {
        let mut init = stream(cfg.seed, Purpose::Initial, 0, r);
        let ens = ParticleEnsemble::sample(&cfg.initial, j, cfg.dim, &mut init)?;
        let baseline = if first_order {
            Some(first_order_trace(ens.positions().to_vec(), cfg, params, f, r)?)
        } else {
            None
        };
        Ok((kinetic_trace(ens, cfg, params, f, r)?, baseline))
    });
    let (runs, count) = collect_replicas(results)?;
    blowup_guard(&count)?;

    let n = runs.len();
    let dists: Vec<f64> = runs.iter().map(|(t, _)| distance(&t.final_point, &target)).collect();
    let successes = dists.iter().filter(|d| **d <= cfg.optimize.success_radius).count();
    let share = successes as f64 / n as f64;

    let mut columns = vec!["t".to_string(), "f_consensus".into()];
    if first_order {
        columns.push("f_consensus_first_order".into());
    }
    let mut table = Table::new(columns);
    let len = runs.iter().map(|(t, _)| t.values.len()).min().unwrap_or(0);
    for k in 0..len {
        let mut row = vec![
            Some(runs[0].0.times[k]),
            Some(pairwise_mean_by(n, |i| runs[i].0.values[k])),
        ];
        if first_order {
            row.push(Some(pairwise_mean_by(n, |i| runs[i].1.as_ref().map_or(f64::NAN, |t| t.values[k]))));
        }
        table.push(row);
    }

    let best = runs
        .iter()
        .map(|(t, _)| t)
        .min_by(|a, b| f.eval(&a.final_point).total_cmp(&f.eval(&b.final_point)))
        .expect("at least one replica");
    let finals: Vec<_> = runs
        .iter()
        .map(|(t, b)| {
            json!({
                "consensus": t.final_point,
                "f": f.eval(&t.final_point),
                "first_order_consensus": b.as_ref().map(|b| b.final_point.clone()),
                "first_order_f": b.as_ref().map(|b| f.eval(&b.final_point)),
            })
        })
        .collect();
    Ok(ExperimentOutput {
        summary: Summary {
            experiment: "optimize".into(),
            config: config_json(cfg, params),
            constants: setup.report.constants.clone(),
            fits: Default::default(),
            verdicts: vec![Verdict::new(
                "optimize_success",
                Status::from_bool(share >= SUCCESS_SHARE),
                format!(
                    "{successes}/{n} replicas end within {} of the target (need {:.0}%)",
                    cfg.optimize.success_radius,
                    100.0 * SUCCESS_SHARE
                ),
            )],
            replicas: count,
            results: json!({
                "best_consensus": best.final_point,
                "best_f": f.eval(&best.final_point),
                "target": target,
                "success_share": share,
                "replicas": finals,
            }),
        },
        series: table,
    })
}
