use std::sync::Arc;

use serde_json::json;

use crate::admissibility::Profile;
use crate::diagnostics::{coupling_energy, coupling_error};
use crate::dynamics::{coupled_step, steps_for, ConsensusPath, ConsensusSource, CoupledPair};
use crate::ensemble::ParticleEnsemble;
use crate::error::{KcboError, Result};
use crate::parallel::map_replicas;
use crate::params::KineticParams;
use crate::objective::ObjectiveSpec;
use crate::rng::RngStream;

use super::fit::fit_power_law;
use super::{
    blowup_guard, collect_replicas, config_json, fits_map, prepare, stream, ExperimentConfig, ExperimentOutput,
    Purpose, ReplicaCount, Status, Summary, Table, Verdict,
};

pub(crate) const SLOPE_WINDOW: (f64, f64) = (-1.35, -0.65);
pub(crate) const MIN_R2: f64 = 0.9;
const PROXY_TOLERANCE: f64 = 0.1;

/// One coupled-error record: `(t, E or None, Ê)`.
pub(crate) type CouplingRecord = (f64, Option<f64>, f64);

/// Steps a pair to the horizon, recording the coupling energy at step 0, every
/// `stride` steps and at the end.
pub(crate) fn run_coupled(
    pair: &mut CoupledPair,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    horizon: f64,
    stride: u64,
    noise: &mut RngStream,
) -> Result<Vec<CouplingRecord>> {
    let n = steps_for(horizon, params.dt);
    let stride = stride.max(1);
    let dim = pair.system_a.dim();
    let record = |pair: &CoupledPair| -> CouplingRecord {
        let (dx, dv) = (pair.position_gap(), pair.velocity_gap());
        let e = coupling_energy(&dx, &dv, dim, params).ok().map(|c| c.e);
        (pair.system_a.time(), e, coupling_error(&dx, &dv, dim))
    };
    let mut out = vec![record(pair)];
    for k in 1..=n {
        coupled_step(pair, params, objective, noise)?;
        if k % stride == 0 || k == n {
            out.push(record(pair));
        }
    }
    Ok(out)
}

/// Record-wise replica mean of coupling records.
pub(crate) fn mean_records(runs: &[Vec<CouplingRecord>]) -> Vec<CouplingRecord> {
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    let n = runs.len();
    (0..len)
        .map(|k| {
            let t = runs[0][k].0;
            let e = if runs.iter().all(|r| r[k].1.is_some()) {
                Some(crate::reduce::pairwise_mean_by(n, |i| runs[i][k].1.unwrap_or(0.0)))
            } else {
                None
            };
            (t, e, crate::reduce::pairwise_mean_by(n, |i| runs[i][k].2))
        })
        .collect()
}

/// Largest recorded `Ê`.
pub(crate) fn sup_error(records: &[CouplingRecord]) -> f64 {
    records.iter().map(|r| r.2).fold(0.0, f64::max)
}

fn sweep_one(
    cfg: &ExperimentConfig,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    j: usize,
    group: usize,
    path: &Arc<ConsensusPath>,
) -> Result<(Vec<CouplingRecord>, ReplicaCount)> {
    let results = map_replicas(cfg.replicas, |r| {
        let mut init = stream(cfg.seed, Purpose::Initial, group, r);
        let a = ParticleEnsemble::sample(&cfg.initial, j, cfg.dim, &mut init)?;
        let mut pair = CoupledPair::new(a.clone(), a, ConsensusSource::Path(path.clone()))?;
        let mut noise = stream(cfg.seed, Purpose::Noise, group, r);
        run_coupled(&mut pair, params, objective, cfg.horizon, cfg.record_stride, &mut noise)
    });
    let (runs, count) = collect_replicas(results)?;
    blowup_guard(&count)?;
    Ok((mean_records(&runs), count))
}

fn reference_path(
    cfg: &ExperimentConfig,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    n_ref: usize,
    group: usize,
) -> Result<Arc<ConsensusPath>> {
    let mut init = stream(cfg.seed, Purpose::Reference, group, 0);
    let reference = ParticleEnsemble::sample(&cfg.initial, n_ref, cfg.dim, &mut init)?;
    let mut noise = stream(cfg.seed, Purpose::ReferenceNoise, group, 0);
    let path = ConsensusPath::record(reference, params, objective, &mut noise, steps_for(cfg.horizon, params.dt))?;
    Ok(Arc::new(path))
}

/// Propagation of chaos: particles driven by their own consensus against particles
/// driven by a large reference ensemble's consensus, same initial data and noise.
/// Fits `log sup_t E[Ê_t]` against `log J`.
///
/// The reference consensus path is computed once and shared by every pair: the
/// mean-field consensus is a deterministic function of time, so one reference run
/// stands in for it across replicas and sizes.
pub fn run_poc_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let setup = prepare(cfg, &[Profile::PoC(cfg.poc.r)])?;
    let (params, objective) = (&setup.params, &setup.objective);
    let max_j = *cfg.j.iter().max().expect("validated non-empty");
    let n_ref = cfg.poc.n_ref;
    if n_ref < 16 * max_j {
        return Err(KcboError::Config(format!(
            "poc.n_ref = {n_ref} must be at least 16·max J = {}",
            16 * max_j
        )));
    }
    let path = reference_path(cfg, params, objective, n_ref, 0)?;

    let mut table = Table::new(vec!["t".into(), "J".into(), "coupling_E".into(), "coupling_Ehat".into()]);
    let mut count = ReplicaCount::default();
    let mut sups = Vec::new();
    for (k, &j) in cfg.j.iter().enumerate() {
        let (records, c) = sweep_one(cfg, params, objective, j, k, &path)?;
        count.add(c);
        for (t, e, ehat) in &records {
            table.push(vec![Some(*t), Some(j as f64), *e, Some(*ehat)]);
        }
        sups.push(sup_error(&records));
    }

    let js: Vec<f64> = cfg.j.iter().map(|&j| j as f64).collect();
    let mut verdicts = Vec::new();
    let fit = fit_power_law(&js, &sups);
    match &fit {
        Ok(f) => {
            let ok = (SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&f.slope) && f.r_squared >= MIN_R2;
            verdicts.push(Verdict::new(
                "poc_exponent",
                Status::from_bool(ok),
                format!(
                    "slope {:.4} (window [{}, {}]), r² {:.4} (min {MIN_R2})",
                    f.slope, SLOPE_WINDOW.0, SLOPE_WINDOW.1, f.r_squared
                ),
            ));
        }
        Err(e) => verdicts.push(Verdict::new("poc_exponent", Status::Fail, format!("fit failed: {e}"))),
    }

    // self-coupling control: two identical systems on their own consensus never separate
    let j0 = cfg.j[0];
    let mut init = stream(cfg.seed, Purpose::Initial, usize::MAX >> 40, 0);
    let a = ParticleEnsemble::sample(&cfg.initial, j0, cfg.dim, &mut init)?;
    let mut control = CoupledPair::new(a.clone(), a, ConsensusSource::Empirical)?;
    let mut noise = stream(cfg.seed, Purpose::Noise, usize::MAX >> 40, 0);
    let control_sup = sup_error(&run_coupled(
        &mut control,
        params,
        objective,
        cfg.horizon,
        cfg.record_stride,
        &mut noise,
    )?);
    verdicts.push(Verdict::new(
        "self_coupling_control",
        if control_sup == 0.0 { Status::PassTrivial } else { Status::Fail },
        format!("sup Ê of identical systems at J = {j0}: {control_sup:e}"),
    ));

    let mut proxy = serde_json::Value::Null;
    if cfg.poc.proxy_check {
        let doubled = reference_path(cfg, params, objective, 2 * n_ref, 1)?;
        let k = cfg.j.iter().position(|&j| j == max_j).expect("max present");
        let (records, c) = sweep_one(cfg, params, objective, max_j, k, &doubled)?;
        count.add(c);
        let base = sups[k];
        let other = sup_error(&records);
        let change = (other - base).abs() / base;
        verdicts.push(Verdict::new(
            "proxy_bias",
            Status::from_bool(change < PROXY_TOLERANCE),
            format!("sup error at J = {max_j}: {base:.4e} with N_ref = {n_ref}, {other:.4e} with {}; relative change {change:.3}", 2 * n_ref),
        ));
        proxy = json!({"n_ref": 2 * n_ref, "sup_error": other, "relative_change": change});
    }

    Ok(ExperimentOutput {
        summary: Summary {
            experiment: "poc".into(),
            config: config_json(cfg, params),
            constants: setup.report.constants.clone(),
            fits: fits_map(vec![("sup_error_vs_j".into(), fit.ok())]),
            verdicts,
            replicas: count,
            results: json!({
                "j": cfg.j,
                "sup_error": sups,
                "n_ref": n_ref,
                "proxy_check": proxy,
            }),
        },
        series: table,
    })
}
