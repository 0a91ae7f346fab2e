//! Experiment drivers: each turns a configuration into a summary with fitted rates and
//! verdicts, plus a per-record series.
//!
//! Every driver is a pure function of its configuration (seed included). Replicas run
//! through [`crate::parallel`] with disjoint random streams and are reduced in replica
//! order, so results do not depend on the thread count.

mod concentration;
mod config;
mod contrast;
mod decay;
pub mod fit;
mod optimize;
mod output;
mod poc;
mod stability;
mod wm_rate;

use std::collections::BTreeMap;

pub use concentration::run_concentration;
pub use config::{
    ConcentrationConfig, ContrastConfig, ExperimentConfig, OptimizeConfig, PocConfig, SearchConfig,
    StabilityConfig, WmConfig,
};
pub use contrast::run_contrast;
pub use decay::{run_moment_decay, run_simulate};
pub use fit::{fit_exponential_rate, fit_power_law, RateFit};
pub use optimize::run_optimize;
pub use output::{ExperimentOutput, ReplicaCount, Status, Summary, Table, Verdict};
pub use poc::run_poc_sweep;
pub use stability::run_stability_sweep;
pub use wm_rate::run_wm_mc_rate;

use crate::admissibility::{check_assumptions, suggest_admissible, AdmissibilityReport, Profile};
use crate::diagnostics::{LyapunovReport, ReportSpec};
use crate::dynamics::run_observed;
use crate::diagnostics::lyapunov_report;
use crate::ensemble::ParticleEnsemble;
use crate::error::{KcboError, Result};
use crate::objective::{make_objective, ObjectiveSpec};
use crate::parallel::map_replicas;
use crate::params::KineticParams;
use crate::rng::RngStream;

/// Stream purposes; combined with a group (e.g. ensemble-size index) and a replica index.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Purpose {
    Initial = 1,
    Noise = 2,
    Reference = 3,
    ReferenceNoise = 4,
    Proxy = 5,
}

pub(crate) fn stream(seed: u64, purpose: Purpose, group: usize, replica: usize) -> RngStream {
    let id = ((purpose as u64) << 56) | ((group as u64) << 32) | replica as u64;
    RngStream::new(seed, id)
}

/// Objective, parameters and the admissibility report they were checked against.
#[derive(Debug, Clone)]
pub struct Setup {
    pub objective: ObjectiveSpec,
    pub params: KineticParams,
    pub report: AdmissibilityReport,
}

/// Resolves parameters (explicit or searched) and checks them against `profiles`.
///
/// Fails with [`KcboError::Admissibility`] when any clause fails.
pub fn prepare(cfg: &ExperimentConfig, profiles: &[Profile]) -> Result<Setup> {
    let setup = resolve(cfg, profiles)?;
    if !setup.report.passed() {
        let failed: Vec<String> = setup
            .report
            .failures()
            .map(|c| format!("{} (margin {:.3e})", c.id, c.margin))
            .collect();
        return Err(KcboError::Admissibility(failed.join(", ")));
    }
    Ok(setup)
}

/// Like [`prepare`] but returns the report even when it fails.
pub fn resolve(cfg: &ExperimentConfig, profiles: &[Profile]) -> Result<Setup> {
    cfg.validate()?;
    let objective = make_objective(&cfg.objective, cfg.dim)?;
    let params = match cfg.params {
        Some(p) => p,
        None => suggest_admissible(&objective, &cfg.orders(), cfg.search.budget, &cfg.search_options())?.0,
    };
    let mut reports: Vec<AdmissibilityReport> =
        profiles.iter().map(|&p| check_assumptions(&params, &objective, p)).collect();
    if reports.is_empty() {
        reports.push(check_assumptions(&params, &objective, Profile::Admissibility(2.0)));
    }
    let mut report = reports.remove(0);
    for r in reports {
        for (k, v) in r.constants {
            report.constants.entry(k).or_insert(v);
        }
        for c in r.checks {
            if report.check(&c.id).is_none() {
                report.checks.push(c);
            }
        }
    }
    Ok(Setup {
        objective,
        params,
        report,
    })
}

pub(crate) fn config_json(cfg: &ExperimentConfig, params: &KineticParams) -> serde_json::Value {
    let mut echo = cfg.clone();
    echo.params = Some(*params);
    serde_json::to_value(echo).unwrap_or(serde_json::Value::Null)
}

/// Splits per-replica results into successes and a count, dropping blow-ups.
pub(crate) fn collect_replicas<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, ReplicaCount)> {
    let mut count = ReplicaCount {
        requested: results.len(),
        ..Default::default()
    };
    let mut ok = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => {
                count.completed += 1;
                ok.push(v);
            }
            Err(KcboError::Blowup { .. }) => count.excluded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((ok, count))
}

pub(crate) fn blowup_guard(count: &ReplicaCount) -> Result<()> {
    if count.completed == 0 || count.blowup_dominated() {
        return Err(KcboError::BlowupDominated {
            excluded: count.excluded,
            requested: count.requested,
        });
    }
    Ok(())
}

/// Runs `cfg.replicas` independent trajectories of size `j` and returns each one's
/// report series.
pub(crate) fn simulate_replicas(
    cfg: &ExperimentConfig,
    setup: &Setup,
    j: usize,
    group: usize,
    spec: &ReportSpec,
) -> Result<(Vec<Vec<LyapunovReport>>, ReplicaCount)> {
    let results = map_replicas(cfg.replicas, |r| {
        let mut init = stream(cfg.seed, Purpose::Initial, group, r);
        let mut ens = ParticleEnsemble::sample(&cfg.initial, j, cfg.dim, &mut init)?;
        let mut noise = stream(cfg.seed, Purpose::Noise, group, r);
        let mut out = Vec::new();
        run_observed(
            &mut ens,
            &setup.params,
            &setup.objective,
            cfg.horizon,
            &mut noise,
            cfg.record_stride,
            |e| {
                out.push(lyapunov_report(e, &setup.params, &setup.objective, spec)?);
                Ok(())
            },
        )?;
        Ok(out)
    });
    collect_replicas(results)
}

/// Record-wise mean over replicas.
pub(crate) fn mean_series(runs: &[Vec<LyapunovReport>]) -> Vec<LyapunovReport> {
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .filter_map(|k| {
            let at: Vec<LyapunovReport> = runs.iter().map(|r| r[k].clone()).collect();
            LyapunovReport::mean(&at)
        })
        .collect()
}

/// Merges named fits into a map, skipping failed fits.
pub(crate) fn fits_map(entries: Vec<(String, Option<RateFit>)>) -> BTreeMap<String, RateFit> {
    entries.into_iter().filter_map(|(k, f)| f.map(|f| (k, f))).collect()
}
