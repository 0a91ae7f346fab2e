use serde_json::json;

use crate::admissibility::{decay_rate, Profile};
use crate::diagnostics::{order_label, LyapunovReport, ReportSpec};
use crate::error::Result;

use super::fit::{fit_exponential_rate, within_monotone_envelope};
use super::{
    blowup_guard, config_json, fits_map, mean_series, prepare, resolve, simulate_replicas, ExperimentConfig,
    ExperimentOutput, Status, Summary, Table, Verdict,
};

/// Envelope factor for "decreasing up to noise".
pub(crate) const ENVELOPE: f64 = 1.5;
/// A fitted rate passes when it reaches this fraction of the predicted one.
pub(crate) const RATE_FRACTION: f64 = 0.8;
/// Largest allowed growth of the raw eighth position moment.
const RAW_GROWTH: f64 = 10.0;

/// `𝔐_p(X) + 𝔐_p(V)` from a report.
pub(crate) fn moment_sum(r: &LyapunovReport, p: f64) -> f64 {
    if p == 2.0 {
        r.m2_x + r.m2_v
    } else {
        r.mp_x(p).unwrap_or(f64::NAN) + r.mp_v(p).unwrap_or(f64::NAN)
    }
}

/// Rate verdict for a decaying series: PASS iff the fitted rate reaches
/// `RATE_FRACTION·predicted` and the series stays in the monotone envelope.
pub(crate) fn decay_verdict(
    name: &str,
    series: &[(f64, f64)],
    t0: f64,
    predicted: f64,
) -> (Verdict, Option<super::RateFit>) {
    if series.iter().all(|(_, v)| *v == 0.0) {
        return (Verdict::new(name, Status::PassTrivial, "series identically zero"), None);
    }
    let values: Vec<f64> = series.iter().map(|(_, v)| *v).collect();
    let envelope = within_monotone_envelope(&values, ENVELOPE);
    match fit_exponential_rate(series, t0) {
        Ok(fit) => {
            let rate = -fit.slope;
            let ok = rate >= RATE_FRACTION * predicted && envelope;
            let detail = format!(
                "fitted rate {rate:.4e} vs {RATE_FRACTION}·λ = {:.4e} (λ = {predicted:.4e}, r² = {:.4}); envelope {}",
                RATE_FRACTION * predicted,
                fit.r_squared,
                if envelope { "ok" } else { "violated" }
            );
            (Verdict::new(name, Status::from_bool(ok), detail), Some(fit))
        }
        Err(e) => (Verdict::new(name, Status::Fail, format!("fit failed: {e}")), None),
    }
}

fn series_of(reports: &[LyapunovReport], f: impl Fn(&LyapunovReport) -> f64) -> Vec<(f64, f64)> {
    reports.iter().map(|r| (r.t, f(r))).collect()
}

/// Centered-moment decay: fitted rates of `E[𝔐_p(X) + 𝔐_p(V)]` against the predicted
/// `λ_p`, plus raw-moment boundedness checks.
pub fn run_moment_decay(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let orders = cfg.orders();
    let profiles: Vec<Profile> = orders.iter().map(|&p| Profile::CenteredDecay(p)).collect();
    let setup = prepare(cfg, &profiles)?;
    let spec = ReportSpec {
        p_list: orders.clone(),
        lstd: None,
    };
    let j = cfg.j[0];
    let (runs, count) = simulate_replicas(cfg, &setup, j, 0, &spec)?;
    blowup_guard(&count)?;
    let mean = mean_series(&runs);
    let t0 = cfg.t0();

    let mut verdicts = Vec::new();
    let mut fits = Vec::new();
    let mut results = serde_json::Map::new();
    for &p in &orders {
        let l = order_label(p);
        let predicted = decay_rate(p, &setup.params, &setup.objective)?;
        let series = series_of(&mean, |r| moment_sum(r, p));
        let (verdict, fit) = decay_verdict(&format!("decay_{l}"), &series, t0, predicted);
        let lp_series = series_of(&mean, |r| r.lp(p).unwrap_or(f64::NAN));
        let lp_fit = fit_exponential_rate(&lp_series, t0).ok();
        results.insert(
            format!("p{l}"),
            json!({
                "predicted_rate": predicted,
                "fitted_rate": fit.map(|f| -f.slope),
                "lyapunov_fitted_rate": lp_fit.map(|f| -f.slope),
            }),
        );
        fits.push((format!("moments_{l}"), fit));
        fits.push((format!("lyapunov_{l}"), lp_fit));
        verdicts.push(verdict);
    }

    if let (Some(first), true) = (mean.first(), orders.contains(&8.0)) {
        let start = first.raw_x(8.0).unwrap_or(f64::NAN);
        let peak = mean.iter().filter_map(|r| r.raw_x(8.0)).fold(0.0, f64::max);
        let trivial = peak == 0.0;
        let status = if trivial {
            Status::PassTrivial
        } else {
            Status::from_bool(peak <= RAW_GROWTH * start)
        };
        verdicts.push(Verdict::new(
            "raw_x8_bounded",
            status,
            format!("max_t (1/J)Σ|X|⁸ = {peak:.4e}, initial {start:.4e}, limit {RAW_GROWTH}× initial"),
        ));
        results.insert("raw_x8".into(), json!({"initial": start, "max": peak}));
    }
    let late: Vec<(f64, f64)> = series_of(&mean, |r| r.raw_v2).into_iter().filter(|(t, _)| *t >= t0).collect();
    if late.iter().all(|(_, v)| *v == 0.0) {
        verdicts.push(Verdict::new("raw_v2_decreasing", Status::PassTrivial, "E|V|² identically zero"));
    } else {
        let values: Vec<f64> = late.iter().map(|(_, v)| *v).collect();
        let envelope = within_monotone_envelope(&values, ENVELOPE);
        let fit = fit_exponential_rate(&late, t0).ok();
        let slope = fit.map(|f| f.slope);
        let ok = envelope && slope.is_some_and(|s| s < 0.0);
        verdicts.push(Verdict::new(
            "raw_v2_decreasing",
            Status::from_bool(ok),
            format!(
                "log-slope of E|V|² after t0 = {}; envelope {}",
                slope.map_or("n/a".into(), |s| format!("{s:.4e}")),
                if envelope { "ok" } else { "violated" }
            ),
        ));
        fits.push(("raw_v2".into(), fit));
    }

    results.insert("t0".into(), json!(t0));
    results.insert("j".into(), json!(j));
    Ok(ExperimentOutput {
        summary: Summary {
            experiment: "decay".into(),
            config: config_json(cfg, &setup.params),
            constants: setup.report.constants.clone(),
            fits: fits_map(fits),
            verdicts,
            replicas: count,
            results: serde_json::Value::Object(results),
        },
        series: Table::from_reports(&mean),
    })
}

/// Plain simulation: replica-averaged diagnostics, no verdicts. Parameters are checked
/// but a failing check is only reported.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let orders = cfg.orders();
    let setup = resolve(cfg, &[Profile::Admissibility(2.0)])?;
    let spec = ReportSpec {
        p_list: orders,
        lstd: None,
    };
    let (runs, count) = simulate_replicas(cfg, &setup, cfg.j[0], 0, &spec)?;
    blowup_guard(&count)?;
    let mean = mean_series(&runs);
    let last = mean.last().cloned();
    Ok(ExperimentOutput {
        summary: Summary {
            experiment: "simulate".into(),
            config: config_json(cfg, &setup.params),
            constants: setup.report.constants.clone(),
            fits: Default::default(),
            verdicts: vec![Verdict::new(
                "admissibility",
                Status::Diagnostic,
                if setup.report.passed() { "parameters admissible" } else { "parameters not admissible" },
            )],
            replicas: count,
            results: json!({ "final": last }),
        },
        series: Table::from_reports(&mean),
    })
}
