use serde_json::json;

use crate::admissibility::{decay_rate, Profile};
use crate::diagnostics::{LstdCoefficients, ReportSpec};
use crate::error::Result;

use super::decay::decay_verdict;
use super::fit::fit_exponential_rate;
use super::{
    blowup_guard, config_json, fits_map, mean_series, prepare, simulate_replicas, ExperimentConfig,
    ExperimentOutput, Status, Summary, Table, Verdict,
};

/// Shifted Lyapunov functional `ℒ_p` against the unshifted comparison functional on the
/// same trajectories. Only the shifted rate carries a verdict.
pub fn run_contrast(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p = cfg.contrast.p;
    let setup = prepare(cfg, &[Profile::CenteredDecay(p)])?;
    let coeffs = LstdCoefficients::tied(p, cfg.contrast.b, cfg.contrast.c, &setup.params);
    let mut orders = cfg.orders();
    if !orders.contains(&p) {
        orders.push(p);
    }
    let spec = ReportSpec {
        p_list: orders,
        lstd: Some(coeffs),
    };
    let (runs, count) = simulate_replicas(cfg, &setup, cfg.j[0], 0, &spec)?;
    blowup_guard(&count)?;
    let mean = mean_series(&runs);
    let t0 = cfg.t0();
    let predicted = decay_rate(p, &setup.params, &setup.objective)?;

    let shifted: Vec<(f64, f64)> = mean.iter().map(|r| (r.t, r.lp(p).unwrap_or(f64::NAN))).collect();
    let unshifted: Vec<(f64, f64)> = mean.iter().map(|r| (r.t, r.lstd.unwrap_or(f64::NAN))).collect();
    let (verdict, shifted_fit) = decay_verdict("shifted_rate", &shifted, t0, predicted);
    let unshifted_fit = fit_exponential_rate(&unshifted, t0).ok();
    let ratio: Vec<Option<f64>> = shifted
        .iter()
        .zip(&unshifted)
        .map(|((_, a), (_, b))| (*a > 0.0 && *b > 0.0).then(|| b / a))
        .collect();

    let mut table = Table::from_reports(&mean);
    table.columns.push("Lstd_over_Lp".into());
    for (row, r) in table.rows.iter_mut().zip(&ratio) {
        row.push(*r);
    }
    let verdicts = vec![
        verdict,
        Verdict::new(
            "unshifted_rate",
            Status::Diagnostic,
            match unshifted_fit {
                Some(f) => format!("fitted rate {:.4e} (r² {:.4}, {} dropped)", -f.slope, f.r_squared, f.dropped),
                None => "no usable fit".into(),
            },
        ),
    ];
    Ok(ExperimentOutput {
        summary: Summary {
            experiment: "contrast".into(),
            config: config_json(cfg, &setup.params),
            constants: setup.report.constants.clone(),
            fits: fits_map(vec![("shifted".into(), shifted_fit), ("unshifted".into(), unshifted_fit)]),
            verdicts,
            replicas: count,
            results: json!({
                "p": p,
                "predicted_rate": predicted,
                "coefficients": coeffs,
                "ratio": ratio,
            }),
        },
        series: table,
    })
}
