use serde_json::json;

use crate::consensus::weighted_consensus;
use crate::ensemble::Marginal;
use crate::error::Result;
use crate::objective::make_objective;
use crate::parallel::map_replicas;
use crate::reduce::pairwise_mean_by;
use crate::rng::RngStream;

use super::fit::fit_power_law;
use super::{fits_map, stream, ExperimentConfig, ExperimentOutput, Purpose, ReplicaCount, Status, Summary, Table, Verdict};

const SLOPE_WINDOW: (f64, f64) = (-1.3, -0.7);

pub(crate) fn draw_positions(law: &Marginal, count: usize, dim: usize, stream: &mut RngStream) -> Vec<f64> {
    (0..count * dim).map(|_| law.draw(stream)).collect()
}

/// Monte-Carlo rate of the weighted mean: `E|M_α(ρ^J) - M_α(ρ)|²` for `J` i.i.d. samples,
/// with `M_α(ρ)` replaced by a large-sample proxy. Fits the log-log slope in `J`.
pub fn run_wm_mc_rate(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let objective = make_objective(&cfg.objective, cfg.dim)?;
    let alpha = cfg.params.map_or(cfg.search.alpha, |p| p.alpha);
    let law = cfg.initial.position;
    let dim = cfg.dim;

    let mut proxy_stream = stream(cfg.seed, Purpose::Proxy, 0, 0);
    let proxy_samples = draw_positions(&law, cfg.wm.proxy_size, dim, &mut proxy_stream);
    let proxy = weighted_consensus(&proxy_samples, dim, alpha, &objective)?.point;
    drop(proxy_samples);

    let mut table = Table::new(vec!["J".into(), "mean_sq_error".into(), "std_error".into()]);
    let mut errors = Vec::new();
    for (k, &j) in cfg.j.iter().enumerate() {
        let per_replica = map_replicas(cfg.replicas, |r| -> Result<f64> {
            let mut s = stream(cfg.seed, Purpose::Initial, k, r);
            let xs = draw_positions(&law, j, dim, &mut s);
            let m = weighted_consensus(&xs, dim, alpha, &objective)?.point;
            Ok(m.iter().zip(&proxy).map(|(a, b)| (a - b).powi(2)).sum())
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        let n = per_replica.len();
        let mean = pairwise_mean_by(n, |i| per_replica[i]);
        let var = if n > 1 {
            pairwise_mean_by(n, |i| (per_replica[i] - mean).powi(2)) * n as f64 / (n - 1) as f64
        } else {
            0.0
        };
        let se = (var / n as f64).sqrt();
        table.push(vec![Some(j as f64), Some(mean), Some(se)]);
        errors.push(mean);
    }

    let js: Vec<f64> = cfg.j.iter().map(|&j| j as f64).collect();
    let fit = fit_power_law(&js, &errors);
    let verdict = match &fit {
        Ok(f) => Verdict::new(
            "wm_rate",
            Status::from_bool((SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&f.slope)),
            format!("slope {:.4} (window [{}, {}]), r² {:.4}", f.slope, SLOPE_WINDOW.0, SLOPE_WINDOW.1, f.r_squared),
        ),
        Err(e) => Verdict::new("wm_rate", Status::Fail, format!("fit failed: {e}")),
    };
    let requested = cfg.replicas * cfg.j.len();
    let mut echo = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
    echo["alpha_used"] = json!(alpha);
    Ok(ExperimentOutput {
        summary: Summary {
            experiment: "wm-rate".into(),
            config: echo,
            constants: [("alpha".to_string(), alpha), ("C_lem".to_string(), (alpha * objective.range()).exp())]
                .into_iter()
                .collect(),
            fits: fits_map(vec![("error_vs_j".into(), fit.ok())]),
            verdicts: vec![verdict],
            replicas: ReplicaCount {
                requested,
                completed: requested,
                excluded: 0,
            },
            results: json!({ "j": cfg.j, "mean_sq_error": errors, "proxy": proxy, "proxy_size": cfg.wm.proxy_size }),
        },
        series: table,
    })
}
