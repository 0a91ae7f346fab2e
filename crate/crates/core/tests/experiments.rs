use kcbo::experiments::{
    fit_exponential_rate, fit_power_law, run_concentration, run_contrast, run_moment_decay, run_optimize,
    run_simulate, run_wm_mc_rate, ExperimentConfig, ExperimentOutput, Status, Table,
};
use kcbo::{KcboError, KineticParams, NoiseKind, RngStream};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        j: vec![16],
        replicas: 3,
        horizon: 1.0,
        record_stride: 100,
        seed: 4,
        ..ExperimentConfig::default()
    }
}

#[test]
fn same_seed_reproduces_summary_and_series() {
    let a = run_simulate(&small()).unwrap();
    let b = run_simulate(&small()).unwrap();
    assert_eq!(a, b);
    let mut other = small();
    other.seed = 5;
    assert_ne!(run_simulate(&other).unwrap().series, a.series);
}

#[test]
fn config_roundtrips_through_toml_and_rejects_unknown_keys() {
    let mut cfg = small();
    cfg.params = Some(KineticParams::new(0.1, 5.0, 0.01, 1.0, NoiseKind::Anisotropic, 1e-3).unwrap());
    cfg.p_list = vec![2.0, 4.0];
    let text = cfg.to_toml_string().unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    assert!(matches!(ExperimentConfig::from_toml_str("replicaz = 2\n"), Err(KcboError::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml_str("[poc]\nnref = 2\n"), Err(KcboError::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml_str("horizon = -1.0\n"), Err(KcboError::Config(_))));
}

#[test]
fn exponential_fit_recovers_a_noisy_rate() {
    let mut s = RngStream::new(77, 0);
    let series: Vec<(f64, f64)> = (0..200)
        .map(|k| {
            let t = k as f64 * 0.025;
            let noise = 1.0 + s.uniform(-0.01, 0.01);
            (t, (-2.0 * t).exp() * noise)
        })
        .collect();
    let fit = fit_exponential_rate(&series, 0.0).unwrap();
    assert!((-2.1..=-1.9).contains(&fit.slope), "slope {}", fit.slope);
    assert!(fit.r_squared > 0.99);
    assert_eq!(fit.n_points, 200);
}

#[test]
fn fits_drop_nonpositive_points_and_need_three() {
    let series = [(0.0, 1.0), (1.0, 0.0), (2.0, 0.5), (3.0, -1.0), (4.0, 0.25)];
    let fit = fit_exponential_rate(&series, 0.0).unwrap();
    assert_eq!((fit.n_points, fit.dropped), (3, 2));
    assert!((fit.slope + 0.5 * 2f64.ln()).abs() < 1e-12);
    assert!(matches!(
        fit_power_law(&[1.0, 2.0], &[1.0, 0.5]),
        Err(KcboError::InsufficientData { usable: 2, .. })
    ));
    let p = fit_power_law(&[1.0, 10.0, 100.0], &[1.0, 0.1, 0.01]).unwrap();
    assert!((p.slope + 1.0).abs() < 1e-12);
}

#[test]
fn outputs_survive_a_write_read_cycle() {
    let out = run_simulate(&small()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write(dir.path()).unwrap();
    let table = Table::read_csv(&dir.path().join("series.csv")).unwrap();
    assert_eq!(table.columns, out.series.columns);
    assert_eq!(table.rows.len(), out.series.rows.len());
    for (a, b) in table.rows.iter().flatten().zip(out.series.rows.iter().flatten()) {
        match (a, b) {
            (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-15 * y.abs()),
            _ => assert_eq!(a, b),
        }
    }
    let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let summary: kcbo::experiments::Summary = serde_json::from_str(&text).unwrap();
    assert_eq!(summary.experiment, "simulate");
    assert_eq!(summary.replicas.requested, 3);
}

#[test]
fn simulate_records_every_stride_and_the_end() {
    let out = run_simulate(&small()).unwrap();
    assert_eq!(out.series.columns[0], "t");
    let t: Vec<f64> = out.series.column("t").unwrap().into_iter().map(Option::unwrap).collect();
    assert_eq!(t.len(), 11);
    assert_eq!(t[0], 0.0);
    assert!((t[10] - 1.0).abs() < 1e-12);
    assert!(out.summary.passed());
}

#[test]
fn decay_is_trivial_without_noise_on_a_symmetric_pair() {
    let mut cfg = small();
    cfg.j = vec![2];
    cfg.replicas = 2;
    cfg.horizon = 5.0;
    cfg.params = Some(KineticParams::new(0.12, 15.0, 0.0, 1.0, NoiseKind::Isotropic, 1e-3).unwrap());
    let out = run_moment_decay(&cfg).unwrap();
    assert_eq!(out.summary.config["params"]["sigma"], 0.0);
    for name in ["decay_2", "decay_8", "raw_x8_bounded", "raw_v2_decreasing"] {
        let v = out.summary.verdict(name).unwrap_or_else(|| panic!("missing {name}"));
        assert_ne!(v.status, Status::Fail, "{name}: {}", v.detail);
    }
}

#[test]
fn concentration_frequency_is_one_for_a_negative_excursion_and_zero_for_a_huge_one() {
    let mut cfg = small();
    cfg.concentration.kappa = Some(0.0);
    cfg.concentration.excursion = -1e9;
    let freq = |out: &ExperimentOutput| out.series.column("frequency").unwrap()[0].unwrap();
    assert_eq!(freq(&run_concentration(&cfg).unwrap()), 1.0);
    cfg.concentration.excursion = 1e9;
    assert_eq!(freq(&run_concentration(&cfg).unwrap()), 0.0);
    cfg.concentration.kappa = Some(1e6);
    assert!(matches!(run_concentration(&cfg), Err(KcboError::Admissibility(_))));
}

#[test]
fn contrast_adds_the_ratio_column() {
    let out = run_contrast(&small()).unwrap();
    assert!(out.series.columns.iter().any(|c| c == "Lstd_over_Lp"));
    assert!(out.series.columns.iter().any(|c| c == "Lstd"));
    assert_eq!(out.summary.experiment, "contrast");
}

#[test]
fn monte_carlo_rate_is_close_to_inverse_size() {
    let cfg = ExperimentConfig {
        j: vec![100, 400, 1600, 6400],
        replicas: 200,
        wm: kcbo::experiments::WmConfig { proxy_size: 200_000 },
        ..small()
    };
    let out = run_wm_mc_rate(&cfg).unwrap();
    let fit = out.summary.fits.values().next().expect("a fit");
    assert!((-1.3..=-0.7).contains(&fit.slope), "slope {}", fit.slope);
    assert_eq!(out.series.columns, ["J", "mean_sq_error", "std_error"]);
}

#[test]
fn optimizer_finds_the_cosine_well_minimum() {
    let mut cfg = small();
    cfg.j = vec![64];
    cfg.replicas = 4;
    cfg.horizon = 10.0;
    cfg.optimize.first_order = true;
    let out = run_optimize(&cfg).unwrap();
    let v = out.summary.verdict("optimize_success").unwrap();
    assert_eq!(v.status, Status::Pass, "{}", v.detail);
    assert_eq!(out.series.columns, ["t", "f_consensus", "f_consensus_first_order"]);
    assert!(out.summary.results["best_f"].as_f64().unwrap() < 0.1);
}
