//! Acceptance suite: one PASS/FAIL line per criterion, then a single assertion that
//! every criterion passed.

use std::time::{Duration, Instant};

use kcbo::admissibility::{
    c_lem, check_assumptions, coupling_equiv, decay_rate, k_sigma, lp_moment_equiv, mu_gap, mu_gap_threshold,
    norm_equiv, psi2_equiv, v_pair, Profile,
};
use kcbo::consensus::weighted_consensus;
use kcbo::diagnostics::{
    centered_moment, centered_shifted, coupling_energy, coupling_energy_blocks, coupling_error, lp_weight,
    lyapunov_lp, phi, phi_functional, psi2_functional, psi2_weight, raw_moment, ShiftedState,
};
use kcbo::experiments::{
    run_moment_decay, run_poc_sweep, run_stability_sweep, run_wm_mc_rate, ExperimentConfig, ExperimentOutput, Status,
};
use kcbo::objective::{make_objective, ObjectiveSpec, OBJECTIVE_NAMES};
use kcbo::{KineticParams, NoiseKind, ParticleEnsemble, RngStream};

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

impl Outcome {
    fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<4} {} | {} | {:.2?} (limit {:?})",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed,
            self.limit
        )
    }
}

fn timed(
    id: usize,
    title: &'static str,
    limit: Duration,
    f: impl FnOnce() -> (bool, String),
) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let outcome = Outcome {
        id,
        title,
        pass: ok && elapsed < limit,
        detail,
        elapsed,
        limit,
    };
    println!("{}", outcome.line());
    outcome
}

fn verdict_ok(out: &ExperimentOutput, name: &str) -> (bool, String) {
    match out.summary.verdict(name) {
        Some(v) => (
            matches!(v.status, Status::Pass | Status::PassTrivial),
            format!("{name}: {:?} ({})", v.status, v.detail),
        ),
        None => (false, format!("{name}: missing")),
    }
}

fn random_objective(rng: &mut RngStream, dim: usize) -> ObjectiveSpec {
    let k = (rng.uniform(0.0, OBJECTIVE_NAMES.len() as f64) as usize).min(OBJECTIVE_NAMES.len() - 1);
    make_objective(OBJECTIVE_NAMES[k], dim).unwrap()
}

fn random_count(rng: &mut RngStream, max: usize) -> usize {
    (rng.uniform(1.0, max as f64 + 1.0) as usize).clamp(1, max)
}

fn random_vec(rng: &mut RngStream, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.uniform(-1.0, 1.0)).collect()
}

fn log_uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    (rng.uniform(lo.ln(), hi.ln())).exp()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

// ---- extended-precision oracle (double-double arithmetic) ----

#[derive(Clone, Copy)]
struct Dd(f64, f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd(s, b - (s - a))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.0, o.0);
        let t = two_sum(self.1, o.1);
        let u = quick_two_sum(s.0, s.1 + t.0);
        quick_two_sum(u.0, u.1 + t.1)
    }

    fn mul_f(self, b: f64) -> Dd {
        let p = self.0 * b;
        let e = self.0.mul_add(b, -p);
        quick_two_sum(p, e + self.1 * b)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.0 / o.0;
        let r = self.add(o.mul_f(-q1));
        let q2 = r.0 / o.0;
        let r = r.add(o.mul_f(-q2));
        let q3 = r.0 / o.0;
        quick_two_sum(q1, q2).add(Dd(q3, 0.0))
    }
}

fn oracle_consensus(positions: &[f64], dim: usize, alpha: f64, f: &ObjectiveSpec) -> Vec<f64> {
    let weights: Vec<f64> = positions.chunks_exact(dim).map(|x| (-alpha * f.eval(x)).exp()).collect();
    let total = weights.iter().fold(Dd(0.0, 0.0), |acc, &w| acc.add(Dd(w, 0.0)));
    (0..dim)
        .map(|i| {
            let num = positions
                .chunks_exact(dim)
                .zip(&weights)
                .fold(Dd(0.0, 0.0), |acc, (x, &w)| acc.add(Dd(w, 0.0).mul_f(x[i])));
            num.div(total).0
        })
        .collect()
}

// ---- 2×2 symmetric Jacobi eigensolver ----

fn jacobi_eigen(p: f64, r: f64, q: f64) -> (f64, f64) {
    if r == 0.0 {
        return (p.min(q), p.max(q));
    }
    let zeta = (q - p) / (2.0 * r);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let (l1, l2) = (p - t * r, q + t * r);
    (l1.min(l2), l1.max(l2))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// ---- criteria ----

fn criterion_consensus_oracle() -> (bool, String) {
    let mut rng = RngStream::new(11, 0);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..1000 {
        let dim = random_count(&mut rng, 5);
        let count = random_count(&mut rng, 12);
        let f = random_objective(&mut rng, dim);
        let alpha = rng.uniform(0.0, 20.0) / f.range();
        let pos = random_vec(&mut rng, count * dim, 4.0);
        let got = weighted_consensus(&pos, dim, alpha, &f).unwrap().point;
        let want = oracle_consensus(&pos, dim, alpha, &f);
        let diff: Vec<f64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&want).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        if rel > 1e-12 {
            failures += 1;
        }
    }
    (failures == 0, format!("1000 ensembles, worst relative error {worst:.2e}, {failures} above 1e-12"))
}

fn criterion_consensus_mean_gap() -> (bool, String) {
    let mut rng = RngStream::new(12, 0);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..1000 {
        let dim = random_count(&mut rng, 5);
        let count = random_count(&mut rng, 40);
        let f = random_objective(&mut rng, dim);
        let alpha = rng.uniform(0.0, 10.0) / f.range();
        let scale = log_uniform(&mut rng, 0.1, 10.0);
        let pos = random_vec(&mut rng, count * dim, scale);
        let m_alpha = weighted_consensus(&pos, dim, alpha, &f).unwrap().point;
        let mean: Vec<f64> = (0..dim)
            .map(|i| pos.chunks_exact(dim).map(|x| x[i]).sum::<f64>() / count as f64)
            .collect();
        let gap: Vec<f64> = m_alpha.iter().zip(&mean).map(|(a, b)| a - b).collect();
        for q in [2.0, 4.0, 8.0] {
            let lhs = norm(&gap).powf(q);
            let rhs = c_lem(alpha, &f) * centered_moment(&pos, dim, q);
            if lhs > rhs * (1.0 + 1e-12) {
                violations += 1;
            }
            if rhs > 0.0 {
                tightest = tightest.min(rhs / lhs.max(f64::MIN_POSITIVE));
            }
        }
    }
    (
        violations == 0,
        format!("3000 checks (q = 2, 4, 8), {violations} violations, tightest ratio rhs/lhs {tightest:.3}"),
    )
}

fn criterion_sandwiches() -> (bool, String) {
    let mut rng = RngStream::new(13, 0);
    let mut phi_viol = 0;
    let mut energy_viol = 0;
    let mut moment_viol = 0;
    let mut moment_checks = 0;
    let mut eig_worst = 0.0f64;
    for _ in 0..1000 {
        let dim = random_count(&mut rng, 4);
        let count = random_count(&mut rng, 16);
        let mass = log_uniform(&mut rng, 0.01, 2.0);
        let gamma = log_uniform(&mut rng, 0.1, 30.0);
        let params = KineticParams::new(mass, gamma, 0.0, 1.0, NoiseKind::Isotropic, mass / (2.0 * gamma)).unwrap();
        let sx = log_uniform(&mut rng, 0.01, 10.0);
        let sv = log_uniform(&mut rng, 0.01, 10.0);
        let x = random_vec(&mut rng, count * dim, sx);
        let v = random_vec(&mut rng, count * dim, sv);

        // φ_{a,p} against |x|^p + |v|^p
        let p = [2.0, 3.0, 4.0, 6.0, 8.0][(rng.uniform(0.0, 5.0) as usize).min(4)];
        let a = log_uniform(&mut rng, 0.05, 20.0);
        let (c1, c2) = norm_equiv(a, p, mass, gamma);
        let value = phi_functional(&x, &v, dim, a, p, &params);
        let base = (0..count)
            .map(|j| {
                let r = j * dim..(j + 1) * dim;
                norm(&x[r.clone()]).powf(p) + norm(&v[r]).powf(p)
            })
            .sum::<f64>()
            / count as f64;
        let slack = 1e-12 * c2.abs() * base;
        if value < c1 * base - slack || value > c2 * base + slack {
            phi_viol += 1;
        }

        // coupling energy against Ê
        if gamma > mass / std::f64::consts::SQRT_2 {
            let (e1, e2) = coupling_equiv(mass, gamma);
            let energy = coupling_energy(&x, &v, dim, &params).unwrap();
            let slack = 1e-12 * e2 * energy.e_hat;
            if energy.e < e1 * energy.e_hat - slack || energy.e > e2 * energy.e_hat + slack {
                energy_viol += 1;
            }
        }

        // L_p against 𝔐_p(X) + 𝔐_p(V), where the lower constant is positive
        for p in [2.0, 8.0] {
            let (k1, k2) = lp_moment_equiv(p, mass, gamma);
            let defined = if p == 2.0 {
                gamma * gamma > 7.0 * mass / 6.0
            } else {
                lp_weight(p, mass, gamma) > 0.0
            };
            if !defined || k1 <= 0.0 {
                continue;
            }
            let ens = ParticleEnsemble::new(dim, x.clone(), v.clone()).unwrap();
            let state = centered_shifted(&ens, gamma);
            let lp = lyapunov_lp(&state, p, &params).unwrap();
            let moments = centered_moment(&x, dim, p) + centered_moment(&v, dim, p);
            let slack = 1e-12 * k2 * moments;
            if lp < k1 * moments - slack || lp > k2 * moments + slack {
                moment_viol += 1;
            }
            moment_checks += 1;
        }

        // p = 2 constants against a Jacobi eigensolver
        let (c1, c2) = norm_equiv(a, 2.0, mass, gamma);
        let (o1, o2) = jacobi_eigen(a, 0.5 * mass / gamma, 1.0);
        let (d1, d2) = psi2_equiv(mass, gamma);
        let (q1, q2) = jacobi_eigen(psi2_weight(mass, gamma), 2.5 / gamma, 1.0);
        for (got, want) in [(c1, o1), (c2, o2), (d1, q1), (d2, q2)] {
            eig_worst = eig_worst.max((got - want).abs() / want.abs().max(1.0));
        }
    }
    let ok = phi_viol == 0 && energy_viol == 0 && moment_viol == 0 && eig_worst <= 1e-12;
    (
        ok,
        format!(
            "violations: φ {phi_viol}, coupling {energy_viol}, moments {moment_viol} of {moment_checks}; eigenvalue max rel diff {eig_worst:.2e}"
        ),
    )
}

fn criterion_decompositions() -> (bool, String) {
    let mut rng = RngStream::new(14, 0);
    let mut worst_energy = 0.0f64;
    let mut worst_huygens = 0.0f64;
    for _ in 0..1000 {
        let dim = random_count(&mut rng, 5);
        let count = random_count(&mut rng, 64);
        let mass = log_uniform(&mut rng, 0.01, 2.0);
        let gamma = mass * log_uniform(&mut rng, 1.0, 100.0);
        let params = KineticParams::new(mass, gamma, 0.0, 1.0, NoiseKind::Isotropic, mass / (2.0 * gamma)).unwrap();
        let offset = rng.uniform(-5.0, 5.0);
        let dx: Vec<f64> = random_vec(&mut rng, count * dim, 1.0).iter().map(|v| v + offset).collect();
        let scale = log_uniform(&mut rng, 0.1, 10.0);
        let dv = random_vec(&mut rng, count * dim, scale);

        let energy = coupling_energy(&dx, &dv, dim, &params).unwrap();
        let blocks = coupling_energy_blocks(&dx, &dv, dim, &params);
        let scale = energy.e.abs().max(blocks.fluctuation.abs() + blocks.center_of_mass.abs());
        worst_energy = worst_energy.max((energy.e - blocks.fluctuation - blocks.center_of_mass).abs() / scale);

        let raw = raw_moment(&dx, dim, 2.0);
        let mean: Vec<f64> = (0..dim)
            .map(|i| dx.chunks_exact(dim).map(|x| x[i]).sum::<f64>() / count as f64)
            .collect();
        let split = centered_moment(&dx, dim, 2.0) + mean.iter().map(|m| m * m).sum::<f64>();
        worst_huygens = worst_huygens.max((raw - split).abs() / raw);
    }
    (
        worst_energy <= 1e-12 && worst_huygens <= 1e-12,
        format!("1000 inputs, max rel residual: energy split {worst_energy:.2e}, Huygens {worst_huygens:.2e}"),
    )
}

fn unit_range_objective(dim: usize) -> ObjectiveSpec {
    ObjectiveSpec::custom("unit_range", dim, 0.0, 1.0, 1.0, std::sync::Arc::new(|x: &[f64]| x[0].tanh().abs())).unwrap()
}

fn criterion_admissibility_engine() -> (bool, String) {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };
    let tol = 1e-9;

    // threshold equivalence λ_{2r} > rκ ⇔ μ_gap,2r > μ_gap,8/2 on a grid
    let unit = unit_range_objective(1);
    let mut grid_points = 0;
    for i in 0..=20 {
        let alpha = 3.0 * i as f64 / 20.0;
        for k in 0..=10 {
            let gamma = 0.5 * 1.5f64.powi(k);
            let params = KineticParams::new(0.1, gamma, 0.0, alpha, NoiseKind::Isotropic, 0.05 / gamma).unwrap();
            let kappa = decay_rate(8.0, &params, &unit).unwrap() / 8.0;
            for r in [2.0, 3.0, 4.0, 6.0, 8.0] {
                let lhs = decay_rate(2.0 * r, &params, &unit).unwrap() > r * kappa;
                let rhs = mu_gap(2.0 * r, alpha, 0.0, 1.0) > 0.5 * mu_gap(8.0, alpha, 0.0, 1.0);
                check(lhs == rhs, "threshold equivalence");
                grid_points += 1;
            }
        }
    }

    // μ_gap,p increases toward 2 as p grows, for every αΔf below the p = 8 threshold
    for i in 0..=40 {
        let x = mu_gap_threshold(8.0) * i as f64 / 40.0;
        let orders: Vec<f64> = (3..=20).map(|k| 2f64.powi(k)).collect();
        let gaps: Vec<f64> = orders.iter().map(|&p| mu_gap(p, x, 0.0, 1.0)).collect();
        check(gaps.windows(2).all(|w| w[1] > w[0]), "μ_gap monotone in p");
        check(2.0 - gaps[gaps.len() - 1] < 1e-4 * x.exp(), "μ_gap tends to 2");
    }

    // worked constants
    check(rel_close(mu_gap(8.0, 0.0, 0.0, 1.0), 2.0 - 7f64.powf(-0.75), tol), "μ_gap,8 at zero");
    check(mu_gap(2.0, 2.0 * std::f64::consts::LN_2, 0.0, 1.0).abs() <= tol, "μ_gap,2 boundary");
    for p in [4.0, 8.0, 16.0] {
        let t = mu_gap_threshold(p);
        check(mu_gap(p, t - 1e-6, 0.0, 1.0) > 0.0, "threshold below");
        check(mu_gap(p, t + 1e-6, 0.0, 1.0) < 0.0, "threshold above");
    }
    let (c1, c2) = norm_equiv(1.0, 2.0, 1.0, 1.0);
    check((c1 - 0.5).abs() <= tol && (c2 - 1.5).abs() <= tol, "c1, c2 at a = m = γ = 1");
    check((lp_weight(8.0, 0.1, 2.0) - 0.10625).abs() <= tol, "a_8");
    check((psi2_weight(0.1, 2.0) - 45.25).abs() <= tol, "a_2");

    let state = ShiftedState {
        dim: 1,
        y: vec![-1.0, 1.0],
        z_hat: vec![1.0, -1.0],
    };
    let p01 = KineticParams::new(0.1, 2.0, 0.0, 0.0, NoiseKind::Isotropic, 1e-3).unwrap();
    check((psi2_functional(&state, &p01).unwrap() - 43.75).abs() <= tol, "ψ₂ hand value");
    let hand = ParticleEnsemble::new(1, vec![0.0, 2.0], vec![0.0, 0.0]).unwrap();
    let s = centered_shifted(&hand, 1.0);
    check(s.y == vec![-1.0, 1.0] && s.z_hat == vec![1.0, -1.0], "shifted variables");
    check((phi(&[1.0, 0.0], &[1.0, 0.0], 1.0, 2.0, 1.0, 1.0) - 3.0).abs() <= tol, "φ hand value");
    let unit_mass = KineticParams::new(1.0, 2.0, 0.0, 0.0, NoiseKind::Isotropic, 1e-3).unwrap();
    let energy = coupling_energy(&[1.0, 0.0], &[0.0, 0.0], 2, &unit_mass).unwrap();
    check((energy.e - 0.5).abs() <= tol && (energy.e_hat - 1.0).abs() <= tol, "coupling energy hand value");
    check((coupling_error(&[1.0], &[0.0], 1) - 1.0).abs() <= tol, "Ê hand value");
    check((centered_moment(&[-1.0, 1.0], 1, 2.0) - 1.0).abs() <= tol, "𝔐₂ hand value");

    // chained example: m = 0.1, γ = 2, σ = 0.05, τ = 1, αΔf = ln 2
    let ln2 = unit_range_objective(1);
    let chained = KineticParams::new(0.1, 2.0, 0.05, std::f64::consts::LN_2, NoiseKind::Anisotropic, 1e-3).unwrap();
    check((c_lem(chained.alpha, &ln2) - 2.0).abs() <= tol, "C_lem");
    check((k_sigma(&chained, &ln2) - 1.5).abs() <= tol, "K_σ");
    let (v1, v3) = v_pair(&chained, &ln2);
    check((v1 - 3.875).abs() <= tol && (v3 - 38.5).abs() <= tol, "v₁, v₃");
    let c2_expected = (46.25 + (44.25f64.powi(2) + 6.25).sqrt()) / 2.0;
    check((psi2_equiv(0.1, 2.0).1 - c2_expected).abs() <= tol, "c₂⁽²⁾");
    check((c2_expected - 45.285).abs() < 5e-4, "c₂⁽²⁾ decimals");
    let lambda2 = decay_rate(2.0, &chained, &ln2).unwrap();
    check((lambda2 - 3.875 / c2_expected).abs() <= tol, "λ₂");
    check((lambda2 - 0.08557).abs() < 5e-6, "λ₂ decimals");
    let report = check_assumptions(&chained, &ln2, Profile::Admissibility(2.0));
    for (key, want) in [("K_sigma", 1.5), ("v1", 3.875), ("v3", 38.5), ("a_2", 45.25), ("C_lem", 2.0)] {
        check(report.constant(key).is_some_and(|v| (v - want).abs() <= tol), key);
    }
    check(
        report.constant("c2_psi2").is_some_and(|v| (v - c2_expected).abs() <= tol),
        "report c₂⁽²⁾",
    );
    check(report.constant("lambda_2").is_some_and(|v| (v - lambda2).abs() <= tol), "report λ₂");
    let zero_alpha = chained.with_alpha(0.0);
    check(
        (decay_rate(8.0, &zero_alpha, &ln2).unwrap() - (2.0 - 7f64.powf(-0.75))).abs() <= tol,
        "λ₈ at αΔf = 0",
    );
    let quiet = KineticParams::new(0.1, 2.0, 0.0, 0.0, NoiseKind::Isotropic, 1e-3).unwrap();
    check(check_assumptions(&quiet, &ln2, Profile::Admissibility(2.0)).passed(), "admissibility at σ = 0");
    let quiet_kinetic = KineticParams::new(0.1, 2.0, 0.0, 1.0, NoiseKind::Isotropic, 1e-3).unwrap();
    let (qv1, qv3) = v_pair(&quiet_kinetic, &ln2);
    check(
        (qv1 - (1.0 / 0.2 + 3.0 / 8.0)).abs() <= tol && (qv3 - (40.0 - 1.5)).abs() <= tol,
        "σ = 0 limit",
    );
    let boundary = KineticParams::new(1.0, 1.0 / std::f64::consts::SQRT_2, 0.0, 0.0, NoiseKind::Isotropic, 1e-3).unwrap();
    let poc = check_assumptions(&boundary, &ln2, Profile::PoC(4.0));
    check(poc.check("poc.i").is_some_and(|c| !c.pass && c.margin.abs() <= tol), "PoC boundary margin");

    let detail = if failures.is_empty() {
        format!("{grid_points} threshold-equivalence points, monotonicity grid and worked constants reproduced")
    } else {
        format!("mismatches: {}", failures.join(", "))
    };
    (failures.is_empty(), detail)
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let mut outcomes = vec![
        timed(1, "consensus oracle", secs(5), criterion_consensus_oracle),
        timed(2, "consensus-to-mean moment bound", secs(5), criterion_consensus_mean_gap),
        timed(3, "norm-equivalence sandwiches", secs(5), criterion_sandwiches),
        timed(4, "orthogonal decompositions", secs(5), criterion_decompositions),
    ];

    let mut decay_out = None;
    outcomes.push(timed(5, "centered-moment decay", secs(300), || {
        let cfg = ExperimentConfig {
            j: vec![256],
            dim: 2,
            replicas: 20,
            horizon: 50.0,
            ..ExperimentConfig::default()
        };
        match run_moment_decay(&cfg) {
            Ok(out) => {
                let (a, da) = verdict_ok(&out, "decay_2");
                let (b, db) = verdict_ok(&out, "decay_8");
                let dt_ok = out.summary.config["params"]["dt"].as_f64() == Some(1e-3);
                decay_out = Some(out);
                (a && b && dt_ok, format!("{da}; {db}; dt = 1e-3: {dt_ok}"))
            }
            Err(e) => (false, format!("error: {e}")),
        }
    }));

    outcomes.push(timed(6, "propagation-of-chaos exponent", secs(600), || {
        let mut cfg = ExperimentConfig {
            j: vec![32, 64, 128, 256, 512],
            replicas: 50,
            horizon: 20.0,
            ..ExperimentConfig::default()
        };
        cfg.poc.n_ref = 8192;
        match run_poc_sweep(&cfg) {
            Ok(out) => verdict_ok(&out, "poc_exponent"),
            Err(e) => (false, format!("error: {e}")),
        }
    }));

    outcomes.push(timed(7, "stability control and remainder", secs(600), || {
        let mut cfg = ExperimentConfig {
            j: vec![64, 256, 1024],
            replicas: 20,
            horizon: 20.0,
            ..ExperimentConfig::default()
        };
        cfg.stability.q = 1.0;
        cfg.stability.control_j = 128;
        match run_stability_sweep(&cfg) {
            Ok(out) => {
                let (a, da) = verdict_ok(&out, "twin_control");
                let (b, db) = verdict_ok(&out, "stability_remainder");
                (a && b, format!("{da}; {db}"))
            }
            Err(e) => (false, format!("error: {e}")),
        }
    }));

    outcomes.push(timed(8, "weighted-mean Monte Carlo rate", secs(120), || {
        let cfg = ExperimentConfig {
            j: vec![100, 1_000, 10_000, 100_000],
            replicas: 100,
            ..ExperimentConfig::default()
        };
        match run_wm_mc_rate(&cfg) {
            Ok(out) => verdict_ok(&out, "wm_rate"),
            Err(e) => (false, format!("error: {e}")),
        }
    }));

    outcomes.push(timed(9, "admissibility engine self-consistency", secs(1), criterion_admissibility_engine));

    outcomes.push(timed(10, "raw-moment boundedness", secs(1), || match &decay_out {
        Some(out) => {
            let (a, da) = verdict_ok(out, "raw_x8_bounded");
            let (b, db) = verdict_ok(out, "raw_v2_decreasing");
            (a && b, format!("{da}; {db} (from the criterion 5 run)"))
        }
        None => (false, "criterion 5 run unavailable".into()),
    }));

    outcomes.sort_by_key(|o| o.id);
    println!("\n==== acceptance summary ====");
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
