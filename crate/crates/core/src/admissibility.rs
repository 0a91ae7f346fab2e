//! Structural constants, decay rates and a clause-by-clause checker for the
//! parameter conditions, plus a heuristic search for an admissible parameter set.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{coupling_weight, lp_weight, order_label, psi2_coercive, psi2_weight};
use crate::error::{KcboError, Result};
use crate::objective::ObjectiveSpec;
use crate::params::{KineticParams, NoiseKind};

/// `μ_gap,p = 2 - (p-1)^{-(p-2)/p} exp(((p-1)/p) α(f̄ - f̲))`.
pub fn mu_gap(p: f64, alpha: f64, f_lower: f64, f_upper: f64) -> f64 {
    let spread = alpha * (f_upper - f_lower);
    2.0 - (p - 1.0).powf(-(p - 2.0) / p) * ((p - 1.0) / p * spread).exp()
}

/// Largest `α(f̄ - f̲)` with `μ_gap,p > 0`: `(p ln 2 + (p-2) ln(p-1))/(p-1)`.
pub fn mu_gap_threshold(p: f64) -> f64 {
    (p * LN_2 + (p - 2.0) * (p - 1.0).ln()) / (p - 1.0)
}

/// Norm-equivalence constants `(c₁(a,p), c₂(a,p))` of `φ_{a,p}`. `c₁ ≤ 0` is a valid
/// outcome meaning the form is not coercive.
pub fn norm_equiv(a: f64, p: f64, mass: f64, gamma: f64) -> (f64, f64) {
    let r = mass / gamma;
    if p == 2.0 {
        eigen_pair(a, r)
    } else {
        let young = 2.0 * (p - 1.0) * (r / p).powf(p / (p - 1.0));
        let half = 0.5f64.powf(p - 1.0);
        ((a - young).min(1.0 - half), (a + young).max(1.0 + half))
    }
}

/// Eigenvalues of `[[a, b/2], [b/2, 1]]`.
fn eigen_pair(a: f64, b: f64) -> (f64, f64) {
    let root = ((a - 1.0).powi(2) + b * b).sqrt();
    ((a + 1.0 - root) / 2.0, (a + 1.0 + root) / 2.0)
}

/// `(c₁⁽²⁾, c₂⁽²⁾)` for ψ₂.
pub fn psi2_equiv(mass: f64, gamma: f64) -> (f64, f64) {
    eigen_pair(psi2_weight(mass, gamma), 5.0 / gamma)
}

/// `(c_{ℰ,1}, c_{ℰ,2})`: the coupling energy against `Ê`.
pub fn coupling_equiv(mass: f64, gamma: f64) -> (f64, f64) {
    let a = coupling_weight(mass);
    let (f1, f2) = norm_equiv(a, 2.0, mass, gamma);
    let (m1, m2) = norm_equiv(a - 1.0 / mass, 2.0, mass, gamma);
    (f1.min(m1), f2.max(m2))
}

/// `K_{p,γ} = max{1 + 2^{p-1} γ^{-p}, 2^{p-1}}`.
pub fn moment_factor(p: f64, gamma: f64) -> f64 {
    let two = 2f64.powf(p - 1.0);
    (1.0 + two * gamma.powf(-p)).max(two)
}

/// `(C_{p,1}, C_{p,2})` with `C_{p,1}(𝔐_p(X) + 𝔐_p(V)) ≤ L_p ≤ C_{p,2}(𝔐_p(X) + 𝔐_p(V))`.
pub fn lp_moment_equiv(p: f64, mass: f64, gamma: f64) -> (f64, f64) {
    let (c1, c2) = if p == 2.0 {
        psi2_equiv(mass, gamma)
    } else {
        norm_equiv(lp_weight(p, mass, gamma), p, mass, gamma)
    };
    let k = moment_factor(p, gamma);
    (c1 / k, c2 * k)
}

/// `C_lem = exp(α(f̄ - f̲))`.
pub fn c_lem(alpha: f64, objective: &ObjectiveSpec) -> f64 {
    (alpha * objective.range()).exp()
}

/// `K_σ = 2σ²τ(S)(1 + C_lem)/m²`.
pub fn k_sigma(params: &KineticParams, objective: &ObjectiveSpec) -> f64 {
    let tau = params.noise.tau(objective.dim());
    2.0 * params.sigma.powi(2) * tau * (1.0 + c_lem(params.alpha, objective)) / params.mass.powi(2)
}

/// `(v₁, v₃)`.
pub fn v_pair(params: &KineticParams, objective: &ObjectiveSpec) -> (f64, f64) {
    let (m, g) = (params.mass, params.friction);
    let v1 = 1.0 / (m * g) + 3.0 / g.powi(3) - k_sigma(params, objective);
    let v3 = 2.0 * g / m - 3.0 / g;
    (v1, v3)
}

/// Predicted decay rates, one per requested order, and `κ = λ₈/8` when 8 is requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRates {
    pub rates: Vec<(f64, f64)>,
    pub kappa: Option<f64>,
}

impl DecayRates {
    pub fn get(&self, p: f64) -> Option<f64> {
        self.rates.iter().find(|(q, _)| *q == p).map(|(_, r)| *r)
    }
}

/// `λ_p`: `min{v₁, v₃}/c₂⁽²⁾` for `p = 2`, `p μ_gap,p/(4γ)` for `p > 2`.
pub fn decay_rate(p: f64, params: &KineticParams, objective: &ObjectiveSpec) -> Result<f64> {
    let (m, g) = (params.mass, params.friction);
    if p == 2.0 {
        if !psi2_coercive(m, g) {
            return Err(KcboError::Admissibility(format!(
                "λ₂ needs γ² > 7m/6, got γ = {g}, m = {m}"
            )));
        }
        let (v1, v3) = v_pair(params, objective);
        Ok(v1.min(v3) / psi2_equiv(m, g).1)
    } else if p > 2.0 {
        let mu = mu_gap(p, params.alpha, objective.f_lower(), objective.f_upper());
        Ok(p * mu / (4.0 * g))
    } else {
        Err(KcboError::InvalidParams(format!("p must be at least 2, got {p}")))
    }
}

pub fn decay_rates(params: &KineticParams, objective: &ObjectiveSpec, p_list: &[f64]) -> Result<DecayRates> {
    let rates = p_list
        .iter()
        .map(|&p| decay_rate(p, params, objective).map(|r| (p, r)))
        .collect::<Result<Vec<_>>>()?;
    let kappa = rates.iter().find(|(p, _)| *p == 8.0).map(|(_, r)| r / 8.0);
    Ok(DecayRates { rates, kappa })
}

/// Which set of conditions to check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", content = "order", rename_all = "snake_case")]
pub enum Profile {
    /// Basic admissibility at moment order `p`.
    Admissibility(f64),
    /// Admissibility plus the centered-decay conditions at order `p`.
    CenteredDecay(f64),
    /// Propagation of chaos with initial moments of order `2r`, `2r ≥ 8`.
    PoC(f64),
    /// Stability with remainder exponent `q > 1/2`.
    Stability(f64),
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Admissibility(p) => write!(f, "admissibility(p={p})"),
            Profile::CenteredDecay(p) => write!(f, "centered-decay(p={p})"),
            Profile::PoC(r) => write!(f, "poc(r={r})"),
            Profile::Stability(q) => write!(f, "stability(q={q})"),
        }
    }
}

/// One evaluated clause. `margin` is satisfied side minus required side, in the clause's
/// own units; it is `-inf` when a quantity the clause needs is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseCheck {
    pub id: String,
    pub pass: bool,
    pub margin: f64,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub profile: Profile,
    pub params: KineticParams,
    pub objective: String,
    pub constants: BTreeMap<String, f64>,
    pub checks: Vec<ClauseCheck>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClauseCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    pub fn check(&self, id: &str) -> Option<&ClauseCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "profile   {}\nobjective {}\nparams    m={} γ={} σ={} α={} noise={:?} dt={}\n\nconstants\n",
            self.profile,
            self.objective,
            self.params.mass,
            self.params.friction,
            self.params.sigma,
            self.params.alpha,
            self.params.noise,
            self.params.dt
        );
        let width = self.constants.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        for (k, v) in &self.constants {
            out.push_str(&format!("  {k:<width$}  {v:.6e}\n"));
        }
        out.push_str("\nclauses\n");
        let width = self.checks.iter().map(|c| c.id.chars().count()).max().unwrap_or(0);
        for c in &self.checks {
            out.push_str(&format!(
                "  {:<width$}  {}  margin {:>+.6e}  {}\n",
                c.id,
                if c.pass { "PASS" } else { "FAIL" },
                c.margin,
                c.anchor
            ));
        }
        out.push_str(&format!("\noverall {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        out
    }
}

struct Checker<'a> {
    params: &'a KineticParams,
    objective: &'a ObjectiveSpec,
    constants: BTreeMap<String, f64>,
    checks: Vec<ClauseCheck>,
}

impl Checker<'_> {
    fn constant(&mut self, name: String, value: f64) {
        if value.is_finite() {
            self.constants.insert(name, value);
        }
    }

    fn clause(&mut self, id: String, margin: f64, strict: bool, anchor: String) {
        if self.checks.iter().any(|c| c.id == id) {
            return;
        }
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        let pass = if strict { margin > 0.0 } else { margin >= 0.0 };
        self.checks.push(ClauseCheck { id, pass, margin, anchor });
    }

    fn mu(&self, p: f64) -> f64 {
        mu_gap(p, self.params.alpha, self.objective.f_lower(), self.objective.f_upper())
    }

    fn tau(&self) -> f64 {
        self.params.noise.tau(self.objective.dim())
    }

    fn common(&mut self) {
        let (m, g) = (self.params.mass, self.params.friction);
        let tau = self.tau();
        let clem = c_lem(self.params.alpha, self.objective);
        let (c1, c2) = psi2_equiv(m, g);
        let (v1, v3) = v_pair(self.params, self.objective);
        let (ce1, ce2) = coupling_equiv(m, g);
        let sigma2 = self.params.sigma.powi(2);
        let spread = self.params.alpha * self.objective.range();
        self.constant("K_Z".into(), g / m + 1.0 / g);
        self.constant("K_Y".into(), 2.0 / m + 1.0 / (g * g));
        self.constant("a_2".into(), psi2_weight(m, g));
        self.constant("c1_psi2".into(), c1);
        self.constant("c2_psi2".into(), c2);
        self.constant("C_lem".into(), clem);
        self.constant("K_sigma".into(), k_sigma(self.params, self.objective));
        self.constant("tau_S".into(), tau);
        self.constant("v1".into(), v1);
        self.constant("v3".into(), v3);
        self.constant("mu_gap_2".into(), self.mu(2.0));
        if let Ok(l2) = decay_rate(2.0, self.params, self.objective) {
            self.constant("lambda_2".into(), l2);
        }
        self.constant(
            "C_M".into(),
            2.0 * self.params.alpha * self.objective.lipschitz() * (2.0 * spread).exp(),
        );
        self.constant("Lambda_noise".into(), sigma2 * tau / (m * m));
        self.constant("Lambda_noise_chi".into(), sigma2 * self.params.noise.chi(self.objective.dim(), 2.0) / (m * m));
        self.constant("c_E1".into(), ce1);
        self.constant("c_E2".into(), ce2);
        if ce1 > 0.0 {
            self.constant("C_norm".into(), ((2.0 / ce1) * (4.0 / (m * m)).max(1.0 / (g * g))).sqrt());
        }
    }

    fn order_constants(&mut self, p: f64) {
        if p == 2.0 {
            return;
        }
        let (m, g) = (self.params.mass, self.params.friction);
        let l = order_label(p);
        let mu = self.mu(p);
        let a = lp_weight(p, m, g);
        let (c1, c2) = norm_equiv(a, p, m, g);
        let chi = self.params.noise.chi(self.objective.dim(), p);
        let clem = c_lem(self.params.alpha, self.objective);
        let c_pos = 1.0 - 3.0 * mu / 16.0 - m * (p - 1.0) * (p - 2.0) / p;
        let eta = c_pos - mu / 4.0;
        self.constant(format!("a_{l}"), a);
        self.constant(format!("c1_phi_{l}"), c1);
        self.constant(format!("c2_phi_{l}"), c2);
        self.constant(format!("mu_gap_{l}"), mu);
        self.constant(format!("chi_S_{l}"), chi);
        self.constant(format!("C_pos_{l}"), c_pos);
        self.constant(format!("eta_{l}"), eta);
        self.constant(format!("lambda_{l}"), p * mu / (4.0 * g));
        if mu > 0.0 {
            let lambda = 2.0 * (p - 2.0) * chi / (m * m)
                * (mu * m * m / (64.0 * chi)).powf(-2.0 / (p - 2.0))
                * (1.0 + (clem / 2.0).powf(2.0 / (p - 2.0)));
            self.constant(format!("Lambda_{l}"), lambda);
        }
        if eta > 0.0 {
            self.constant(format!("Gamma_Y_{l}"), gamma_y(p, m, mu, eta));
        }
        if p == 8.0 {
            self.constant("kappa".into(), mu / (4.0 * g));
        }
    }

    fn admissibility(&mut self, p: f64) {
        let (m, g) = (self.params.mass, self.params.friction);
        if p == 2.0 {
            self.clause("adm_2.friction".into(), g * g - 1.5 * m, true, "γ² > 3m/2".into());
            let ks = k_sigma(self.params, self.objective);
            self.clause(
                "adm_2.noise".into(),
                1.0 / (m * g) - ks,
                true,
                "K_σ = 2σ²τ(S)(1+C_lem)/m² < 1/(mγ)".into(),
            );
            return;
        }
        let l = order_label(p);
        let mu = self.mu(p);
        self.clause(format!("adm_{l}.mu_gap"), mu, true, format!("μ_gap,{l} > 0"));
        self.clause(format!("adm_{l}.friction"), g * g - m * (p - 2.0), true, "γ² > m(p-2)".into());
        self.clause(
            format!("adm_{l}.mass"),
            p * (16.0 - 7.0 * mu) / (16.0 * (p - 1.0) * (p - 2.0)) - m,
            true,
            "m < p(16 - 7μ_gap,p)/(16(p-1)(p-2))".into(),
        );
        let young = 2.0 * (p - 1.0) * (m / (p * g)).powf(p / (p - 1.0));
        self.clause(
            format!("adm_{l}.coercivity"),
            lp_weight(p, m, g) - young,
            true,
            "a_p > 2(p-1)(m/(pγ))^{p/(p-1)}".into(),
        );
    }

    fn centered_decay(&mut self, p: f64) {
        self.admissibility(p);
        if p == 2.0 {
            return;
        }
        let (m, g, s) = (self.params.mass, self.params.friction, self.params.sigma);
        let l = order_label(p);
        let mu = self.mu(p);
        let eta = 1.0 - 3.0 * mu / 16.0 - m * (p - 1.0) * (p - 2.0) / p - mu / 4.0;
        self.clause(format!("decay_{l}.eta"), eta, true, "η_p = C_pos - μ_gap,p/4 > 0".into());
        let gy = if eta > 0.0 { g - gamma_y(p, m, mu, eta) } else { f64::NEG_INFINITY };
        self.clause(format!("decay_{l}.gamma_y"), gy, false, "γ ≥ Γ_Y,p".into());
        let closure = if mu > 0.0 {
            let chi = self.params.noise.chi(self.objective.dim(), p);
            let clem = c_lem(self.params.alpha, self.objective);
            let lambda = 2.0 * (p - 2.0) * chi / (m * m)
                * (mu * m * m / (64.0 * chi)).powf(-2.0 / (p - 2.0))
                * (1.0 + (clem / 2.0).powf(2.0 / (p - 2.0)));
            let lhs = lambda * s.powf(2.0 * p / (p - 2.0)) * g.powf(2.0 / (p - 2.0))
                + (p - 1.0) / (4.0 * g)
                + 2.0 * m * (p - 1.0) / (p * g)
                + p * mu / (4.0 * g) * (1.0 + m / (p * g));
            (p + 1.0) / (2.0 * m) * g - lhs
        } else {
            f64::NEG_INFINITY
        };
        self.clause(
            format!("decay_{l}.z_closure"),
            closure,
            false,
            "Λ_p σ^{2p/(p-2)} γ^{2/(p-2)} + (p-1)/(4γ) + 2m(p-1)/(pγ) + (pμ/(4γ))(1 + m/(pγ)) ≤ (p+1)γ/(2m)".into(),
        );
    }

    /// Shared clauses of the propagation-of-chaos and stability conditions.
    fn coupled(&mut self, high: f64, tag: &str) {
        for p in [2.0, 8.0, high] {
            self.order_constants(p);
            self.centered_decay(p);
        }
        let (m, g, s) = (self.params.mass, self.params.friction, self.params.sigma);
        let tau = self.tau();
        let clem = c_lem(self.params.alpha, self.objective);
        let (c1, c2) = psi2_equiv(m, g);
        let (v1, v3) = v_pair(self.params, self.objective);
        let mu8 = self.mu(8.0);
        self.clause(
            format!("{tag}.compat"),
            m / (2.0 * tau * (1.0 + clem)) - s * s * g,
            true,
            "σ²γ < m/(2τ(S)(1+C_lem))".into(),
        );
        self.clause(format!("{tag}.i"), g - m / SQRT_2, true, "γ > m/√2".into());
        self.clause(
            format!("{tag}.ii_quadratic"),
            v1.min(v3) - c2 * mu8 / (4.0 * g),
            true,
            "min{v₁, v₃} > c₂⁽²⁾ μ_gap,8/(4γ)".into(),
        );
        let l = order_label(high);
        self.clause(
            format!("{tag}.ii_high"),
            self.mu(high) - mu8 / 2.0,
            true,
            format!("μ_gap,{l} > μ_gap,8/2"),
        );
        self.clause(format!("{tag}.iii"), m * m / (g * tau) - s * s, false, "σ² ≤ m²/(γτ(S))".into());
        let l2 = if psi2_coercive(m, g) {
            v1.min(v3) / c2
        } else {
            f64::NAN
        };
        let kappa = 8.0 * mu8 / (4.0 * g) / 8.0;
        self.clause(
            format!("{tag}.iv"),
            m * m * c1 * (l2 - kappa) / (2.0 * tau * (1.0 + clem)) - s * s,
            false,
            "σ² ≤ m² c₁⁽²⁾(λ₂ - κ)/(2τ(S)(1+C_lem))".into(),
        );
    }
}

/// `Γ_Y,p = max{1, (2·4^{p-1}(2/m+1)/η_p)^{1/(p-2)}, μ m (p-1)/(2η_p)}`.
pub fn gamma_y(p: f64, mass: f64, mu: f64, eta: f64) -> f64 {
    let second = (2.0 * 4f64.powf(p - 1.0) * (2.0 / mass + 1.0) / eta).powf(1.0 / (p - 2.0));
    let third = mu * mass * (p - 1.0) / (2.0 * eta);
    1f64.max(second).max(third)
}

/// Evaluates every clause of `profile` and the structural constants it involves.
pub fn check_assumptions(
    params: &KineticParams,
    objective: &ObjectiveSpec,
    profile: Profile,
) -> AdmissibilityReport {
    let mut c = Checker {
        params,
        objective,
        constants: BTreeMap::new(),
        checks: Vec::new(),
    };
    c.common();
    let ill = |c: &mut Checker, what: String| c.clause("profile".into(), f64::NEG_INFINITY, true, what);
    match profile {
        Profile::Admissibility(p) | Profile::CenteredDecay(p) if p < 2.0 || !p.is_finite() => {
            ill(&mut c, format!("moment order p = {p} must be at least 2"))
        }
        Profile::Admissibility(p) => {
            c.order_constants(p);
            c.admissibility(p);
        }
        Profile::CenteredDecay(p) => {
            c.order_constants(p);
            c.centered_decay(p);
        }
        Profile::PoC(r) if !(2.0 * r >= 8.0 && r.is_finite()) => ill(&mut c, format!("r = {r} needs 2r ≥ 8")),
        Profile::PoC(r) => c.coupled(2.0 * r, "poc"),
        Profile::Stability(q) if !(q > 0.5 && q.is_finite()) => ill(&mut c, format!("q = {q} must exceed 1/2")),
        Profile::Stability(q) => {
            let p_star = 8f64.max(8.0 * q);
            c.constant("p_star".into(), p_star);
            c.coupled(p_star, "stab")
        }
    }
    AdmissibilityReport {
        profile,
        params: *params,
        objective: objective.name().to_string(),
        constants: c.constants,
        checks: c.checks,
    }
}

/// Knobs of [`suggest_admissible`] that the conditions do not determine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub alpha: f64,
    pub noise: NoiseKind,
    /// Largest step to use; lowered to `m/(2γ)` when the friction window requires it.
    pub dt: f64,
    /// Also require the propagation-of-chaos conditions for this `r`.
    pub poc_r: Option<f64>,
    /// Also require the stability conditions for this `q`.
    pub stability_q: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            noise: NoiseKind::Isotropic,
            dt: crate::params::DEFAULT_DT,
            poc_r: None,
            stability_q: None,
        }
    }
}

const MASS_GRID: [f64; 14] = [0.5, 0.3, 0.2, 0.15, 0.12, 0.1, 0.08, 0.06, 0.05, 0.04, 0.03, 0.02, 0.01, 0.005];
const GAMMA_STEPS: usize = 4;
const SIGMA_HALVINGS: usize = 24;

fn profiles_for(p_targets: &[f64], opts: &SearchOptions) -> Vec<Profile> {
    let mut out: Vec<Profile> = p_targets.iter().map(|&p| Profile::CenteredDecay(p)).collect();
    out.extend(opts.poc_r.map(Profile::PoC));
    out.extend(opts.stability_q.map(Profile::Stability));
    out
}

/// Merges several reports into one whose checks are the union (first wins on ids).
fn merge(reports: Vec<AdmissibilityReport>) -> AdmissibilityReport {
    let mut it = reports.into_iter();
    let mut base = it.next().expect("at least one profile");
    for r in it {
        for (k, v) in r.constants {
            base.constants.entry(k).or_insert(v);
        }
        for c in r.checks {
            if !base.checks.iter().any(|b| b.id == c.id) {
                base.checks.push(c);
            }
        }
    }
    base
}

/// Lower bound on γ from the σ-independent clauses.
fn gamma_floor(mass: f64, p_targets: &[f64], alpha: f64, objective: &ObjectiveSpec) -> f64 {
    let mut lo = (1.5 * mass).sqrt();
    for &p in p_targets.iter().chain(std::iter::once(&8.0)) {
        if p <= 2.0 {
            continue;
        }
        let mu = mu_gap(p, alpha, objective.f_lower(), objective.f_upper());
        let eta = 1.0 - 3.0 * mu / 16.0 - mass * (p - 1.0) * (p - 2.0) / p - mu / 4.0;
        lo = lo.max((mass * (p - 2.0)).sqrt());
        lo = lo.max((2.0 * mass * (p - 2.0)).sqrt());
        lo = lo.max(mass / p * (8.0 * p * (p - 1.0)).powf((p - 1.0) / p));
        if eta > 0.0 {
            lo = lo.max(gamma_y(p, mass, mu, eta));
        }
    }
    lo
}

/// Searches `m → γ → σ` for parameters passing the centered-decay conditions at every
/// order in `p_targets` (plus the coupled conditions requested in `opts`).
///
/// Each full clause evaluation uses one unit of `budget`. On failure the error carries
/// the report with the fewest failing clauses.
pub fn suggest_admissible(
    objective: &ObjectiveSpec,
    p_targets: &[f64],
    budget: usize,
    opts: &SearchOptions,
) -> Result<(KineticParams, AdmissibilityReport)> {
    let profiles = profiles_for(p_targets, opts);
    if profiles.is_empty() {
        return Err(KcboError::InvalidParams("no target orders or profiles given".into()));
    }
    let tau = opts.noise.tau(objective.dim());
    let clem = c_lem(opts.alpha, objective);
    let mut used = 0usize;
    let mut best: Option<(usize, f64, AdmissibilityReport)> = None;
    for &m in &MASS_GRID {
        let g_lo = gamma_floor(m, p_targets, opts.alpha, objective) * (1.0 + 1e-6);
        let g_hi = (m / (2.0 * opts.dt)).max(1.5 * g_lo);
        for k in 0..GAMMA_STEPS {
            // geometric steps from just above the floor toward the step-size guard
            let frac = (k as f64 + 0.5) / GAMMA_STEPS as f64;
            let g = g_lo * (g_hi / g_lo).powf(frac * 0.5);
            let dt = opts.dt.min(m / (2.0 * g));
            let s_max = (m / (2.0 * tau * (1.0 + clem) * g)).sqrt().min((m * m / (g * tau)).sqrt());
            let mut s = 0.9 * s_max;
            for _ in 0..SIGMA_HALVINGS {
                if used >= budget {
                    return Err(KcboError::NotFound {
                        best: best.map(|b| Box::new(b.2)),
                    });
                }
                used += 1;
                let params = KineticParams {
                    mass: m,
                    friction: g,
                    sigma: s,
                    alpha: opts.alpha,
                    noise: opts.noise,
                    dt,
                };
                let report = merge(profiles.iter().map(|&p| check_assumptions(&params, objective, p)).collect());
                if report.passed() && params.validate().is_ok() {
                    return Ok((params, report));
                }
                let fails = report.failures().count();
                let worst = report.failures().map(|c| c.margin).fold(f64::INFINITY, f64::min);
                let better = match &best {
                    None => true,
                    Some((bf, bw, _)) => fails < *bf || (fails == *bf && worst > *bw),
                };
                if better {
                    best = Some((fails, worst, report));
                }
                s *= 0.5;
            }
        }
    }
    Err(KcboError::NotFound {
        best: best.map(|b| Box::new(b.2)),
    })
}
