//! Euler–Maruyama integration of the kinetic system, the first-order baseline, and
//! synchronously coupled pairs that share Brownian increments.

use std::sync::Arc;

use crate::consensus::{apply_noise, consensus_into, ConsensusScratch};
use crate::diagnostics::{lyapunov_report, LyapunovReport, ReportSpec};
use crate::ensemble::ParticleEnsemble;
use crate::error::{KcboError, Result};
use crate::objective::ObjectiveSpec;
use crate::params::KineticParams;
use crate::rng::RngStream;

/// Minimum reference size relative to the coupled system size.
pub const MIN_REFERENCE_RATIO: usize = 8;

/// Number of steps needed to reach `horizon` with step `dt`.
pub fn steps_for(horizon: f64, dt: f64) -> u64 {
    if horizon <= 0.0 {
        return 0;
    }
    (horizon / dt - 1e-9).ceil().max(0.0) as u64
}

/// Per-ensemble scratch space; reuse across steps to avoid reallocating.
#[derive(Debug, Default, Clone)]
pub struct StepScratch {
    consensus: ConsensusScratch,
    point: Vec<f64>,
    increments: Vec<f64>,
    noise: Vec<f64>,
    disp: Vec<f64>,
}

impl StepScratch {
    fn prepare(&mut self, count: usize, dim: usize) {
        self.point.resize(dim, 0.0);
        self.increments.resize(count * dim, 0.0);
        self.noise.resize(dim, 0.0);
        self.disp.resize(dim, 0.0);
    }
}

/// Applies one kinetic Euler–Maruyama update given the consensus point and increments.
///
/// Drift and diffusion of the velocity both use the pre-step positions.
fn advance_kinetic(
    ens: &mut ParticleEnsemble,
    params: &KineticParams,
    consensus: &[f64],
    increments: &[f64],
    noise: &mut [f64],
    disp: &mut [f64],
) -> Result<()> {
    let dim = ens.dim();
    let dt = params.dt;
    let friction = params.friction / params.mass * dt;
    let force = dt / params.mass;
    let diffusion = params.sigma / params.mass;
    let mut finite = true;
    for ((x, v), dw) in ens
        .positions
        .chunks_exact_mut(dim)
        .zip(ens.velocities.chunks_exact_mut(dim))
        .zip(increments.chunks_exact(dim))
    {
        for k in 0..dim {
            disp[k] = x[k] - consensus[k];
        }
        apply_noise(disp, params.noise, dw, noise);
        for k in 0..dim {
            let v_old = v[k];
            x[k] += v_old * dt;
            v[k] = v_old - friction * v_old - force * disp[k] + diffusion * noise[k];
            finite &= x[k].is_finite() && v[k].is_finite();
        }
    }
    ens.steps += 1;
    ens.time = ens.steps as f64 * dt;
    if finite {
        Ok(())
    } else {
        Err(KcboError::Blowup {
            step: ens.steps,
            time: ens.time,
        })
    }
}

/// One kinetic Euler–Maruyama step, reusing `scratch`.
pub fn em_step_with(
    ens: &mut ParticleEnsemble,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    stream: &mut RngStream,
    scratch: &mut StepScratch,
) -> Result<()> {
    let (count, dim) = (ens.count(), ens.dim());
    scratch.prepare(count, dim);
    consensus_into(
        &ens.positions,
        dim,
        params.alpha,
        objective,
        &mut scratch.consensus,
        &mut scratch.point,
    )?;
    stream.fill_increments(&mut scratch.increments, params.dt);
    advance_kinetic(
        ens,
        params,
        &scratch.point,
        &scratch.increments,
        &mut scratch.noise,
        &mut scratch.disp,
    )
}

/// One kinetic Euler–Maruyama step:
///
/// ```text
/// M  = M_α(X)
/// X' = X + V dt
/// V' = V - (γ/m) V dt - (1/m)(X - M) dt + (σ/m) S(X - M) ΔW
/// ```
pub fn em_step(
    ens: &mut ParticleEnsemble,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    stream: &mut RngStream,
) -> Result<()> {
    em_step_with(ens, params, objective, stream, &mut StepScratch::default())
}

/// First-order baseline state: positions only.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderEnsemble {
    dim: usize,
    pub(crate) positions: Vec<f64>,
    pub(crate) steps: u64,
}

impl FirstOrderEnsemble {
    pub fn new(dim: usize, positions: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(KcboError::ZeroDimension);
        }
        if positions.is_empty() {
            return Err(KcboError::EmptyEnsemble);
        }
        if positions.len() % dim != 0 {
            return Err(KcboError::ShapeMismatch(format!(
                "{} positions is not a multiple of dim {dim}",
                positions.len()
            )));
        }
        Ok(Self {
            dim,
            positions,
            steps: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}

/// One Euler–Maruyama step of `dX = -(X - M) dt + σ S(X - M) dW` (mass and friction unused).
pub fn em_step_first_order(
    ens: &mut FirstOrderEnsemble,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    stream: &mut RngStream,
    scratch: &mut StepScratch,
) -> Result<()> {
    let dim = ens.dim;
    let count = ens.positions.len() / dim;
    scratch.prepare(count, dim);
    consensus_into(
        &ens.positions,
        dim,
        params.alpha,
        objective,
        &mut scratch.consensus,
        &mut scratch.point,
    )?;
    stream.fill_increments(&mut scratch.increments, params.dt);
    let mut finite = true;
    for (x, dw) in ens
        .positions
        .chunks_exact_mut(dim)
        .zip(scratch.increments.chunks_exact(dim))
    {
        for k in 0..dim {
            scratch.disp[k] = x[k] - scratch.point[k];
        }
        apply_noise(&scratch.disp, params.noise, dw, &mut scratch.noise);
        for k in 0..dim {
            x[k] += -scratch.disp[k] * params.dt + params.sigma * scratch.noise[k];
            finite &= x[k].is_finite();
        }
    }
    ens.steps += 1;
    if finite {
        Ok(())
    } else {
        Err(KcboError::Blowup {
            step: ens.steps,
            time: ens.steps as f64 * params.dt,
        })
    }
}

/// Consensus trajectory `t_k ↦ M_α` of a reference ensemble, one entry per step.
///
/// Used as a stand-in for the mean-field consensus `M_α(ρ̄_t)`, which is a
/// deterministic function of time, so one path can be shared by many coupled runs.
#[derive(Debug, Clone)]
pub struct ConsensusPath {
    dim: usize,
    reference_size: usize,
    points: Vec<f64>,
}

impl ConsensusPath {
    /// Evolves `reference` for `n_steps` with its own empirical consensus and records
    /// the consensus at each pre-step state.
    pub fn record(
        mut reference: ParticleEnsemble,
        params: &KineticParams,
        objective: &ObjectiveSpec,
        stream: &mut RngStream,
        n_steps: u64,
    ) -> Result<Self> {
        let dim = reference.dim();
        let reference_size = reference.count();
        let mut points = Vec::with_capacity(n_steps as usize * dim);
        let mut scratch = StepScratch::default();
        for _ in 0..n_steps {
            em_step_with(&mut reference, params, objective, stream, &mut scratch)?;
            points.extend_from_slice(&scratch.point);
        }
        Ok(Self {
            dim,
            reference_size,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reference_size(&self) -> usize {
        self.reference_size
    }

    /// Consensus used for step `k` (taken from the state at step `k`).
    pub fn at(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }
}

/// Where system B of a coupled pair reads its consensus from.
#[derive(Debug, Clone)]
pub enum ConsensusSource {
    /// B's own empirical consensus: a particle-vs-particle coupling.
    Empirical,
    /// A reference ensemble evolved alongside with independent noise.
    ReferenceProxy {
        reference: ParticleEnsemble,
        stream: RngStream,
    },
    /// A precomputed reference consensus path.
    Path(Arc<ConsensusPath>),
}

/// Two ensembles driven by the same Brownian increments.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub system_a: ParticleEnsemble,
    pub system_b: ParticleEnsemble,
    source: ConsensusSource,
    scratch_a: StepScratch,
    scratch_b: StepScratch,
    scratch_ref: StepScratch,
}

impl CoupledPair {
    pub fn new(
        system_a: ParticleEnsemble,
        system_b: ParticleEnsemble,
        source: ConsensusSource,
    ) -> Result<Self> {
        if !system_a.same_shape(&system_b) {
            return Err(KcboError::ShapeMismatch(format!(
                "coupled systems differ: {}×{} vs {}×{}",
                system_a.count(),
                system_a.dim(),
                system_b.count(),
                system_b.dim()
            )));
        }
        if system_a.steps() != system_b.steps() {
            return Err(KcboError::ShapeMismatch("coupled systems at different times".into()));
        }
        let min_ref = MIN_REFERENCE_RATIO * system_a.count();
        match &source {
            ConsensusSource::Empirical => {}
            ConsensusSource::ReferenceProxy { reference, .. } => {
                if reference.dim() != system_a.dim() || reference.count() < min_ref {
                    return Err(KcboError::ShapeMismatch(format!(
                        "reference must have dim {} and at least {min_ref} particles",
                        system_a.dim()
                    )));
                }
            }
            ConsensusSource::Path(path) => {
                if path.dim != system_a.dim() || path.reference_size < min_ref {
                    return Err(KcboError::ShapeMismatch(format!(
                        "consensus path must have dim {} and come from at least {min_ref} particles",
                        system_a.dim()
                    )));
                }
            }
        }
        Ok(Self {
            system_a,
            system_b,
            source,
            scratch_a: StepScratch::default(),
            scratch_b: StepScratch::default(),
            scratch_ref: StepScratch::default(),
        })
    }

    pub fn source(&self) -> &ConsensusSource {
        &self.source
    }

    /// `δX = X_a - X_b`, row-major.
    pub fn position_gap(&self) -> Vec<f64> {
        diff(&self.system_a.positions, &self.system_b.positions)
    }

    /// `δV = V_a - V_b`, row-major.
    pub fn velocity_gap(&self) -> Vec<f64> {
        diff(&self.system_a.velocities, &self.system_b.velocities)
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// One synchronous step: a single draw of `ΔW` per particle index drives both systems.
///
/// System A uses its own consensus; system B uses the consensus named by the pair's
/// [`ConsensusSource`]. A live reference ensemble steps with its own consensus and
/// increments drawn from its own stream.
pub fn coupled_step(
    pair: &mut CoupledPair,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    stream: &mut RngStream,
) -> Result<()> {
    let CoupledPair {
        system_a,
        system_b,
        source,
        scratch_a,
        scratch_b,
        scratch_ref,
    } = pair;
    let (count, dim) = (system_a.count(), system_a.dim());
    scratch_a.prepare(count, dim);
    scratch_b.prepare(count, dim);

    consensus_into(
        &system_a.positions,
        dim,
        params.alpha,
        objective,
        &mut scratch_a.consensus,
        &mut scratch_a.point,
    )?;
    match source {
        ConsensusSource::Empirical => {
            consensus_into(
                &system_b.positions,
                dim,
                params.alpha,
                objective,
                &mut scratch_b.consensus,
                &mut scratch_b.point,
            )?;
        }
        ConsensusSource::ReferenceProxy { reference, stream } => {
            em_step_with(reference, params, objective, stream, scratch_ref)?;
            scratch_b.point.copy_from_slice(&scratch_ref.point);
        }
        ConsensusSource::Path(path) => {
            let k = system_b.steps() as usize;
            if k >= path.len() {
                return Err(KcboError::ShapeMismatch(format!(
                    "consensus path has {} steps, step {k} requested",
                    path.len()
                )));
            }
            scratch_b.point.copy_from_slice(path.at(k));
        }
    }

    stream.fill_increments(&mut scratch_a.increments, params.dt);
    advance_kinetic(
        system_a,
        params,
        &scratch_a.point,
        &scratch_a.increments,
        &mut scratch_a.noise,
        &mut scratch_a.disp,
    )?;
    advance_kinetic(
        system_b,
        params,
        &scratch_b.point,
        &scratch_a.increments,
        &mut scratch_b.noise,
        &mut scratch_b.disp,
    )
}

/// Runs `ceil(T/dt)` kinetic steps, calling `observe` on the initial state, every
/// `stride` steps, and on the final state.
pub fn run_observed<F>(
    ens: &mut ParticleEnsemble,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    horizon: f64,
    stream: &mut RngStream,
    stride: u64,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(&ParticleEnsemble) -> Result<()>,
{
    let stride = stride.max(1);
    let n = steps_for(horizon, params.dt);
    let mut scratch = StepScratch::default();
    observe(ens)?;
    for k in 1..=n {
        em_step_with(ens, params, objective, stream, &mut scratch)?;
        if k % stride == 0 || k == n {
            observe(ens)?;
        }
    }
    Ok(())
}

/// [`run_observed`] with a [`LyapunovReport`] built at every observation.
pub fn run_trajectory<F>(
    mut ens: ParticleEnsemble,
    params: &KineticParams,
    objective: &ObjectiveSpec,
    horizon: f64,
    stream: &mut RngStream,
    stride: u64,
    report: &ReportSpec,
    mut observer: F,
) -> Result<ParticleEnsemble>
where
    F: FnMut(&LyapunovReport),
{
    run_observed(&mut ens, params, objective, horizon, stream, stride, |e| {
        observer(&lyapunov_report(e, params, objective, report)?);
        Ok(())
    })?;
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::InitialLaw;
    use crate::objective::make_objective;
    use crate::params::NoiseKind;

    fn params(sigma: f64, dt: f64) -> KineticParams {
        KineticParams::new(0.5, 1.0, sigma, 1.0, NoiseKind::Isotropic, dt).unwrap()
    }

    #[test]
    fn single_particle_without_noise_matches_closed_form_step() {
        let f = make_objective("cosine_well", 2).unwrap();
        let p = params(0.0, 0.01);
        let mut ens = ParticleEnsemble::new(2, vec![1.0, -2.0], vec![0.5, 0.25]).unwrap();
        em_step(&mut ens, &p, &f, &mut RngStream::new(0, 0)).unwrap();
        let shrink = 1.0 - p.friction * p.dt / p.mass;
        assert_eq!(ens.velocities(), &[0.5 * shrink, 0.25 * shrink]);
        assert_eq!(ens.positions(), &[1.0 + 0.5 * 0.01, -2.0 + 0.25 * 0.01]);
        assert_eq!(ens.steps(), 1);
        assert!((ens.time() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn consensus_fixed_point_is_preserved() {
        let f = make_objective("ackley", 3).unwrap();
        let p = params(2.0, 1e-3);
        let mut ens = ParticleEnsemble::at_rest(&[0.3, 0.2, -0.1], 6).unwrap();
        let before = ens.clone();
        let mut s = RngStream::new(1, 0);
        for _ in 0..50 {
            em_step(&mut ens, &p, &f, &mut s).unwrap();
        }
        assert_eq!(ens.positions(), before.positions());
        assert!(ens.velocities().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn first_order_hand_examples() {
        let f = make_objective("cosine_well", 1).unwrap();
        let p = KineticParams::new(1.0, 1.0, 0.0, 0.0, NoiseKind::Isotropic, 0.1).unwrap();
        let mut scratch = StepScratch::default();
        let mut ens = FirstOrderEnsemble::new(1, vec![-1.0, 1.0]).unwrap();
        em_step_first_order(&mut ens, &p, &f, &mut RngStream::new(0, 0), &mut scratch).unwrap();
        assert!((ens.positions()[0] + 0.9).abs() < 1e-15);
        assert!((ens.positions()[1] - 0.9).abs() < 1e-15);

        let mut single = FirstOrderEnsemble::new(1, vec![2.5]).unwrap();
        em_step_first_order(&mut single, &p, &f, &mut RngStream::new(0, 0), &mut scratch).unwrap();
        assert_eq!(single.positions(), &[2.5]);

        let noisy = p.with_sigma(1.0);
        let mut same = FirstOrderEnsemble::new(1, vec![0.7; 3]).unwrap();
        em_step_first_order(&mut same, &noisy, &f, &mut RngStream::new(3, 0), &mut scratch).unwrap();
        assert_eq!(same.positions(), &[0.7; 3]);
    }

    #[test]
    fn blowup_is_reported_with_step() {
        let f = ObjectiveSpec::custom(
            "explode",
            1,
            0.0,
            1.0,
            1.0,
            Arc::new(|x: &[f64]| if x[0] > 1.5 { f64::NAN } else { 0.0 }),
        )
        .unwrap();
        let p = params(0.0, 0.01);
        let mut ens = ParticleEnsemble::new(1, vec![0.0, 1.0], vec![100.0, 0.0]).unwrap();
        let mut s = RngStream::new(0, 0);
        let mut err = None;
        for _ in 0..10 {
            if let Err(e) = em_step(&mut ens, &p, &f, &mut s) {
                err = Some(e);
                break;
            }
        }
        assert!(matches!(err, Some(KcboError::Numerical(_))));

        let flat = ObjectiveSpec::custom("flat", 1, 0.0, 0.0, 1.0, Arc::new(|_: &[f64]| 0.0)).unwrap();
        let light = KineticParams::new(1e-3, 1e-3, 0.0, 1.0, NoiseKind::Isotropic, 0.1).unwrap();
        let mut far = ParticleEnsemble::new(1, vec![-1e307, 1e307], vec![0.0, 0.0]).unwrap();
        let e = em_step(&mut far, &light, &flat, &mut s);
        assert!(matches!(e, Err(KcboError::Blowup { step: 1, .. })), "{e:?}");
    }

    #[test]
    fn identical_coupled_systems_stay_bitwise_equal() {
        let f = make_objective("tanh_rastrigin", 2).unwrap();
        let p = params(0.8, 1e-3);
        let ens = ParticleEnsemble::sample(&InitialLaw::default(), 16, 2, &mut RngStream::new(9, 0)).unwrap();
        let mut pair = CoupledPair::new(ens.clone(), ens, ConsensusSource::Empirical).unwrap();
        let mut s = RngStream::new(9, 1);
        for _ in 0..500 {
            coupled_step(&mut pair, &p, &f, &mut s).unwrap();
        }
        assert!(pair.position_gap().iter().all(|&d| d == 0.0));
        assert!(pair.velocity_gap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn reference_proxy_requires_enough_particles() {
        let law = InitialLaw::default();
        let mut s = RngStream::new(1, 0);
        let a = ParticleEnsemble::sample(&law, 4, 2, &mut s).unwrap();
        let small = ParticleEnsemble::sample(&law, 31, 2, &mut s).unwrap();
        let source = ConsensusSource::ReferenceProxy {
            reference: small,
            stream: RngStream::new(1, 1),
        };
        assert!(CoupledPair::new(a.clone(), a.clone(), source).is_err());
        let b = ParticleEnsemble::sample(&law, 5, 2, &mut s).unwrap();
        assert!(matches!(
            CoupledPair::new(a, b, ConsensusSource::Empirical),
            Err(KcboError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn path_source_matches_live_reference() {
        let f = make_objective("cosine_well", 2).unwrap();
        let p = params(0.5, 1e-3);
        let law = InitialLaw::default();
        let a = ParticleEnsemble::sample(&law, 4, 2, &mut RngStream::new(2, 0)).unwrap();
        let reference = ParticleEnsemble::sample(&law, 64, 2, &mut RngStream::new(2, 1)).unwrap();
        let path = ConsensusPath::record(reference.clone(), &p, &f, &mut RngStream::new(2, 2), 200).unwrap();
        let mut live = CoupledPair::new(
            a.clone(),
            a.clone(),
            ConsensusSource::ReferenceProxy {
                reference,
                stream: RngStream::new(2, 2),
            },
        )
        .unwrap();
        let mut recorded = CoupledPair::new(a.clone(), a, ConsensusSource::Path(Arc::new(path))).unwrap();
        let (mut s1, mut s2) = (RngStream::new(2, 3), RngStream::new(2, 3));
        for _ in 0..200 {
            coupled_step(&mut live, &p, &f, &mut s1).unwrap();
            coupled_step(&mut recorded, &p, &f, &mut s2).unwrap();
        }
        assert_eq!(live.system_b, recorded.system_b);
        assert!(coupled_step(&mut recorded, &p, &f, &mut s2).is_err());
    }

    #[test]
    fn observation_count_and_final_time() {
        let f = make_objective("cosine_well", 1).unwrap();
        let p = params(0.1, 0.01);
        for (horizon, stride, expected) in [(1.0, 10, 11), (1.0, 7, 16), (0.0, 5, 1), (0.055, 2, 4)] {
            let mut ens = ParticleEnsemble::at_rest(&[1.0], 3).unwrap();
            let mut calls = 0;
            run_observed(&mut ens, &p, &f, horizon, &mut RngStream::new(0, 0), stride, |_| {
                calls += 1;
                Ok(())
            })
            .unwrap();
            assert_eq!(calls, expected, "T={horizon} stride={stride}");
            assert!((ens.time() - horizon).abs() < p.dt + 1e-12);
        }
    }
}
