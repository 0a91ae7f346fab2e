//! Kinetic consensus-based optimization: a second-order interacting particle system,
//! its Lyapunov diagnostics, a checker for the parameter conditions behind its decay
//! and mean-field estimates, and experiment drivers that measure rates and exponents.

pub mod admissibility;
pub mod consensus;
pub mod diagnostics;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod objective;
pub mod parallel;
pub mod params;
pub mod reduce;
pub mod rng;

pub use admissibility::{check_assumptions, suggest_admissible, AdmissibilityReport, Profile, SearchOptions};
pub use consensus::{weighted_consensus, ConsensusPoint};
pub use diagnostics::{LyapunovReport, ReportSpec};
pub use dynamics::{coupled_step, em_step, run_trajectory, ConsensusSource, CoupledPair};
pub use ensemble::{InitialLaw, Marginal, ParticleEnsemble};
pub use error::{KcboError, Result};
pub use objective::{make_objective, ObjectiveSpec};
pub use params::{KineticParams, NoiseKind};
pub use rng::RngStream;
