//! Master-equation, quantum-jump and two-time-correlation integrators.
//!
//! Rate convention: a cavity field decay rate κ empties the mode at 2κ, and
//! an atomic field decay rate γ gives a total spontaneous emission rate 2γ.

pub mod correlation;
pub mod density;
pub mod integrator;
pub mod master;
pub mod mcwf;
pub mod record;
pub mod system;

pub use correlation::{correlation_surface, two_time_correlation, CorrelationSurface, LowerTriangle};
pub use density::DensityState;
pub use integrator::IntegratorOptions;
pub use master::evolve_master;
pub use mcwf::{mcwf_ensemble, mcwf_run, trajectory_rng, EnsembleAverage, McwfOutcome, TrajectoryRunner};
pub use record::{Emission, EmissionRecord};
pub use system::OpenSystem;
