//! Level scheme, cavity, product space and operator assembly.

pub mod cavity;
pub mod hamiltonian;
pub mod levels;
pub mod operator;
pub mod pulse;
pub mod space;
pub mod units;

pub use cavity::CavityConfig;
pub use hamiltonian::{
    build_hamiltonian, collapse_operators, Channel, Coefficient, CollapseOperator, HamiltonianParts,
    TimeDependentOperator,
};
pub use levels::{LevelKind, LevelScheme, Polarization, SchemeKind, SchemeOptions};
pub use operator::Operator;
pub use pulse::PumpPulse;
pub use space::{BasisState, CompositeSpace};
pub use units::{cavity_kappa, mhz_to_rad, rad_to_mhz, zeeman_splitting};
