//! Pulse sequences, atom transit, photon envelopes and conditional
//! generation statistics.

pub mod conditional;
pub mod envelope;
pub mod model;
pub mod program;
pub mod stream;
pub mod transit;

pub use conditional::{conditional_probabilities, ConditionalEstimate, ConditionalProbabilities};
pub use envelope::{
    peak_flux_times, run_sequence, run_sequence_position_averaged, run_sequence_with_state, PeakTimes, PhotonEnvelope,
    SequenceOutcome, SlotTotals,
};
pub use model::{InitialState, SourceModel};
pub use program::PulseProgram;
pub use stream::{atom_stream, AtomStream};
pub use transit::{TransitMode, TransitModel};
