//! Simulation of a polarization-controlled single-photon source: a
//! multilevel ⁸⁷Rb atom in a two-mode optical cavity, driven by pump pulses
//! of alternating frequency.
//!
//! Frequencies are angular (rad/s) and times in seconds throughout.

// Range checks are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod detection;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod source;

pub use num_complex::Complex64 as C64;
