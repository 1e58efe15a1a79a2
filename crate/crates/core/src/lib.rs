//! Exact even-Clifford representation theory: Clifford and spin arithmetic,
//! linear even-Clifford Hermitian structures, their structure groups,
//! fundamental groups, and the existence of lifts to Spin(N).

pub mod blade_algebra;
pub mod error;
pub mod group_classifier;
pub mod lift_checker;
pub mod linalg;
pub mod clifford_structures;
pub mod spin_rep;
pub mod torus_weights;

pub use error::{Error, Result};
