//! Discretised variational computation of `c^Psi_EHZ` and carrier extraction.

pub mod carrier;
pub mod path;
pub mod solver;

pub use carrier::{verify_carrier, CarrierDiagnostics, CarrierReport};
pub use path::DiscretePath;
pub use solver::{capacity_value, fixed_interior_point, minimize_capacity, CapacityResult, SolverConfig};
