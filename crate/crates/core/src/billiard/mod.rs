//! A-billiards in convex tables: flights, reflections, shooting search,
//! the generalized (polytope) verifier and lifts to phase space.

pub mod bounds;
pub mod flow;
pub mod phase;
pub mod search;
pub mod trajectory;
pub mod verify;

pub use bounds::{length_bound_suite, LengthBounds};
pub use flow::{flow, mirror, ray_exit, reflect, Flight, RayHit};
pub use phase::{adl_action, classify_phase, gliding_circle, lift_to_phase, ArcKind, PhaseArc, PhaseClass, PhaseTrajectory};
pub use search::{find_a_billiard, SearchConfig, SearchOutcome};
pub use trajectory::{a_billiard_residual, BilliardTrajectory, EndClause, Residuals, TrajectoryRecord};
pub use verify::{verify_generalized, ClauseCheck, GeneralizedReport};

/// Residual threshold relative to the diameter for accepting a trajectory.
pub const ACCEPT_TOL: f64 = 1e-6;
/// Shortest admissible segment relative to the diameter; shorter segments
/// count as repeated points.
pub const MIN_SEGMENT: f64 = 1e-3;
