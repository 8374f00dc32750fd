//! Extended Ekeland–Hofer–Zehnder capacities of convex bodies under a linear
//! symplectic twist, together with twisted billiards in convex tables and
//! numerical checks of the inequalities relating them.
//!
//! The crate is organised around oracle bundles for convex bodies
//! ([`geometry::ConvexBody`]), symplectic matrices ([`symplectic::SymplecticMap`]),
//! a discretised variational capacity solver ([`capacity`]), a billiard
//! simulator ([`billiard`]) and inequality reports ([`inequality`]).

pub mod billiard;
pub mod capacity;
pub mod error;
pub mod geometry;
pub mod inequality;
pub mod linalg;
pub mod lp;
pub mod optim;
pub mod report;
pub mod symplectic;

pub use error::{Error, Result};
pub use geometry::ConvexBody;
pub use symplectic::SymplecticMap;

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
