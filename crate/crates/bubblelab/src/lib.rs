//! Numerical laboratory for GJMS bubbles on the round sphere and its antipodal
//! quotient: constants, operator action, Green's functions, bubble interactions,
//! energy expansions, a selection map, and Z₂ homology of barycenter spaces.

pub mod error;
pub mod manifold;
pub mod operators;
pub mod bubbles;
pub mod energy;
pub mod asymptotics;
pub mod homology;
pub mod cli;

pub use error::{LabError, Result};
