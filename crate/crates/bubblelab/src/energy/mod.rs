//! Interaction integrals, the energy functional on bubble sums, the strictness scan
//! and the selection map.

pub mod dstar;
pub mod functional;
pub mod interactions;
pub mod selection;

pub use dstar::*;
pub use functional::*;
pub use interactions::*;
pub use selection::*;
