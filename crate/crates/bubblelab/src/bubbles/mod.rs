//! Canonical, truncated and glued bubbles, and the residual of the bubble equation.

pub mod bubble;
pub mod cutoff;
pub mod residual;

pub use bubble::{admissibility, b0, Admissibility, Bubble, BubbleKind, BubbleSpec, Configuration};
pub use cutoff::{cutoff_chi, cutoff_jet, CutoffProfile};
pub use residual::{core_residual_fd, residual_bound, residual_profile, BoundVariant, ResidualProfile, ResidualRow};
