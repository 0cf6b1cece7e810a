//! GJMS constants, the operator's action, Green's functions and mass.

pub mod constants;
pub mod gjms;
pub mod green;
pub mod jet;

pub use constants::{bubble_power_integral, bubble_power_tail, gjms_constants, gjms_eigenvalue, GjmsConstants};
pub use gjms::{apply_gjms, flat_polylaplacian, radial_polyharmonic, FdOptions, FdResult};
pub use green::{
    gauged_green_jet, gauged_green_profile, green, green_gauged, green_in_chart, green_sphere, mass,
    MassReport,
};
pub use jet::Jet;
