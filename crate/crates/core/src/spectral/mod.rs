//! Spherical-harmonic boundary perturbations of the radial base state: the
//! transform pair, the radial boundary-value problems feeding the mode
//! forcing, the forced mode evolution and the translation (mode 1) center.

mod center;
mod evolution;
mod harmonics;
pub mod io;
mod radial_bvp;

pub use center::*;
pub use evolution::*;
pub use harmonics::*;
pub use radial_bvp::*;
