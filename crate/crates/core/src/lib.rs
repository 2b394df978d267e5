pub mod base_state;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod mode_dynamics;
pub mod periodic_orbit;
pub mod special_fn;
pub mod spectral;

pub use error::{Error, Result};
