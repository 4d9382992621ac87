//! Mixed-dimensional finite-volume flow and tracer transport in fractured
//! porous media.

pub mod linsolve;
pub mod mesh;
pub mod coupling;
pub mod elimination;
pub mod fv;
pub mod harness;
pub mod permeability;
pub mod transport;

pub type Vec3 = nalgebra::Vector3<f64>;

/// Top-level error; [`Error::exit_code`] gives the CLI exit status.
pub type Error = harness::HarnessError;
