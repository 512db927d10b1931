//! Open-orbit topology of periodic Fermi surfaces.

pub mod cli;
pub mod cylinder;
pub mod error;
pub mod fractal;
pub mod models;
pub mod sweep;
pub mod topology;
pub mod torus;
pub mod tracer;

pub use error::NtcError;
pub use models::{EnergySlice, FermiModel, ModelTag, Point3};
pub use torus::RationalDirection;
