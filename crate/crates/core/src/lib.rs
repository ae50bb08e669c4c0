//! Pseudo-spectral simulation and validation of two-layer, rigid-lid
//! shallow-water internal-wave models.

pub mod analysis;
pub mod error;
pub mod models;
pub mod operators;
pub mod params;
pub mod snapshot;
pub mod solvers;
pub mod spectral;
pub mod timeloop;

pub use error::{Error, Result};
