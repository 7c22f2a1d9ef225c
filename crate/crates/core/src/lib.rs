pub mod error;
pub mod geometry;
pub mod hadamard;
pub mod linalg;
pub mod assembly;
pub mod cli;
pub mod perturb;
pub mod spectral;
pub mod splitting;

pub use error::{Error, Result};
