pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod spectral;
pub mod verdict;

pub use error::{Error, Result};
