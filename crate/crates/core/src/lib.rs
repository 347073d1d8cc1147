//! Symmetric spaces in the sense of Loos: Lie triple systems, their standard
//! embeddings, spectral tools for the exponential map, concrete model spaces
//! and solvers for midpoints, polygons and placements.

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod lts;
pub mod model_spaces;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
