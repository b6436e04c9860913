//! Poisson processes of λ-geodesic hyperplanes in the Poincaré ball and the
//! region visible from the origin.

pub mod coverage;
pub mod crofton;
pub mod error;
pub mod geometry;
pub mod measures;
pub mod numerics;
pub mod render;
pub mod sampler;
pub mod stats;
pub mod visibility;

pub use error::{Error, Result};
