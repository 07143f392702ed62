//! Numerics for `Δu + λu + |u|^{p-1}u + θ u ln u² = 0` on the Poincaré ball.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod barrier;
pub mod error;
pub mod geometry;
pub mod params;
pub mod quad;
pub mod shooting;
pub mod threshold;
pub mod variational;

pub use error::{Error, Result};
pub use params::ProblemParams;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/geometry.md")]
    pub struct Geometry;
    #[doc = include_str!("../../../book/src/shooting.md")]
    pub struct Shooting;
    #[doc = include_str!("../../../book/src/variational.md")]
    pub struct Variational;
    #[doc = include_str!("../../../book/src/threshold.md")]
    pub struct Threshold;
    #[doc = include_str!("../../../book/src/barrier.md")]
    pub struct Barrier;
}
