//! Geometric contact barrier for intersection-free simulation of
//! piecewise-linear solids.
//!
//! The contact potential filters primitive pairs by local-minimum and
//! exterior-direction tests, so flat or thin geometry close to itself at rest
//! carries neither energy nor force.

pub mod ad;
pub mod dynamics;
pub mod error;
pub mod filter;
pub mod kernels;
pub mod mesh;
pub mod potential;
pub mod proximity;
pub mod real;
pub mod sparse;

pub use error::{Error, Result};
pub use real::{Real, Vec3, V3};
