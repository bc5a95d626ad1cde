//! Function recovery from the measure carried by a graph, via
//! Christoffel-Darboux kernels.
//!
//! The crate assembles moment matrices of graph measures (exact quadrature,
//! Gaussian-band smoothing, or Monte Carlo samples), evaluates the
//! Christoffel function from a regularized inverse or a pseudoinverse,
//! recovers `f(x)` as the minimizer over `y` of the inverse Christoffel
//! function, and computes the needle-polynomial upper bound, the on-graph
//! lower bound and the degree at which the two separate.

pub mod basis;
pub mod bounds;
pub mod christoffel;
pub mod error;
pub mod measures;
pub(crate) mod par;
pub mod pipeline;

pub use error::{Error, Result};
