//! Spectral geometry of Sol-manifolds: torus bundles over the circle glued by a
//! hyperbolic matrix `A` in `SL(2, Z)`.
//!
//! The crate computes the Laplace-Beltrami spectrum fibre-mode by fibre-mode,
//! predicts multiplicities from arithmetic of the associated indefinite binary
//! quadratic form, and provides the semiclassical, dynamical and statistical
//! diagnostics that go with it.

pub mod dynamics;
pub mod error;
pub mod intmat;
pub mod manifold;
pub mod mathieu;
pub mod output;
pub mod qforms;
pub mod quad;
pub mod semiclassics;
pub mod spectrum;
pub mod statistics;
mod surd;

pub use error::{Error, ErrorKind, Result};
pub use intmat::IntMat2;
pub use manifold::{FibreMetric, GluingMap, Geometry, OrbitRep};
