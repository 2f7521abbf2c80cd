//! Weighted Koppelman kernels on complex Grassmannians.
//!
//! The crate builds the kernels `K_g`, `P_g` for the line bundles `L^r` over
//! `Gr(k, N)` pointwise in the standard chart, together with the verification
//! machinery that checks their defining identities numerically.

pub mod error;
pub mod geometry;
pub mod jets;
pub mod kernels;
pub mod quadrature;
pub mod sampling;
pub mod suite;
pub mod superalg;

pub use error::{Error, Result};
pub use geometry::{ChartMatrix, PointPair, Shape};
