//! Geometric Weisfeiler-Lehman refinement on Euclidean point clouds, and
//! reconstruction of a cloud (up to isometry) from its color multisets.

pub mod cloud;
pub mod error;
pub mod geom;
pub mod linalg;
pub mod one_shot;
pub mod oracle;
pub mod recon2d;
pub mod recon_nd;
pub mod report;
pub mod scalar;
pub mod wl;

pub use cloud::PointCloud;
pub use error::{Error, Result};
pub use scalar::{Rational, Real, Scalar};

/// Cloud with exact rational coordinates.
pub type ExactCloud = PointCloud<Rational>;
/// Cloud with `f64` coordinates.
pub type FloatCloud = PointCloud<f64>;
