//! Curvature laboratory for pseudo-Riemannian metrics.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the fits,
//! conformal-map checks and the registry work in `f64`, exposed through the
//! aliases below.

pub mod chart;
pub mod classify;
pub mod conformal;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod planes;
pub mod registry;
pub mod scalar;
pub mod tensor;

pub use chart::{covariant_derivative_r, curvature_bundle, CurvatureBundle, DerivativePath, MetricChart};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::{
    build_phi, build_pi1, check_curvature_symmetries, contract_ricci, SymmetricBilinear, Tensor3, Tensor4, Tensor5,
};

/// `f64` metric chart.
pub type Chart = MetricChart<f64>;
/// `f64` symmetric bilinear form.
pub type Bilinear = SymmetricBilinear<f64>;
/// `f64` `(0,4)` tensor.
pub type Tensor4f = Tensor4<f64>;
/// `f64` rank-5 tensor.
pub type Tensor5f = Tensor5<f64>;
/// `f64` curvature bundle.
pub type Bundle = CurvatureBundle<f64>;
/// `f64` tangent plane.
pub type Plane = planes::TangentPlane<f64>;
