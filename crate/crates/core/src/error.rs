use thiserror::Error;

use crate::planes::PlaneKind;

/// Errors raised across the curvature pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0} (supported: {1})")]
    UnsupportedDimension(usize, &'static str),
    #[error("matrix is singular (pivot {0:e})")]
    Singular(f64),
    #[error("metric is degenerate at the requested point: eigenvalue {eigenvalue:e} below {threshold:e}")]
    DegenerateMetric { eigenvalue: f64, threshold: f64 },
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("signature changes across the domain: {first:?} vs {other:?}")]
    SignatureChange {
        first: (usize, usize),
        other: (usize, usize),
    },
    #[error("metric component grid is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("derivative oracle failure: {0}")]
    Derivative(String),
    #[error("spanning vectors are linearly dependent")]
    DependentVectors,
    #[error("plane is {0:?}; sectional curvature needs a nondegenerate plane")]
    DegeneratePlane(crate::planes::PlaneTag),
    #[error("signature ({negative},{positive}) admits no {kind:?} degenerate planes")]
    SignatureInsufficient {
        negative: usize,
        positive: usize,
        kind: PlaneKind,
    },
    #[error("limit family left the nondegenerate locus after {0} retries")]
    FamilyExhausted(usize),
    #[error("jacobian is singular at {point:?}")]
    SingularJacobian { point: Vec<f64> },
    #[error("curvature vanishes; the manifold is flat at this point")]
    Flat,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("registry: {0}")]
    Registry(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
