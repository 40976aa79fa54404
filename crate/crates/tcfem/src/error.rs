//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A point does not lie in the tubular neighborhood of a patch, either
    /// because its distance exceeds delta or its foot point falls outside the
    /// patch parameter range.
    #[error("point ({x}, {y}) outside tubular neighborhood: {reason}")]
    OutOfTube { x: f64, y: f64, reason: String },

    /// delta is inadmissible for the patch (e.g. delta >= radius of a curved patch).
    #[error("invalid delta {delta}: {reason}")]
    InvalidDelta { delta: f64, reason: String },

    /// Reflection-based reformulation requires a contrast larger than one.
    #[error("contrast {contrast} must be > 1")]
    ContrastTooSmall { contrast: f64 },

    #[error("bad mesh parameters: {0}")]
    BadParameters(String),

    /// Point location failed; the point is outside every element.
    #[error("point ({x}, {y}) not found in mesh (violation {violation:.3e})")]
    NotFound { x: f64, y: f64, violation: f64 },

    /// A reflected quadrature point could not be located. This indicates a
    /// geometry or tagging bug and aborts the assembly.
    #[error("failed to locate reflected point ({x}, {y}) from element {element}")]
    LocateFailure { x: f64, y: f64, element: usize },

    #[error("matrix is singular or factorization failed: {0}")]
    SingularMatrix(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Coefficient law evaluated at (or too close to) one of its poles.
    #[error("frequency {omega} is within {dist:.3e} of a pole of the material law")]
    AtPole { omega: f64, dist: f64 },

    /// The contour passes through (or very near) an eigenvalue.
    #[error("contour integral failed at node {node}: factorization of F(z) failed")]
    ContourThroughEigenvalue { node: usize },

    /// The singular values of the zeroth moment cluster at the rank cut-off,
    /// so the number of eigenvalues inside the contour cannot be decided.
    /// Increase the probe dimension or the node count.
    #[error("ambiguous rank at cut {cut}: sigma[{cut}]={above:.3e}, sigma[{}]={below:.3e}", cut + 1)]
    RankAmbiguity { cut: usize, above: f64, below: f64 },

    #[error("config parse error: {0}")]
    ParseError(String),

    #[error("config validation error at `{path}`: {reason}")]
    ValidationError { path: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
