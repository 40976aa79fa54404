//! Finite elements for elliptic transmission problems whose diffusion
//! coefficient changes sign across a smooth interface.
//!
//! The standard Galerkin method is not reliable for such problems. This
//! crate assembles a reformulated system instead: the test space is
//! transformed by an operator built from a reflection across the interface,
//! localized to a tubular neighborhood by a C¹ cut-off. When the coefficient
//! contrast exceeds the squared norm of the reflection (a closed-form,
//! curvature-dependent bound), the reformulated problem is weakly coercive
//! and ordinary Lagrange elements converge.
//!
//! The same transformation applies to dispersive eigenvalue problems with
//! rational frequency laws: the transformed stiffness/mass blocks are
//! frequency independent, so the discrete problem becomes a holomorphic
//! pencil that a contour-integral method solves for all eigenvalues inside a
//! circle. A semi-analytic dispersion relation for the concentric-disc
//! geometry provides reference eigenvalues.
//!
//! See the `examples/` directory for runnable entry points covering each
//! capability; the `tcfem` binary wraps them behind a small CLI.

pub mod assembly;
pub mod cutoff;
pub mod error;
pub mod evp;
pub mod fespace;
pub mod geometry;
pub mod io;
pub mod la;
pub mod mesh;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
