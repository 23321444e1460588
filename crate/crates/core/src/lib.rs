//! Numerical construction of Abresch–Langer self-shrinking curves, their
//! product Lagrangian tori in `R^4 = C^2`, and residual-based verification of
//! the identities such surfaces satisfy.
//!
//! Module map:
//!
//! * [`geometry`]: complex structure, Kähler form, hermitian product,
//!   hyperplane reflections and the unitary normalization of a symmetry
//!   hyperplane.
//! * [`curve`]: shooting solver for closed shrinking curves, the unit circle,
//!   and per-curve certificates.
//! * [`surface`]: product tori, surface jets, curvature operators and the
//!   verification report.
//! * [`embedded`]: self-intersection finders and the Clifford classification.
//! * [`flow`]: curve-shortening flow and its Gaussian-rescaled variant.
//! * [`io`]: JSON/CSV/OBJ formats.
//!
//! Interchangeable algorithms (flow schemes, intersection finders, derivative
//! schemes, mesh projections, report checks) live behind traits and are
//! looked up by name through [`registry::Registry`].

pub mod curve;
pub mod embedded;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod ode;
pub mod registry;
pub mod roots;
pub mod surface;

pub use error::{Error, Result};
