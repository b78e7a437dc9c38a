//! Universal deformations of plane-curve germs carrying the differential dx.
//!
//! Given a germ `f(x, y)` in Weierstrass form, the library computes the
//! quotient algebra `C{x}[y]/<f, f_y>`, the universal family
//! `G = f + t·g`, its branch-value map, and, for a one-parameter family
//! `F(x, y, s)`, the classifying map `phi(s)` obtained by integrating the
//! decomposition vector field.

pub mod check;
pub mod classify;
pub mod cli;
pub mod contour;
pub mod error;
pub mod family;
pub mod germ;
pub mod json;
pub mod linalg;
pub mod local_algebra;
pub mod poly;
pub mod series;

pub use num_complex::Complex64 as C64;

pub use classify::{ClassifyResult, Decomposition, DeformationPath};
pub use error::{Error, Result};
pub use family::{FiberReport, GermCollection, ParameterPoint, UniversalFamily};
pub use germ::Germ;
pub use local_algebra::QuotientData;
pub use poly::{BiPoly, Poly, TriPoly};
pub use series::{TruncSeries, YPolySeries};

/// Shorthand for a real number as a complex one.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}
