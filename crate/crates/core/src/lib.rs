//! Exact-arithmetic engine for linear differential operators on graded
//! nilpotent Lie groups.
//!
//! The crate models one fiber of the flat filtered-manifold picture: a graded
//! nilpotent Lie algebra plays the role of the symbol algebra, weighted jets
//! are functionals on the graded universal enveloping algebra, and operators
//! are sums of matrix coefficients times words in the algebra basis. On top
//! of that it computes weighted principal symbols, prolonged symbol maps and
//! their kernels `g^{r+l}`, detects weighted finite type, derives the
//! first-order rewrite data (solution-space bound, injectivity of the
//! rewritten symbol, obstruction dimensions), and cross-validates everything
//! against a brute-force polynomial oracle living on the associated nilpotent
//! Lie group in exponential coordinates.
//!
//! All arithmetic is exact: rationals, or Gaussian rationals when an operator
//! has complex coefficients. Nothing is ever rounded.

pub mod cache;
pub mod error;
pub mod exactlin;
pub mod gla;
pub mod jetmodel;
pub mod oracle;
pub mod pbw;
pub mod pipeline;
pub mod problem;
pub mod report;
pub mod weightedsym;

pub use error::{ConsistencyError, Error, InputError};
pub use exactlin::{Matrix, Scalar, Subspace};
pub use gla::{AlgebraElement, GradedLieAlgebra};
pub use pbw::{PbwMonomial, Uea, UeaComponent, UeaElement};
pub use weightedsym::{BundleSpec, OperatorSpec};
