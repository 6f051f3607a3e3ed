//! Exact-arithmetic laboratory for Siegel modular forms of low degree.
//!
//! The crate is organized around truncated Fourier expansions with exact
//! rational coefficients indexed by half-integral positive semi-definite
//! matrices. On top of that sit:
//!
//! - [`matrix`]: the index layer — definiteness, Minkowski reduction,
//!   unit-group counting, class enumeration, block embeddings.
//! - [`qexp`]: expansions with ring operations, dilation, unimodular
//!   pullback, support predicates, and numeric evaluation.
//! - [`corpus`]: ground-truth generators (eta product, Eisenstein series,
//!   unary theta, lattice theta series, genus-2 theta constants) built
//!   from first principles.
//! - [`jacobi`]: the Siegel Φ-operators, Fourier-Jacobi slicing, theta
//!   decomposition and reconstruction.
//! - [`growth`]: coefficient-growth and boundary-decay detectors.
//! - [`rankin`]: Rankin-Selberg partial sums, pole bookkeeping, and the
//!   zeta-quotient cross-checks.
//! - [`io`]: a line-oriented JSON interchange format for expansions.

pub mod corpus;
pub mod fit;
pub mod growth;
pub mod io;
pub mod jacobi;
pub mod lattice;
pub mod matrix;
pub mod qexp;
pub mod rankin;

pub use matrix::{Definiteness, HalfIntMatrix, MatrixError, ReductionResult, UnimodularMatrix};
pub use qexp::{FourierExpansion, HalfWeight, QexpError, SupportVerdict};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar used for all coefficient arithmetic.
pub type Rat = BigRational;

/// Build a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Build a rational from an integer.
pub fn rat_int(num: i64) -> Rat {
    BigRational::from(BigInt::from(num))
}
