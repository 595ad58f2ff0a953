//! Certification toolkit for sums of hermitian squares in group algebras and
//! free *-algebras.
//!
//! * [`rcf`] : truncated infinitesimal field and positivity probes.
//! * [`cones`] : lexicographic separation of points from polyhedral cones.
//! * [`groupalg`] : exact *-algebra arithmetic on normal-form words.
//! * [`soscone`] : Gram-matrix SDP, exact certificates, Laplacian bounds,
//!   Kazhdan constants of finite groups.
//! * [`repwitness`] : GNS spaces, compressions, unitary dilations and
//!   cocycles.
//!
//! The dense linear algebra is generic over the scalar type; the aliases
//! below fix the instantiations used throughout.

pub mod cli;
pub mod cones;
pub mod error;
pub mod groupalg;
pub mod json;
pub mod linalg;
pub mod lp;
pub mod rcf;
pub mod repwitness;
pub mod scalar;
pub mod soscone;

pub use error::{Error, Result};

/// Exact rational numbers.
pub type Rational = num_rational::BigRational;
/// Complex numbers with exact rational parts.
pub type CRational = num_complex::Complex<Rational>;
/// Exact rational matrices.
pub type QMatrix = linalg::Matrix<Rational>;
/// Exact complex-rational matrices.
pub type CQMatrix = linalg::Matrix<CRational>;
/// Matrices over the infinitesimal extension `ℝ(ε)[i]`.
pub type RcfMatrix = linalg::Matrix<rcf::RcfComplex>;
/// Floating-point matrices for the generic routines.
pub type FMatrix = linalg::Matrix<f64>;
