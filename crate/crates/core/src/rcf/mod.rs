//! Truncated real closed extension field `ℝ(ε)`: exact arithmetic and order
//! for polynomials in a positive infinitesimal, hermitian PSD tests over the
//! extension, and functionals on `ℂ[t]` that are positive without being
//! completely positive.

mod complex;
mod poly;
mod scalar;

pub use complex::RcfComplex;
pub use poly::{
    cauchy_schwarz_check, cp_level_check, determinant, eval_derivative_functional,
    functional_matrix, gauge_triangle_holds, hermitian_psd_check, CauchySchwarz,
    DerivativeFunctional, DerivativeMode, EvaluationFunctional, PolyFunctional, UniPoly,
};
pub use scalar::{
    level_exponent, level_infinitesimal, truncation_from_env, RcfScalar, DEFAULT_TRUNCATION,
};
