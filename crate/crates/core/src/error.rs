use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("exponent {exponent} exceeds truncation order {order}")]
    TruncationExceeded { exponent: u32, order: u32 },

    #[error("division by a non-unit of the truncated ring (leading exponent {leading})")]
    NonUnitDivision { leading: i64 },

    #[error("matrix is not hermitian")]
    NotHermitian,

    #[error("element is not hermitian")]
    NonHermitianElement,

    #[error("algebra backends differ")]
    SpecMismatch,

    #[error("invalid group table: {0}")]
    InvalidGroupTable(String),

    #[error("generating set is not symmetric: {0} has no inverse in the set")]
    NotSymmetric(String),

    #[error("identity element in generating set")]
    IdentityInGenerators,

    #[error("point lies inside the cone")]
    PointInCone,

    #[error("lineality condition fails: (C+H) ∩ −(C+H) is larger than H")]
    LinealityCondition,

    #[error("supplied functional is negative on the generator {0} of C ∩ H")]
    NegativeOnSubspace(usize),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("basis does not cover word {0} of the target")]
    BasisDoesNotCover(String),

    #[error("element is not in the span of c(g)*c(h) over the ball of radius {radius}")]
    NotInOmegaSquared { radius: usize },

    #[error("solver did not converge after {iterations} iterations (primal residual {primal:.3e}, dual residual {dual:.3e}, gap {gap:.3e})")]
    SolverNonConvergence {
        iterations: usize,
        primal: f64,
        dual: f64,
        gap: f64,
    },

    #[error("projected Gram matrix is not PSD (numeric minimum eigenvalue {min_eigenvalue:.3e})")]
    ProjectionNotPsd { min_eigenvalue: f64 },

    #[error("semidefinite program is infeasible at this basis")]
    Infeasible,

    #[error("residual l1 bound {bound} exceeds the available shift {available}")]
    ResidualTooLarge { bound: String, available: String },

    #[error("no feasible constant C ≤ {cap} at ball radius {radius}")]
    NoFeasibleConstant { cap: String, radius: usize },

    #[error("generating set does not generate the group (kernel dimension {kernel_dim})")]
    NotGenerating { kernel_dim: usize },

    #[error("group has no nonzero spectral modes")]
    NoNonzeroModes,

    #[error("functional is trivial")]
    TrivialFunctional,

    #[error("moment matrix is not positive semidefinite")]
    MomentNotPsd,

    #[error("compression is not a contraction (norm {norm:.3e})")]
    NotContraction { norm: f64 },

    #[error("cocycle identity fails (residual {residual:.3e})")]
    CocycleInconsistent { residual: f64 },

    #[error("backend not supported for this operation: {0}")]
    UnsupportedBackend(String),

    #[error("parse error: {0}")]
    Parse(String),
}
