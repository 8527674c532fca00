use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of every numerical routine in the crate.
///
/// Variants split into two families: input/validation problems (the caller
/// asked for something outside the domain of the object) and numerical
/// failures (the routine could not reach its accuracy target). See
/// [`Error::is_numeric`].
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("point {z} lies outside the admissible strip ({lo}, {hi})")]
    OutOfStrip { z: Complex64, lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error:e}")]
    QuadratureFailure { estimate: Complex64, error: f64 },

    #[error("could not bracket a root: {0}")]
    RootBracketFailure(String),

    #[error("unsupported exponent class: {0}")]
    UnsupportedClass(String),

    #[error("factor pair fails the identity check: residual {residual:e} > {tolerance:e}")]
    FactorValidationFailure { residual: f64, tolerance: f64 },

    #[error("not a Bernstein function: {0}")]
    NotBernstein(String),

    #[error("potential density series does not decay: {0}")]
    SeriesDivergence(String),

    #[error("slow convergence: best estimate {estimate}, error bound {bound:e}")]
    SlowConvergence { estimate: f64, bound: f64 },

    #[error("evaluation point is a pole at {pole} (residue {residue})")]
    NearPole { pole: f64, residue: Complex64 },

    #[error("iteration failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("no explicit potential measure is available for this Bernstein function")]
    NoExplicitPotential,

    #[error("decay class cannot be determined: {0}")]
    Unclassifiable(String),

    #[error("Ψ(-z) vanishes at {0}")]
    ZeroDenominator(Complex64),

    #[error("exponent is outside the required class: {0}")]
    NotInClass(String),

    #[error("x = {x} is outside the support {support}")]
    OutsideSupport { x: f64, support: String },

    #[error("derivative of order {requested} exceeds smoothness cap {cap}")]
    SmoothnessCapExceeded { requested: i64, cap: i64 },

    #[error("contour truncation failed: {0}")]
    TruncationFailure(String),

    #[error("small-x expansion requires a killed exponent (Ψ(0) < 0)")]
    NotKilled,

    #[error("expansion order {order} is not below the pole bound {bound}")]
    OrderExceedsPoles { order: usize, bound: f64 },

    #[error("no Cramér root: {0}")]
    NoCramerRoot(String),

    #[error("Cramér condition cannot be verified: {0}")]
    ConditionUnverifiable(String),

    #[error("negative moment of order {a} is infinite (threshold {threshold})")]
    MomentInfinite { a: f64, threshold: f64 },

    #[error("exponential functional is not almost surely finite: {0}")]
    NotAlmostSurelyFinite(String),

    #[error("path horizon exceeded before the functional converged ({0})")]
    HorizonExceeded(String),

    #[error("supports do not overlap: {0}")]
    SupportMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// `true` for failures of a numerical method, `false` for rejected input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::RootBracketFailure(_)
                | Error::FactorValidationFailure { .. }
                | Error::SeriesDivergence(_)
                | Error::SlowConvergence { .. }
                | Error::NearPole { .. }
                | Error::ConvergenceFailure(_)
                | Error::ZeroDenominator(_)
                | Error::TruncationFailure(_)
                | Error::HorizonExceeded(_)
        )
    }
}
