use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module of the crate.
///
/// The variants map onto three process exit classes used by the CLI:
/// malformed input, mathematically inapplicable requests, and numeric
/// failures. See [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by a series whose constant term vanishes")]
    DivisionByNonUnit,
    #[error("inner series of a composition must vanish at the origin")]
    CompositionDomain,
    #[error("logarithm of a series requires constant term 1")]
    LogDomain,
    #[error("gamma function has a pole at {0}")]
    GammaPole(String),
    #[error("parameter r = {r} lies outside the support of measure {measure}")]
    MeasureSupport { r: String, measure: String },
    #[error("survival mass diverges: {0}")]
    MeasureDivergence(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("roots {first} and {second} coincide to within {distance:e}; repeated roots are not supported")]
    MultipleRootsUnsupported {
        first: String,
        second: String,
        distance: f64,
    },
    #[error("fractional exponents failed to cancel: {0}")]
    InternalExponentMismatch(String),
    #[error("no convergence after {iterations} iterations (worst coefficient n = {worst_index}, change {worst_change:e})")]
    NoConvergence {
        iterations: usize,
        worst_index: usize,
        worst_change: f64,
    },
    #[error("asymptotic expansion not applicable: {0}")]
    AsymptoticInapplicable(String),
    #[error("root solver failure: {0}")]
    RootSolverFailure(String),
    #[error("table kernel `{table}` does not match model kernel `{model}`")]
    KernelMismatch { table: String, model: String },
    #[error("degenerate fit: {0}")]
    FitDegenerate(String),
    #[error("window too narrow: {0}")]
    WindowTooNarrow(String),
    #[error("route `{route}` is not applicable to kernel `{kernel}`")]
    RouteInapplicable { route: String, kernel: String },
    #[error("model is incomplete: {0}")]
    ModelIncomplete(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid precision: {0}")]
    Precision(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 usage/parse, 2 mathematical inapplicability,
    /// 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Precision(_) | Error::Io(_) | Error::Json(_) => 1,
            Error::InvalidKernel(_)
            | Error::MeasureSupport { .. }
            | Error::MeasureDivergence(_)
            | Error::MultipleRootsUnsupported { .. }
            | Error::AsymptoticInapplicable(_)
            | Error::KernelMismatch { .. }
            | Error::RouteInapplicable { .. }
            | Error::GammaPole(_)
            | Error::CompositionDomain
            | Error::DivisionByNonUnit
            | Error::LogDomain
            | Error::WindowTooNarrow(_)
            | Error::FitDegenerate(_)
            | Error::ModelIncomplete(_)
            | Error::Precondition(_) => 2,
            Error::NoConvergence { .. }
            | Error::RootSolverFailure(_)
            | Error::InternalExponentMismatch(_) => 3,
        }
    }
}
