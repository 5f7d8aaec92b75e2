pub mod error;
pub mod gamma;
pub mod precision;
pub mod scalar;

pub use error::{Error, Result};
pub use precision::PrecisionContext;
pub use scalar::{Coeff, Complex};
pub use series::TruncatedSeries;
pub use kernels::{EnvMeasure, KernelSpec, QSpec};
pub mod series;
pub mod kernels;
pub mod coefficients;
pub mod asymptotics;
pub mod analysis;
pub mod cli;
