//! Asymptotics in a constant environment `r = r0`.
//!
//! Here `Phi` solves the classical Schröder equation
//! `Phi(P(z)) = P'(0) Phi(z)` with `P(z) = z e^(r0 (q(z) - q(1)))`, so
//! near `z = 1` it behaves like `(1-z)^(-kappa)` times a function periodic
//! in `ln(1-z)` with period `ln P'(1)`, where
//! `kappa = ln(1/P'(0)) / ln P'(1) = r0 q(1) / ln(1 + r0 q'(1))`.
//! Coefficients follow `phi_n ~ n^(kappa-1) (C + B1 cos(w ln n) + B2 sin(w ln n))`
//! with `w = 2 pi / ln P'(1)`. None of `C`, `B1`, `B2` has a closed form.

use rug::Float;

use super::{AsymptoticModel, ConstantStatus, ModelTerm, PeriodicFactor};
use crate::error::{Error, Result};
use crate::kernels::{EnvMeasure, KernelSpec};
use crate::precision::PrecisionContext;
use crate::scalar::{pi, Coeff, Complex};

/// `(kappa - 1, w)`: the growth power of `phi_n` and the angular frequency
/// of its log-periodic modulation.
pub fn dirac_exponents(kernel: &KernelSpec, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    let prec = ctx.bits();
    let (q, r0) = match kernel {
        KernelSpec::CompoundPoisson { q, measure: EnvMeasure::Dirac { r0 } } => (q, r0.at(prec)),
        other => {
            return Err(Error::AsymptoticInapplicable(format!(
                "`{other}` is not a compound-Poisson kernel in a constant environment"
            )))
        }
    };
    let (q1, dq1, _) = q.derivatives_at_one(prec)?;
    let mean = Float::with_val(prec, &r0 * &dq1) + 1u32;
    if mean <= 1u32 {
        return Err(Error::AsymptoticInapplicable("mean offspring must exceed 1".into()));
    }
    let log_mean = mean.ln();
    let kappa = Float::with_val(prec, &r0 * &q1) / &log_mean;
    let w = Float::with_val(prec, pi(prec) * 2u32) / &log_mean;
    Ok((kappa - 1u32, w))
}

/// `C n^(kappa-1)` plus an unscaled log-periodic term at the same power.
pub fn dirac_poisson_model(kernel: &KernelSpec, ctx: &PrecisionContext) -> Result<AsymptoticModel> {
    let (power, w) = dirac_exponents(kernel, ctx)?;
    let prec = ctx.bits();
    let re_alpha = Float::with_val(prec, -&power) - 1u32;
    let osc = ModelTerm {
        constant: Complex::one(prec),
        power: Complex::from_real(power.clone()),
        periodic: Some(PeriodicFactor::LogPeriodic { re_alpha, im_alpha: w, cos_amp: None, sin_amp: None }),
        scaled_by_leading: false,
    };
    let terms = vec![ModelTerm::scaled(Complex::one(prec), Complex::from_real(power)), osc];
    Ok(AsymptoticModel::new(kernel.clone(), None, ConstantStatus::Unknown, terms))
}
