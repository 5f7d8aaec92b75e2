use rug::Float;

use super::{RatioTable, Route};
use crate::error::{Error, Result};
use crate::kernels::{EnvMeasure, KernelSpec, QSpec};
use crate::precision::PrecisionContext;
use crate::series::TruncatedSeries;

/// `Phi(z) = z exp( int_0^z (q'(t) t + q(t)) / ((q(1) - q(t)) t) dt )`.
pub fn closed_form_phi(q: &QSpec, n: usize, ctx: &PrecisionContext) -> Result<RatioTable> {
    let prec = ctx.bits();
    let kernel = KernelSpec::CompoundPoisson {
        q: q.clone(),
        measure: EnvMeasure::FullHalfLine,
    };
    let q1 = q.at_one(n, prec);
    if q1 <= 0 {
        return Err(Error::InvalidKernel("q(1) must be positive".into()));
    }
    if n == 1 {
        return Ok(RatioTable::new(vec![Float::with_val(prec, 1)], Route::ClosedForm, kernel, ctx.digits()));
    }
    // Exp(I) is needed through z^(N-1), hence the integrand through t^(N-2).
    let m = n - 2;
    let qs = q.series(n - 1, prec);
    // (q'(t) t + q(t)) / t has coefficient (j + 2) q_{j+1} at t^j.
    let mut num = TruncatedSeries::zero(m, prec);
    for j in 0..=m {
        num.coeffs_mut()[j] = Float::with_val(prec, qs.coeff(j + 1) * (j as u64 + 2));
    }
    let mut den = qs.truncate(m).neg();
    den.coeffs_mut()[0] += &q1;
    let integrand = num.div(&den)?;
    let e = integrand.integrate().exp()?;
    Ok(RatioTable::new(e.into_coeffs(), Route::ClosedForm, kernel, ctx.digits()))
}
