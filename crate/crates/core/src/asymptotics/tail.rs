//! Asymptotics for `q(z) = z` averaged over `r > a`.
//!
//! Near `z = 1`,
//! `Phi(z) ~ c((1-z)^alpha + D (1-z)^(alpha+1)) + b (1-z)^alpha1 + conj`,
//! where `alpha` is the real indicial root and `alpha1` the first complex
//! one. Transferring to coefficients gives
//! `phi_n ~ C(n^(-alpha-1) + C1 n^(-alpha-2))
//!        + n^(-Re alpha1 - 1)(B1 cos(Im alpha1 ln n) + B2 sin(Im alpha1 ln n))`.

use rug::Float;

use super::{AsymptoticModel, ConstantStatus, ModelTerm, PeriodicFactor, RootSet};
use crate::error::{Error, Result};
use crate::kernels::{EnvMeasure, KernelSpec, QSpec, Real};
use crate::scalar::{Coeff, Complex};

use super::IndicialEquation;

/// Relative coefficient `D` of `(1-z)^(alpha+1)`:
/// `D = (alpha+1)((1+a) - beta(alpha+2)) / (1 - a - a alpha)` with
/// `beta = a(a+2) / (2(1+a))`, which comes from expanding
/// `1 - z e^(a(z-1))` to second order. At `a = 2` this is
/// `(4 alpha - 1)(alpha + 1) / (3(2 alpha + 1))`.
pub fn tail_expansion_d(a: &Float, alpha: &Float) -> Float {
    let prec = alpha.prec();
    let a1 = Float::with_val(prec, a + 1u32);
    let beta = Float::with_val(prec, a * Float::with_val(prec, a + 2u32)) / (a1.clone() * 2u32);
    let al1 = Float::with_val(prec, alpha + 1u32);
    let al2 = Float::with_val(prec, alpha + 2u32);
    let num = al1 * (a1 - beta * al2);
    let den = Float::with_val(prec, 1u32 - a) - Float::with_val(prec, a * alpha);
    num / den
}

/// `C1 = (alpha + 1)(alpha / 2 - D)`, which reduces to
/// `(1+alpha)(1-2 alpha)(2+alpha) / (6(1+2 alpha))` at `a = 2`.
pub fn tail_c1(a: &Float, alpha: &Float) -> Float {
    let prec = alpha.prec();
    let d = tail_expansion_d(a, alpha);
    let half = Float::with_val(prec, alpha / 2u32);
    Float::with_val(prec, alpha + 1u32) * (half - d)
}

/// Model with powers `-alpha-1`, `-alpha-2` and a log-periodic term at
/// `-Re alpha1 - 1`. `C`, `B1` and `B2` have no closed form and are left
/// for estimation from data.
pub fn tail_poisson_model(a: &Float, roots: &RootSet) -> Result<AsymptoticModel> {
    match &roots.equation {
        IndicialEquation::Tail { a: ra } if ra == a => {}
        other => {
            return Err(Error::Precondition(format!(
                "root set belongs to {other}, expected the tail equation for a = {a}"
            )))
        }
    }
    let alpha = roots
        .real_roots()
        .first()
        .map(|z| z.re.clone())
        .ok_or_else(|| Error::Precondition("root set has no real root".into()))?;
    let alpha1 = roots
        .first_complex()
        .cloned()
        .ok_or_else(|| Error::Precondition("root set has no complex root".into()))?;
    let prec = alpha.prec();
    let p0 = Float::with_val(prec, -&alpha) - 1u32;
    let p1 = Float::with_val(prec, &p0 - 1u32);
    let c1 = tail_c1(a, &alpha);
    let osc = ModelTerm {
        constant: Complex::one(prec),
        power: Complex::from_real(Float::with_val(prec, -&alpha1.re) - 1u32),
        periodic: Some(PeriodicFactor::LogPeriodic {
            re_alpha: alpha1.re.clone(),
            im_alpha: alpha1.im.clone(),
            cos_amp: None,
            sin_amp: None,
        }),
        scaled_by_leading: false,
    };
    let terms = vec![
        ModelTerm::scaled(Complex::one(prec), Complex::from_real(p0)),
        ModelTerm::scaled(Complex::from_real(c1), Complex::from_real(p1)),
        osc,
    ];
    let kernel = KernelSpec::CompoundPoisson {
        q: QSpec::Polynomial(vec![Real::from_float(Float::with_val(prec, 1))]),
        measure: EnvMeasure::TailHalfLine { a: Real::from_float(a.clone()) },
    };
    Ok(AsymptoticModel::new(kernel, None, ConstantStatus::Unknown, terms))
}
