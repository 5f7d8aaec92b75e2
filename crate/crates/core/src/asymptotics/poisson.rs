//! Two-term asymptotics for compound-Poisson kernels averaged over the
//! full half-line, read off from the product form at `z = 1`.

use rug::ops::Pow;
use rug::Float;

use super::{AsymptoticModel, ConstantStatus, ModelTerm};
use crate::coefficients::ProductForm;
use crate::error::{Error, Result};
use crate::gamma::gamma_real;
use crate::kernels::{EnvMeasure, KernelSpec, QSpec};
use crate::precision::PrecisionContext;
use crate::scalar::{Coeff, Complex};

/// `A1 = ((q'(1) - q(1)) q''(1) - 2 q(1) q'(1)) / (2 q'(1)^2)`, the
/// relative coefficient of the second singular power of `Phi` at `z = 1`.
pub fn expansion_coefficient_a1(q: &QSpec, ctx: &PrecisionContext) -> Result<Float> {
    let (q1, dq1, ddq1) = q.derivatives_at_one(ctx.bits())?;
    let num = Float::with_val(ctx.bits(), &dq1 - &q1) * &ddq1 - Float::with_val(ctx.bits(), &q1 * &dq1) * 2u32;
    Ok(num / (dq1.square() * 2u32))
}

/// `q(1) (q'(1) - q(1)) (q''(1) + q'(1)) / (2 q'(1)^3)`
pub fn second_coefficient(q: &QSpec, ctx: &PrecisionContext) -> Result<Float> {
    let (q1, dq1, ddq1) = q.derivatives_at_one(ctx.bits())?;
    let prec = ctx.bits();
    let num = Float::with_val(prec, &q1 * Float::with_val(prec, &dq1 - &q1)) * Float::with_val(prec, &ddq1 + &dq1);
    let den = Float::with_val(prec, (&dq1).pow(3u32)) * 2u32;
    Ok(num / den)
}

/// The same coefficient obtained from `A1` and the two-term expansion of
/// generalized binomial coefficients:
/// `(q(1) + q'(1)) q(1) / (2 q'(1)^2) + Gamma(1 + s) / Gamma(s) * A1`.
pub fn second_coefficient_via_a1(q: &QSpec, ctx: &PrecisionContext) -> Result<Float> {
    let prec = ctx.bits();
    let (q1, dq1, _) = q.derivatives_at_one(prec)?;
    let a1 = expansion_coefficient_a1(q, ctx)?;
    let s = Float::with_val(prec, &q1 / &dq1);
    let g_ratio = gamma_real(&Float::with_val(prec, &s + 1u32))? / gamma_real(&s)?;
    let first = Float::with_val(prec, &q1 + &dq1) * &q1 / (Float::with_val(prec, dq1.square_ref()) * 2u32);
    Ok(first + g_ratio * a1)
}

/// `prod_{j >= 2} (1 - 1/b_j)^{e_j} / Gamma(1 + q(1)/q'(1))` on the
/// principal branch, before discarding the imaginary part.
pub fn cp_leading_constant(pf: &ProductForm, ctx: &PrecisionContext) -> Result<Complex> {
    if !pf.dominant_root_is_one() {
        return Err(Error::AsymptoticInapplicable(
            "z = 1 must be the unique root of q(z) = q(1) in the closed unit disk".into(),
        ));
    }
    let prec = ctx.bits();
    let one = Float::with_val(prec, 1);
    let mut k = Complex::one(prec);
    for (b, e) in pf.roots.iter().zip(&pf.exponents).skip(1) {
        let mut base = b.recip();
        base.neg_in_place();
        let base = base.add_real(&one);
        k = &k * &base.pow(e);
    }
    let (q1, dq1, _) = pf.q.derivatives_at_one(prec)?;
    let s = Float::with_val(prec, &q1 / &dq1) + 1u32;
    let g = gamma_real(&s)?;
    Ok(Complex::new(k.re / &g, k.im / &g))
}

/// `phi_n ~ C (n^s + c2 n^(s-1))` with `s = q(1)/q'(1)`.
pub fn two_term_compound_poisson(q: &QSpec, pf: &ProductForm, ctx: &PrecisionContext) -> Result<AsymptoticModel> {
    let prec = ctx.bits();
    let c = cp_leading_constant(pf, ctx)?;
    let scale = Float::with_val(prec, c.re.abs_ref()).max(&Float::with_val(prec, 1));
    if Float::with_val(prec, c.im.abs_ref()) > ctx.tolerance(10) * scale {
        return Err(Error::AsymptoticInapplicable(format!(
            "leading constant is not real (imaginary part {:e})",
            c.im.to_f64()
        )));
    }
    let (q1, dq1, _) = q.derivatives_at_one(prec)?;
    let s = Float::with_val(prec, &q1 / &dq1);
    let c2 = second_coefficient(q, ctx)?;
    let one = Complex::one(prec);
    let terms = vec![
        ModelTerm::scaled(one, Complex::from_real(s.clone())),
        ModelTerm::scaled(Complex::from_real(c2), Complex::from_real(s - 1u32)),
    ];
    let kernel = KernelSpec::CompoundPoisson { q: q.clone(), measure: EnvMeasure::FullHalfLine };
    Ok(AsymptoticModel::new(kernel, Some(c.re), ConstantStatus::Exact, terms))
}
