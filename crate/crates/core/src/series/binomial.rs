use rug::Float;

use crate::error::{Error, Result};
use crate::gamma::{gamma_complex, gamma_real};
use crate::scalar::{format_compact, Coeff, Complex};

use super::TruncatedSeries;

/// `alpha (alpha - 1) ... (alpha - n + 1) / n!`
pub fn gen_binomial<T: Coeff>(alpha: &T, n: u64) -> T {
    let prec = alpha.prec();
    let mut c = T::one(prec);
    for j in 0..n {
        let mut f = alpha.clone();
        f.sub_ref(&T::from_real(Float::with_val(prec, j)));
        c = c.mul_ref(&f);
        c.div_int(j as i64 + 1);
    }
    c
}

/// Coefficients of `(1 + w)^alpha` up to `w^order`, via
/// `c_{j+1} = c_j (alpha - j) / (j + 1)`.
pub fn binomial_series<T: Coeff>(alpha: &T, order: usize) -> TruncatedSeries<T> {
    let prec = alpha.prec();
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(T::one(prec));
    for j in 0..order {
        let mut f = alpha.clone();
        f.sub_ref(&T::from_real(Float::with_val(prec, j)));
        let mut c = coeffs[j].mul_ref(&f);
        c.div_int(j as i64 + 1);
        coeffs.push(c);
    }
    TruncatedSeries::new(coeffs, prec)
}

fn check_terms(terms: u32) -> Result<()> {
    if terms == 1 || terms == 2 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("terms must be 1 or 2, got {terms}")))
    }
}

/// Large-`n` approximation
/// `(-1)^n / (Gamma(-alpha) n^(alpha+1)) * (1 + alpha (alpha + 1) / (2 n))`,
/// keeping one or two terms.
pub fn gen_binomial_asymptotic(alpha: &Float, n: u64, terms: u32) -> Result<Float> {
    check_terms(terms)?;
    let prec = alpha.prec();
    if alpha.is_integer() && *alpha >= 0 {
        return Err(Error::GammaPole(format!("-{}", format_compact(alpha, 20))));
    }
    let g = gamma_real(&Float::with_val(prec, -alpha))?;
    let nf = Float::with_val(prec, n);
    let pw = (nf.clone().ln() * Float::with_val(prec, alpha + 1)).exp();
    let mut v = (g * pw).recip();
    if terms == 2 {
        let corr = Float::with_val(prec, alpha * Float::with_val(prec, alpha + 1)) / (nf * 2u32);
        v *= corr + 1u32;
    }
    if n % 2 == 1 {
        v = -v;
    }
    Ok(v)
}

/// Complex-exponent version of [`gen_binomial_asymptotic`].
pub fn gen_binomial_asymptotic_complex(alpha: &Complex, n: u64, terms: u32) -> Result<Complex> {
    check_terms(terms)?;
    if alpha.im.is_zero() {
        return gen_binomial_asymptotic(&alpha.re, n, terms).map(Complex::from_real);
    }
    let prec = alpha.prec();
    let g = gamma_complex(&-alpha)?;
    let one = Float::with_val(prec, 1);
    let ln_n = Complex::from_real(Float::with_val(prec, n).ln());
    let pw = (&alpha.add_real(&one) * &ln_n).exp();
    let mut v = (&g * &pw).recip();
    if terms == 2 {
        let mut corr = alpha * &alpha.add_real(&one);
        corr.div_int(2 * n as i64);
        v = &v * &corr.add_real(&one);
    }
    if n % 2 == 1 {
        v.neg_in_place();
    }
    Ok(v)
}
