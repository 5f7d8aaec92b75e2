use crate::error::{Error, Result};
use crate::scalar::Coeff;

use super::TruncatedSeries;

pub(super) fn compose<T: Coeff>(
    outer: &TruncatedSeries<T>,
    inner: &TruncatedSeries<T>,
) -> Result<TruncatedSeries<T>> {
    if !inner.coeffs[0].is_zero() {
        return Err(Error::CompositionDomain);
    }
    let order = outer.order().min(inner.order());
    let inner = inner.with_order(order);
    let nnz = inner.nonzero_indices().len();
    // Horner costs about nnz * N^2 / 2 coefficient products, the blocked
    // scheme about 2 sqrt(N) dense products.
    if (nnz as f64) <= 2.0 * ((order + 1) as f64).sqrt() {
        Ok(horner(outer, &inner, order))
    } else {
        Ok(baby_giant(outer, &inner, order))
    }
}

/// `g_0 + y (g_1 + y (g_2 + ...))`, where the partial result multiplied by
/// `y^k` only needs order `N - k`.
fn horner<T: Coeff>(outer: &TruncatedSeries<T>, y: &TruncatedSeries<T>, order: usize) -> TruncatedSeries<T> {
    let prec = outer.prec;
    let mut h = TruncatedSeries::new(vec![outer.coeffs[order].clone()], prec);
    for k in (0..order).rev() {
        let need = order - k;
        let yk = y.with_order(need);
        let mut next = yk.mul_trunc(&h.with_order(need), need);
        next.coeffs[0].add_ref(&outer.coeffs[k]);
        h = next;
    }
    h
}

/// Paterson-Stockmeyer style evaluation: blocks of `s` baby-step powers
/// combined by Horner in `y^s`.
fn baby_giant<T: Coeff>(
    outer: &TruncatedSeries<T>,
    y: &TruncatedSeries<T>,
    order: usize,
) -> TruncatedSeries<T> {
    let prec = outer.prec;
    let s = ((order + 1) as f64).sqrt().ceil() as usize;
    let mut powers = Vec::with_capacity(s + 1);
    powers.push(TruncatedSeries::one(order, prec));
    for i in 1..=s {
        let p = powers[i - 1].mul(y);
        powers.push(p);
    }
    let blocks = order / s;
    let block = |b: usize| -> TruncatedSeries<T> {
        let need = order - b * s;
        let mut acc = TruncatedSeries::<T>::zero(need, prec);
        for i in 0..s {
            let idx = b * s + i;
            if idx > order {
                break;
            }
            let g = &outer.coeffs[idx];
            if g.is_zero() {
                continue;
            }
            for (a, p) in acc.coeffs.iter_mut().zip(&powers[i].coeffs) {
                a.mul_acc(g, p);
            }
        }
        acc
    };
    let mut r = block(blocks);
    for b in (0..blocks).rev() {
        let need = order - b * s;
        let mut next = powers[s].with_order(need).mul_trunc(&r.with_order(need), need);
        let bb = block(b);
        for (n, c) in next.coeffs.iter_mut().zip(&bb.coeffs) {
            n.add_ref(c);
        }
        r = next;
    }
    r
}

/// Newton iteration `y <- y - (f(y) - w) / f'(y)`, doubling the order each
/// step.
pub(super) fn reversion<T: Coeff>(f: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    let prec = f.prec;
    let order = f.order();
    if !f.coeffs[0].is_zero() {
        return Err(Error::CompositionDomain);
    }
    if order == 0 {
        return Ok(TruncatedSeries::zero(0, prec));
    }
    let f1 = &f.coeffs[1];
    if f1.is_zero() {
        return Err(Error::Precondition(
            "series reversion needs a nonzero linear coefficient".into(),
        ));
    }
    let df = f.derivative();
    let mut y = TruncatedSeries::zero(1, prec);
    y.coeffs[1] = T::one(prec).div_ref(f1);
    let mut current = 1;
    while current < order {
        current = (2 * current).min(order);
        y = y.with_order(current);
        let fy = compose(&f.with_order(current), &y)?;
        let dfy = compose(&df.with_order(current), &y)?;
        let mut resid = fy;
        resid.coeffs[1].sub_ref(&T::one(prec));
        let step = resid.div(&dfy)?;
        y = y.sub(&step);
    }
    Ok(y)
}
