//! Truncated power series over real or complex MPFR coefficients.
//!
//! A series of truncation order `N` stores the coefficients of `z^0..=z^N`.
//! Binary operations truncate to the smaller order of their operands. The
//! kernels skip zero coefficients, so sparse operands such as `z e^{r(z-1)}`
//! or low-degree polynomials are cheap even at large `N`.

mod binomial;
mod compose;

pub use binomial::{
    binomial_series, gen_binomial, gen_binomial_asymptotic, gen_binomial_asymptotic_complex,
};

use rug::Float;

use crate::error::{Error, Result};
use crate::scalar::Coeff;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<T = Float> {
    coeffs: Vec<T>,
    prec: u32,
}

pub type ComplexSeries = TruncatedSeries<crate::scalar::Complex>;

impl<T: Coeff> TruncatedSeries<T> {
    /// Builds a series of order `coeffs.len() - 1`; an empty vector gives the
    /// zero series of order 0.
    pub fn new(mut coeffs: Vec<T>, prec: u32) -> Self {
        if coeffs.is_empty() {
            coeffs.push(T::zero(prec));
        }
        TruncatedSeries { coeffs, prec }
    }

    pub fn zero(order: usize, prec: u32) -> Self {
        TruncatedSeries {
            coeffs: vec![T::zero(prec); order + 1],
            prec,
        }
    }

    pub fn one(order: usize, prec: u32) -> Self {
        Self::monomial(0, order, prec)
    }

    /// `z^k` at the given order (zero when `k > order`).
    pub fn monomial(k: usize, order: usize, prec: u32) -> Self {
        let mut s = Self::zero(order, prec);
        if k <= order {
            s.coeffs[k] = T::one(prec);
        }
        s
    }

    /// The identity series `z`.
    pub fn identity(order: usize, prec: u32) -> Self {
        Self::monomial(1, order, prec)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &T {
        &self.coeffs[k]
    }

    /// Truncates or zero-extends to the requested order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs: Vec<T> = self.coeffs.iter().take(order + 1).cloned().collect();
        coeffs.resize(order + 1, T::zero(self.prec));
        TruncatedSeries {
            coeffs,
            prec: self.prec,
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.with_order(order.min(self.order()))
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn nonzero_indices(&self) -> Vec<usize> {
        nonzero(&self.coeffs, self.order())
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = self.with_order(order);
        for (o, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            o.add_ref(b);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = self.with_order(order);
        for (o, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            o.sub_ref(b);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| c.neg_in_place());
        out
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.mul_ref(s);
        }
        out
    }

    pub fn scale_real(&self, s: &Float) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| c.mul_real(s));
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        self.mul_trunc(other, order)
    }

    /// Product truncated to `order` (which may not exceed either operand).
    pub fn mul_trunc(&self, other: &Self, order: usize) -> Self {
        debug_assert!(order <= self.order() && order <= other.order());
        TruncatedSeries {
            coeffs: mul_coeffs(&self.coeffs, &other.coeffs, order, self.prec),
            prec: self.prec,
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let b0 = &other.coeffs[0];
        if b0.is_zero() {
            return Err(Error::DivisionByNonUnit);
        }
        let order = self.order().min(other.order());
        let nz = nonzero(&other.coeffs, order);
        let unit = b0.is_one();
        let mut c: Vec<T> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = self.coeffs[n].clone();
            for &i in nz.iter().skip_while(|&&i| i == 0) {
                if i > n {
                    break;
                }
                acc.mul_sub(&other.coeffs[i], &c[n - i]);
            }
            c.push(if unit { acc } else { acc.div_ref(b0) });
        }
        Ok(TruncatedSeries {
            coeffs: c,
            prec: self.prec,
        })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one(self.order(), self.prec).div(self)
    }

    pub fn exp(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        if !a0.is_finite_c() {
            return Err(Error::Precondition("exp of a series with non-finite constant term".into()));
        }
        let order = self.order();
        // n e_n = sum_k k a_k e_{n-k}
        let weighted: Vec<(usize, T)> = nonzero(&self.coeffs, order)
            .into_iter()
            .filter(|&k| k > 0)
            .map(|k| {
                let mut t = self.coeffs[k].clone();
                t.mul_int(k as i64);
                (k, t)
            })
            .collect();
        let mut e: Vec<T> = Vec::with_capacity(order + 1);
        e.push(a0.exp_c());
        for n in 1..=order {
            let mut acc = T::zero(self.prec);
            for (k, ka) in &weighted {
                if *k > n {
                    break;
                }
                acc.mul_acc(ka, &e[n - k]);
            }
            acc.div_int(n as i64);
            e.push(acc);
        }
        Ok(TruncatedSeries {
            coeffs: e,
            prec: self.prec,
        })
    }

    pub fn log(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::LogDomain);
        }
        let order = self.order();
        let nz: Vec<usize> = nonzero(&self.coeffs, order)
            .into_iter()
            .filter(|&k| k > 0)
            .collect();
        // n l_n = n a_n - sum_{j>=1} a_j (n-j) l_{n-j}
        let mut l: Vec<T> = Vec::with_capacity(order + 1);
        let mut kl: Vec<T> = Vec::with_capacity(order + 1);
        l.push(T::zero(self.prec));
        kl.push(T::zero(self.prec));
        for n in 1..=order {
            let mut acc = self.coeffs[n].clone();
            acc.mul_int(n as i64);
            for &j in &nz {
                if j >= n {
                    break;
                }
                acc.mul_sub(&self.coeffs[j], &kl[n - j]);
            }
            kl.push(acc.clone());
            acc.div_int(n as i64);
            l.push(acc);
        }
        Ok(TruncatedSeries {
            coeffs: l,
            prec: self.prec,
        })
    }

    /// Term-wise antiderivative vanishing at 0; the order grows by one.
    pub fn integrate(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero(self.prec));
        for (k, c) in self.coeffs.iter().enumerate() {
            let mut t = c.clone();
            if k > 0 {
                t.div_int(k as i64 + 1);
            }
            coeffs.push(t);
        }
        TruncatedSeries {
            coeffs,
            prec: self.prec,
        }
    }

    /// Term-wise derivative; the order drops by one (order 0 gives zero).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0, self.prec);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let mut t = c.clone();
                t.mul_int(k as i64 + 1);
                t
            })
            .collect();
        TruncatedSeries {
            coeffs,
            prec: self.prec,
        }
    }

    /// Multiplies by `z^k`, keeping the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let order = self.order();
        let mut coeffs = vec![T::zero(self.prec); k.min(order + 1)];
        coeffs.extend(self.coeffs.iter().take((order + 1).saturating_sub(k)).cloned());
        TruncatedSeries {
            coeffs,
            prec: self.prec,
        }
    }

    /// Divides by `z^k`; the first `k` coefficients must vanish. The order
    /// drops by `k`.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if k > self.order() || self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(Error::Precondition(format!(
                "series is not divisible by z^{k}"
            )));
        }
        Ok(TruncatedSeries {
            coeffs: self.coeffs[k..].to_vec(),
            prec: self.prec,
        })
    }

    /// Evaluates the truncation as a polynomial at `x`.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero(self.prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x);
            acc.add_ref(c);
        }
        acc
    }

    /// Sum of the coefficients (the polynomial evaluated at 1).
    pub fn sum(&self) -> T {
        let mut acc = T::zero(self.prec);
        for c in &self.coeffs {
            acc.add_ref(c);
        }
        acc
    }

    pub fn compose(&self, inner: &Self) -> Result<Self> {
        compose::compose(self, inner)
    }

    /// Compositional inverse; requires `a(0) = 0` and `a'(0) != 0`.
    pub fn reversion(&self) -> Result<Self> {
        compose::reversion(self)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> Float {
        self.coeffs
            .iter()
            .map(|c| c.modulus())
            .fold(Float::new(self.prec), |m, c| if c > m { c } else { m })
    }
}

impl TruncatedSeries<Float> {
    pub fn from_f64(values: &[f64], prec: u32) -> Self {
        Self::new(values.iter().map(|&v| Float::with_val(prec, v)).collect(), prec)
    }

    pub fn to_complex(&self) -> ComplexSeries {
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .cloned()
                .map(crate::scalar::Complex::from_real)
                .collect(),
            prec: self.prec,
        }
    }

    /// Checks the probability-generating-series conditions on a truncation:
    /// no mass at 0, non-negative coefficients, total mass at most 1.
    pub fn check_pgf(&self, slack: &Float) -> Result<()> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Precondition("pgf has mass at 0".into()));
        }
        if let Some(k) = self.coeffs.iter().position(|c| *c < 0) {
            return Err(Error::Precondition(format!(
                "pgf coefficient {k} is negative"
            )));
        }
        if self.sum() > Float::with_val(self.prec, 1 + slack) {
            return Err(Error::Precondition("pgf mass exceeds 1".into()));
        }
        Ok(())
    }
}

fn nonzero<T: Coeff>(c: &[T], order: usize) -> Vec<usize> {
    c.iter()
        .take(order + 1)
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// Truncated convolution. The loop order is fixed by the operands, so the
/// result is bit-reproducible.
fn mul_coeffs<T: Coeff>(a: &[T], b: &[T], order: usize, prec: u32) -> Vec<T> {
    let mut out = vec![T::zero(prec); order + 1];
    let ia = nonzero(a, order);
    let ib = nonzero(b, order);
    let (outer, inner, x, y) = if ia.len() <= ib.len() {
        (ia, ib, a, b)
    } else {
        (ib, ia, b, a)
    };
    for &i in &outer {
        let xi = &x[i];
        for &j in &inner {
            let k = i + j;
            if k > order {
                break;
            }
            out[k].mul_acc(xi, &y[j]);
        }
    }
    out
}

pub fn series_add<T: Coeff>(a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> TruncatedSeries<T> {
    a.add(b)
}

pub fn series_mul<T: Coeff>(a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> TruncatedSeries<T> {
    a.mul(b)
}

pub fn series_div<T: Coeff>(
    a: &TruncatedSeries<T>,
    b: &TruncatedSeries<T>,
) -> Result<TruncatedSeries<T>> {
    a.div(b)
}

pub fn series_compose<T: Coeff>(
    outer: &TruncatedSeries<T>,
    inner: &TruncatedSeries<T>,
) -> Result<TruncatedSeries<T>> {
    outer.compose(inner)
}

pub fn series_exp<T: Coeff>(a: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    a.exp()
}

pub fn series_log<T: Coeff>(a: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    a.log()
}

pub fn series_integrate<T: Coeff>(a: &TruncatedSeries<T>) -> TruncatedSeries<T> {
    a.integrate()
}
