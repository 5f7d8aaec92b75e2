//! Product representation `Phi(z) = z prod_j (1 - z/b_j)^{e_j}` over the
//! roots of `q(z) = q(1)`.

use num_complex::Complex64;
use rug::ops::Pow;
use rug::Float;

use super::{RatioTable, Route};
use crate::error::{Error, Result};
use crate::kernels::{EnvMeasure, KernelSpec, QSpec};
use crate::precision::{pow10, PrecisionContext};
use crate::scalar::{Coeff, Complex};
use crate::series::TruncatedSeries;

#[derive(Clone, Debug)]
pub struct ProductForm {
    /// `b_1 = 1` first, then the remaining roots by modulus.
    pub roots: Vec<Complex>,
    /// `e_j = -1 - q(1) / (q'(b_j) b_j)`
    pub exponents: Vec<Complex>,
    pub q: QSpec,
}

impl ProductForm {
    /// Whether exactly one root is 1 and all others lie outside the unit
    /// disk, the setting of the two-term asymptotics.
    pub fn dominant_root_is_one(&self) -> bool {
        let one = Float::with_val(self.roots[0].prec(), 1);
        self.roots[0].re == one
            && self.roots[0].im.is_zero()
            && self.roots[1..].iter().all(|b| b.abs() > 1)
    }
}

fn eval_poly(c: &[Complex], z: &Complex) -> (Complex, Complex) {
    // Horner for value and derivative.
    let prec = z.prec();
    let mut p = Complex::with_prec(prec);
    let mut dp = Complex::with_prec(prec);
    for a in c.iter().rev() {
        dp = &(&dp * z) + &p;
        p = &(&p * z) + a;
    }
    (p, dp)
}

fn eval_poly64(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Aberth correction for root `k`: `w / (1 - w sum_j 1/(z_k - z_j))`.
fn aberth64(c: &[Complex64], z: &mut [Complex64]) -> bool {
    let deg = z.len();
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for k in 0..deg {
            let (p, dp) = eval_poly64(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let w = p / dp;
            let s: Complex64 = (0..deg)
                .filter(|&j| j != k)
                .map(|j| 1.0 / (z[k] - z[j]))
                .sum();
            let step = w / (1.0 - w * s);
            if step.is_finite() {
                z[k] -= step;
                worst = worst.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if worst < 1e-14 {
            return true;
        }
    }
    false
}

fn aberth_mp(c: &[Complex], z: &mut [Complex], bits: u32) -> bool {
    let deg = z.len();
    let target = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 12));
    for _ in 0..200 {
        let mut worst = Float::new(bits);
        for k in 0..deg {
            let (p, dp) = eval_poly(c, &z[k]);
            if p.is_zero() {
                continue;
            }
            let w = &p / &dp;
            let mut s = Complex::with_prec(bits);
            for j in 0..deg {
                if j != k {
                    s.add_ref(&(&z[k] - &z[j]).recip());
                }
            }
            let one = Complex::one(bits);
            let step = &w / &(&one - &(&w * &s));
            z[k] = &z[k] - &step;
            let scale = z[k].abs().max(&Float::with_val(bits, 1));
            let rel = step.abs() / scale;
            if rel > worst {
                worst = rel;
            }
        }
        if worst < target {
            return true;
        }
    }
    false
}

/// Finds all roots of `q(z) = q(1)`.
pub fn product_form(q: &QSpec, ctx: &PrecisionContext) -> Result<ProductForm> {
    let prec = ctx.bits();
    let qc = q.poly_coeffs(prec).ok_or_else(|| {
        Error::RouteInapplicable {
            route: "product".into(),
            kernel: format!("cpoisson:q={q}"),
        }
    })?;
    if qc.is_empty() {
        return Err(Error::InvalidKernel("q must have degree >= 1".into()));
    }
    let q1 = qc.iter().fold(Float::new(prec), |a, c| a + c);
    if q1 <= 0 {
        return Err(Error::InvalidKernel("q(1) must be positive".into()));
    }
    // p(z) = q(z) - q(1) = (z - 1) r(z): synthetic division from the top.
    let d = qc.len();
    let mut p: Vec<Float> = Vec::with_capacity(d + 1);
    p.push(-q1.clone());
    p.extend(qc.iter().cloned());
    let mut r = vec![Float::new(prec); d];
    r[d - 1] = p[d].clone();
    for k in (1..d).rev() {
        r[k - 1] = Float::with_val(prec, &p[k] + &r[k]);
    }

    let mut roots = vec![Complex::one(prec)];
    if d > 1 {
        let rc: Vec<Complex> = r.iter().cloned().map(Complex::from_real).collect();
        let rc64: Vec<Complex64> = rc.iter().map(|c| c.to_c64()).collect();
        let deg = d - 1;
        let lead = rc64[deg].norm();
        let radius = (0..deg)
            .map(|k| (rc64[k].norm() / lead).powf(1.0 / (deg - k) as f64))
            .fold(0.0f64, f64::max)
            .max(1e-3)
            * 2.0;
        let mut z64: Vec<Complex64> = (0..deg)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4;
                Complex64::from_polar(radius, t)
            })
            .collect();
        aberth64(&rc64, &mut z64);
        let mut z: Vec<Complex> = z64.iter().map(|&w| Complex::from_c64(prec, w)).collect();
        if !aberth_mp(&rc, &mut z, prec) {
            return Err(Error::RootSolverFailure(
                "Aberth iteration did not converge at working precision".into(),
            ));
        }
        roots.extend(z);
    }
    clean_conjugates(&mut roots, ctx);

    // Distinctness.
    let sep = pow10(prec, -(i64::from(ctx.digits()) / 2));
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let dist = (&roots[i] - &roots[j]).abs();
            if dist < sep {
                return Err(Error::MultipleRootsUnsupported {
                    first: format!("{:?}", roots[i]),
                    second: format!("{:?}", roots[j]),
                    distance: dist.to_f64(),
                });
            }
        }
    }

    // Residual acceptance and exponents.
    let pcx: Vec<Complex> = p.iter().cloned().map(Complex::from_real).collect();
    let tol = ctx.tolerance(10);
    let mut exponents = Vec::with_capacity(roots.len());
    for b in &roots {
        let (val, dval) = eval_poly(&pcx, b);
        let scale = qc
            .iter()
            .enumerate()
            .fold(Float::with_val(prec, 1), |acc, (i, c)| {
                acc + Float::with_val(prec, c * b.abs().pow(i as u32 + 1))
            });
        if val.abs() > Float::with_val(prec, &tol * &scale) {
            return Err(Error::RootSolverFailure(format!(
                "root {b:?} has residual {:e}",
                val.abs().to_f64()
            )));
        }
        // q'(b) = p'(b)
        let mut e = Complex::from_real(q1.clone()).div_ref(&(&dval * b));
        e.neg_in_place();
        e.re -= 1u32;
        exponents.push(e);
    }

    // Order: 1 first, then by modulus, then imaginary part.
    let mut idx: Vec<usize> = (1..roots.len()).collect();
    idx.sort_by(|&a, &b| {
        let ka = (roots[a].abs(), roots[a].im.clone());
        let kb = (roots[b].abs(), roots[b].im.clone());
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let order: Vec<usize> = std::iter::once(0).chain(idx).collect();
    Ok(ProductForm {
        roots: order.iter().map(|&i| roots[i].clone()).collect(),
        exponents: order.iter().map(|&i| exponents[i].clone()).collect(),
        q: q.clone(),
    })
}

/// Makes numerically real roots exactly real and pairs the rest into exact
/// conjugates, as required for a real polynomial.
fn clean_conjugates(roots: &mut [Complex], ctx: &PrecisionContext) {
    let prec = ctx.bits();
    let tiny = pow10(prec, -(i64::from(ctx.digits()) / 2));
    for b in roots.iter_mut() {
        let scale = b.abs().max(&Float::with_val(prec, 1));
        if Float::with_val(prec, b.im.abs_ref()) < Float::with_val(prec, &tiny * &scale) {
            b.im = Float::new(prec);
        }
    }
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] || roots[i].im <= 0 {
            continue;
        }
        let target = roots[i].conj();
        let partner = (0..roots.len())
            .filter(|&j| !used[j] && j != i && roots[j].im < 0)
            .min_by(|&a, &b| {
                let da = (&roots[a] - &target).abs();
                let db = (&roots[b] - &target).abs();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(j) = partner {
            roots[j] = target;
            used[i] = true;
            used[j] = true;
        }
    }
}

/// Real coefficients of `(1 - z/b)^e` for real `b`, `e`.
fn real_factor(b: &Float, e: &Float, order: usize) -> TruncatedSeries {
    let prec = b.prec();
    let minus_inv = -Float::with_val(prec, b.recip_ref());
    let mut c = Vec::with_capacity(order + 1);
    c.push(Float::with_val(prec, 1));
    for k in 0..order {
        let mut next = Float::with_val(prec, &c[k] * Float::with_val(prec, e - k as u64));
        next *= &minus_inv;
        next /= k as u64 + 1;
        c.push(next);
    }
    TruncatedSeries::new(c, prec)
}

fn complex_factor(b: &Complex, e: &Complex, order: usize) -> Vec<Complex> {
    let prec = b.prec();
    let minus_inv = -&b.recip();
    let mut c = Vec::with_capacity(order + 1);
    c.push(Complex::one(prec));
    for k in 0..order {
        let mut f = e.clone();
        f.re -= k as u64;
        let mut next = &(&c[k] * &f) * &minus_inv;
        next.div_int(k as i64 + 1);
        c.push(next);
    }
    c
}

/// `F(z) conj(F)(z)` for the factor pair of a conjugate root pair; real by
/// construction.
fn pair_product(f: &[Complex], order: usize) -> TruncatedSeries {
    let prec = f[0].prec();
    let mut out = vec![Float::new(prec); order + 1];
    for (n, o) in out.iter_mut().enumerate() {
        for i in 0..=n {
            *o += &f[i].re * &f[n - i].re;
            *o += &f[i].im * &f[n - i].im;
        }
    }
    TruncatedSeries::new(out, prec)
}

/// Coefficients of `z prod_j (1 - z/b_j)^{e_j}`, by successive convolution
/// of the factor series.
pub fn product_form_phi(pf: &ProductForm, n: usize, ctx: &PrecisionContext) -> Result<RatioTable> {
    let prec = ctx.bits();
    let order = n - 1;
    let mut acc = TruncatedSeries::<Float>::one(order, prec);
    let mut complex_acc: Option<TruncatedSeries<Complex>> = None;
    let mut skip = vec![false; pf.roots.len()];
    for i in 0..pf.roots.len() {
        if skip[i] {
            continue;
        }
        let b = &pf.roots[i];
        let e = &pf.exponents[i];
        if b.is_real() && e.is_real() {
            acc = acc.mul(&real_factor(&b.re, &e.re, order));
            continue;
        }
        let partner = (i + 1..pf.roots.len())
            .find(|&j| !skip[j] && pf.roots[j] == b.conj() && pf.exponents[j] == e.conj());
        let f = complex_factor(b, e, order);
        match partner {
            Some(j) => {
                skip[j] = true;
                acc = acc.mul(&pair_product(&f, order));
            }
            None => {
                let fs = TruncatedSeries::new(f, prec);
                complex_acc = Some(match complex_acc {
                    Some(c) => c.mul(&fs),
                    None => fs,
                });
            }
        }
    }
    let mut values = acc.into_coeffs();
    if let Some(c) = complex_acc {
        let full = TruncatedSeries::new(values, prec).to_complex().mul(&c);
        let tol = ctx.tolerance(10);
        values = Vec::with_capacity(order + 1);
        for v in full.into_coeffs() {
            let scale = v.re.clone().abs().max(&Float::with_val(prec, 1));
            if v.im.clone().abs() > Float::with_val(prec, &tol * &scale) {
                return Err(Error::RootSolverFailure(
                    "product form left an imaginary residue".into(),
                ));
            }
            values.push(v.re);
        }
    }
    let kernel = KernelSpec::CompoundPoisson {
        q: pf.q.clone(),
        measure: EnvMeasure::FullHalfLine,
    };
    Ok(RatioTable::new(values, Route::ProductForm, kernel, ctx.digits()))
}
