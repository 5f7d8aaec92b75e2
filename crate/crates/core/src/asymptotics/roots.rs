//! Roots of the transcendental indicial equations.
//!
//! Roots are located by counting zeros inside rectangles with the argument
//! principle (evaluated in double precision along an adaptively refined
//! boundary), splitting rectangles until each holds one zero, then polishing
//! with Newton's method at working precision.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rug::Float;

use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::scalar::{format_compact, format_sci, Coeff, Complex};

/// Defining equation of a [`RootSet`], written as `f(alpha) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum IndicialEquation {
    /// `(m+1)^alpha - 1 - m alpha / (m+1)`
    Binomial { m: u32 },
    /// `(1+a)^(alpha+1) + (1+alpha) e^(-a)`
    Tail { a: Float },
}

impl fmt::Display for IndicialEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndicialEquation::Binomial { m } => write!(f, "binomial:m={m}"),
            IndicialEquation::Tail { a } => write!(f, "tail:a={}", format_compact(a, 30)),
        }
    }
}

impl IndicialEquation {
    /// `(f, f')` in double precision.
    pub fn eval64(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            IndicialEquation::Binomial { m } => {
                let m = *m as f64;
                let l = (m + 1.0).ln();
                let p = (z * l).exp();
                (p - 1.0 - z * (m / (m + 1.0)), p * l - m / (m + 1.0))
            }
            IndicialEquation::Tail { a } => {
                let a = a.to_f64();
                let l = (1.0 + a).ln();
                let p = ((z + 1.0) * l).exp();
                let ea = (-a).exp();
                (p + (z + 1.0) * ea, p * l + ea)
            }
        }
    }

    /// `(f, f')` at the precision of `z`.
    pub fn eval(&self, z: &Complex) -> (Complex, Complex) {
        let prec = z.prec();
        match self {
            IndicialEquation::Binomial { m } => {
                let base = Float::with_val(prec, m + 1);
                let l = base.clone().ln();
                let p = Complex::real_base_pow(&base, z);
                let ratio = Float::with_val(prec, *m) / &base;
                let mut f = &p - &z.scale(&ratio);
                f.re -= 1u32;
                let mut df = p.scale(&l);
                df.re -= &ratio;
                (f, df)
            }
            IndicialEquation::Tail { a } => {
                let base = Float::with_val(prec, a + 1u32);
                let l = base.clone().ln();
                let ea = Float::with_val(prec, -a).exp();
                let one = Float::with_val(prec, 1);
                let z1 = z.add_real(&one);
                let p = Complex::real_base_pow(&base, &z1);
                let f = &p + &z1.scale(&ea);
                let df = p.scale(&l).add_real(&ea);
                (f, df)
            }
        }
    }

    pub fn residual(&self, z: &Complex) -> Float {
        self.eval(z).0.abs()
    }
}

/// Closed axis-aligned rectangle in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Rectangle { re_min, re_max, im_min, im_max }
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

/// Argument change of `f` along the segment, or `None` if `f` (nearly)
/// vanishes on it.
fn segment_arg(eq: &IndicialEquation, z0: Complex64, z1: Complex64, w0: Complex64, w1: Complex64, depth: u32) -> Option<f64> {
    let tiny = 1e-12;
    if w0.norm() < tiny || w1.norm() < tiny || depth > 48 {
        return None;
    }
    let zm = 0.5 * (z0 + z1);
    let wm = eq.eval64(zm).0;
    if wm.norm() < tiny {
        return None;
    }
    let d = (w1 / w0).arg();
    let d1 = (wm / w0).arg();
    let d2 = (w1 / wm).arg();
    if d.abs() < 0.5 && (d1 + d2 - d).abs() < 1e-9 && d1.abs() < 0.3 && d2.abs() < 0.3 {
        return Some(d);
    }
    Some(segment_arg(eq, z0, zm, w0, wm, depth + 1)? + segment_arg(eq, zm, z1, wm, w1, depth + 1)?)
}

fn winding(eq: &IndicialEquation, rect: &Rectangle) -> Option<i64> {
    let c = rect.corners();
    let w: Vec<Complex64> = c.iter().map(|&z| eq.eval64(z).0).collect();
    let mut total = 0.0;
    for k in 0..4 {
        let j = (k + 1) % 4;
        // Seed each edge with a few points so that long edges start refined.
        let pieces = 16;
        let mut zp = c[k];
        let mut wp = w[k];
        for s in 1..=pieces {
            let t = s as f64 / pieces as f64;
            let z = c[k] + (c[j] - c[k]) * t;
            let wz = if s == pieces { w[j] } else { eq.eval64(z).0 };
            total += segment_arg(eq, zp, z, wp, wz, 0)?;
            zp = z;
            wp = wz;
        }
    }
    let n = total / TAU;
    if (n - n.round()).abs() > 1e-3 {
        return None;
    }
    Some(n.round() as i64)
}

/// Number of zeros of the indicial function inside `rect`.
///
/// If a zero sits on the boundary, the rectangle is enlarged by a tiny
/// amount and counted again.
pub fn count_roots_in_rectangle(eq: &IndicialEquation, rect: &Rectangle) -> Result<usize> {
    let mut r = *rect;
    for attempt in 0..8 {
        if let Some(n) = winding(eq, &r) {
            if n < 0 {
                return Err(Error::RootSolverFailure(format!("negative winding number {n} for {rect:?}")));
            }
            return Ok(n as usize);
        }
        let eps = 1e-7 * (attempt + 1) as f64;
        r = Rectangle::new(r.re_min - eps, r.re_max + eps * 1.37, r.im_min - eps * 0.71, r.im_max + eps * 1.13);
    }
    Err(Error::RootSolverFailure(format!(
        "argument principle failed on the boundary of {rect:?}"
    )))
}

fn newton64(eq: &IndicialEquation, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..100 {
        let (f, df) = eq.eval64(z);
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        z -= step;
        if !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        if step.norm() <= 1e-13 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}

fn isolate(eq: &IndicialEquation, rect: Rectangle, count: usize, out: &mut Vec<Complex64>, depth: u32) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let w = rect.re_max - rect.re_min;
    let h = rect.im_max - rect.im_min;
    if count == 1 {
        if let Some(z) = newton64(eq, rect.center()) {
            if rect.contains(z, 1e-9 * (1.0 + z.norm())) {
                out.push(z);
                return Ok(());
            }
        }
    }
    if depth > 60 || w.max(h) < 1e-10 {
        return Err(Error::RootSolverFailure(format!(
            "could not separate {count} zeros near {}",
            rect.center()
        )));
    }
    // Split the longer side; nudge the cut if it passes through a zero.
    for frac in [0.5, 0.4813, 0.5371, 0.4457] {
        let (a, b) = if w >= h {
            let x = rect.re_min + frac * w;
            (Rectangle { re_max: x, ..rect }, Rectangle { re_min: x, ..rect })
        } else {
            let y = rect.im_min + frac * h;
            (Rectangle { im_max: y, ..rect }, Rectangle { im_min: y, ..rect })
        };
        if let (Some(ca), Some(cb)) = (winding(eq, &a), winding(eq, &b)) {
            if ca < 0 || cb < 0 || (ca + cb) as usize != count {
                continue;
            }
            isolate(eq, a, ca as usize, out, depth + 1)?;
            isolate(eq, b, cb as usize, out, depth + 1)?;
            return Ok(());
        }
    }
    Err(Error::RootSolverFailure(format!(
        "inconsistent zero counts while splitting {rect:?}"
    )))
}

/// Newton's method at working precision from a double-precision start.
fn polish(eq: &IndicialEquation, start: Complex64, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    let mut z = Complex::from_c64(prec, start);
    let stop = Float::with_val(prec, Float::i_exp(1, 8 - prec as i32));
    let mut last_step = f64::INFINITY;
    for _ in 0..200 {
        let (f, df) = eq.eval(&z);
        if df.is_zero() {
            break;
        }
        let step = &f / &df;
        z = &z - &step;
        let size = step.abs();
        let scale = Float::with_val(prec, z.abs().max(&Float::with_val(prec, 1)));
        if size <= Float::with_val(prec, &stop * &scale) {
            return Ok(z);
        }
        let s = size.to_f64();
        if s > last_step && s < 1e-30 {
            // Rounding noise has taken over.
            return Ok(z);
        }
        last_step = s;
    }
    let r = eq.residual(&z);
    if r <= ctx.tolerance(10) {
        return Ok(z);
    }
    Err(Error::RootSolverFailure(format!(
        "Newton iteration stagnated near {start} for {eq} (residual {:e})",
        r.to_f64()
    )))
}

/// Zeros of `eq` with `im >= im_min` inside `rect`, polished.
fn zeros_in(eq: &IndicialEquation, rect: Rectangle, ctx: &PrecisionContext) -> Result<Vec<Complex>> {
    let n = count_roots_in_rectangle(eq, &rect)?;
    let mut approx = Vec::new();
    isolate(eq, rect, n, &mut approx, 0)?;
    let mut roots = Vec::with_capacity(approx.len());
    for z in approx {
        roots.push(polish(eq, z, ctx)?);
    }
    roots.sort_by(cmp_roots);
    Ok(roots)
}

fn cmp_roots(a: &Complex, b: &Complex) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Roots of an indicial equation with their residuals `|f(alpha)|`.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub equation: IndicialEquation,
    /// Sorted by real part, then imaginary part; conjugates included.
    pub roots: Vec<Complex>,
    pub residuals: Vec<Float>,
}

impl RootSet {
    fn build(equation: IndicialEquation, mut roots: Vec<Complex>) -> Self {
        roots.sort_by(cmp_roots);
        let residuals = roots.iter().map(|z| equation.residual(z)).collect();
        RootSet { equation, roots, residuals }
    }

    /// Non-real roots in the upper half-plane, by increasing real part.
    pub fn upper_complex(&self) -> Vec<&Complex> {
        self.roots.iter().filter(|z| z.im > 0).collect()
    }

    /// The non-real root of smallest real part with positive imaginary part.
    pub fn first_complex(&self) -> Option<&Complex> {
        self.upper_complex().into_iter().next()
    }

    pub fn real_roots(&self) -> Vec<&Complex> {
        self.roots.iter().filter(|z| z.im.is_zero()).collect()
    }

    pub fn max_residual(&self) -> Float {
        let prec = self.roots.first().map_or(64, |z| z.prec());
        self.residuals
            .iter()
            .fold(Float::new(prec), |acc, r| if *r > acc { Float::with_val(prec, r) } else { acc })
    }

    /// CSV with header `re,im,residual`.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut s = String::from("re,im,residual\n");
        for (z, r) in self.roots.iter().zip(&self.residuals) {
            s.push_str(&format!(
                "{},{},{}\n",
                format_sci(&z.re, digits),
                format_sci(&z.im, digits),
                format_sci(r, 6)
            ));
        }
        s
    }
}

/// Collects upper-half-plane zeros in `[re_lo, R] x [im_lo, I]`, enlarging
/// the rectangle until `count` zeros are found and no zero outside it can
/// have a smaller real part.
fn first_upper_zeros(
    eq: &IndicialEquation,
    count: usize,
    re_lo: f64,
    keep: impl Fn(&Complex) -> bool,
    re_bound: impl Fn(f64) -> f64,
    re_floor_above: impl Fn(f64) -> f64,
    mut im_hi: f64,
    ctx: &PrecisionContext,
) -> Result<Vec<Complex>> {
    // A zero closer than this to the real axis would be a near-double real
    // zero; none exist for these equations.
    let im_lo = 0.25;
    for _ in 0..12 {
        let rect = Rectangle::new(re_lo, re_bound(im_hi), im_lo, im_hi);
        let zs: Vec<Complex> = zeros_in(eq, rect, ctx)?.into_iter().filter(|z| keep(z)).collect();
        if zs.len() >= count {
            let last = zs[count - 1].re.to_f64();
            if last < re_floor_above(im_hi) {
                return Ok(zs.into_iter().take(count).collect());
            }
        }
        im_hi *= 2.0;
    }
    Err(Error::RootSolverFailure(format!(
        "could not certify the first {count} complex roots of {eq}"
    )))
}

/// Smallest `x >= 0` with `base^x > lin(x)` and `base^x` growing faster
/// than `lin` from there on (slope of `lin` at most `slope`).
fn exp_beats_linear(base: f64, slope: f64, lin: impl Fn(f64) -> f64) -> f64 {
    let l = base.ln();
    let mut x: f64 = 0.0;
    while base.powf(x) <= lin(x) || l * base.powf(x) < slope {
        x += 0.25;
    }
    x + 0.5
}

/// Real roots `-1` and `0` of `(m+1)^alpha - 1 = m alpha / (m+1)`, plus the
/// first `count` complex roots with positive real part and their
/// conjugates.
///
/// `alpha = 1` is not a root; it is the threshold that decides whether the
/// period-`(m+1)` correction or the log-periodic one dominates.
pub fn solve_binomial_indicial(m: u32, count: usize, ctx: &PrecisionContext) -> Result<RootSet> {
    if m == 0 {
        return Err(Error::Precondition("binomial indicial equation needs m >= 1".into()));
    }
    let eq = IndicialEquation::Binomial { m };
    let prec = ctx.bits();
    let mut roots = vec![Complex::from_real(Float::with_val(prec, -1)), Complex::with_prec(prec)];
    if count > 0 {
        let mf = m as f64;
        let base = mf + 1.0;
        let l = base.ln();
        let upper = first_upper_zeros(
            &eq,
            count,
            -1.0,
            |z| z.re > 0,
            // |(m+1)^alpha| = |1 + m alpha/(m+1)| <= 1 + re + im
            |im_hi| exp_beats_linear(base, 1.0, |x| 1.0 + x + im_hi),
            // For im >= I: (m+1)^re >= m I/(m+1) - 1.
            |im_hi| ((mf / base) * im_hi - 1.0).max(1e-300).ln() / l,
            TAU * (count as f64 + 1.0) / l + 1.0,
            ctx,
        )?;
        for z in upper {
            roots.push(z.conj());
            roots.push(z);
        }
    }
    Ok(RootSet::build(eq, roots))
}

/// The real root of `-(1+alpha) e^(-a) = (1+a)^(alpha+1)` and the first
/// `count` complex-conjugate pairs by increasing real part.
///
/// With `beta = alpha + 1` the left side of `(1+a)^beta + beta e^(-a)` is
/// strictly increasing on the real line, so the real root is unique, and
/// every other root has a larger real part.
pub fn solve_tail_indicial(a: &Float, count: usize, ctx: &PrecisionContext) -> Result<RootSet> {
    if *a <= 0 {
        return Err(Error::Precondition(format!("tail threshold must be positive, got {a}")));
    }
    let eq = IndicialEquation::Tail { a: a.clone() };
    let af = a.to_f64();
    let base = 1.0 + af;
    let l = base.ln();
    let ea = (-af).exp();
    let h = |b: f64| base.powf(b) + b * ea;
    let mut lo = -1.0;
    while h(lo) > 0.0 {
        lo *= 2.0;
        if lo < -1e6 {
            return Err(Error::RootSolverFailure(format!("no real root bracket for {eq}")));
        }
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let alpha0 = 0.5 * (lo + hi) - 1.0;
    let real = polish(&eq, Complex64::new(alpha0, 0.0), ctx)?;
    let mut roots = vec![Complex::from_real(real.re)];
    if count > 0 {
        let upper = first_upper_zeros(
            &eq,
            count,
            alpha0 - 0.5,
            |_| true,
            // |(1+a)^beta| = |beta| e^(-a) <= (1 + re + im) e^(-a), shifted back to alpha.
            |im_hi| exp_beats_linear(base, ea, |x| (2.0 + x + im_hi) * ea) - 1.0,
            // For im >= I: (1+a)^(re+1) >= I e^(-a).
            |im_hi| (im_hi.ln() - af) / l - 1.0,
            PI * 2.0 * (count as f64 + 1.0) / l + 1.0,
            ctx,
        )?;
        for z in upper {
            roots.push(z.conj());
            roots.push(z);
        }
    }
    Ok(RootSet::build(eq, roots))
}
