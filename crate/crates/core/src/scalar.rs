//! Scalar types used as series coefficients: MPFR reals and a small complex
//! type built on top of them (no MPC dependency).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::{Constant, Round};
use rug::Float;

use crate::error::{Error, Result};

/// Arithmetic needed by the truncated power-series kernels.
pub trait Coeff: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero(prec: u32) -> Self;
    fn one(prec: u32) -> Self;
    fn from_real(x: Float) -> Self;
    fn prec(&self) -> u32;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add_ref(&mut self, other: &Self);
    fn sub_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    /// `self += a * b`
    fn mul_acc(&mut self, a: &Self, b: &Self);
    /// `self -= a * b`
    fn mul_sub(&mut self, a: &Self, b: &Self);
    fn div_ref(&self, other: &Self) -> Self;
    fn mul_int(&mut self, k: i64);
    fn div_int(&mut self, k: i64);
    fn mul_real(&mut self, r: &Float);
    fn neg_in_place(&mut self);
    fn exp_c(&self) -> Self;
    fn ln_c(&self) -> Self;
    /// Modulus, as a real float.
    fn modulus(&self) -> Float;
    fn is_finite_c(&self) -> bool;
}

impl Coeff for Float {
    fn zero(prec: u32) -> Self {
        Float::new(prec)
    }
    fn one(prec: u32) -> Self {
        Float::with_val(prec, 1)
    }
    fn from_real(x: Float) -> Self {
        x
    }
    fn prec(&self) -> u32 {
        Float::prec(self)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn add_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_ref(&mut self, other: &Self) {
        *self -= other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        Float::with_val(Float::prec(self), self * other)
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn mul_sub(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn div_ref(&self, other: &Self) -> Self {
        Float::with_val(Float::prec(self), self / other)
    }
    fn mul_int(&mut self, k: i64) {
        *self *= k;
    }
    fn div_int(&mut self, k: i64) {
        *self /= k;
    }
    fn mul_real(&mut self, r: &Float) {
        *self *= r;
    }
    fn neg_in_place(&mut self) {
        rug::ops::NegAssign::neg_assign(self);
    }
    fn exp_c(&self) -> Self {
        self.clone().exp()
    }
    fn ln_c(&self) -> Self {
        self.clone().ln()
    }
    fn modulus(&self) -> Float {
        self.clone().abs()
    }
    fn is_finite_c(&self) -> bool {
        self.is_finite()
    }
}

/// Complex number with MPFR real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", format_sci(&self.re, 20), format_sci(&self.im, 20))
    }
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        let prec = re.prec().max(im.prec());
        Complex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn with_prec(prec: u32) -> Self {
        Complex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Complex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_c64(prec: u32, z: Complex64) -> Self {
        Self::from_f64(prec, z.re, z.im)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn exp(&self) -> Self {
        let r = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(self.prec()));
        Complex {
            re: Float::with_val(self.prec(), &r * &c),
            im: Float::with_val(self.prec(), &r * &s),
        }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        Complex {
            re: self.abs().ln(),
            im: self.arg(),
        }
    }

    /// Principal power `self^w`.
    pub fn pow(&self, w: &Complex) -> Self {
        (&self.ln() * w).exp()
    }

    /// `b^self` for a positive real base.
    pub fn real_base_pow(base: &Float, exponent: &Complex) -> Self {
        let lb = base.clone().ln();
        let mut t = exponent.clone();
        t.re *= &lb;
        t.im *= &lb;
        t.exp()
    }

    pub fn recip(&self) -> Self {
        let prec = self.prec();
        let mut d = Float::with_val(prec, self.re.square_ref());
        d += &self.im * &self.im;
        Complex {
            re: Float::with_val(prec, &self.re / &d),
            im: -Float::with_val(prec, &self.im / &d),
        }
    }

    pub fn sin(&self) -> Self {
        let prec = self.prec();
        let (s, c) = self.re.clone().sin_cos(Float::new(prec));
        let (sh, ch) = self.im.clone().sinh_cosh(Float::new(prec));
        Complex {
            re: Float::with_val(prec, &s * &ch),
            im: Float::with_val(prec, &c * &sh),
        }
    }

    pub fn scale(&self, r: &Float) -> Self {
        Complex {
            re: Float::with_val(self.prec(), &self.re * r),
            im: Float::with_val(self.prec(), &self.im * r),
        }
    }

    pub fn add_real(&self, r: &Float) -> Self {
        Complex {
            re: Float::with_val(self.prec(), &self.re + r),
            im: self.im.clone(),
        }
    }
}

impl Add for &Complex {
    type Output = Complex;
    fn add(self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }
}

impl Sub for &Complex {
    type Output = Complex;
    fn sub(self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }
}

impl Mul for &Complex {
    type Output = Complex;
    fn mul(self, o: &Complex) -> Complex {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &o.re);
        re -= &self.im * &o.im;
        let mut im = Float::with_val(p, &self.re * &o.im);
        im += &self.im * &o.re;
        Complex { re, im }
    }
}

impl Div for &Complex {
    type Output = Complex;
    fn div(self, o: &Complex) -> Complex {
        self * &o.recip()
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl Coeff for Complex {
    fn zero(prec: u32) -> Self {
        Complex::with_prec(prec)
    }
    fn one(prec: u32) -> Self {
        Complex::from_f64(prec, 1.0, 0.0)
    }
    fn from_real(x: Float) -> Self {
        let p = x.prec();
        Complex {
            re: x,
            im: Float::new(p),
        }
    }
    fn prec(&self) -> u32 {
        self.re.prec()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn is_one(&self) -> bool {
        self.re == 1 && self.im.is_zero()
    }
    fn add_ref(&mut self, o: &Self) {
        self.re += &o.re;
        self.im += &o.im;
    }
    fn sub_ref(&mut self, o: &Self) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        self.re += &a.re * &b.re;
        self.re -= &a.im * &b.im;
        self.im += &a.re * &b.im;
        self.im += &a.im * &b.re;
    }
    fn mul_sub(&mut self, a: &Self, b: &Self) {
        self.re -= &a.re * &b.re;
        self.re += &a.im * &b.im;
        self.im -= &a.re * &b.im;
        self.im -= &a.im * &b.re;
    }
    fn div_ref(&self, o: &Self) -> Self {
        self / o
    }
    fn mul_int(&mut self, k: i64) {
        self.re *= k;
        self.im *= k;
    }
    fn div_int(&mut self, k: i64) {
        self.re /= k;
        self.im /= k;
    }
    fn mul_real(&mut self, r: &Float) {
        self.re *= r;
        self.im *= r;
    }
    fn neg_in_place(&mut self) {
        rug::ops::NegAssign::neg_assign(&mut self.re);
        rug::ops::NegAssign::neg_assign(&mut self.im);
    }
    fn exp_c(&self) -> Self {
        self.exp()
    }
    fn ln_c(&self) -> Self {
        self.ln()
    }
    fn modulus(&self) -> Float {
        self.abs()
    }
    fn is_finite_c(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Scientific notation with `digits` significant figures, e.g. `1.5000e-3`.
pub fn format_sci(x: &Float, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_zero() {
        return if digits == 1 {
            "0e0".to_string()
        } else {
            format!("0.{}e0", "0".repeat(digits - 1))
        };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (neg, s, exp) = x.to_sign_string_exp_round(10, Some(digits), Round::Nearest);
    let e = exp.unwrap_or(0) - 1;
    let sign = if neg { "-" } else { "" };
    if s.len() == 1 {
        format!("{sign}{s}e{e}")
    } else {
        format!("{sign}{}.{}e{e}", &s[..1], &s[1..])
    }
}

/// Short human-readable form: up to `digits` significant figures with
/// trailing zeros removed, integers printed without exponent.
pub fn format_compact(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if x.is_integer() && x.clone().abs() < 1e15 {
        if let Some(i) = x.to_integer() {
            return i.to_string();
        }
    }
    let s = format_sci(x, digits);
    let (mant, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    if exp == "0" {
        mant.to_string()
    } else {
        format!("{mant}e{exp}")
    }
}

/// Parses a decimal (`0.25`, `-1e-3`) or a rational `p/q` literal.
pub fn parse_real(text: &str, prec: u32) -> Result<Float> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((num, den)) = t.split_once('/') {
        let n = parse_decimal(num, prec)?;
        let d = parse_decimal(den, prec)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{t}`")));
        }
        return Ok(Float::with_val(prec, &n / &d));
    }
    parse_decimal(t, prec)
}

fn parse_decimal(text: &str, prec: u32) -> Result<Float> {
    let t = text.trim();
    let parsed = Float::parse(t).map_err(|e| Error::Parse(format!("bad number `{t}`: {e}")))?;
    let x = Float::with_val(prec, parsed);
    if !x.is_finite() {
        return Err(Error::Parse(format!("non-finite number `{t}`")));
    }
    Ok(x)
}

/// `|a - b| / max(1, |b|)`
pub fn rel_diff(a: &Float, b: &Float) -> Float {
    let prec = a.prec().max(b.prec());
    let d = Float::with_val(prec, a - b).abs();
    let scale = Float::with_val(prec, b.abs_ref());
    if scale > 1 {
        d / scale
    } else {
        d
    }
}
