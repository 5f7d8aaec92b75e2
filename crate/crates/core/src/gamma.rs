//! Gamma function by Spouge's approximation, for real and complex arguments.
//!
//! MPFR ships a real gamma but nothing for complex arguments; using one
//! algorithm for both keeps the two code paths consistent.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

use crate::error::{Error, Result};
use crate::scalar::{pi, Coeff, Complex};

struct Spouge {
    a: u32,
    /// Internal precision of the coefficients (cancellation headroom).
    work: u32,
    coeffs: Vec<Float>,
}

fn spouge(bits: u32) -> Arc<Spouge> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Spouge>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().expect("gamma cache poisoned").get(&bits) {
        return s.clone();
    }
    let s = Arc::new(build_spouge(bits));
    cache
        .lock()
        .expect("gamma cache poisoned")
        .insert(bits, s.clone());
    s
}

fn build_spouge(bits: u32) -> Spouge {
    // Relative truncation error is below (2 pi)^-(a + 1/2).
    let target = f64::from(bits + 8) * std::f64::consts::LN_2;
    let a = (target / (2.0 * std::f64::consts::PI).ln()).ceil() as u32 + 1;

    // The c_k alternate in sign and grow large; size the internal precision
    // by the largest of them.
    let af = f64::from(a);
    let mut ln_fact = 0.0;
    let mut max_ln = 0.0f64;
    for k in 1..a {
        let kf = f64::from(k);
        if k > 1 {
            ln_fact += (kf - 1.0).ln();
        }
        let l = (kf - 0.5) * (af - kf).ln() + (af - kf) - ln_fact;
        max_ln = max_ln.max(l);
    }
    let work = bits + (max_ln / std::f64::consts::LN_2).ceil() as u32 + 32;

    let mut coeffs = Vec::with_capacity(a as usize);
    let two_pi = Float::with_val(work, pi(work) * 2u32);
    coeffs.push(two_pi.sqrt());
    let mut fact = Float::with_val(work, 1);
    for k in 1..a {
        if k > 1 {
            fact *= k - 1;
        }
        let base = Float::with_val(work, a - k);
        let mut c = base.clone().ln() * Float::with_val(work, f64::from(k) - 0.5);
        c += a - k;
        let mut c = c.exp() / &fact;
        if k % 2 == 0 {
            c = -c;
        }
        coeffs.push(c);
    }
    Spouge { a, work, coeffs }
}

/// Gamma(z) for Re z >= 1/2, computed at the internal precision.
fn spouge_eval<T: Coeff>(z: &T, lift: impl Fn(Float) -> T, s: &Spouge) -> T {
    let work = s.work;
    // Spouge approximates Gamma(x + 1); use x = z - 1.
    let mut x = z.clone();
    x.sub_ref(&lift(Float::with_val(work, 1)));
    let mut sum = lift(s.coeffs[0].clone());
    for k in 1..s.a {
        let mut d = x.clone();
        d.add_ref(&lift(Float::with_val(work, k)));
        let c = lift(s.coeffs[k as usize].clone());
        sum.add_ref(&c.div_ref(&d));
    }
    let mut xa = x.clone();
    xa.add_ref(&lift(Float::with_val(work, s.a)));
    let mut expo = x;
    expo.add_ref(&lift(Float::with_val(work, 0.5)));
    // (x + a)^(x + 1/2) * exp(-(x + a))
    let mut log_pref = xa.ln_c().mul_ref(&expo);
    log_pref.sub_ref(&xa);
    log_pref.exp_c().mul_ref(&sum)
}

/// Real gamma function.
pub fn gamma_real(x: &Float) -> Result<Float> {
    let bits = x.prec();
    if !x.is_finite() {
        return Err(Error::GammaPole(x.to_string()));
    }
    if x.is_integer() && *x <= 0 {
        return Err(Error::GammaPole(crate::scalar::format_compact(x, 20)));
    }
    let s = spouge(bits);
    let xw = Float::with_val(s.work, x);
    let val = if xw < 0.5 {
        // Reflection: Gamma(x) = pi / (sin(pi x) Gamma(1 - x)).
        let one_minus = Float::with_val(s.work, 1 - &xw);
        let g = spouge_eval(&one_minus, |v| v, &s);
        let p = pi(s.work);
        let sin = Float::with_val(s.work, &p * &xw).sin();
        p / (sin * g)
    } else {
        spouge_eval(&xw, |v| v, &s)
    };
    Ok(Float::with_val(bits, val))
}

/// Complex gamma function.
pub fn gamma_complex(z: &Complex) -> Result<Complex> {
    let bits = z.prec();
    if z.im.is_zero() {
        return gamma_real(&z.re).map(Complex::from_real);
    }
    let s = spouge(bits);
    let zw = Complex::new(Float::with_val(s.work, &z.re), Float::with_val(s.work, &z.im));
    let lift = |v: Float| Complex::from_real(v);
    let val = if zw.re < 0.5 {
        let one = Float::with_val(s.work, 1);
        let one_minus = (-&zw).add_real(&one);
        let g = spouge_eval(&one_minus, lift, &s);
        let p = pi(s.work);
        let sin = zw.scale(&p).sin();
        Complex::from_real(p).div_ref(&sin.mul_ref(&g))
    } else {
        spouge_eval(&zw, lift, &s)
    };
    Ok(Complex::new(
        Float::with_val(bits, &val.re),
        Float::with_val(bits, &val.im),
    ))
}

/// `1 / Gamma(x)`, which is zero at the poles of gamma.
pub fn rgamma_real(x: &Float) -> Float {
    if x.is_integer() && *x <= 0 {
        return Float::new(x.prec());
    }
    gamma_real(x).map(|g| g.recip()).unwrap_or_else(|_| Float::new(x.prec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 240;

    fn close(a: &Float, b: &Float, tol: f64) -> bool {
        let d = Float::with_val(P, a - b).abs();
        d <= Float::with_val(P, b.abs_ref()) * tol
    }

    #[test]
    fn matches_mpfr_gamma_on_real_axis() {
        for x in [0.5, 1.0, 1.5, 2.75, 5.0 / 3.0, 7.25, 30.5, -0.5, -2.3, 0.01] {
            let xf = Float::with_val(P, x);
            let ours = gamma_real(&xf).unwrap();
            let reference = xf.clone().gamma();
            assert!(close(&ours, &reference, 1e-65), "x = {x}");
        }
    }

    #[test]
    fn poles_are_reported() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(
                gamma_real(&Float::with_val(P, x)),
                Err(Error::GammaPole(_))
            ));
        }
        assert_eq!(rgamma_real(&Float::with_val(P, -3)), 0);
    }

    #[test]
    fn complex_recurrence_holds() {
        let z = Complex::from_f64(P, -1.47, 4.39);
        let g = gamma_complex(&z).unwrap();
        let z1 = z.add_real(&Float::with_val(P, 1));
        let g1 = gamma_complex(&z1).unwrap();
        let diff = (&g1 - &(&z * &g)).abs();
        assert!(diff < g1.abs() * 1e-65);
    }

    #[test]
    fn complex_modulus_on_critical_line() {
        // |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
        let y = 3.25;
        let z = Complex::from_f64(P, 0.5, y);
        let g = gamma_complex(&z).unwrap().abs();
        let p = pi(P);
        let expected = Float::with_val(P, &p / (Float::with_val(P, &p * y)).cosh());
        assert!(close(&g.square(), &expected, 1e-65));
    }

    #[test]
    fn complex_agrees_with_real_for_real_input() {
        let z = Complex::from_f64(P, 2.5, 0.0);
        let g = gamma_complex(&z).unwrap();
        assert!(g.im.is_zero());
        assert!(close(&g.re, &Float::with_val(P, 2.5).gamma(), 1e-70));
    }
}
