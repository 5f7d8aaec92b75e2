//! The averaged Schröder operator `T[G] = (1/mass) int G(P_r(z)) mu(dr)` and
//! fixed-point iteration of it.
//!
//! Every form below is lower triangular in the coefficients (coefficient `n`
//! of `T[G]` depends on `g_1..g_n` only), so truncation at order `N` is
//! exact.

use rug::Float;

use super::{RatioTable, Route};
use crate::error::{Error, Result};
use crate::kernels::{ConjugateP, EnvMeasure, KernelSpec, QSpec};
use crate::precision::PrecisionContext;
use crate::scalar::rel_diff;
use crate::series::TruncatedSeries;

fn check_normalized(g: &TruncatedSeries, ctx: &PrecisionContext) -> Result<()> {
    if g.order() < 1 {
        return Err(Error::Precondition("G needs order >= 1".into()));
    }
    let tol = ctx.tolerance(10);
    let d1 = Float::with_val(ctx.bits(), g.coeff(1) - 1u32).abs();
    if !g.coeff(0).is_zero() || d1 > tol {
        return Err(Error::Precondition("G must satisfy G(0) = 0 and G'(0) = 1".into()));
    }
    Ok(())
}

pub fn schroder_operator(
    spec: &KernelSpec,
    g: &TruncatedSeries,
    ctx: &PrecisionContext,
) -> Result<TruncatedSeries> {
    check_normalized(g, ctx)?;
    match spec {
        KernelSpec::CompoundPoisson { q, measure } => cp_operator(spec, q, measure, g, ctx),
        KernelSpec::Binomial { m } => binomial_operator(*m, g, ctx),
        KernelSpec::Conjugate { p } => {
            let (h, powers) = conjugate_decompose(p, g, ctx);
            let h: Vec<Float> = h
                .into_iter()
                .enumerate()
                .map(|(k, v)| v * 2u32 / (k as u64 + 1))
                .collect();
            Ok(powers.recompose(&h))
        }
    }
}

/// `sum_k w_k z^k exp(k s (q(z) - q(1)))` through order `N`.
fn weighted_exp_sum(w: &[Float], qs: &TruncatedSeries, q1: &Float, s: &Float) -> Result<TruncatedSeries> {
    let order = qs.order();
    let prec = qs.prec();
    let mut out = TruncatedSeries::zero(order, prec);
    for (k, wk) in w.iter().enumerate().skip(1) {
        if wk.is_zero() {
            continue;
        }
        let room = order - k;
        let ks = Float::with_val(prec, s * k as u64);
        let mut arg = qs.truncate(room).scale_real(&ks);
        arg.coeffs_mut()[0] = -Float::with_val(prec, &ks * q1);
        let e = arg.exp()?;
        for (j, ej) in e.coeffs().iter().enumerate() {
            out.coeffs_mut()[k + j] += wk * ej;
        }
    }
    Ok(out)
}

fn cp_operator(
    spec: &KernelSpec,
    q: &QSpec,
    measure: &EnvMeasure,
    g: &TruncatedSeries,
    ctx: &PrecisionContext,
) -> Result<TruncatedSeries> {
    let prec = ctx.bits();
    let order = g.order();
    let qs = q.series(order, prec);
    let q1 = q.at_one(order, prec);
    let mass = spec.survival_mass(prec)?;
    let mut den = qs.neg();
    den.coeffs_mut()[0] += &q1;
    // I(z) = int_0^z G(w)/w dw
    let integral: Vec<Float> = g
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| if k == 0 { Float::new(prec) } else { Float::with_val(prec, c / k as u64) })
        .collect();
    let integral_series = TruncatedSeries::new(integral.clone(), prec);
    let one = Float::with_val(prec, 1);
    let t = match measure {
        EnvMeasure::FullHalfLine => integral_series.div(&den)?,
        EnvMeasure::TailHalfLine { a } => {
            weighted_exp_sum(&integral, &qs, &q1, &a.at(prec))?.div(&den)?
        }
        EnvMeasure::UnitInterval => {
            let upper = weighted_exp_sum(&integral, &qs, &q1, &one)?;
            integral_series.sub(&upper).div(&den)?
        }
        EnvMeasure::Dirac { r0 } => weighted_exp_sum(g.coeffs(), &qs, &q1, &r0.at(prec))?,
    };
    Ok(t.scale_real(&mass.recip()))
}

/// `((m+1)/m) (1/(1-z)) sum_k g_k / (k + 1/m) (z^k - z^{(m+1)k+1})`.
fn binomial_operator(m: u32, g: &TruncatedSeries, ctx: &PrecisionContext) -> Result<TruncatedSeries> {
    let prec = ctx.bits();
    let order = g.order();
    let mm = u64::from(m);
    let mut acc = vec![Float::new(prec); order + 1];
    for (k, gk) in g.coeffs().iter().enumerate().skip(1) {
        if gk.is_zero() {
            continue;
        }
        let k = k as u64;
        // w^{k + 1/m} at w = z^{m+1}, divided by z^{1/m}: the exponent is
        // ((m+1)(mk+1) - 1) / m, an integer.
        let num = (mm + 1) * (mm * k + 1) - 1;
        if num % mm != 0 {
            return Err(Error::InternalExponentMismatch(format!(
                "k = {k}, m = {m}: exponent {num}/{m}"
            )));
        }
        let high = (num / mm) as usize;
        let c = Float::with_val(prec, gk * mm) / (mm * k + 1);
        if high <= order {
            acc[high] -= &c;
        }
        acc[k as usize] += c;
    }
    // 1/(1 - z): running sums.
    for i in 1..=order {
        let prev = acc[i - 1].clone();
        acc[i] += prev;
    }
    let scale = Float::with_val(prec, mm + 1) / mm;
    Ok(TruncatedSeries::new(acc, prec).scale_real(&scale))
}

/// Successive powers `P^1..P^N` of the conjugating series.
struct PowerBasis {
    powers: Vec<TruncatedSeries>,
}

impl PowerBasis {
    fn build(p: &ConjugateP, order: usize, prec: u32) -> Self {
        let base = p.series(order, prec);
        let mut powers = Vec::with_capacity(order);
        let mut cur = base.clone();
        for k in 1..=order {
            let next = if k < order {
                Some(match p {
                    // z/(1-z): shift, then running sums.
                    ConjugateP::Geometric => {
                        let mut s = cur.shift_up(1);
                        for i in 1..=order {
                            let prev = s.coeff(i - 1).clone();
                            s.coeffs_mut()[i] += prev;
                        }
                        s
                    }
                    // (P^{k+1})' = (k+1) P^k / (1-z)
                    ConjugateP::Logarithmic => {
                        let mut s = TruncatedSeries::zero(order, prec);
                        let mut run = Float::new(prec);
                        for i in 0..order {
                            run += cur.coeff(i);
                            s.coeffs_mut()[i + 1] =
                                Float::with_val(prec, &run * (k as u64 + 1)) / (i as u64 + 1);
                        }
                        s
                    }
                    ConjugateP::Series(_) => cur.mul(&base),
                })
            } else {
                None
            };
            match next {
                Some(n) => powers.push(std::mem::replace(&mut cur, n)),
                None => {
                    powers.push(cur);
                    break;
                }
            }
        }
        PowerBasis { powers }
    }

    /// `sum_k h_k P^k` (with `h[0]` ignored).
    fn recompose(&self, h: &[Float]) -> TruncatedSeries {
        let order = self.powers.len();
        let prec = self.powers[0].prec();
        let mut out = TruncatedSeries::zero(order, prec);
        for (k, hk) in h.iter().enumerate().skip(1) {
            if hk.is_zero() {
                continue;
            }
            for j in k..=order {
                out.coeffs_mut()[j] += hk * self.powers[k - 1].coeff(j);
            }
        }
        out
    }
}

/// Coefficients `h_k` with `G = sum_k h_k P^k`.
fn conjugate_decompose(p: &ConjugateP, g: &TruncatedSeries, ctx: &PrecisionContext) -> (Vec<Float>, PowerBasis) {
    let prec = ctx.bits();
    let order = g.order();
    let basis = PowerBasis::build(p, order, prec);
    let mut rem = g.clone();
    let mut h = vec![Float::new(prec); order + 1];
    for k in 1..=order {
        let pk = &basis.powers[k - 1];
        let hk = Float::with_val(prec, rem.coeff(k) / pk.coeff(k));
        if !hk.is_zero() {
            for j in k..=order {
                rem.coeffs_mut()[j] -= &hk * pk.coeff(j);
            }
        }
        h[k] = hk;
    }
    (h, basis)
}

#[derive(Clone, Debug)]
pub struct FixedPointOptions {
    pub tol: Float,
    pub max_iter: usize,
}

impl FixedPointOptions {
    /// Stops once the largest relative change drops below
    /// `10^-(digits - 5)`.
    pub fn new(ctx: &PrecisionContext) -> Self {
        FixedPointOptions {
            tol: ctx.tolerance(5),
            max_iter: 20_000,
        }
    }
}

/// Iterates `G <- T[G]` from `G = z`.
///
/// The contraction factor on coefficient `n` is the diagonal entry of `T`,
/// e.g. `1/n` for the full half-line and `(m+1)/(mn+1)` for the binomial
/// kernel, so convergence is geometric with the rate set by `n = 2`.
pub fn fixed_point_phi(
    spec: &KernelSpec,
    n: usize,
    opts: &FixedPointOptions,
    ctx: &PrecisionContext,
) -> Result<RatioTable> {
    let prec = ctx.bits();
    let g0 = TruncatedSeries::identity(n, prec);
    let (g, iterations) = match spec {
        KernelSpec::Conjugate { p } => conjugate_fixed_point(p, &g0, opts, ctx)?,
        _ => {
            let mut g = g0;
            let mut done = None;
            let mut last = (0usize, f64::INFINITY);
            for it in 1..=opts.max_iter {
                let t = schroder_operator(spec, &g, ctx)?;
                let (worst_idx, worst) = max_change(&t, &g);
                g = t;
                last = (worst_idx, worst.to_f64());
                if worst < opts.tol {
                    done = Some(it);
                    break;
                }
            }
            let it = done.ok_or(Error::NoConvergence {
                iterations: opts.max_iter,
                worst_index: last.0,
                worst_change: last.1,
            })?;
            (g, it)
        }
    };
    let mut table = RatioTable::from_series(&g, Route::FixedPoint, spec.clone(), ctx.digits());
    table.iterations = Some(iterations);
    Ok(table)
}

fn max_change(new: &TruncatedSeries, old: &TruncatedSeries) -> (usize, Float) {
    let mut worst = Float::new(new.prec());
    let mut idx = 0;
    for (k, (a, b)) in new.coeffs().iter().zip(old.coeffs()).enumerate() {
        let d = rel_diff(b, a);
        if d > worst {
            worst = d;
            idx = k;
        }
    }
    (idx, worst)
}

/// In the basis of powers `P^k` the conjugate operator is diagonal,
/// `h_k -> 2 h_k / (k + 1)`, so the iteration runs on `h` directly and the
/// series is rebuilt once at the end. The stopping rule bounds the change of
/// the rebuilt coefficients, `sum_k |dh_k| max_j |[P^k]_j|`.
fn conjugate_fixed_point(
    p: &ConjugateP,
    g0: &TruncatedSeries,
    opts: &FixedPointOptions,
    ctx: &PrecisionContext,
) -> Result<(TruncatedSeries, usize)> {
    let prec = ctx.bits();
    let (mut h, basis) = conjugate_decompose(p, g0, ctx);
    let norms: Vec<Float> = basis.powers.iter().map(|pk| pk.max_abs()).collect();
    for it in 1..=opts.max_iter {
        let mut bound = Float::new(prec);
        let mut worst = Float::new(prec);
        let mut worst_idx = 0;
        for (k, hk) in h.iter_mut().enumerate().skip(1) {
            let next = Float::with_val(prec, &*hk * 2u32) / (k as u64 + 1);
            let d = Float::with_val(prec, &*hk - &next).abs() * &norms[k - 1];
            if d > worst {
                worst = d.clone();
                worst_idx = k;
            }
            bound += d;
            *hk = next;
        }
        if bound < opts.tol {
            return Ok((basis.recompose(&h), it));
        }
        if it == opts.max_iter {
            return Err(Error::NoConvergence {
                iterations: it,
                worst_index: worst_idx,
                worst_change: bound.to_f64(),
            });
        }
    }
    unreachable!("loop returns")
}

/// `max_n |T[Phi]_n - phi_n|` (relative to `max(1, |phi_n|)`) over
/// `n = 1..=N - buffer`, where the buffer covers coefficients that a
/// truncated input cannot determine.
pub fn schroder_residual(spec: &KernelSpec, table: &RatioTable, ctx: &PrecisionContext) -> Result<Float> {
    let phi = table.to_series();
    let t = schroder_operator(spec, &phi, ctx)?;
    let upto = table.len().saturating_sub(spec.truncation_buffer());
    let mut worst = Float::new(ctx.bits());
    for n in 1..=upto {
        let d = rel_diff(t.coeff(n), phi.coeff(n));
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}
