use rug::Float;

use super::RatioTable;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::precision::PrecisionContext;
use crate::scalar::rel_diff;
use crate::series::TruncatedSeries;

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = x.clone();
    for k in 2..=n as u64 {
        // k P_k = (2k - 1) x P_{k-1} - (k - 1) P_{k-2}
        let mut p2 = Float::with_val(prec, x * &p1) * (2 * k - 1);
        p2 -= Float::with_val(prec, &p0 * (k - 1));
        p2 /= k;
        p0 = p1;
        p1 = p2;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let mut d = Float::with_val(prec, x * &p1);
    d = Float::with_val(prec, &p0 - &d) * n as u64;
    let one_minus = Float::with_val(prec, 1 - Float::with_val(prec, x.square_ref()));
    (p1, d / one_minus)
}

/// Gauss-Legendre nodes and weights mapped to `(0, 1)`; exact for
/// polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize, prec: u32) -> (Vec<Float>, Vec<Float>) {
    let work = prec + 16;
    let pi64 = std::f64::consts::PI;
    let mut nodes = vec![Float::new(prec); n];
    let mut weights = vec![Float::new(prec); n];
    let eps = Float::with_val(work, Float::i_exp(1, -(prec as i32)));
    for i in 0..n.div_ceil(2) {
        let guess = ((i as f64 + 0.75) * pi64 / (n as f64 + 0.5)).cos();
        let mut x = Float::with_val(work, guess);
        for _ in 0..60 {
            let (p, dp) = legendre(n, &x);
            let step = p / dp;
            x -= &step;
            if step.abs() < eps {
                break;
            }
        }
        let (_, dp) = legendre(n, &x);
        let x2 = Float::with_val(work, x.square_ref());
        let w = Float::with_val(work, 2u32) / ((1 - x2) * dp.square());
        // Map [-1, 1] -> [0, 1].
        let half_w = Float::with_val(prec, &w / 2u32);
        let hi = Float::with_val(prec, (Float::with_val(work, 1 + &x)) / 2u32);
        let lo = Float::with_val(prec, (Float::with_val(work, 1 - &x)) / 2u32);
        nodes[n - 1 - i] = hi;
        weights[n - 1 - i] = half_w.clone();
        nodes[i] = lo;
        weights[i] = half_w;
    }
    (nodes, weights)
}

/// `int_0^1 G(P_r(z)) dr` for the binomial kernel, evaluated with
/// `ceil((m N + 1) / 2)` Gauss-Legendre nodes, which integrates every
/// coefficient (a polynomial of degree `<= m N` in `r`) exactly.
pub fn quadrature_average(
    spec: &KernelSpec,
    g: &TruncatedSeries,
    ctx: &PrecisionContext,
) -> Result<TruncatedSeries> {
    let m = match spec {
        KernelSpec::Binomial { m } => *m as usize,
        _ => {
            return Err(Error::RouteInapplicable {
                route: "quadrature".into(),
                kernel: spec.to_string(),
            })
        }
    };
    let prec = ctx.bits();
    let order = g.order();
    let count = (m * order + 1).div_ceil(2).max(1);
    let (nodes, weights) = gauss_legendre(count, prec);
    let mut acc = TruncatedSeries::zero(order, prec);
    for (r, w) in nodes.iter().zip(&weights) {
        let p = spec.offspring_series(r, order, prec)?;
        let term = g.compose(&p)?.scale_real(w);
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Largest relative defect of `int_0^1 Phi(P_r(z)) dr = Phi(z)/(m+1)`
/// coefficient-wise for a binomial table.
pub fn quadrature_defect(table: &RatioTable, ctx: &PrecisionContext) -> Result<Float> {
    let m = match table.kernel {
        KernelSpec::Binomial { m } => m,
        _ => {
            return Err(Error::RouteInapplicable {
                route: "quadrature".into(),
                kernel: table.kernel.to_string(),
            })
        }
    };
    let phi = table.to_series();
    let avg = quadrature_average(&table.kernel, &phi, ctx)?;
    let mut worst = Float::new(ctx.bits());
    for k in 1..=table.len() {
        let expected = Float::with_val(ctx.bits(), phi.coeff(k) / (m + 1));
        let d = rel_diff(avg.coeff(k), &expected);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}
