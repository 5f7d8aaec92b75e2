//! Least-squares fits and constant estimation.

use rug::Float;
use serde_json::{json, Value};

use super::{ResidualMode, ResidualReport};
use crate::asymptotics::{binomial_constant, AsymptoticModel, PeriodicFactor};
use crate::coefficients::RatioTable;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::precision::PrecisionContext;
use crate::scalar::{format_sci, pi};

/// Solves `min |A x - b|` through the normal equations with column scaling
/// and partially pivoted elimination. Returns the solution and the rms of
/// the residual vector.
pub fn least_squares(rows: &[Vec<Float>], rhs: &[Float]) -> Result<(Vec<Float>, Float)> {
    let k = rows.first().map_or(0, |r| r.len());
    if k == 0 || rows.len() < k {
        return Err(Error::FitDegenerate(format!(
            "{} equations for {k} unknowns",
            rows.len()
        )));
    }
    let prec = rhs[0].prec();
    // Column norms for scaling.
    let mut norms = vec![Float::new(prec); k];
    for r in rows {
        for (j, v) in r.iter().enumerate() {
            norms[j] += Float::with_val(prec, v.square_ref());
        }
    }
    for (j, nrm) in norms.iter_mut().enumerate() {
        if nrm.is_zero() {
            return Err(Error::FitDegenerate(format!("column {j} vanishes on the sample")));
        }
        nrm.sqrt_mut();
    }
    let mut a = vec![vec![Float::new(prec); k + 1]; k];
    for (r, b) in rows.iter().zip(rhs) {
        let scaled: Vec<Float> = r.iter().zip(&norms).map(|(v, s)| Float::with_val(prec, v / s)).collect();
        for i in 0..k {
            for j in 0..k {
                a[i][j] += Float::with_val(prec, &scaled[i] * &scaled[j]);
            }
            a[i][k] += Float::with_val(prec, &scaled[i] * b);
        }
    }
    // After scaling the diagonal is 1; a tiny pivot means collinear columns.
    let singular = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    for c in 0..k {
        let p = (c..k)
            .max_by(|&x, &y| a[x][c].clone().abs().partial_cmp(&a[y][c].clone().abs()).unwrap())
            .unwrap();
        a.swap(c, p);
        if Float::with_val(prec, a[c][c].abs_ref()) < singular {
            return Err(Error::FitDegenerate("normal equations are singular".into()));
        }
        for r in c + 1..k {
            let f = Float::with_val(prec, &a[r][c] / &a[c][c]);
            for j in c..=k {
                let t = Float::with_val(prec, &f * &a[c][j]);
                a[r][j] -= t;
            }
        }
    }
    let mut x = vec![Float::new(prec); k];
    for c in (0..k).rev() {
        let mut s = Float::with_val(prec, &a[c][k]);
        for j in c + 1..k {
            s -= Float::with_val(prec, &a[c][j] * &x[j]);
        }
        x[c] = s / &a[c][c];
    }
    for (xj, s) in x.iter_mut().zip(&norms) {
        *xj /= s;
    }
    let mut ss = Float::new(prec);
    for (r, b) in rows.iter().zip(rhs) {
        let mut e = Float::with_val(prec, -b);
        for (v, xj) in r.iter().zip(&x) {
            e += Float::with_val(prec, v * xj);
        }
        ss += e.square();
    }
    let rms = (ss / rows.len() as u32).sqrt();
    Ok((x, rms))
}

fn ln_ratio_periods(n_min: usize, n_max: usize, im_alpha: &Float) -> f64 {
    let span = (n_max as f64 / n_min as f64).ln();
    span * im_alpha.to_f64() / std::f64::consts::TAU
}

#[derive(Clone, Debug)]
pub struct OscillationFit {
    pub im_alpha: Float,
    pub b1: Float,
    pub b2: Float,
    pub rms_error: Float,
    pub window: (usize, usize),
}

impl OscillationFit {
    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "im_alpha": format_sci(&self.im_alpha, digits),
            "b1": format_sci(&self.b1, digits),
            "b2": format_sci(&self.b2, digits),
            "rms_error": format_sci(&self.rms_error, 6),
            "window": [self.window.0, self.window.1],
        })
    }
}

/// Fits `b1 cos(im_alpha ln n) + b2 sin(im_alpha ln n)` to a normalized
/// residual report.
pub fn fit_log_oscillation(report: &ResidualReport, im_alpha: &Float) -> Result<OscillationFit> {
    if !matches!(report.mode, ResidualMode::NormalizedDifference { .. }) {
        return Err(Error::Precondition("oscillation fits need a normalized-difference report".into()));
    }
    let (lo, hi) = match (report.n_values.first(), report.n_values.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::FitDegenerate("empty report".into())),
    };
    if *im_alpha <= 0 {
        return Err(Error::Precondition("im_alpha must be positive".into()));
    }
    let periods = ln_ratio_periods(lo, hi, im_alpha);
    if periods < 1.0 {
        return Err(Error::FitDegenerate(format!(
            "window [{lo}, {hi}] covers {periods:.3} log-periods; at least one is needed"
        )));
    }
    let prec = report.residuals[0].prec();
    let rows: Vec<Vec<Float>> = report
        .n_values
        .iter()
        .map(|&n| {
            let t = Float::with_val(prec, n).ln() * im_alpha;
            let (s, c) = t.sin_cos(Float::new(prec));
            vec![c, s]
        })
        .collect();
    let (x, rms) = least_squares(&rows, &report.residuals)?;
    Ok(OscillationFit {
        im_alpha: Float::with_val(prec, im_alpha),
        b1: x[0].clone(),
        b2: x[1].clone(),
        rms_error: rms,
        window: (lo, hi),
    })
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    /// Log-frequency of a known oscillation; the average is then taken
    /// over a whole number of log-periods at the top of the window.
    pub im_alpha: Option<Float>,
    /// Relative coefficient `c` of a known correction `(1 + c/n)`, divided
    /// out before averaging.
    pub correction: Option<Float>,
    /// Trapezoid nodes per unit of `ln n`.
    pub density: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { im_alpha: None, correction: None, density: 400 }
    }
}

#[derive(Clone, Debug)]
pub struct ConstantEstimate {
    pub value: Float,
    /// The averaging interval actually used, in `n`.
    pub from: f64,
    pub to: usize,
    pub periods: Option<usize>,
    pub nodes: usize,
}

impl ConstantEstimate {
    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "value": format_sci(&self.value, digits),
            "from": format!("{:.6e}", self.from),
            "to": self.to,
            "log_periods": self.periods,
            "nodes": self.nodes,
            "method": "trapezoid mean of phi_n n^-power over ln n",
        })
    }
}

/// Mean of `phi_n n^(-power)` with respect to `ln n` over the window.
///
/// Values between integers are linearly interpolated; with a known
/// oscillation the interval is shortened to an integer number (at least
/// two) of log-periods ending at `n_max`.
pub fn estimate_constant(
    table: &RatioTable,
    power: &Float,
    window: (usize, usize),
    opts: &EstimateOptions,
) -> Result<ConstantEstimate> {
    let (n_min, n_max) = window;
    if n_min < 1 || n_max <= n_min || n_max > table.len() {
        return Err(Error::WindowTooNarrow(format!(
            "window [{n_min}, {n_max}] must satisfy 1 <= n_min < n_max <= {}",
            table.len()
        )));
    }
    let prec = table.phi(1).prec();
    let t1 = Float::with_val(prec, n_max).ln();
    let mut t0 = Float::with_val(prec, n_min).ln();
    let mut periods = None;
    if let Some(im) = &opts.im_alpha {
        let whole = ln_ratio_periods(n_min, n_max, im).floor() as usize;
        if whole < 2 {
            return Err(Error::WindowTooNarrow(format!(
                "window [{n_min}, {n_max}] spans fewer than two log-periods"
            )));
        }
        let len = pi(prec) * 2u32 / im * whole as u32;
        t0 = Float::with_val(prec, &t1 - &len);
        periods = Some(whole);
    }
    let span = Float::with_val(prec, &t1 - &t0);
    let nodes = ((span.to_f64() * opts.density as f64).ceil() as usize).max(16);
    let h = Float::with_val(prec, &span / nodes as u32);
    let value_at = |n: usize| -> Float {
        let x = Float::with_val(prec, n);
        let mut v = Float::with_val(prec, table.phi(n)) * (x.clone().ln() * power).exp().recip();
        if let Some(c) = &opts.correction {
            v /= Float::with_val(prec, c / &x) + 1u32;
        }
        v
    };
    let g = |t: &Float| -> Float {
        let x = Float::with_val(prec, t.exp_ref());
        let lo = x.to_f64().floor().max(1.0) as usize;
        let lo = lo.min(n_max);
        let frac = Float::with_val(prec, &x - lo as u32);
        let a = value_at(lo);
        if frac <= 0 || lo >= n_max {
            return a;
        }
        let b = value_at(lo + 1);
        let d = Float::with_val(prec, &b - &a) * frac;
        a + d
    };
    let mut sum = Float::new(prec);
    for j in 0..=nodes {
        let t = Float::with_val(prec, &t0 + Float::with_val(prec, &h * j as u32));
        let t = if j == nodes { t1.clone() } else { t };
        let v = g(&t);
        if j == 0 || j == nodes {
            sum += v / 2u32;
        } else {
            sum += v;
        }
    }
    let value = sum * h / span;
    Ok(ConstantEstimate {
        value,
        from: t0.exp().to_f64(),
        to: n_max,
        periods,
        nodes: nodes + 1,
    })
}

#[derive(Clone, Debug)]
pub struct ModelFit {
    /// The input model with `C` (and `B1`, `B2` when present) filled in.
    pub model: AsymptoticModel,
    /// Rms of `phi_n n^-p - fit` with `p` the leading power.
    pub rms_error: Float,
}

/// Joint least-squares estimate of the unknown constants of `model`:
/// `phi_n = C f(n) + B1 g_c(n) + B2 g_s(n)` where `f` collects the terms
/// scaled by `C` and `g_c`, `g_s` are the cosine and sine parts of the
/// log-periodic term. Rows are weighted by `n^-p` for the leading power.
pub fn fit_model_constants(table: &RatioTable, model: &AsymptoticModel, sample: &[usize]) -> Result<ModelFit> {
    if table.kernel != model.kernel {
        return Err(Error::KernelMismatch {
            table: table.kernel.to_string(),
            model: model.kernel.to_string(),
        });
    }
    if let Some(&bad) = sample.iter().find(|&&n| n == 0 || n > table.len()) {
        return Err(Error::Precondition(format!("sample index {bad} outside the table")));
    }
    let prec = table.phi(1).prec();
    let lead_power = model
        .terms
        .first()
        .map(|t| t.power.re.clone())
        .ok_or_else(|| Error::ModelIncomplete("model has no terms".into()))?;
    let has_osc = model
        .terms
        .iter()
        .any(|t| matches!(t.periodic, Some(PeriodicFactor::LogPeriodic { .. })));
    let mut rows = Vec::with_capacity(sample.len());
    let mut rhs = Vec::with_capacity(sample.len());
    for &n in sample {
        let ln_n = Float::with_val(prec, n).ln();
        let w = (Float::with_val(prec, &ln_n * &lead_power)).exp().recip();
        let mut scaled = Float::new(prec);
        let mut cos_col = Float::new(prec);
        let mut sin_col = Float::new(prec);
        let mut known = Float::new(prec);
        for t in &model.terms {
            let mag = Float::with_val(prec, &ln_n * &t.power.re).exp() * &t.constant.re;
            match (&t.periodic, t.scaled_by_leading) {
                (Some(PeriodicFactor::LogPeriodic { im_alpha, .. }), false) => {
                    let (s, c) = Float::with_val(prec, &ln_n * im_alpha).sin_cos(Float::new(prec));
                    cos_col += Float::with_val(prec, &mag * &c);
                    sin_col += mag * s;
                }
                (Some(p), true) => scaled += mag * p.value(n as u64, prec)?,
                (None, true) => scaled += mag,
                (Some(p), false) => known += mag * p.value(n as u64, prec)?,
                (None, false) => known += mag,
            }
        }
        let mut row = vec![scaled * &w];
        if has_osc {
            row.push(cos_col * &w);
            row.push(sin_col * &w);
        }
        rows.push(row);
        rhs.push(Float::with_val(prec, table.phi(n) - &known) * &w);
    }
    let (x, rms) = least_squares(&rows, &rhs)?;
    let mut fitted = model.clone().with_estimated_constant(x[0].clone());
    if has_osc {
        fitted = fitted.with_oscillation(x[1].clone(), x[2].clone());
    }
    Ok(ModelFit { model: fitted, rms_error: rms })
}

/// `phi_n / C - n` for `n = n0..=n0+m`, one empirical period of `psi`.
pub fn psi_empirical(table: &RatioTable, m: u32, n0: usize, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    if table.kernel != (KernelSpec::Binomial { m }) {
        return Err(Error::KernelMismatch {
            table: table.kernel.to_string(),
            model: format!("binomial:m={m}"),
        });
    }
    if n0 < 1 || n0 + m as usize > table.len() {
        return Err(Error::Precondition(format!(
            "need 1 <= n0 and n0 + m <= {}, got n0 = {n0}",
            table.len()
        )));
    }
    let c = binomial_constant(m, ctx);
    Ok((n0..=n0 + m as usize)
        .map(|n| Float::with_val(ctx.bits(), table.phi(n) / &c) - n as u32)
        .collect())
}
