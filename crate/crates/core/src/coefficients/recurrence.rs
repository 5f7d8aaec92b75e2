//! Direct recurrences: windowed ones for the constant-environment and
//! tail-averaged Poisson kernels with `q = z`, one for the binomial kernel,
//! and forward substitution for every compound-Poisson kernel.

use std::collections::VecDeque;

use rug::Float;

use super::{RatioTable, Route};
use crate::error::{Error, Result};
use crate::kernels::{EnvMeasure, KernelSpec, QSpec, Real};
use crate::precision::PrecisionContext;
use crate::scalar::rel_diff;

/// Running sum `S_n = sum_{j<n} c_j Pois(s j; n - j)` over the indices that
/// matter at the working precision.
///
/// Each stored term is advanced from `n` to `n + 1` by the factor
/// `s j / (n + 1 - j)`. For fixed `n` the log-weight is concave in `j`, so
/// the contributing indices form an interval; terms left of the Poisson peak
/// only shrink as `n` grows and are dropped for good once negligible, new
/// terms enter at the top.
struct PoissonWindow {
    prec: u32,
    rate: Float,
    int_rate: Option<u32>,
    ln_rate: Float,
    ln_rate64: f64,
    ln_fact: Vec<f64>,
    lo: usize,
    terms: VecDeque<Float>,
    cutoff_bits: i64,
}

impl PoissonWindow {
    fn new(rate: &Float, max_n: usize, prec: u32) -> Self {
        let mut ln_fact = Vec::with_capacity(max_n + 1);
        ln_fact.push(0.0);
        for k in 1..=max_n {
            ln_fact.push(ln_fact[k - 1] + (k as f64).ln());
        }
        let int_rate = if rate.is_integer() && *rate > 0 && *rate < 1000 {
            rate.to_u32_saturating()
        } else {
            None
        };
        PoissonWindow {
            prec,
            rate: Float::with_val(prec, rate),
            int_rate,
            ln_rate: Float::with_val(prec, rate.ln_ref()),
            ln_rate64: rate.to_f64().ln(),
            ln_fact,
            lo: 1,
            terms: VecDeque::new(),
            cutoff_bits: i64::from(prec) + 48,
        }
    }

    fn hi(&self) -> usize {
        self.lo + self.terms.len() - 1
    }

    /// Natural log of the term `c_j Pois(s j; n - j)`, in double precision.
    fn log_term64(&self, c: &Float, j: usize, n: usize) -> f64 {
        let k = n - j;
        let sj = self.rate.to_f64() * j as f64;
        c.to_f64().ln() - sj + k as f64 * (self.ln_rate64 + (j as f64).ln()) - self.ln_fact[k]
    }

    fn fresh_term(&self, c: &Float, j: usize, n: usize) -> Float {
        let prec = self.prec;
        let k = (n - j) as u64;
        let mut log = Float::with_val(prec, j as u64).ln();
        log += &self.ln_rate;
        log *= k;
        log -= Float::with_val(prec, &self.rate * j as u64);
        log -= Float::with_val(prec, k + 1).ln_gamma();
        log.exp() * c
    }

    fn log2_of(x: &Float) -> i64 {
        x.get_exp().map_or(i64::MIN / 4, i64::from)
    }

    /// Moves the window to index `n` and returns `S_n`. `c(j)` must be
    /// available for all `j < n`.
    fn advance<'a>(&mut self, n: usize, c: impl Fn(usize) -> &'a Float) -> Float {
        // Age the stored terms from n - 1 to n.
        let lo = self.lo;
        for (i, t) in self.terms.iter_mut().enumerate() {
            let j = lo + i;
            match self.int_rate {
                Some(s) => *t *= s as u64 * j as u64,
                None => {
                    *t *= &self.rate;
                    *t *= j as u64;
                }
            }
            *t /= (n - j) as u64;
        }
        let mut max_log2 = self.terms.iter().map(Self::log2_of).max().unwrap_or(i64::MIN / 4);

        // Admit new indices from the top while they matter or still rise.
        let mut next = if self.terms.is_empty() { self.lo } else { self.hi() + 1 };
        let mut prev_log: Option<f64> = None;
        while next < n {
            let l = self.log_term64(c(next), next, n);
            let l2 = (l / std::f64::consts::LN_2) as i64;
            let rising = prev_log.map_or(false, |p| l > p);
            if !self.terms.is_empty() && !rising && l2 < max_log2 - self.cutoff_bits {
                break;
            }
            let t = self.fresh_term(c(next), next, n);
            max_log2 = max_log2.max(Self::log2_of(&t));
            self.terms.push_back(t);
            prev_log = Some(l);
            next += 1;
        }

        // Retire negligible indices from the bottom.
        while self.terms.len() > 1 && Self::log2_of(&self.terms[0]) < max_log2 - self.cutoff_bits {
            self.terms.pop_front();
            self.lo += 1;
        }

        let mut sum = Float::new(self.prec);
        for t in &self.terms {
            sum += t;
        }
        sum
    }
}

fn poisson_kernel(measure: EnvMeasure) -> KernelSpec {
    KernelSpec::CompoundPoisson {
        q: QSpec::Polynomial(vec![Real::from_float(Float::with_val(64, 1))]),
        measure,
    }
}

/// `q = z` in the constant environment `r = r0`:
/// `phi_n (e^{-r0} - e^{-r0 n}) = sum_{j<n} phi_j e^{-r0 j} (r0 j)^{n-j} / (n-j)!`.
pub fn recurrence_dirac_poisson(r0: &Float, n: usize, ctx: &PrecisionContext) -> Result<RatioTable> {
    let prec = ctx.bits();
    if *r0 <= 0 {
        return Err(Error::MeasureSupport {
            r: r0.to_string(),
            measure: "dirac (r0 must be positive)".into(),
        });
    }
    let kernel = poisson_kernel(EnvMeasure::Dirac {
        r0: Real::from_float(r0.clone()),
    });
    let e1 = Float::with_val(prec, -r0).exp();
    let mut en = e1.clone();
    let mut phi = Vec::with_capacity(n);
    phi.push(Float::with_val(prec, 1));
    let mut window = PoissonWindow::new(r0, n, prec);
    for k in 2..=n {
        en *= &e1;
        let s = window.advance(k, |j| &phi[j - 1]);
        let d = Float::with_val(prec, &e1 - &en);
        phi.push(s / d);
    }
    Ok(RatioTable::new(phi, Route::Recurrence, kernel, ctx.digits()))
}

/// `q = z` averaged over `(a, inf)`:
/// `e^{-a}(phi_n - phi_{n-1}) = sum_{k=1}^{n} (phi_k / k) e^{-a k} (a k)^{n-k} / (n-k)!`.
pub fn recurrence_tail_poisson(a: &Float, n: usize, ctx: &PrecisionContext) -> Result<RatioTable> {
    let prec = ctx.bits();
    if *a <= 0 {
        return Err(Error::MeasureSupport {
            r: a.to_string(),
            measure: "tail (a must be positive)".into(),
        });
    }
    let kernel = poisson_kernel(EnvMeasure::TailHalfLine {
        a: Real::from_float(a.clone()),
    });
    let ea = Float::with_val(prec, -a).exp();
    let mut ean = ea.clone();
    let mut phi: Vec<Float> = Vec::with_capacity(n);
    let mut weights: Vec<Float> = Vec::with_capacity(n);
    phi.push(Float::with_val(prec, 1));
    weights.push(Float::with_val(prec, 1));
    let mut window = PoissonWindow::new(a, n, prec);
    for k in 2..=n {
        ean *= &ea;
        let s = window.advance(k, |j| &weights[j - 1]);
        let mut rhs = Float::with_val(prec, &ea * &phi[k - 2]);
        rhs += s;
        let mut d = Float::with_val(prec, &ean / k as u64);
        d = Float::with_val(prec, &ea - &d);
        let v = rhs / d;
        weights.push(Float::with_val(prec, &v / k as u64));
        phi.push(v);
    }
    Ok(RatioTable::new(phi, Route::Recurrence, kernel, ctx.digits()))
}

/// Individual right-hand-side terms `k = 1..=n` of the tail recurrence,
/// `(phi_k / k) e^{-a k} (a k)^{n-k} / (n-k)!`, from a known table.
pub fn tail_recurrence_terms(a: &Float, n: usize, phi: &[Float]) -> Vec<Float> {
    let prec = a.prec();
    (1..=n)
        .map(|k| {
            let ak = Float::with_val(prec, a * k as u64);
            let mut t = Float::with_val(prec, &phi[k - 1] / k as u64);
            t *= Float::with_val(prec, -&ak).exp();
            t *= Float::with_val(prec, ak.pow_ref_u(n - k));
            t / factorial(n - k, prec)
        })
        .collect()
}

/// Terms `k = 1..n-1` of the constant-environment recurrence,
/// `(n-k)^k phi_{n-k} / (k! e^{n-k})` for `r0 = 1`, generalized to
/// `phi_{n-k} e^{-r0 (n-k)} (r0 (n-k))^k / k!`.
pub fn dirac_recurrence_terms(r0: &Float, n: usize, phi: &[Float]) -> Vec<Float> {
    let prec = r0.prec();
    (1..n)
        .map(|k| {
            let j = n - k;
            let lam = Float::with_val(prec, r0 * j as u64);
            let mut t = phi[j - 1].clone();
            t *= Float::with_val(prec, -&lam).exp();
            t *= Float::with_val(prec, lam.pow_ref_u(k));
            t / factorial(k, prec)
        })
        .collect()
}

trait PowU {
    fn pow_ref_u(&self, k: usize) -> Float;
}

impl PowU for Float {
    fn pow_ref_u(&self, k: usize) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(k as u32))
    }
}

fn factorial(k: usize, prec: u32) -> Float {
    Float::with_val(prec, Float::factorial(k as u32))
}

/// `phi_n = (m n + 1) / (m (n - 1)) phi_{n-1}
///          - [(m + 1) | (n - 1)] (m + 1)^2 / (m (n - 1)) phi_{(n-1)/(m+1)}`.
pub fn recurrence_binomial(m: u32, n: usize, ctx: &PrecisionContext) -> RatioTable {
    let prec = ctx.bits();
    let mm = u64::from(m);
    let mut phi: Vec<Float> = Vec::with_capacity(n);
    phi.push(Float::with_val(prec, 1));
    for k in 2..=n as u64 {
        let mut v = Float::with_val(prec, &phi[k as usize - 2] * (mm * k + 1));
        if (k - 1) % (mm + 1) == 0 {
            let idx = ((k - 1) / (mm + 1)) as usize;
            v -= Float::with_val(prec, &phi[idx - 1] * ((mm + 1) * (mm + 1)));
        }
        v /= mm * (k - 1);
        phi.push(v);
    }
    RatioTable::new(phi, Route::Recurrence, KernelSpec::Binomial { m }, ctx.digits())
}

/// Largest relative defect of
/// `m/(m+1) phi_{(m+1)n} = sum_{k=n}^{(m+1)n} phi_k / (k + 1/m)`
/// over all `n` with `(m+1) n <= N`.
pub fn binomial_identity_defect(table: &RatioTable, m: u32) -> Result<Float> {
    if table.kernel != (KernelSpec::Binomial { m }) {
        return Err(Error::KernelMismatch { table: table.kernel.to_string(), model: format!("binomial:m={m}") });
    }
    let prec = table.phi(1).prec();
    let mm = u64::from(m);
    let len = table.len();
    // prefix[k] = sum_{j <= k} m phi_j / (m j + 1)
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(Float::new(prec));
    for k in 1..=len {
        let term = Float::with_val(prec, table.phi(k) * mm) / (mm * k as u64 + 1);
        let next = Float::with_val(prec, &prefix[k - 1] + &term);
        prefix.push(next);
    }
    let mut worst = Float::new(prec);
    for n in 1..=len / (m as usize + 1) {
        let top = (m as usize + 1) * n;
        let lhs = Float::with_val(prec, table.phi(top) * mm) / (mm + 1);
        let rhs = Float::with_val(prec, &prefix[top] - &prefix[n - 1]);
        let d = rel_diff(&lhs, &rhs);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Forward substitution in `Phi = T[Phi]` for any compound-Poisson kernel.
///
/// Write `T[G] = U / (mass * den)` with `den = q(1) - q(z)` (`den = 1` for a
/// constant environment) and `U = sum_k g_k z^k f_k(z)`, where
///
/// * full half-line: `f_k = 1/k`
/// * tail `(a, inf)`: `f_k = e^(k a (q - q(1))) / k`
/// * unit interval: `f_k = (1 - e^(k (q - q(1)))) / k`
/// * Dirac at `r0`: `f_k = e^(k r0 (q - q(1)))`.
///
/// `U` is lower triangular in `g`, so coefficient `n` of
/// `mass den Phi = U` fixes `phi_n` once `phi_1..phi_{n-1}` are known.
/// Column `k` is added to the running `U` as soon as `phi_k` is found; the
/// total cost is that of one application of `T`.
pub fn recurrence_compound_poisson(spec: &KernelSpec, n: usize, ctx: &PrecisionContext) -> Result<RatioTable> {
    let (q, measure) = match spec {
        KernelSpec::CompoundPoisson { q, measure } => (q, measure),
        other => {
            return Err(Error::RouteInapplicable { route: Route::Recurrence.to_string(), kernel: other.to_string() })
        }
    };
    let prec = ctx.bits();
    let qs = q.series(n, prec);
    let q1 = q.at_one(n, prec);
    let mass = spec.survival_mass(prec)?;
    // mass * den, or just mass in a constant environment.
    let md: Vec<Float> = match measure {
        EnvMeasure::Dirac { .. } => vec![mass.clone()],
        _ => {
            let mut d: Vec<Float> = qs.coeffs().iter().map(|c| Float::with_val(prec, -c) * &mass).collect();
            d[0] = Float::with_val(prec, &q1 * &mass);
            while d.len() > 1 && d.last().is_some_and(|c| c.is_zero()) {
                d.pop();
            }
            d
        }
    };
    let rate = match measure {
        EnvMeasure::FullHalfLine => None,
        EnvMeasure::TailHalfLine { a } => Some(a.at(prec)),
        EnvMeasure::UnitInterval => Some(Float::with_val(prec, 1)),
        EnvMeasure::Dirac { r0 } => Some(r0.at(prec)),
    };
    // Column k: the coefficients of f_k (trailing zeros dropped), so that
    // column k contributes phi_k f_k[j] to U at index k + j.
    let column = |k: usize| -> Result<Vec<Float>> {
        let room = n - k;
        let Some(s) = &rate else {
            return Ok(vec![Float::with_val(prec, 1) / k as u64]);
        };
        let ks = Float::with_val(prec, s * k as u64);
        let mut arg = qs.truncate(room).scale_real(&ks);
        arg.coeffs_mut()[0] = -Float::with_val(prec, &ks * &q1);
        let e = arg.exp()?;
        Ok(match measure {
            EnvMeasure::TailHalfLine { .. } => e.coeffs().iter().map(|c| Float::with_val(prec, c / k as u64)).collect(),
            EnvMeasure::UnitInterval => e
                .coeffs()
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let v = if j == 0 { Float::with_val(prec, 1 - c) } else { Float::with_val(prec, -c) };
                    v / k as u64
                })
                .collect(),
            _ => e.coeffs().to_vec(),
        })
    };
    let mut u = vec![Float::new(prec); n + 1];
    let mut phi = vec![Float::new(prec); n + 1];
    for k in 1..=n {
        let col = column(k)?;
        if k == 1 {
            // The equation at n = 1 is the normalization itself.
            phi[1] = Float::with_val(prec, 1);
        } else {
            let mut rhs = Float::with_val(prec, &u[k]);
            for (j, d) in md.iter().enumerate().skip(1).take_while(|(j, _)| *j < k) {
                rhs -= Float::with_val(prec, d * &phi[k - j]);
            }
            let diag = Float::with_val(prec, &md[0] - &col[0]);
            if diag.is_zero() {
                return Err(Error::Precondition(format!("singular diagonal at n = {k}")));
            }
            phi[k] = rhs / diag;
        }
        for (j, c) in col.iter().enumerate().skip(1) {
            u[k + j] += Float::with_val(prec, c * &phi[k]);
        }
    }
    phi.remove(0);
    Ok(RatioTable::new(phi, Route::Recurrence, spec.clone(), ctx.digits()))
}
