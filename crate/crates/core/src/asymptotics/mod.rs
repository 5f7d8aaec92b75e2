//! Large-`n` models of `phi_n`: explicit constants, indicial roots and
//! periodic corrections.

mod binomial;
mod dirac;
mod poisson;
mod roots;
mod tail;

use rug::ops::PowAssign;
use rug::Float;
use serde_json::{json, Value};

pub use binomial::{binomial_constant, binomial_model, psi_balance_defect, psi_sequence, PsiSequence};
pub use dirac::{dirac_exponents, dirac_poisson_model};
pub use poisson::{
    cp_leading_constant, expansion_coefficient_a1, second_coefficient, second_coefficient_via_a1,
    two_term_compound_poisson,
};
pub use roots::{
    count_roots_in_rectangle, solve_binomial_indicial, solve_tail_indicial, IndicialEquation,
    Rectangle, RootSet,
};
pub use tail::{tail_c1, tail_expansion_d, tail_poisson_model};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::scalar::{format_sci, Complex};

/// How the overall constant `C` of a model is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantStatus {
    /// Closed form.
    Exact,
    /// Filled in from numerical data.
    Estimated,
    /// Not yet available; evaluation fails with [`Error::ModelIncomplete`].
    Unknown,
}

impl ConstantStatus {
    pub fn name(self) -> &'static str {
        match self {
            ConstantStatus::Exact => "exact",
            ConstantStatus::Estimated => "estimated",
            ConstantStatus::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub enum PeriodicFactor {
    /// `samples[(n - 1) mod period]`
    DiscretePeriodic { period: usize, samples: Vec<Float> },
    /// `B1 cos(im_alpha ln n) + B2 sin(im_alpha ln n)`; `re_alpha` records
    /// the real part of the root that produced the term.
    LogPeriodic {
        re_alpha: Float,
        im_alpha: Float,
        cos_amp: Option<Float>,
        sin_amp: Option<Float>,
    },
}

impl PeriodicFactor {
    pub fn value(&self, n: u64, prec: u32) -> Result<Float> {
        match self {
            PeriodicFactor::DiscretePeriodic { period, samples } => {
                let idx = ((n.max(1) - 1) % *period as u64) as usize;
                Ok(Float::with_val(prec, &samples[idx]))
            }
            PeriodicFactor::LogPeriodic { im_alpha, cos_amp, sin_amp, .. } => {
                let (b1, b2) = match (cos_amp, sin_amp) {
                    (Some(b1), Some(b2)) => (b1, b2),
                    _ => {
                        return Err(Error::ModelIncomplete(
                            "oscillation amplitudes B1, B2 have not been estimated".into(),
                        ))
                    }
                };
                let t = Float::with_val(prec, n).ln() * im_alpha;
                let (s, c) = t.sin_cos(Float::new(prec));
                Ok(c * b1 + s * b2)
            }
        }
    }

    fn to_json(&self, digits: usize) -> Value {
        let opt = |x: &Option<Float>| match x {
            Some(v) => Value::String(format_sci(v, digits)),
            None => Value::Null,
        };
        match self {
            PeriodicFactor::DiscretePeriodic { period, samples } => json!({
                "kind": "discrete",
                "period": period,
                "samples": samples.iter().map(|s| format_sci(s, digits)).collect::<Vec<_>>(),
            }),
            PeriodicFactor::LogPeriodic { re_alpha, im_alpha, cos_amp, sin_amp } => json!({
                "kind": "log",
                "re_alpha": format_sci(re_alpha, digits),
                "im_alpha": format_sci(im_alpha, digits),
                "cos_amp": opt(cos_amp),
                "sin_amp": opt(sin_amp),
            }),
        }
    }
}

fn integer_power(p: &Complex) -> Option<i32> {
    if !p.im.is_zero() || !p.re.is_integer() {
        return None;
    }
    p.re.to_i32_saturating().filter(|k| k.unsigned_abs() <= 1024)
}

/// One term `constant * n^power * periodic(n)`, additionally multiplied by
/// the model's leading constant when `scaled_by_leading` is set.
#[derive(Clone, Debug)]
pub struct ModelTerm {
    pub constant: Complex,
    pub power: Complex,
    pub periodic: Option<PeriodicFactor>,
    pub scaled_by_leading: bool,
}

impl ModelTerm {
    pub fn scaled(constant: Complex, power: Complex) -> Self {
        ModelTerm { constant, power, periodic: None, scaled_by_leading: true }
    }

    fn value(&self, n: u64, leading: Option<&Float>, prec: u32) -> Result<Float> {
        let v = match integer_power(&self.power) {
            // Exact for integer powers, so exact models give zero residuals.
            Some(k) => {
                let mut nk = Float::with_val(prec, n);
                nk.pow_assign(k);
                self.constant.scale(&nk)
            }
            None => {
                let ln_n = Float::with_val(prec, n).ln();
                let mut e = self.power.clone();
                e.re *= &ln_n;
                e.im *= &ln_n;
                &self.constant * &e.exp()
            }
        };
        // Conjugate-pair terms contribute twice the real part of either
        // member; a single real term has zero imaginary part anyway.
        let mut out = v.re;
        if let Some(p) = &self.periodic {
            out *= p.value(n, prec)?;
        }
        if self.scaled_by_leading {
            let c = leading.ok_or_else(|| {
                Error::ModelIncomplete("leading constant C is not available".into())
            })?;
            out *= c;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct AsymptoticModel {
    pub kernel: KernelSpec,
    /// The overall constant `C`.
    pub leading: Option<Float>,
    pub leading_status: ConstantStatus,
    /// Sorted by descending real part of the power.
    pub terms: Vec<ModelTerm>,
}

impl AsymptoticModel {
    pub fn new(kernel: KernelSpec, leading: Option<Float>, status: ConstantStatus, mut terms: Vec<ModelTerm>) -> Self {
        terms.sort_by(|a, b| b.power.re.partial_cmp(&a.power.re).expect("finite powers"));
        AsymptoticModel { kernel, leading, leading_status: status, terms }
    }

    /// Keeps the first `count` terms.
    pub fn truncated(&self, count: usize) -> Self {
        let mut m = self.clone();
        m.terms.truncate(count);
        m
    }

    /// Sets the leading constant to an estimated value.
    pub fn with_estimated_constant(mut self, c: Float) -> Self {
        self.leading = Some(c);
        self.leading_status = ConstantStatus::Estimated;
        self
    }

    /// Fills the amplitudes of every log-periodic term.
    pub fn with_oscillation(mut self, b1: Float, b2: Float) -> Self {
        for t in &mut self.terms {
            if let Some(PeriodicFactor::LogPeriodic { cos_amp, sin_amp, .. }) = &mut t.periodic {
                *cos_amp = Some(b1.clone());
                *sin_amp = Some(b2.clone());
            }
        }
        self
    }

    /// Sum of all terms at `n`, a real number.
    pub fn eval(&self, n: u64, prec: u32) -> Result<Float> {
        self.eval_terms(n, self.terms.len(), prec)
    }

    /// Sum of the first `count` terms at `n`.
    pub fn eval_terms(&self, n: u64, count: usize, prec: u32) -> Result<Float> {
        let mut s = Float::new(prec);
        for t in self.terms.iter().take(count) {
            s += t.value(n, self.leading.as_ref(), prec)?;
        }
        Ok(s)
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                json!({
                    "constant_re": format_sci(&t.constant.re, digits),
                    "constant_im": format_sci(&t.constant.im, digits),
                    "power_re": format_sci(&t.power.re, digits),
                    "power_im": format_sci(&t.power.im, digits),
                    "scaled_by_leading": t.scaled_by_leading,
                    "periodic": t.periodic.as_ref().map(|p| p.to_json(digits)),
                })
            })
            .collect();
        json!({
            "kernel": self.kernel.to_string(),
            "leading": {
                "value": self.leading.as_ref().map(|c| format_sci(c, digits)),
                "status": self.leading_status.name(),
            },
            "terms": terms,
        })
    }
}

#[cfg(test)]
mod tests;
