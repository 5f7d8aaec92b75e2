//! Linear growth with a period-`(m+1)` correction for the binomial kernels
//! `P_r(z) = z (r + (1-r) z)^m`, `r` uniform on `(0, 1)`.

use rug::Float;

use super::{AsymptoticModel, ConstantStatus, ModelTerm, PeriodicFactor};
use crate::kernels::KernelSpec;
use crate::precision::PrecisionContext;
use crate::scalar::{Coeff, Complex};

/// `C = m^2 / ((m+1)(m - ln(m+1)))`
pub fn binomial_constant(m: u32, ctx: &PrecisionContext) -> Float {
    let prec = ctx.bits();
    let l = Float::with_val(prec, m + 1).ln();
    let den = Float::with_val(prec, m) - l;
    Float::with_val(prec, u64::from(m) * u64::from(m)) / (den * (m + 1))
}

/// The sequence `psi_n`: rises by `1/m` at each step except when
/// `m + 1` divides `n - 1`, where it drops by `1`.
#[derive(Clone, Debug)]
pub struct PsiSequence {
    pub m: u32,
    /// `psi_1, ..., psi_{m+1}`
    pub samples: Vec<Float>,
}

impl PsiSequence {
    pub fn period(&self) -> usize {
        self.samples.len()
    }

    /// `psi_n` for `n >= 1`.
    pub fn value(&self, n: u64) -> &Float {
        &self.samples[((n.max(1) - 1) % self.samples.len() as u64) as usize]
    }

    pub fn factor(&self) -> PeriodicFactor {
        PeriodicFactor::DiscretePeriodic { period: self.period(), samples: self.samples.clone() }
    }
}

/// Anchored at
/// `psi_{m+1} = (m+1)/(2m) * ((m+2) ln(m+1) - 2m) / ((m+1) ln(m+1) - m)`,
/// so that `psi_k = psi_{m+1} - (m+1-k)/m` for `k = 1..m+1`.
pub fn psi_sequence(m: u32, ctx: &PrecisionContext) -> PsiSequence {
    let prec = ctx.bits();
    let l = Float::with_val(prec, m + 1).ln();
    let num = Float::with_val(prec, &l * (m + 2)) - 2 * m;
    let den = Float::with_val(prec, &l * (m + 1)) - m;
    let anchor = Float::with_val(prec, m + 1) / (2 * m) * num / den;
    let samples = (1..=m + 1)
        .map(|k| Float::with_val(prec, &anchor - Float::with_val(prec, m + 1 - k) / m))
        .collect();
    PsiSequence { m, samples }
}

/// Defect of the balance condition
/// `m/(m+1) psi_{m+1} = 1 - ln(m+1)/m + ln(m+1)/(m+1) sum_j psi_j`,
/// which is what fixes the anchor.
pub fn psi_balance_defect(psi: &PsiSequence) -> Float {
    let prec = psi.samples[0].prec();
    let m = psi.m;
    let l = Float::with_val(prec, m + 1).ln();
    let last = &psi.samples[m as usize];
    let lhs = Float::with_val(prec, last * m) / (m + 1);
    let sum = psi.samples.iter().fold(Float::new(prec), |acc, x| acc + x);
    let rhs = Float::with_val(prec, 1) - Float::with_val(prec, &l / m) + sum * &l / (m + 1);
    (lhs - rhs).abs()
}

/// `phi_n ~ C (n + psi_n)`.
pub fn binomial_model(m: u32, ctx: &PrecisionContext) -> AsymptoticModel {
    let prec = ctx.bits();
    let c = binomial_constant(m, ctx);
    let psi = psi_sequence(m, ctx);
    let terms = vec![
        ModelTerm::scaled(Complex::one(prec), Complex::one(prec)),
        ModelTerm {
            constant: Complex::one(prec),
            power: Complex::zero(prec),
            periodic: Some(psi.factor()),
            scaled_by_leading: true,
        },
    ];
    AsymptoticModel::new(KernelSpec::Binomial { m }, Some(c), ConstantStatus::Exact, terms)
}
