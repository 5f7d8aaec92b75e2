//! Numerical experiments on ratio tables: residuals against asymptotic
//! models, oscillation fits, constant estimation, precision convergence and
//! the filled Julia set of `z e^(z-1)`.

mod convergence;
mod fit;
mod julia;

use rug::Float;

pub use convergence::{convergence_report, ConvergenceReport, PairAgreement};
pub use fit::{
    estimate_constant, fit_log_oscillation, fit_model_constants, least_squares, psi_empirical,
    ConstantEstimate, EstimateOptions, ModelFit, OscillationFit,
};
pub use julia::{render_julia, JuliaImage, JuliaParams};

use crate::asymptotics::AsymptoticModel;
use crate::coefficients::RatioTable;
use crate::error::{Error, Result};
use crate::scalar::format_sci;

#[derive(Clone, Debug)]
pub enum ResidualMode {
    /// `phi_n - model(n)`
    Difference,
    /// `phi_n / model(n)`
    Ratio,
    /// `(phi_n - model(n)) n^power`
    NormalizedDifference { power: Float },
}

impl ResidualMode {
    pub fn describe(&self) -> String {
        match self {
            ResidualMode::Difference => "phi_n - model(n)".into(),
            ResidualMode::Ratio => "phi_n / model(n)".into(),
            ResidualMode::NormalizedDifference { power } => {
                format!("(phi_n - model(n)) * n^{}", format_sci(power, 16))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub n_values: Vec<usize>,
    pub residuals: Vec<Float>,
    pub mode: ResidualMode,
    pub model: AsymptoticModel,
}

impl ResidualReport {
    /// CSV with header `n,value`.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut s = String::from("n,value\n");
        for (n, r) in self.n_values.iter().zip(&self.residuals) {
            s.push_str(&format!("{n},{}\n", format_sci(r, digits)));
        }
        s
    }

    pub fn max_abs(&self) -> Float {
        let prec = self.residuals.first().map_or(64, |r| r.prec());
        self.residuals.iter().fold(Float::new(prec), |acc, r| {
            let a = Float::with_val(prec, r.abs_ref());
            if a > acc {
                a
            } else {
                acc
            }
        })
    }
}

/// Residuals of `table` against `model` at the sample indices.
pub fn residual_report(
    table: &RatioTable,
    model: &AsymptoticModel,
    mode: ResidualMode,
    sample: &[usize],
) -> Result<ResidualReport> {
    if table.kernel != model.kernel {
        return Err(Error::KernelMismatch {
            table: table.kernel.to_string(),
            model: model.kernel.to_string(),
        });
    }
    for w in sample.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Precondition("sample indices must be strictly increasing".into()));
        }
    }
    if let Some(&bad) = sample.iter().find(|&&n| n == 0 || n > table.len()) {
        return Err(Error::Precondition(format!(
            "sample index {bad} outside table range 1..={}",
            table.len()
        )));
    }
    let prec = table.phi(1).prec();
    let mut residuals = Vec::with_capacity(sample.len());
    for &n in sample {
        let v = model.eval(n as u64, prec)?;
        let phi = table.phi(n);
        let r = match &mode {
            ResidualMode::Difference => Float::with_val(prec, phi - &v),
            ResidualMode::Ratio => Float::with_val(prec, phi / &v),
            ResidualMode::NormalizedDifference { power } => {
                let scale = (Float::with_val(prec, n).ln() * power).exp();
                Float::with_val(prec, phi - &v) * scale
            }
        };
        residuals.push(r);
    }
    Ok(ResidualReport { n_values: sample.to_vec(), residuals, mode, model: model.clone() })
}

/// `floor(n_min rho^k)` for `k = 0..count`, deduplicated, ending at `n_max`.
pub fn geometric_sample(n_min: usize, n_max: usize, count: usize) -> Vec<usize> {
    let n_min = n_min.max(1);
    if count < 2 || n_max <= n_min {
        return vec![n_min.min(n_max.max(1))];
    }
    let ratio = (n_max as f64 / n_min as f64).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<usize> = (0..count)
        .map(|k| ((n_min as f64) * ratio.powi(k as i32)).round() as usize)
        .map(|n| n.clamp(n_min, n_max))
        .collect();
    out.dedup();
    if *out.last().unwrap() != n_max {
        out.push(n_max);
    }
    out
}

/// Every `step`-th index from `n_min` to `n_max`.
pub fn linear_sample(n_min: usize, n_max: usize, step: usize) -> Vec<usize> {
    (n_min.max(1)..=n_max).step_by(step.max(1)).collect()
}

#[cfg(test)]
mod tests;
