//! Agreement between tables of the same kernel computed at different
//! precisions, orders or by different routes.

use rug::Float;
use serde_json::{json, Value};

use crate::coefficients::RatioTable;
use crate::error::{Error, Result};

/// Comparison of two consecutive tables.
#[derive(Clone, Debug)]
pub struct PairAgreement {
    pub labels: (String, String),
    /// Agreeing decimal digits for `n = 1..=len`, capped at the smaller of
    /// the two precisions.
    pub digits: Vec<f64>,
    /// Largest `k` such that every `n <= k` agrees to within `slack`
    /// digits of the cap.
    pub stable_prefix: usize,
    pub min_digits: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub kernel: String,
    pub pairs: Vec<PairAgreement>,
    /// Indices whose agreement fell short of the cap minus the slack.
    pub unstable: Vec<usize>,
    pub slack: u32,
}

fn label(t: &RatioTable) -> String {
    format!("{}@{}d/N={}", t.route.name(), t.digits, t.len())
}

/// Compares each table with the next one over their common range.
///
/// All tables must describe the same kernel; routes may differ, which
/// turns the report into a cross-route check.
pub fn convergence_report(tables: &[RatioTable], slack: u32) -> Result<ConvergenceReport> {
    if tables.len() < 2 {
        return Err(Error::Precondition("need at least two tables".into()));
    }
    let kernel = &tables[0].kernel;
    if let Some(t) = tables.iter().find(|t| t.kernel != *kernel) {
        return Err(Error::KernelMismatch { table: t.kernel.to_string(), model: kernel.to_string() });
    }
    let mut pairs = Vec::new();
    let mut unstable = Vec::new();
    for w in tables.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let cap = a.digits.min(b.digits) as f64;
        let need = cap - slack as f64;
        let len = a.len().min(b.len());
        let prec = a.phi(1).prec().max(b.phi(1).prec());
        let mut digits = Vec::with_capacity(len);
        let mut stable_prefix = len;
        for n in 1..=len {
            let x = Float::with_val(prec, a.phi(n));
            let y = Float::with_val(prec, b.phi(n));
            let diff = Float::with_val(prec, &x - &y).abs();
            let scale = Float::with_val(prec, y.abs_ref());
            let d = if diff.is_zero() {
                cap
            } else if scale.is_zero() {
                0.0
            } else {
                let rel = diff / scale;
                (-rel.log10().to_f64()).clamp(0.0, cap)
            };
            if d < need {
                if stable_prefix == len {
                    stable_prefix = n - 1;
                }
                if !unstable.contains(&n) {
                    unstable.push(n);
                }
            }
            digits.push(d);
        }
        let min_digits = digits.iter().cloned().fold(f64::INFINITY, f64::min);
        pairs.push(PairAgreement { labels: (label(a), label(b)), digits, stable_prefix, min_digits });
    }
    unstable.sort_unstable();
    Ok(ConvergenceReport { kernel: kernel.to_string(), pairs, unstable, slack })
}

impl ConvergenceReport {
    pub fn to_json(&self) -> Value {
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|p| {
                json!({
                    "a": p.labels.0,
                    "b": p.labels.1,
                    "min_digits": format!("{:.2}", p.min_digits),
                    "stable_prefix": p.stable_prefix,
                    "compared": p.digits.len(),
                })
            })
            .collect();
        json!({
            "kernel": self.kernel,
            "slack_digits": self.slack,
            "pairs": pairs,
            "unstable": self.unstable,
        })
    }

    /// CSV `n,digits_1,...` with one column per compared pair.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n");
        for k in 0..self.pairs.len() {
            s.push_str(&format!(",digits_{}", k + 1));
        }
        s.push('\n');
        let len = self.pairs.iter().map(|p| p.digits.len()).max().unwrap_or(0);
        for n in 0..len {
            s.push_str(&(n + 1).to_string());
            for p in &self.pairs {
                match p.digits.get(n) {
                    Some(d) => s.push_str(&format!(",{d:.2}")),
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }
}
