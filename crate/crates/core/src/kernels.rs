//! Offspring families `P_r(z)` and the environment measures averaged over.
//!
//! Textual grammar (whitespace is ignored):
//!
//! ```text
//! kernel   := "cpoisson:" cp_item (";" cp_item)*
//!           | "binomial:m=" INT
//!           | "conjugate:" ("geometric" | "log" | "p=" list)
//! cp_item  := "q=" list | "measure=" measure
//! measure  := "full" | "tail:" num | "dirac:" num | "unit"
//! list     := "[" num ("," num)* "]"
//! num      := decimal | INT "/" INT
//! ```
//!
//! `q=[q1,q2,...]` lists the coefficients of `z, z^2, ...`; `p=[...]` does
//! the same for the conjugating series `P`. The measure defaults to `full`.

use std::fmt;
use std::sync::Arc;

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::scalar::{format_compact, parse_real};
use crate::series::{binomial_series, TruncatedSeries};

/// A real parameter together with the literal it was written as, so the
/// kernel prints back the way the user spelled it.
#[derive(Clone, Debug)]
pub struct Real {
    pub value: Float,
    literal: String,
}

impl Real {
    pub fn parse(text: &str, prec: u32) -> Result<Self> {
        let t = text.trim();
        Ok(Real {
            value: parse_real(t, prec)?,
            literal: t.to_string(),
        })
    }

    pub fn from_float(value: Float) -> Self {
        let literal = format_compact(&value, 30);
        Real { value, literal }
    }

    pub fn at(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.value)
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal)
    }
}

type CoeffFn = dyn Fn(usize, u32) -> Vec<Float> + Send + Sync;

/// `q(z)` with `q(0) = 0`: either a polynomial or a coefficient generator.
#[derive(Clone)]
pub enum QSpec {
    /// Coefficients of `z, z^2, ..., z^d`.
    Polynomial(Vec<Real>),
    /// `f(N, prec)` returns the coefficients of `z^0..=z^N`.
    Series { label: String, coeffs: Arc<CoeffFn> },
}

impl fmt::Debug for QSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QSpec({self})")
    }
}

impl PartialEq for QSpec {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (QSpec::Polynomial(a), QSpec::Polynomial(b)) => a == b,
            (QSpec::Series { label: a, .. }, QSpec::Series { label: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for QSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QSpec::Polynomial(c) => write!(f, "[{}]", join(c)),
            QSpec::Series { label, .. } => write!(f, "<{label}>"),
        }
    }
}

fn join(values: &[Real]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl QSpec {
    pub fn polynomial(coeffs: &[f64], prec: u32) -> Self {
        QSpec::Polynomial(
            coeffs
                .iter()
                .map(|&c| Real::from_float(Float::with_val(prec, c)))
                .collect(),
        )
    }

    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(usize, u32) -> Vec<Float> + Send + Sync + 'static,
    ) -> Self {
        QSpec::Series {
            label: label.into(),
            coeffs: Arc::new(f),
        }
    }

    /// Polynomial coefficients `q_1..q_d` with trailing zeros removed.
    pub fn poly_coeffs(&self, prec: u32) -> Option<Vec<Float>> {
        match self {
            QSpec::Polynomial(c) => {
                let mut v: Vec<Float> = c.iter().map(|r| r.at(prec)).collect();
                while v.last().is_some_and(|x| x.is_zero()) {
                    v.pop();
                }
                Some(v)
            }
            QSpec::Series { .. } => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, QSpec::Polynomial(_))
    }

    /// True when `q(z) = z` exactly.
    pub fn is_identity(&self) -> bool {
        match self.poly_coeffs(64) {
            Some(v) => v.len() == 1 && v[0] == 1,
            None => false,
        }
    }

    /// Truncated series `q_0 + q_1 z + ... + q_N z^N` with `q_0 = 0`.
    pub fn series(&self, order: usize, prec: u32) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(order, prec);
        match self {
            QSpec::Polynomial(c) => {
                for (i, q) in c.iter().enumerate().take(order) {
                    s.coeffs_mut()[i + 1] = q.at(prec);
                }
            }
            QSpec::Series { coeffs, .. } => {
                let v = coeffs(order, prec);
                for (k, q) in v.into_iter().enumerate().take(order + 1).skip(1) {
                    s.coeffs_mut()[k] = Float::with_val(prec, q);
                }
            }
        }
        s
    }

    /// `q(1)`, exact for polynomials and the partial sum through `z^order`
    /// otherwise.
    pub fn at_one(&self, order: usize, prec: u32) -> Float {
        match self.poly_coeffs(prec) {
            Some(v) => v.iter().fold(Float::new(prec), |acc, x| acc + x),
            None => self.series(order, prec).sum(),
        }
    }

    /// `(q(1), q'(1), q''(1))` for a polynomial `q`.
    pub fn derivatives_at_one(&self, prec: u32) -> Result<(Float, Float, Float)> {
        let v = self.poly_coeffs(prec).ok_or_else(|| {
            Error::AsymptoticInapplicable("q must be an explicit polynomial".into())
        })?;
        let mut q = Float::new(prec);
        let mut dq = Float::new(prec);
        let mut ddq = Float::new(prec);
        for (i, c) in v.iter().enumerate() {
            let k = (i + 1) as u64;
            q += c;
            dq += Float::with_val(prec, c * k);
            ddq += Float::with_val(prec, c * (k * (k - 1)));
        }
        Ok((q, dq, ddq))
    }

    fn validate(&self, prec: u32) -> Result<()> {
        match self {
            QSpec::Polynomial(c) => {
                if c.is_empty() {
                    return Err(Error::InvalidKernel("q needs at least one coefficient".into()));
                }
                if let Some(bad) = c.iter().find(|r| r.value < 0) {
                    return Err(Error::InvalidKernel(format!(
                        "q coefficients must be non-negative, got {bad}"
                    )));
                }
                if self.at_one(0, prec) <= 0 {
                    return Err(Error::InvalidKernel("q(1) must be positive".into()));
                }
                Ok(())
            }
            QSpec::Series { .. } => {
                let s = self.series(32, prec);
                if s.coeffs().iter().any(|c| *c < 0) {
                    return Err(Error::InvalidKernel("q coefficients must be non-negative".into()));
                }
                if s.sum() <= 0 {
                    return Err(Error::InvalidKernel("q(1) must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnvMeasure {
    /// Uniform limit on `(0, inf)`.
    FullHalfLine,
    /// Uniform limit on `(a, inf)`.
    TailHalfLine { a: Real },
    /// Constant environment `r = r0`.
    Dirac { r0: Real },
    /// Uniform on `(0, 1)`.
    UnitInterval,
}

impl fmt::Display for EnvMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvMeasure::FullHalfLine => f.write_str("full"),
            EnvMeasure::TailHalfLine { a } => write!(f, "tail:{a}"),
            EnvMeasure::Dirac { r0 } => write!(f, "dirac:{r0}"),
            EnvMeasure::UnitInterval => f.write_str("unit"),
        }
    }
}

/// Conjugating series `P` of the family `P_r = P^{-1}(r P(z))`.
#[derive(Clone, Debug, PartialEq)]
pub enum ConjugateP {
    /// `z / (1 - z)`
    Geometric,
    /// `-ln(1 - z)`
    Logarithmic,
    /// Coefficients of `z, z^2, ...`
    Series(Vec<Real>),
}

impl ConjugateP {
    /// `P` truncated at `order`.
    pub fn series(&self, order: usize, prec: u32) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(order, prec);
        for k in 1..=order {
            s.coeffs_mut()[k] = match self {
                ConjugateP::Geometric => Float::with_val(prec, 1),
                ConjugateP::Logarithmic => Float::with_val(prec, 1) / k as u32,
                ConjugateP::Series(c) => c.get(k - 1).map(|r| r.at(prec)).unwrap_or_else(|| Float::new(prec)),
            };
        }
        s
    }
}

impl fmt::Display for ConjugateP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConjugateP::Geometric => f.write_str("geometric"),
            ConjugateP::Logarithmic => f.write_str("log"),
            ConjugateP::Series(c) => write!(f, "p=[{}]", join(c)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    /// `P_r(z) = z e^{r q(z)} / e^{r q(1)}`
    CompoundPoisson { q: QSpec, measure: EnvMeasure },
    /// `P_r(z) = z (r + (1 - r) z)^m`, `r` uniform on `(0, 1)`
    Binomial { m: u32 },
    /// `P_r(z) = P^{-1}(r P(z))`, `r` in `(0, 1]`
    Conjugate { p: ConjugateP },
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::CompoundPoisson { q, measure } => {
                write!(f, "cpoisson:q={q};measure={measure}")
            }
            KernelSpec::Binomial { m } => write!(f, "binomial:m={m}"),
            KernelSpec::Conjugate { p } => write!(f, "conjugate:{p}"),
        }
    }
}

fn parse_list(text: &str, prec: u32) -> Result<Vec<Real>> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected a bracketed list, got `{text}`")))?;
    if inner.trim().is_empty() {
        return Err(Error::Parse("empty coefficient list".into()));
    }
    inner.split(',').map(|t| Real::parse(t, prec)).collect()
}

impl KernelSpec {
    /// Parses the textual kernel grammar (see the module docs).
    pub fn parse(text: &str, prec: u32) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (family, rest) = compact
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("kernel `{text}` lacks a family prefix")))?;
        let spec = match family {
            "cpoisson" => {
                let mut q = None;
                let mut measure = EnvMeasure::FullHalfLine;
                for item in rest.split(';').filter(|s| !s.is_empty()) {
                    let (key, value) = item
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("expected key=value, got `{item}`")))?;
                    match key {
                        "q" => q = Some(QSpec::Polynomial(parse_list(value, prec)?)),
                        "measure" => measure = parse_measure(value, prec)?,
                        _ => return Err(Error::Parse(format!("unknown cpoisson key `{key}`"))),
                    }
                }
                let q = q.ok_or_else(|| Error::Parse("cpoisson kernel needs q=[...]".into()))?;
                KernelSpec::CompoundPoisson { q, measure }
            }
            "binomial" => {
                let m = rest
                    .strip_prefix("m=")
                    .ok_or_else(|| Error::Parse(format!("expected m=INT, got `{rest}`")))?;
                let m: u32 = m
                    .parse()
                    .map_err(|_| Error::Parse(format!("m must be a positive integer, got `{m}`")))?;
                KernelSpec::Binomial { m }
            }
            "conjugate" => {
                let p = match rest {
                    "geometric" => ConjugateP::Geometric,
                    "log" => ConjugateP::Logarithmic,
                    _ => match rest.strip_prefix("p=") {
                        Some(list) => ConjugateP::Series(parse_list(list, prec)?),
                        None => {
                            return Err(Error::Parse(format!("unknown conjugate family `{rest}`")))
                        }
                    },
                };
                KernelSpec::Conjugate { p }
            }
            _ => return Err(Error::Parse(format!("unknown kernel family `{family}`"))),
        };
        spec.validate(prec)?;
        Ok(spec)
    }

    pub fn validate(&self, prec: u32) -> Result<()> {
        match self {
            KernelSpec::CompoundPoisson { q, measure } => {
                q.validate(prec)?;
                match measure {
                    EnvMeasure::TailHalfLine { a } if a.value <= 0 => Err(Error::MeasureSupport {
                        r: a.to_string(),
                        measure: "tail (a must be positive)".into(),
                    }),
                    EnvMeasure::Dirac { r0 } if r0.value <= 0 => Err(Error::MeasureSupport {
                        r: r0.to_string(),
                        measure: "dirac (r0 must be positive)".into(),
                    }),
                    _ => Ok(()),
                }
            }
            KernelSpec::Binomial { m } => {
                if *m == 0 {
                    Err(Error::InvalidKernel("binomial kernel needs m >= 1".into()))
                } else {
                    Ok(())
                }
            }
            KernelSpec::Conjugate { p } => match p {
                ConjugateP::Series(c) => {
                    if c.first().is_none_or(|p1| p1.value.is_zero()) {
                        Err(Error::InvalidKernel("conjugate series needs P'(0) != 0".into()))
                    } else {
                        Ok(())
                    }
                }
                _ => Ok(()),
            },
        }
    }

    /// Number of trailing coefficients that operator-based routes treat as
    /// unreliable.
    pub fn truncation_buffer(&self) -> usize {
        match self {
            KernelSpec::Binomial { m } => *m as usize + 1,
            _ => 1,
        }
    }

    fn check_support(&self, r: &Float) -> Result<()> {
        let fail = |what: &str| {
            Err(Error::MeasureSupport {
                r: format_compact(r, 20),
                measure: what.to_string(),
            })
        };
        match self {
            KernelSpec::CompoundPoisson { measure, .. } => match measure {
                EnvMeasure::FullHalfLine if *r < 0 => fail("full"),
                EnvMeasure::TailHalfLine { a } if *r < a.value => fail(&format!("tail:{a}")),
                EnvMeasure::Dirac { r0 } if *r != r0.value => fail(&format!("dirac:{r0}")),
                EnvMeasure::UnitInterval if *r < 0 || *r > 1 => fail("unit"),
                _ => Ok(()),
            },
            KernelSpec::Binomial { .. } if *r < 0 || *r > 1 => fail("uniform (0,1)"),
            KernelSpec::Conjugate { .. } if *r <= 0 || *r > 1 => fail("(0,1]"),
            _ => Ok(()),
        }
    }

    /// Truncated generating series of `P_r`.
    pub fn offspring_series(&self, r: &Float, order: usize, prec: u32) -> Result<TruncatedSeries> {
        self.check_support(r)?;
        let r = Float::with_val(prec, r);
        match self {
            KernelSpec::CompoundPoisson { q, .. } => {
                if order == 0 {
                    return Ok(TruncatedSeries::zero(0, prec));
                }
                let qs = q.series(order - 1, prec);
                let q1 = q.at_one(order, prec);
                let mut arg = qs.scale_real(&r);
                arg.coeffs_mut()[0] = -Float::with_val(prec, &r * &q1);
                let e = arg.exp()?;
                Ok(e.with_order(order).shift_up(1))
            }
            KernelSpec::Binomial { m } => {
                let mut s = TruncatedSeries::zero(order, prec);
                let one_minus = Float::with_val(prec, 1 - &r);
                for k in 0..=*m as usize {
                    if k + 1 > order {
                        break;
                    }
                    let c = crate::series::gen_binomial(&Float::with_val(prec, *m), k as u64);
                    let rp = Float::with_val(prec, (&r).pow(*m - k as u32));
                    let op = Float::with_val(prec, (&one_minus).pow(k as u32));
                    s.coeffs_mut()[k + 1] = c * rp * op;
                }
                Ok(s)
            }
            KernelSpec::Conjugate { p } => match p {
                ConjugateP::Geometric => {
                    // r z / (1 - (1 - r) z)
                    let mut s = TruncatedSeries::zero(order, prec);
                    let one_minus = Float::with_val(prec, 1 - &r);
                    let mut c = r.clone();
                    for k in 1..=order {
                        s.coeffs_mut()[k] = c.clone();
                        c *= &one_minus;
                    }
                    Ok(s)
                }
                ConjugateP::Logarithmic => {
                    // 1 - (1 - z)^r
                    let b = binomial_series(&r, order);
                    let mut s = TruncatedSeries::zero(order, prec);
                    for k in 1..=order {
                        let c = b.coeff(k).clone();
                        s.coeffs_mut()[k] = if k % 2 == 1 { c } else { -c };
                    }
                    Ok(s)
                }
                ConjugateP::Series(_) => {
                    let ps = p.series(order, prec);
                    let inv = ps.reversion()?;
                    inv.compose(&ps.scale_real(&r))
                }
            },
        }
    }

    /// `int p_1(r) mu(dr)`, the normalizing constant of the averaged equation.
    pub fn survival_mass(&self, prec: u32) -> Result<Float> {
        match self {
            KernelSpec::CompoundPoisson { q, measure } => {
                let q1 = q.at_one(4096, prec);
                if q1 <= 0 {
                    return Err(Error::MeasureDivergence(
                        "q(1) = 0 makes p_1 identically 1".into(),
                    ));
                }
                Ok(match measure {
                    EnvMeasure::FullHalfLine => q1.recip(),
                    EnvMeasure::TailHalfLine { a } => {
                        let e = Float::with_val(prec, -(a.at(prec) * &q1)).exp();
                        e / q1
                    }
                    EnvMeasure::Dirac { r0 } => Float::with_val(prec, -(r0.at(prec) * q1)).exp(),
                    EnvMeasure::UnitInterval => {
                        let e = Float::with_val(prec, -&q1).exp();
                        (1 - e) / q1
                    }
                })
            }
            KernelSpec::Binomial { m } => Ok(Float::with_val(prec, 1) / (m + 1)),
            KernelSpec::Conjugate { .. } => Ok(Float::with_val(prec, 0.5)),
        }
    }

    /// The exact solution `Phi = P` of the conjugate class.
    pub fn conjugate_phi(&self, order: usize, prec: u32) -> Result<TruncatedSeries> {
        match self {
            KernelSpec::Conjugate { p } => {
                let s = p.series(order, prec);
                let p1 = s.coeff(1).clone();
                Ok(s.scale_real(&p1.recip()))
            }
            _ => Err(Error::RouteInapplicable {
                route: "closed".into(),
                kernel: self.to_string(),
            }),
        }
    }
}

fn parse_measure(text: &str, prec: u32) -> Result<EnvMeasure> {
    match text {
        "full" => Ok(EnvMeasure::FullHalfLine),
        "unit" => Ok(EnvMeasure::UnitInterval),
        _ => {
            if let Some(a) = text.strip_prefix("tail:") {
                Ok(EnvMeasure::TailHalfLine {
                    a: Real::parse(a, prec)?,
                })
            } else if let Some(r0) = text.strip_prefix("dirac:") {
                Ok(EnvMeasure::Dirac {
                    r0: Real::parse(r0, prec)?,
                })
            } else {
                Err(Error::Parse(format!("unknown measure `{text}`")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 240;

    fn k(text: &str) -> KernelSpec {
        KernelSpec::parse(text, P).unwrap()
    }

    fn close(a: &Float, b: &Float) -> bool {
        Float::with_val(P, a - b).abs() < 1e-65
    }

    #[test]
    fn parses_and_prints_canonically() {
        for text in [
            "cpoisson:q=[1,1];measure=full",
            "cpoisson:q=[1,0,1];measure=tail:2",
            "cpoisson:q=[1];measure=dirac:1",
            "cpoisson:q=[1/2,1/2];measure=unit",
            "binomial:m=3",
            "conjugate:geometric",
            "conjugate:log",
            "conjugate:p=[1,0.5]",
        ] {
            assert_eq!(k(text).to_string(), text);
        }
        assert_eq!(k("cpoisson:q=[1]").to_string(), "cpoisson:q=[1];measure=full");
        assert_eq!(k(" binomial : m = 2 ").to_string(), "binomial:m=2");
    }

    #[test]
    fn rejects_malformed_kernels() {
        for bad in [
            "poisson:q=[1]",
            "cpoisson:measure=full",
            "cpoisson:q=[1];color=red",
            "cpoisson:q=[-1,2]",
            "cpoisson:q=[0]",
            "cpoisson:q=1",
            "cpoisson:q=[1];measure=tail:0",
            "cpoisson:q=[1];measure=dirac:-1",
            "binomial:m=0",
            "binomial:m=x",
            "conjugate:p=[0,1]",
            "conjugate:cubic",
        ] {
            assert!(KernelSpec::parse(bad, P).is_err(), "{bad}");
        }
        assert!(matches!(
            KernelSpec::parse("cpoisson:q=[1,-1]", P),
            Err(Error::InvalidKernel(_))
        ));
    }

    #[test]
    fn offspring_examples() {
        let one = Float::with_val(P, 1);
        let s = k("cpoisson:q=[1];measure=full").offspring_series(&one, 6, P).unwrap();
        assert!(close(s.coeff(1), &Float::with_val(P, -1).exp()));

        let b2 = k("binomial:m=2").offspring_series(&one, 5, P).unwrap();
        assert_eq!(b2, TruncatedSeries::identity(5, P));

        let half = Float::with_val(P, 0.5);
        let b1 = k("binomial:m=1").offspring_series(&half, 4, P).unwrap();
        assert_eq!(b1, TruncatedSeries::from_f64(&[0.0, 0.5, 0.5, 0.0, 0.0], P));
    }

    #[test]
    fn support_is_enforced() {
        let kernel = k("cpoisson:q=[1];measure=tail:2");
        assert!(matches!(
            kernel.offspring_series(&Float::with_val(P, 1), 5, P),
            Err(Error::MeasureSupport { .. })
        ));
        assert!(k("binomial:m=2").offspring_series(&Float::with_val(P, 1.5), 5, P).is_err());
        assert!(k("conjugate:log").offspring_series(&Float::new(P), 5, P).is_err());
        assert!(k("cpoisson:q=[1];measure=dirac:1").offspring_series(&Float::with_val(P, 2), 5, P).is_err());
    }

    #[test]
    fn survival_masses() {
        let m = k("cpoisson:q=[1,1];measure=full").survival_mass(P).unwrap();
        assert_eq!(m, 0.5);
        let m = k("binomial:m=2").survival_mass(P).unwrap();
        assert!(close(&m, &(Float::with_val(P, 1) / 3u32)));
        let m = k("cpoisson:q=[1];measure=dirac:1").survival_mass(P).unwrap();
        assert!(close(&m, &Float::with_val(P, -1).exp()));
        let m = k("cpoisson:q=[1];measure=tail:2").survival_mass(P).unwrap();
        assert!(close(&m, &Float::with_val(P, -2).exp()));
    }

    #[test]
    fn conjugate_solutions() {
        let g = k("conjugate:geometric").conjugate_phi(6, P).unwrap();
        assert!(g.coeffs()[1..].iter().all(|c| *c == 1));
        let l = k("conjugate:log").conjugate_phi(6, P).unwrap();
        for n in 1..=6u32 {
            assert!(close(l.coeff(n as usize), &(Float::with_val(P, 1) / n)));
        }
        let id = k("conjugate:p=[1]").conjugate_phi(4, P).unwrap();
        assert_eq!(id, TruncatedSeries::identity(4, P));
    }

    #[test]
    fn conjugate_offspring_agrees_with_reversion() {
        let r = Float::with_val(P, 0.3);
        for (named, series) in [
            ("conjugate:geometric", format!("conjugate:p=[{}]", ["1"; 12].join(","))),
            (
                "conjugate:log",
                format!(
                    "conjugate:p=[{}]",
                    (1..=12).map(|k| format!("1/{k}")).collect::<Vec<_>>().join(",")
                ),
            ),
        ] {
            let a = k(named).offspring_series(&r, 12, P).unwrap();
            let b = k(&series).offspring_series(&r, 12, P).unwrap();
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!(Float::with_val(P, x - y).abs() < 1e-60);
            }
        }
    }

    #[test]
    fn closure_q_is_supported() {
        let q = QSpec::from_fn("q=z", |n, prec| {
            let mut v = vec![Float::new(prec); n + 1];
            if n >= 1 {
                v[1] = Float::with_val(prec, 1);
            }
            v
        });
        let kernel = KernelSpec::CompoundPoisson {
            q,
            measure: EnvMeasure::FullHalfLine,
        };
        kernel.validate(P).unwrap();
        assert_eq!(kernel.survival_mass(P).unwrap(), 1);
        assert_eq!(kernel.to_string(), "cpoisson:q=<q=z>;measure=full");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn offspring_is_a_pgf(
                q in prop::collection::vec(0.0f64..3.0, 1..4),
                r in 0.0f64..4.0,
                order in 4usize..30,
            ) {
                prop_assume!(q.iter().sum::<f64>() > 0.1);
                let kernel = KernelSpec::CompoundPoisson {
                    q: QSpec::polynomial(&q, P),
                    measure: EnvMeasure::FullHalfLine,
                };
                let rf = Float::with_val(P, r);
                let s = kernel.offspring_series(&rf, order, P).unwrap();
                s.check_pgf(&Float::with_val(P, 1e-60)).unwrap();
                // Mass grows with the order.
                let s2 = kernel.offspring_series(&rf, 2 * order, P).unwrap();
                prop_assert!(s2.sum() >= s.sum());
                let q1 = q.iter().fold(Float::new(P), |acc, &c| acc + c);
                let p1 = Float::with_val(P, -(rf * q1)).exp();
                prop_assert!(Float::with_val(P, s.coeff(1) - &p1).abs() < 1e-50);
            }

            #[test]
            fn binomial_offspring_degree(m in 1u32..8, r in 0.01f64..0.99) {
                let kernel = KernelSpec::Binomial { m };
                let rf = Float::with_val(P, r);
                let s = kernel.offspring_series(&rf, 12, P).unwrap();
                s.check_pgf(&Float::with_val(P, 1e-60)).unwrap();
                let deg = (0..=12).rev().find(|&k| !s.coeff(k).is_zero()).unwrap();
                prop_assert_eq!(deg, m as usize + 1);
                let rm = Float::with_val(P, (&rf).pow(m));
                prop_assert!(Float::with_val(P, s.coeff(1) - &rm).abs() < 1e-60);
                let total = s.sum();
                prop_assert!(Float::with_val(P, total - 1u32).abs() < 1e-60);
            }
        }
    }
}
