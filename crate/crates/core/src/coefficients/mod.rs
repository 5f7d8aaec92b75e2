//! The ratio sequence `phi_n` by several independent routes.

mod closed_form;
mod product_form;
mod quadrature;
mod recurrence;
mod schroder;

use std::fmt;
use std::str::FromStr;

use rug::Float;

pub use closed_form::closed_form_phi;
pub use product_form::{product_form, product_form_phi, ProductForm};
pub use quadrature::{gauss_legendre, quadrature_average, quadrature_defect};
pub use recurrence::{
    binomial_identity_defect, dirac_recurrence_terms, recurrence_binomial, recurrence_compound_poisson, recurrence_dirac_poisson,
    recurrence_tail_poisson, tail_recurrence_terms,
};
pub use schroder::{fixed_point_phi, schroder_operator, schroder_residual, FixedPointOptions};

use crate::error::{Error, Result};
use crate::kernels::{EnvMeasure, KernelSpec};
use crate::precision::PrecisionContext;
use crate::scalar::{format_sci, parse_real};
use crate::series::TruncatedSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    ClosedForm,
    ProductForm,
    Recurrence,
    FixedPoint,
    Quadrature,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::ClosedForm => "closed",
            Route::ProductForm => "product",
            Route::Recurrence => "recurrence",
            Route::FixedPoint => "fixedpoint",
            Route::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "closed" => Route::ClosedForm,
            "product" => Route::ProductForm,
            "recurrence" => Route::Recurrence,
            "fixedpoint" => Route::FixedPoint,
            "quadrature" => Route::Quadrature,
            _ => return Err(Error::Parse(format!("unknown route `{s}`"))),
        })
    }
}

/// `phi_1..phi_N` together with how they were obtained.
#[derive(Clone, Debug)]
pub struct RatioTable {
    values: Vec<Float>,
    pub route: Route,
    pub kernel: KernelSpec,
    pub digits: u32,
    /// Iterations used by the fixed-point route.
    pub iterations: Option<usize>,
}

impl RatioTable {
    pub fn new(values: Vec<Float>, route: Route, kernel: KernelSpec, digits: u32) -> Self {
        RatioTable {
            values,
            route,
            kernel,
            digits,
            iterations: None,
        }
    }

    /// Builds a table from `Phi`, dropping the constant term.
    pub fn from_series(
        phi: &TruncatedSeries,
        route: Route,
        kernel: KernelSpec,
        digits: u32,
    ) -> Self {
        Self::new(phi.coeffs()[1..].to_vec(), route, kernel, digits)
    }

    /// Number of coefficients `N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `phi_n`, 1-based.
    pub fn phi(&self, n: usize) -> &Float {
        &self.values[n - 1]
    }

    /// The first `len` entries (all of them if the table is shorter).
    pub fn prefix(&self, len: usize) -> RatioTable {
        let len = len.min(self.values.len());
        RatioTable::new(self.values[..len].to_vec(), self.route, self.kernel.clone(), self.digits)
    }

    pub fn values(&self) -> &[Float] {
        &self.values
    }

    /// `Phi(z)` as a series of order `N`.
    pub fn to_series(&self) -> TruncatedSeries {
        let prec = self.values.first().map_or(64, |v| v.prec());
        let mut c = Vec::with_capacity(self.values.len() + 1);
        c.push(Float::new(prec));
        c.extend(self.values.iter().cloned());
        TruncatedSeries::new(c, prec)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * (self.digits as usize + 32));
        out.push_str("n,phi,route,digits\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                format_sci(v, self.digits as usize),
                self.route,
                self.digits
            ));
        }
        out
    }

    /// Reads a table written by [`RatioTable::to_csv`]. The kernel is not
    /// part of the file and must be supplied.
    pub fn from_csv(text: &str, kernel: KernelSpec, prec: u32) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty table".into()))?;
        if header.trim() != "n,phi,route,digits" {
            return Err(Error::Parse(format!("unexpected table header `{header}`")));
        }
        let mut values = Vec::new();
        let mut route = None;
        let mut digits = None;
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!("row {}: expected 4 fields", row + 1)));
            }
            let n: usize = fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad index", row + 1)))?;
            if n != row + 1 {
                return Err(Error::Parse(format!("row {}: index {n} out of sequence", row + 1)));
            }
            values.push(parse_real(fields[1], prec)?);
            let r: Route = fields[2].parse()?;
            if *route.get_or_insert(r) != r {
                return Err(Error::Parse("mixed routes in one table".into()));
            }
            let d: u32 = fields[3]
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad digits", row + 1)))?;
            digits.get_or_insert(d);
        }
        if values.is_empty() {
            return Err(Error::Parse("table has no rows".into()));
        }
        Ok(RatioTable::new(
            values,
            route.unwrap_or(Route::ClosedForm),
            kernel,
            digits.unwrap_or(PrecisionContext::MIN_DIGITS),
        ))
    }
}

/// Routes able to produce a table for `kernel`, cheapest first.
pub fn applicable_routes(kernel: &KernelSpec) -> Vec<Route> {
    match kernel {
        KernelSpec::CompoundPoisson { q, measure } => match measure {
            EnvMeasure::FullHalfLine if q.is_polynomial() => {
                vec![Route::ClosedForm, Route::ProductForm, Route::Recurrence, Route::FixedPoint]
            }
            EnvMeasure::FullHalfLine => vec![Route::ClosedForm, Route::Recurrence, Route::FixedPoint],
            _ => vec![Route::Recurrence, Route::FixedPoint],
        },
        KernelSpec::Binomial { .. } => vec![Route::Recurrence, Route::FixedPoint],
        KernelSpec::Conjugate { .. } => vec![Route::ClosedForm, Route::FixedPoint],
    }
}

/// Computes `phi_1..phi_N` by the requested route (`None` picks the cheapest).
pub fn compute_table(
    kernel: &KernelSpec,
    route: Option<Route>,
    n: usize,
    ctx: &PrecisionContext,
) -> Result<RatioTable> {
    if n == 0 {
        return Err(Error::Precondition("order N must be at least 1".into()));
    }
    let routes = applicable_routes(kernel);
    let route = match route {
        None => routes[0],
        Some(r) if routes.contains(&r) => r,
        Some(r) => {
            return Err(Error::RouteInapplicable {
                route: r.to_string(),
                kernel: kernel.to_string(),
            })
        }
    };
    let prec = ctx.bits();
    let mut table = match (route, kernel) {
        (Route::ClosedForm, KernelSpec::CompoundPoisson { q, .. }) => closed_form_phi(q, n, ctx),
        (Route::ClosedForm, KernelSpec::Conjugate { .. }) => {
            let phi = kernel.conjugate_phi(n, prec)?;
            Ok(RatioTable::from_series(&phi, Route::ClosedForm, kernel.clone(), ctx.digits()))
        }
        (Route::ProductForm, KernelSpec::CompoundPoisson { q, .. }) => {
            let pf = product_form(q, ctx)?;
            product_form_phi(&pf, n, ctx)
        }
        (Route::Recurrence, KernelSpec::CompoundPoisson { q, measure }) => match measure {
            EnvMeasure::Dirac { r0 } if q.is_identity() => recurrence_dirac_poisson(&r0.at(prec), n, ctx),
            EnvMeasure::TailHalfLine { a } if q.is_identity() => recurrence_tail_poisson(&a.at(prec), n, ctx),
            _ => recurrence_compound_poisson(kernel, n, ctx),
        },
        (Route::Recurrence, KernelSpec::Binomial { m }) => Ok(recurrence_binomial(*m, n, ctx)),
        (Route::FixedPoint, _) => fixed_point_phi(kernel, n, &FixedPointOptions::new(ctx), ctx),
        _ => Err(Error::RouteInapplicable {
            route: route.to_string(),
            kernel: kernel.to_string(),
        }),
    }?;
    table.kernel = kernel.clone();
    Ok(table)
}

/// Largest `|a_n - b_n| / max(1, |b_n|)` over `n <= upto`.
pub fn max_rel_difference(a: &RatioTable, b: &RatioTable, upto: usize) -> Float {
    let upto = upto.min(a.len()).min(b.len());
    let prec = a.values.first().map_or(64, |v| v.prec());
    let mut worst = Float::new(prec);
    for n in 1..=upto {
        let d = crate::scalar::rel_diff(a.phi(n), b.phi(n));
        if d > worst {
            worst = d;
        }
    }
    worst
}
