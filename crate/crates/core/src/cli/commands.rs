use std::fs;
use std::path::{Path, PathBuf};

use rug::Float;
use serde_json::{json, Value};

use super::config::Resolved;
use super::output::{json_bytes, write_atomic};
use super::usage;
use crate::analysis::{
    estimate_constant, fit_log_oscillation, fit_model_constants, geometric_sample, linear_sample,
    render_julia, residual_report, EstimateOptions, JuliaParams, ResidualMode,
};
use crate::asymptotics::{
    binomial_model, dirac_exponents, dirac_poisson_model, solve_binomial_indicial, solve_tail_indicial,
    tail_poisson_model, two_term_compound_poisson, AsymptoticModel,
};
use crate::coefficients::{
    applicable_routes, binomial_identity_defect, compute_table, max_rel_difference, product_form,
    quadrature_defect, schroder_residual, RatioTable, Route,
};
use crate::error::{Error, Result};
use crate::kernels::{EnvMeasure, KernelSpec};
use crate::precision::{pow10, PrecisionContext};
use crate::scalar::{format_sci, parse_real};

pub fn coeffs(r: &Resolved) -> Result<()> {
    let kernel = r.kernel()?;
    let n = r.n_required()?;
    let table = compute_table(&kernel, r.route, n, &r.ctx)?;
    write_atomic(r.out.as_deref(), table.to_csv().as_bytes())
}

fn digits(ctx: &PrecisionContext) -> usize {
    ctx.digits() as usize
}

fn inapplicable(kernel: &KernelSpec) -> Error {
    Error::AsymptoticInapplicable(format!("no asymptotic model is available for `{kernel}`"))
}

fn tail_threshold(kernel: &KernelSpec, prec: u32) -> Option<Float> {
    match kernel {
        KernelSpec::CompoundPoisson { q, measure: EnvMeasure::TailHalfLine { a } } if q.is_identity() => {
            Some(a.at(prec))
        }
        _ => None,
    }
}

/// The model of `kernel` with every constant that has a closed form.
fn base_model(kernel: &KernelSpec, ctx: &PrecisionContext) -> Result<AsymptoticModel> {
    match kernel {
        KernelSpec::CompoundPoisson { q, measure: EnvMeasure::FullHalfLine } => {
            let pf = product_form(q, ctx)?;
            two_term_compound_poisson(q, &pf, ctx)
        }
        KernelSpec::CompoundPoisson { measure: EnvMeasure::Dirac { .. }, .. } => dirac_poisson_model(kernel, ctx),
        KernelSpec::Binomial { m } => Ok(binomial_model(*m, ctx)),
        _ => match tail_threshold(kernel, ctx.bits()) {
            Some(a) => {
                let roots = solve_tail_indicial(&a, 1, ctx)?;
                tail_poisson_model(&a, &roots)
            }
            None => Err(inapplicable(kernel)),
        },
    }
}

fn default_from(n: usize) -> usize {
    (n / 100).max(1)
}

/// Fills `C` (and `B1`, `B2`) of a model whose constants are unknown.
fn estimate_model(
    model: AsymptoticModel,
    table: &RatioTable,
    window: (usize, usize),
    ctx: &PrecisionContext,
) -> Result<(AsymptoticModel, Value)> {
    let d = digits(ctx);
    if let KernelSpec::CompoundPoisson { measure: EnvMeasure::Dirac { .. }, .. } = &table.kernel {
        // The log-periodic factor has higher harmonics, so the constant is
        // taken as an average over whole periods rather than from a fit.
        let (power, w) = dirac_exponents(&table.kernel, ctx)?;
        let opts = EstimateOptions { im_alpha: Some(w.clone()), ..EstimateOptions::default() };
        let est = estimate_constant(table, &power, window, &opts)?;
        let with_c = model.with_estimated_constant(est.value.clone());
        let sample = geometric_sample(est.from.ceil() as usize, window.1, 400);
        let neg = Float::with_val(ctx.bits(), -&power);
        let report = residual_report(
            table,
            &with_c.truncated(1),
            ResidualMode::NormalizedDifference { power: neg },
            &sample,
        )?;
        let fit = fit_log_oscillation(&report, &w)?;
        let info = json!({
            "method": "log-period average for C, first-harmonic fit for B1 and B2",
            "constant": est.to_json(d),
            "oscillation": fit.to_json(d),
        });
        return Ok((with_c.with_oscillation(fit.b1, fit.b2), info));
    }
    let sample = geometric_sample(window.0, window.1, 400);
    let fit = fit_model_constants(table, &model, &sample)?;
    let info = json!({
        "method": "weighted joint least squares",
        "window": [window.0, window.1],
        "samples": sample.len(),
        "rms_error": format_sci(&fit.rms_error, 6),
    });
    Ok((fit.model, info))
}

fn needs_estimate(model: &AsymptoticModel) -> bool {
    model.leading.is_none()
}

pub fn asym(r: &Resolved, terms: Option<usize>, estimate_n: Option<usize>) -> Result<()> {
    let kernel = r.kernel()?;
    let ctx = &r.ctx;
    let terms = terms.unwrap_or(2);
    if !(1..=2).contains(&terms) {
        return Err(usage("--terms must be 1 or 2"));
    }
    let mut model = base_model(&kernel, ctx)?;
    let mut estimation = Value::Null;
    if let Some(n) = estimate_n {
        if needs_estimate(&model) {
            let table = compute_table(&kernel, r.route, n, ctx)?;
            let (fitted, info) = estimate_model(model, &table, (default_from(n), n), ctx)?;
            model = fitted;
            estimation = info;
        }
    }
    let shown = model.truncated(terms);
    let doc = json!({
        "model": shown.to_json(digits(ctx)),
        "terms": terms,
        "digits": ctx.digits(),
        "estimation": estimation,
    });
    write_atomic(r.out.as_deref(), &json_bytes(&doc))
}

pub struct RootsOptions {
    pub binomial_m: Option<u32>,
    pub tail_a: Option<String>,
    pub count: usize,
}

pub fn roots(r: &Resolved, opts: &RootsOptions) -> Result<()> {
    let ctx = &r.ctx;
    let set = match (opts.binomial_m, &opts.tail_a) {
        (Some(_), Some(_)) => return Err(usage("give either --binomial-m or --tail-a, not both")),
        (Some(m), None) => solve_binomial_indicial(m, opts.count, ctx)?,
        (None, Some(a)) => solve_tail_indicial(&parse_real(a, ctx.bits())?, opts.count, ctx)?,
        (None, None) => {
            if r.kernel.is_none() {
                return Err(usage("roots needs --binomial-m, --tail-a or a --kernel"));
            }
            let kernel = r.kernel()?;
            match (&kernel, tail_threshold(&kernel, ctx.bits())) {
                (KernelSpec::Binomial { m }, _) => solve_binomial_indicial(*m, opts.count, ctx)?,
                (_, Some(a)) => solve_tail_indicial(&a, opts.count, ctx)?,
                _ => {
                    return Err(Error::AsymptoticInapplicable(format!(
                        "`{kernel}` has no indicial equation"
                    )))
                }
            }
        }
    };
    write_atomic(r.out.as_deref(), set.to_csv(digits(ctx)).as_bytes())
}

const QUADRATURE_PREFIX: usize = 300;

struct Check {
    name: String,
    measured: Option<Float>,
    tolerance: Float,
    detail: Option<String>,
}

impl Check {
    fn measured(name: impl Into<String>, value: Float, tolerance: Float) -> Self {
        Check { name: name.into(), measured: Some(value), tolerance, detail: None }
    }

    fn failed(name: impl Into<String>, detail: String, tolerance: Float) -> Self {
        Check { name: name.into(), measured: None, tolerance, detail: Some(detail) }
    }

    fn passed(&self) -> bool {
        matches!(&self.measured, Some(v) if *v < self.tolerance)
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "measured": self.measured.as_ref().map(|v| format_sci(v, 6)),
            "tolerance": format_sci(&self.tolerance, 3),
            "passed": self.passed(),
            "detail": self.detail,
        })
    }
}

/// `10^-(digits - slack)`, for data known to `digits` significant figures.
fn digits_tolerance(ctx: &PrecisionContext, digits: u32, slack: u32) -> Float {
    pow10(ctx.bits(), -(i64::from(digits) - i64::from(slack)))
}

/// Identity checks that apply to any single table of `kernel`.
fn table_checks(
    prefix: &str,
    kernel: &KernelSpec,
    table: &RatioTable,
    digits: u32,
    ctx: &PrecisionContext,
) -> Vec<Check> {
    let strict = digits_tolerance(ctx, digits, 15);
    let loose = digits_tolerance(ctx, digits, 20);
    let mut out = Vec::new();
    let push = |out: &mut Vec<Check>, name: String, res: Result<Float>, tol: &Float| {
        out.push(match res {
            Ok(v) => Check::measured(name, v, tol.clone()),
            Err(e) => Check::failed(name, e.to_string(), tol.clone()),
        });
    };
    push(&mut out, format!("{prefix}schroder_residual"), schroder_residual(kernel, table, ctx), &strict);
    if let KernelSpec::Binomial { m } = kernel {
        push(&mut out, format!("{prefix}sum_identity"), binomial_identity_defect(table, *m), &loose);
        // Quadrature composes once per node, with about m N / 2 nodes, so the
        // check is limited to a prefix.
        let head = table.prefix(QUADRATURE_PREFIX);
        push(&mut out, format!("{prefix}quadrature"), quadrature_defect(&head, ctx), &loose);
        if let Some(last) = out.last_mut() {
            last.detail = Some(format!("coefficients 1..={}", head.len()));
        }
    }
    out
}

pub fn validate(r: &Resolved, table_path: Option<&Path>) -> Result<bool> {
    let kernel = r.kernel()?;
    let ctx = &r.ctx;
    let n = r.n_or(500)?;
    let strict = ctx.tolerance(15);
    let routes: Vec<Route> = match r.route {
        Some(route) => {
            // Fail early and with the inapplicability exit code.
            if !applicable_routes(&kernel).contains(&route) {
                return Err(Error::RouteInapplicable { route: route.to_string(), kernel: kernel.to_string() });
            }
            vec![route]
        }
        None => applicable_routes(&kernel),
    };
    let mut checks = Vec::new();
    let mut tables: Vec<RatioTable> = Vec::new();
    for &route in &routes {
        match compute_table(&kernel, Some(route), n, ctx) {
            Ok(t) => tables.push(t),
            Err(e) => checks.push(Check::failed(format!("route:{route}"), e.to_string(), strict.clone())),
        }
    }
    let reference = tables.first().cloned();
    if let Some(base) = &reference {
        for t in &tables[1..] {
            let name = format!("route_agreement:{}-vs-{}", base.route, t.route);
            checks.push(Check::measured(name, max_rel_difference(t, base, n), strict.clone()));
        }
        checks.extend(table_checks("", &kernel, base, ctx.digits(), ctx));
    }
    if let Some(path) = table_path {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read table {}: {e}", path.display())))?;
        let loaded = RatioTable::from_csv(&text, kernel.clone(), ctx.bits())?;
        if let Some(base) = &reference {
            let upto = loaded.len().min(base.len());
            checks.push(Check::measured(
                "table_agreement",
                max_rel_difference(&loaded, base, upto),
                digits_tolerance(ctx, loaded.digits.min(ctx.digits()), 2),
            ));
        }
        checks.extend(table_checks("table:", &kernel, &loaded, loaded.digits.min(ctx.digits()), ctx));
    }
    let passed = !checks.is_empty() && checks.iter().all(Check::passed);
    let doc = json!({
        "kernel": kernel.to_string(),
        "n": n,
        "digits": ctx.digits(),
        "routes": tables.iter().map(|t| t.route.name()).collect::<Vec<_>>(),
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        "passed": passed,
    });
    write_atomic(r.out.as_deref(), &json_bytes(&doc))?;
    Ok(passed)
}

pub struct OscillationOptions {
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub samples: usize,
    pub mode: Option<String>,
    pub power: Option<String>,
    pub fit_out: Option<PathBuf>,
}

/// What the oscillation experiment compares against for one kernel.
struct Plan {
    /// Fully specified model to subtract.
    model: AsymptoticModel,
    /// Power that flattens the remaining decay.
    power: Option<Float>,
    /// Log-frequency of the dominant oscillation in the remainder.
    im_alpha: Option<Float>,
    linear: bool,
    note: Value,
}

fn plan(table: &RatioTable, window: (usize, usize), ctx: &PrecisionContext) -> Result<Plan> {
    let kernel = &table.kernel;
    let prec = ctx.bits();
    let model = base_model(kernel, ctx)?;
    match kernel {
        KernelSpec::CompoundPoisson { measure: EnvMeasure::FullHalfLine, .. } => Ok(Plan {
            model,
            power: None,
            im_alpha: None,
            linear: false,
            note: json!("two-term model with exact constants"),
        }),
        KernelSpec::Binomial { m } => {
            let roots = solve_binomial_indicial(*m, 1, ctx)?;
            let alpha1 = roots.first_complex().cloned().ok_or_else(|| {
                Error::RootSolverFailure("binomial indicial equation returned no complex root".into())
            })?;
            // Below 1 the long-phase term outlasts the n^-1 short-phase one.
            if alpha1.re < 1u32 {
                Ok(Plan {
                    model,
                    power: Some(alpha1.re.clone()),
                    im_alpha: Some(alpha1.im.clone()),
                    linear: false,
                    note: json!({
                        "remainder": "long-phase dominated",
                        "re_alpha": format_sci(&alpha1.re, digits(ctx)),
                    }),
                })
            } else {
                Ok(Plan {
                    model,
                    power: Some(Float::with_val(prec, 1)),
                    im_alpha: None,
                    linear: true,
                    note: json!({
                        "remainder": "short-phase dominated",
                        "re_alpha": format_sci(&alpha1.re, digits(ctx)),
                    }),
                })
            }
        }
        KernelSpec::CompoundPoisson { measure: EnvMeasure::Dirac { .. }, .. } => {
            let (power, w) = dirac_exponents(kernel, ctx)?;
            let (fitted, info) = estimate_model(model, table, window, ctx)?;
            Ok(Plan {
                model: fitted.truncated(1),
                power: Some(Float::with_val(prec, -&power)),
                im_alpha: Some(w),
                linear: false,
                note: info,
            })
        }
        _ => {
            let a = tail_threshold(kernel, prec).ok_or_else(|| inapplicable(kernel))?;
            let roots = solve_tail_indicial(&a, 1, ctx)?;
            let alpha1 = roots.first_complex().cloned().ok_or_else(|| {
                Error::RootSolverFailure("tail indicial equation returned no complex root".into())
            })?;
            let (fitted, info) = estimate_model(model, table, window, ctx)?;
            Ok(Plan {
                model: fitted.truncated(2),
                power: Some(Float::with_val(prec, &alpha1.re + 1u32)),
                im_alpha: Some(alpha1.im.clone()),
                linear: false,
                note: info,
            })
        }
    }
}

pub fn oscillations(r: &Resolved, opts: &OscillationOptions) -> Result<()> {
    let kernel = r.kernel()?;
    let ctx = &r.ctx;
    let n = r.n_or(10_000)?;
    let to = opts.to.unwrap_or(n);
    let from = opts.from.unwrap_or_else(|| default_from(to));
    if from < 1 || from >= to || to > n {
        return Err(usage(format!("need 1 <= --from < --to <= --n, got {from}, {to}, {n}")));
    }
    if opts.samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    let table = compute_table(&kernel, r.route, n, ctx)?;
    let plan = plan(&table, (from, to), ctx)?;
    let power = match &opts.power {
        Some(text) => Some(parse_real(text, ctx.bits())?),
        None => plan.power.clone(),
    };
    let mode = match (opts.mode.as_deref(), power) {
        (Some("difference"), _) => ResidualMode::Difference,
        (Some("ratio"), _) => ResidualMode::Ratio,
        (Some("normalized"), Some(p)) | (None, Some(p)) => ResidualMode::NormalizedDifference { power: p },
        (Some("normalized"), None) => {
            return Err(usage("normalized mode needs --power for this kernel"));
        }
        (None, None) => ResidualMode::Difference,
        (Some(other), _) => return Err(usage(format!("unknown mode `{other}`"))),
    };
    let sample = if plan.linear {
        linear_sample(from, to, ((to - from) / opts.samples).max(1))
    } else {
        geometric_sample(from, to, opts.samples)
    };
    let report = residual_report(&table, &plan.model, mode, &sample)?;
    write_atomic(r.out.as_deref(), report.to_csv(digits(ctx)).as_bytes())?;
    if let Some(path) = &opts.fit_out {
        let fit = match (&plan.im_alpha, &report.mode) {
            (Some(im), ResidualMode::NormalizedDifference { .. }) => Some(fit_log_oscillation(&report, im)?),
            _ => None,
        };
        let doc = json!({
            "kernel": kernel.to_string(),
            "n": n,
            "digits": ctx.digits(),
            "residual": report.mode.describe(),
            "model": plan.model.to_json(digits(ctx)),
            "constants": plan.note,
            "fit": fit.map(|f| f.to_json(digits(ctx))),
            "max_abs_residual": format_sci(&report.max_abs(), 6),
        });
        write_atomic(Some(path), &json_bytes(&doc))?;
    }
    Ok(())
}

pub fn julia(r: &Resolved, params: &JuliaParams) -> Result<()> {
    let image = render_julia(params)?;
    write_atomic(r.out.as_deref(), &image.to_pgm())
}
