use rug::Float;

use super::*;
use crate::asymptotics::{
    binomial_constant, binomial_model, psi_sequence, solve_tail_indicial, tail_poisson_model,
    two_term_compound_poisson, AsymptoticModel, ConstantStatus, ModelTerm, PeriodicFactor,
};
use crate::coefficients::{
    compute_table, product_form, product_form_phi, recurrence_binomial, recurrence_dirac_poisson,
    recurrence_tail_poisson, Route,
};
use crate::kernels::{KernelSpec, QSpec};
use crate::precision::PrecisionContext;
use crate::scalar::{Coeff, Complex};

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

fn f(x: f64) -> Float {
    Float::with_val(ctx().bits(), x)
}

fn kernel(s: &str) -> KernelSpec {
    KernelSpec::parse(s, ctx().bits()).unwrap()
}

fn cp_model(q: &[f64]) -> (QSpec, AsymptoticModel) {
    let c = ctx();
    let q = QSpec::polynomial(q, c.bits());
    let pf = product_form(&q, &c).unwrap();
    let m = two_term_compound_poisson(&q, &pf, &c).unwrap();
    (q, m)
}

#[test]
fn identity_kernel_residuals_vanish() {
    let c = ctx();
    let table = compute_table(&kernel("cpoisson:q=[1]"), Some(Route::ProductForm), 200, &c).unwrap();
    let (_, model) = cp_model(&[1.0]);
    let rep = residual_report(&table, &model, ResidualMode::Difference, &linear_sample(1, 200, 7)).unwrap();
    assert!(rep.max_abs() < 1e-50);
    let csv = rep.to_csv(10);
    assert!(csv.starts_with("n,value\n1,"));
}

#[test]
fn quadratic_ratio_improves_with_n() {
    let c = ctx();
    let (q, model) = cp_model(&[1.0, 1.0]);
    let pf = product_form(&q, &c).unwrap();
    let table = product_form_phi(&pf, 10_000, &c).unwrap();
    let rep = residual_report(&table, &model, ResidualMode::Ratio, &[100, 1000, 10_000]).unwrap();
    let err: Vec<f64> = rep.residuals.iter().map(|r| (r.to_f64() - 1.0).abs()).collect();
    assert!(err[0] > err[1] && err[1] > err[2], "{err:?}");
    assert!(err[2] < 1e-3);
    // The second term helps.
    let one = residual_report(&table, &model.truncated(1), ResidualMode::Ratio, &[100, 1000, 10_000]).unwrap();
    for (a, b) in rep.residuals.iter().zip(&one.residuals) {
        assert!((a.to_f64() - 1.0).abs() < (b.to_f64() - 1.0).abs());
    }
}

#[test]
fn kernel_mismatch_is_reported() {
    let c = ctx();
    let table = recurrence_binomial(2, 50, &c);
    let (_, model) = cp_model(&[1.0]);
    let err = residual_report(&table, &model, ResidualMode::Difference, &[1, 2]).unwrap_err();
    assert!(matches!(err, crate::Error::KernelMismatch { .. }));
}

#[test]
fn binomial_normalized_residual_bounded() {
    let c = ctx();
    let table = recurrence_binomial(2, 20_000, &c);
    let model = binomial_model(2, &c);
    let mode = ResidualMode::NormalizedDifference { power: f(1.0) };
    let early = residual_report(&table, &model, mode.clone(), &linear_sample(2000, 2090, 1)).unwrap();
    let late = residual_report(&table, &model, mode, &linear_sample(19_000, 19_090, 1)).unwrap();
    let e: Vec<f64> = early.residuals.iter().map(|r| r.to_f64()).collect();
    let l: Vec<f64> = late.residuals.iter().map(|r| r.to_f64()).collect();
    assert!(late.max_abs() < 4.0);
    // Period (m+1)^2 = 9: one period later the pattern repeats closely, and
    // it sits near the pattern seen ten times earlier (2000 = 2, 19000 = 1
    // mod 9).
    for k in 0..72 {
        assert!((l[k] - l[k + 9]).abs() < 0.01, "k={k}");
    }
    for k in 0..9 {
        assert!((l[k + 1] - e[k]).abs() < 0.2, "k={k}");
    }
}

fn synthetic_report(b1: f64, b2: f64, im: &Float, lo: usize, hi: usize) -> ResidualReport {
    let c = ctx();
    let p = c.bits();
    let model = AsymptoticModel::new(
        kernel("binomial:m=1"),
        Some(f(1.0)),
        ConstantStatus::Exact,
        vec![ModelTerm::scaled(Complex::zero(p), Complex::zero(p))],
    );
    let n_values = geometric_sample(lo, hi, 200);
    let residuals = n_values
        .iter()
        .map(|&n| {
            let t = Float::with_val(p, n).ln() * im;
            let (s, co) = t.sin_cos(Float::new(p));
            co * b1 + s * b2
        })
        .collect();
    ResidualReport { n_values, residuals, mode: ResidualMode::NormalizedDifference { power: f(0.0) }, model }
}

#[test]
fn oscillation_fit_recovers_synthetic_coefficients() {
    let c = ctx();
    let im = f(4.38645551777719);
    let rep = synthetic_report(2.0, -1.0, &im, 100, 100_000);
    let fit = fit_log_oscillation(&rep, &im).unwrap();
    let tol = c.tolerance(20);
    assert!(Float::with_val(c.bits(), &fit.b1 - 2u32).abs() < tol);
    assert!(Float::with_val(c.bits(), &fit.b2 + 1u32).abs() < tol);
    assert!(fit.rms_error < tol);
    assert_eq!(fit.window, (100, 100_000));
    let again = fit_log_oscillation(&rep, &im).unwrap();
    assert_eq!(fit.b1, again.b1);
}

#[test]
fn oscillation_fit_needs_a_full_log_period() {
    let im = f(4.38645551777719);
    // e^(2 pi / 4.386) is about 4.19.
    let rep = synthetic_report(2.0, -1.0, &im, 1000, 4000);
    assert!(matches!(fit_log_oscillation(&rep, &im), Err(crate::Error::FitDegenerate(_))));
    let rep = synthetic_report(2.0, -1.0, &im, 1000, 4300);
    assert!(fit_log_oscillation(&rep, &im).is_ok());
}

#[test]
fn estimate_constant_identity_kernel() {
    let c = ctx();
    let table = compute_table(&kernel("cpoisson:q=[1]"), Some(Route::ProductForm), 2000, &c).unwrap();
    let est = estimate_constant(&table, &f(1.0), (10, 2000), &EstimateOptions::default()).unwrap();
    assert!(Float::with_val(c.bits(), &est.value - 1u32).abs() < 1e-40);
}

#[test]
fn estimate_constant_density_invariance() {
    let c = ctx();
    for q in [vec![1.0, 1.0], vec![1.0, 0.0, 1.0]] {
        let (qs, model) = cp_model(&q);
        let pf = product_form(&qs, &c).unwrap();
        let table = product_form_phi(&pf, 5000, &c).unwrap();
        let power = model.terms[0].power.re.clone();
        let opts = EstimateOptions::default();
        let a = estimate_constant(&table, &power, (500, 5000), &opts).unwrap();
        let dense = EstimateOptions { density: 800, ..opts };
        let b = estimate_constant(&table, &power, (500, 5000), &dense).unwrap();
        let rel = Float::with_val(c.bits(), &a.value / &b.value) - 1u32;
        assert!(rel.abs() < 1e-8);
        // Close to C, with the 1/n correction the only bias.
        let cc = model.leading.as_ref().unwrap();
        let rel = Float::with_val(c.bits(), &a.value / cc) - 1u32;
        assert!(rel.abs() < 1e-3);
    }
}

#[test]
fn estimate_constant_rejects_bad_windows() {
    let c = ctx();
    let table = recurrence_binomial(1, 100, &c);
    assert!(matches!(
        estimate_constant(&table, &f(1.0), (50, 200), &EstimateOptions::default()),
        Err(crate::Error::WindowTooNarrow(_))
    ));
    let opts = EstimateOptions { im_alpha: Some(f(4.386)), ..Default::default() };
    assert!(matches!(
        estimate_constant(&table, &f(1.0), (50, 100), &opts),
        Err(crate::Error::WindowTooNarrow(_))
    ));
}

#[test]
fn dirac_constant_on_short_window() {
    let c = PrecisionContext::new(30).unwrap();
    let table = recurrence_dirac_poisson(&Float::with_val(c.bits(), 1), 8000, &c).unwrap();
    let ln2 = Float::with_val(c.bits(), 2).ln();
    let power = ln2.clone().recip() - 1u32;
    let im = crate::scalar::pi(c.bits()) * 2u32 / &ln2;
    let opts = EstimateOptions { im_alpha: Some(im), ..Default::default() };
    let est = estimate_constant(&table, &power, (500, 8000), &opts).unwrap();
    assert!((est.value.to_f64() / 1.25435781474 - 1.0).abs() < 1e-2, "{}", est.value);
    assert_eq!(est.periods, Some(4));
}

#[test]
fn tail_fit_on_short_table() {
    let c = PrecisionContext::new(30).unwrap();
    let a = Float::with_val(c.bits(), 2);
    let table = recurrence_tail_poisson(&a, 6000, &c).unwrap();
    let roots = solve_tail_indicial(&a, 1, &c).unwrap();
    let model = tail_poisson_model(&a, &roots).unwrap();
    let fit = fit_model_constants(&table, &model, &geometric_sample(1000, 6000, 300)).unwrap();
    let cc = fit.model.leading.clone().unwrap();
    assert!((cc.to_f64() / 1.281889848285 - 1.0).abs() < 1e-5, "{cc}");
    assert_eq!(fit.model.leading_status, ConstantStatus::Estimated);
    assert!(fit.model.eval(5000, c.bits()).is_ok());
}

#[test]
fn psi_empirical_matches_sequence() {
    let c = ctx();
    for (m, tol) in [(1u32, 1e-3), (2, 1e-3)] {
        let table = recurrence_binomial(m, 30_010, &c);
        let emp = psi_empirical(&table, m, 30_000, &c).unwrap();
        let psi = psi_sequence(m, &c);
        for (k, v) in emp.iter().enumerate() {
            let exact = psi.value(30_000 + k as u64);
            let d = Float::with_val(c.bits(), v - exact).abs().to_f64();
            assert!(d < tol, "m={m} k={k} d={d}");
        }
        let shifted = psi_empirical(&table, m, 30_000 + m as usize + 1, &c).unwrap();
        for (a, b) in emp.iter().zip(&shifted) {
            assert!(Float::with_val(c.bits(), a - b).abs().to_f64() < tol);
        }
    }
    let _ = binomial_constant(1, &c);
}

#[test]
fn julia_fixed_points_and_escape() {
    use super::julia::escape_count;
    assert_eq!(escape_count(0.0, 0.0, 100, 50.0), 100);
    assert_eq!(escape_count(1.0, 0.0, 100, 50.0), 100);
    assert!(escape_count(10.0, 0.0, 100, 50.0) <= 3);
    let one = render_julia(&JuliaParams {
        width: 1,
        height: 1,
        re_range: (-0.1, 0.1),
        im_range: (-0.1, 0.1),
        max_iter: 50,
        escape_radius: 50.0,
    })
    .unwrap();
    assert_eq!(one.to_pgm().last(), Some(&255));
}

#[test]
fn julia_symmetry_and_determinism() {
    let params = JuliaParams { width: 61, height: 40, ..Default::default() };
    let img = render_julia(&params).unwrap();
    for j in 0..params.height {
        for i in 0..params.width {
            assert_eq!(img.count(i, j), img.count(i, params.height - 1 - j));
        }
    }
    assert!(img.filled() > 0);
    assert!(img.filled() < params.width * params.height);
    assert_eq!(render_julia(&params).unwrap().to_pgm(), img.to_pgm());
    let pgm = img.to_pgm();
    assert!(pgm.starts_with(b"P5\n61 40\n255\n"));
    assert_eq!(pgm.len(), b"P5\n61 40\n255\n".len() + 61 * 40);
}

#[test]
fn julia_rejects_bad_parameters() {
    let bad = JuliaParams { escape_radius: 1.0, ..Default::default() };
    assert!(render_julia(&bad).is_err());
    let bad = JuliaParams { width: 0, ..Default::default() };
    assert!(render_julia(&bad).is_err());
}

#[test]
fn convergence_identity_kernel_and_cross_route() {
    let lo = PrecisionContext::new(40).unwrap();
    let hi = PrecisionContext::new(80).unwrap();
    let k = kernel("cpoisson:q=[1]");
    let a = compute_table(&k, Some(Route::ProductForm), 300, &lo).unwrap();
    let b = compute_table(&k, Some(Route::ProductForm), 300, &hi).unwrap();
    let rep = convergence_report(&[a, b], 2).unwrap();
    assert!(rep.pairs[0].min_digits >= 38.0);
    assert_eq!(rep.pairs[0].stable_prefix, 300);

    let c = ctx();
    let k = kernel("cpoisson:q=[1,1]");
    let closed = compute_table(&k, Some(Route::ClosedForm), 200, &c).unwrap();
    let fixed = compute_table(&k, Some(Route::FixedPoint), 200, &c).unwrap();
    let rep = convergence_report(&[closed, fixed], 15).unwrap();
    assert!(rep.pairs[0].min_digits >= (c.digits() - 15) as f64);
    assert!(rep.unstable.is_empty());
}

#[test]
fn convergence_rejects_mixed_kernels() {
    let c = ctx();
    let a = recurrence_binomial(1, 10, &c);
    let b = recurrence_binomial(2, 10, &c);
    assert!(convergence_report(&[a, b], 5).is_err());
}

#[test]
fn periodic_factor_value_wraps() {
    let p = PeriodicFactor::DiscretePeriodic { period: 3, samples: vec![f(1.0), f(2.0), f(3.0)] };
    assert_eq!(p.value(4, 64).unwrap(), 1);
    assert_eq!(p.value(3, 64).unwrap(), 3);
}
