use proptest::prelude::*;
use rug::ops::Pow;
use rug::Float;

use super::*;
use crate::coefficients::{product_form, recurrence_binomial};
use crate::gamma::gamma_real;
use crate::kernels::QSpec;
use crate::precision::PrecisionContext;
use crate::scalar::{Coeff, Complex};

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

fn f(x: impl Into<f64>) -> Float {
    Float::with_val(ctx().bits(), x.into())
}

fn rat(p: i64, q: i64) -> Float {
    Float::with_val(ctx().bits(), p) / q
}

fn close(a: &Float, b: &Float, tol: f64) -> bool {
    let d = Float::with_val(a.prec(), a - b).abs();
    d.to_f64() <= tol
}

fn poly(c: &[f64]) -> QSpec {
    QSpec::polynomial(c, ctx().bits())
}

#[test]
fn a1_examples() {
    let c = ctx();
    assert!(close(&expansion_coefficient_a1(&poly(&[1.0, 1.0]), &c).unwrap(), &rat(-5, 9), 1e-55));
    assert!(close(&expansion_coefficient_a1(&poly(&[1.0]), &c).unwrap(), &rat(-1, 1), 1e-55));
}

#[test]
fn second_coefficients_match_examples() {
    let c = ctx();
    assert!(close(&second_coefficient(&poly(&[1.0, 1.0]), &c).unwrap(), &rat(5, 27), 1e-55));
    assert!(close(&second_coefficient(&poly(&[1.0, 0.0, 1.0]), &c).unwrap(), &rat(5, 16), 1e-55));
    assert!(second_coefficient(&poly(&[1.0]), &c).unwrap().is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn a1_reproduces_second_coefficient(coeffs in proptest::collection::vec(0u32..5, 1..5), lead in 1u32..4) {
        let mut c: Vec<f64> = coeffs.iter().map(|&x| x as f64).collect();
        c[0] = lead as f64;
        let q = poly(&c);
        let ctx = ctx();
        let direct = second_coefficient(&q, &ctx).unwrap();
        let via = second_coefficient_via_a1(&q, &ctx).unwrap();
        prop_assert!(close(&direct, &via, 1e-50), "{} vs {}", direct, via);
    }
}

#[test]
fn two_root_quadratic_model() {
    let c = ctx();
    let q = poly(&[1.0, 1.0]);
    let pf = product_form(&q, &c).unwrap();
    let model = two_term_compound_poisson(&q, &pf, &c).unwrap();
    let expected = (f(1.5).pow(&rat(4, 3)) * gamma_real(&rat(5, 3)).unwrap()).recip();
    assert!(close(model.leading.as_ref().unwrap(), &expected, 1e-55));
    assert!(close(&model.terms[0].power.re, &rat(2, 3), 1e-58));
    assert!(close(&model.terms[1].power.re, &rat(-1, 3), 1e-58));
    assert!(close(&model.terms[1].constant.re, &rat(5, 27), 1e-58));
    assert_eq!(model.leading_status, ConstantStatus::Exact);
}

#[test]
fn cubic_constant_from_conjugate_pair() {
    let c = ctx();
    let p = c.bits();
    let q = poly(&[1.0, 0.0, 1.0]);
    let pf = product_form(&q, &c).unwrap();
    let k = cp_leading_constant(&pf, &c).unwrap();
    assert!(k.im.clone().abs() < 1e-40);
    assert!(k.re > 0);
    // (2/sqrt(pi)) |((5 + sqrt7 i)/4)^((-35 - sqrt7 i)/28)|^2
    let s7 = f(7).sqrt();
    let base = Complex::new(rat(5, 4), Float::with_val(p, &s7 / 4u32));
    let e = Complex::new(rat(-35, 28), Float::with_val(p, -&s7) / 28u32);
    let w = base.pow(&e).abs();
    let expected = Float::with_val(p, w.square()) * 2u32 / crate::scalar::pi(p).sqrt();
    assert!(close(&k.re, &expected, 1e-55), "{} vs {}", k.re, expected);
    let model = two_term_compound_poisson(&q, &pf, &c).unwrap();
    assert!(close(&model.terms[0].power.re, &rat(1, 2), 1e-58));
    assert!(close(&model.terms[1].constant.re, &rat(5, 16), 1e-58));
}

#[test]
fn identity_kernel_model_is_exact() {
    let c = ctx();
    let q = poly(&[1.0]);
    let pf = product_form(&q, &c).unwrap();
    let model = two_term_compound_poisson(&q, &pf, &c).unwrap();
    for n in [1u64, 7, 1000] {
        assert!(close(&model.eval(n, c.bits()).unwrap(), &f(n as f64), 1e-50));
    }
}

#[test]
fn binomial_roots_match_reported_values() {
    let c = ctx();
    let r3 = solve_binomial_indicial(3, 1, &c).unwrap();
    let z = r3.first_complex().unwrap();
    assert!((z.re.to_f64() - 1.069829398878181).abs() < 1e-12);
    assert!((z.im.to_f64() - 5.361490035297498).abs() < 1e-12);
    let r4 = solve_binomial_indicial(4, 1, &c).unwrap();
    let z = r4.first_complex().unwrap();
    assert!((z.re.to_f64() - 0.870774007425338).abs() < 1e-12);
    assert!((z.im.to_f64() - 4.612162886836734).abs() < 1e-12);
    // -1 and 0, then the conjugate pair.
    assert_eq!(r4.roots.len(), 4);
    assert!(r4.roots[0].re == -1);
    assert!(r4.roots[1].re.is_zero());
    assert!(r4.roots[2].im < 0);
    assert!(r4.max_residual() < c.tolerance(10));
}

#[test]
fn binomial_root_ordering_and_m1_dominance() {
    let c = ctx();
    let rs = solve_binomial_indicial(1, 4, &c).unwrap();
    let upper = rs.upper_complex();
    assert_eq!(upper.len(), 4);
    for w in upper.windows(2) {
        assert!(w[0].re <= w[1].re);
    }
    // For m = 1 every complex root lies beyond the short-phase threshold 1.
    assert!(upper[0].re > 1);
    assert!(rs.max_residual() < c.tolerance(10));
}

#[test]
fn alpha_one_is_not_a_root() {
    let c = ctx();
    for m in 1..=6u32 {
        let eq = IndicialEquation::Binomial { m };
        let r = eq.residual(&Complex::one(c.bits()));
        assert!(r > 0.1, "m={m}");
        let minus_one = Complex::from_real(f(-1));
        assert!(eq.residual(&minus_one) < c.tolerance(10));
    }
}

#[test]
fn only_minus_one_in_left_half_strip() {
    for m in 1..=6u32 {
        let eq = IndicialEquation::Binomial { m };
        let n = count_roots_in_rectangle(&eq, &Rectangle::new(-10.0, -1e-6, -50.0, 50.0)).unwrap();
        assert_eq!(n, 1, "m={m}");
        // Near the real axis only -1 and 0.
        let n = count_roots_in_rectangle(&eq, &Rectangle::new(-3.0, 0.5, -0.25, 0.25)).unwrap();
        assert_eq!(n, 2, "m={m}");
    }
}

#[test]
fn tail_roots_match_reported_values() {
    let c = ctx();
    let rs = solve_tail_indicial(&f(2), 1, &c).unwrap();
    let real = rs.real_roots();
    assert_eq!(real.len(), 1);
    assert!((real[0].re.to_f64() + 2.469874943242969).abs() < 1e-12);
    let z = rs.first_complex().unwrap();
    assert!((z.re.to_f64() + 1.469486150158083).abs() < 1e-12);
    assert!((z.im.to_f64() - 4.38645551777719).abs() < 1e-12);
    for r in &rs.residuals {
        assert!(*r < 1e-40);
    }
    assert_eq!(rs.roots.len(), 3);
}

#[test]
fn tail_roots_general_threshold() {
    let c = ctx();
    for a in [0.5, 1.0, 3.0] {
        let rs = solve_tail_indicial(&f(a), 3, &c).unwrap();
        assert_eq!(rs.upper_complex().len(), 3);
        let real = rs.real_roots()[0].re.clone();
        for z in rs.upper_complex() {
            assert!(z.re > real, "a={a}");
        }
        assert!(rs.max_residual() < c.tolerance(10));
    }
}

#[test]
fn tail_c1_reduces_to_closed_form_at_two() {
    let c = ctx();
    let rs = solve_tail_indicial(&f(2), 1, &c).unwrap();
    let al = rs.real_roots()[0].re.clone();
    let p = c.bits();
    let one = Float::with_val(p, 1);
    let expected = Float::with_val(p, &one + &al)
        * Float::with_val(p, &one - Float::with_val(p, &al * 2u32))
        * Float::with_val(p, &al + 2u32)
        / (Float::with_val(p, &one + Float::with_val(p, &al * 2u32)) * 6u32);
    assert!(close(&tail_c1(&f(2), &al), &expected, 1e-55));
    let d = tail_expansion_d(&f(2), &al);
    let d_expected = Float::with_val(p, Float::with_val(p, &al * 4u32) - 1u32) * Float::with_val(p, &al + 1u32)
        / (Float::with_val(p, Float::with_val(p, &al * 2u32) + 1u32) * 3u32);
    assert!(close(&d, &d_expected, 1e-55));
}

#[test]
fn tail_model_shape() {
    let c = ctx();
    let rs = solve_tail_indicial(&f(2), 1, &c).unwrap();
    let model = tail_poisson_model(&f(2), &rs).unwrap();
    assert_eq!(model.terms.len(), 3);
    assert!((model.terms[0].power.re.to_f64() - 1.469874943242969).abs() < 1e-12);
    assert!(model.eval(100, c.bits()).is_err());
    let full = model.clone().with_estimated_constant(f(1.28)).with_oscillation(f(0.1), f(0.2));
    assert!(full.eval(100, c.bits()).is_ok());
    for w in model.terms.windows(2) {
        assert!(w[0].power.re >= w[1].power.re);
    }
    let json = model.to_json(20);
    assert_eq!(json["leading"]["status"], "unknown");
    assert_eq!(json["terms"][2]["periodic"]["kind"], "log");
}

#[test]
fn binomial_constant_values() {
    let c = ctx();
    let four = f(4);
    let m1 = Float::with_val(c.bits(), 2u32 - four.ln()).recip();
    assert!(close(&binomial_constant(1, &c), &m1, 1e-55));
    assert!((binomial_constant(1, &c).to_f64() - 1.629_445_676_635_465).abs() < 1e-12);
    let m2 = f(4) / (Float::with_val(c.bits(), 2u32 - f(3).ln()) * 3u32);
    assert!(close(&binomial_constant(2, &c), &m2, 1e-55));
    assert!((binomial_constant(1_000_000, &c).to_f64() - 1.0).abs() < 1e-4);
}

#[test]
fn psi_sequence_properties() {
    let c = ctx();
    let psi = psi_sequence(1, &c);
    let l2 = f(2).ln();
    let expected = (Float::with_val(c.bits(), &l2 * 3u32) - 2u32) / (Float::with_val(c.bits(), &l2 * 2u32) - 1u32);
    assert!(close(&psi.samples[1], &expected, 1e-55));
    assert!((psi.samples[1].to_f64() - 0.205_650_275_218_955).abs() < 1e-12);
    assert!(close(&psi.samples[0], &Float::with_val(c.bits(), &expected - 1u32), 1e-55));
    for m in 1..=6u32 {
        let psi = psi_sequence(m, &c);
        assert_eq!(psi.period(), m as usize + 1);
        assert!(psi_balance_defect(&psi) < c.tolerance(10));
        for n in 1..50u64 {
            assert_eq!(psi.value(n), psi.value(n + m as u64 + 1));
        }
        // Increments over one period: m rises of 1/m and one drop of 1.
        let mut total = Float::new(c.bits());
        for n in 2..=(m as u64 + 2) {
            total += Float::with_val(c.bits(), psi.value(n) - psi.value(n - 1));
        }
        assert!(Float::with_val(c.bits(), total.abs_ref()) < c.tolerance(10));
    }
}

#[test]
fn binomial_model_tracks_recurrence() {
    let c = ctx();
    let table = recurrence_binomial(2, 3000, &c);
    let model = binomial_model(2, &c);
    let worst = |lo: usize| {
        (lo..lo + 9)
            .map(|n| {
                let v = model.eval(n as u64, c.bits()).unwrap();
                Float::with_val(c.bits(), table.phi(n) - &v).abs().to_f64()
            })
            .fold(0.0, f64::max)
    };
    let early = worst(300);
    let late = worst(2990);
    assert!(late < early);
    assert!(late < 1e-2, "{late}");
    let leading = model.truncated(1).eval(10, c.bits()).unwrap();
    assert!(close(&leading, &(binomial_constant(2, &c) * 10u32), 1e-55));
}

#[test]
fn root_set_csv_header() {
    let c = ctx();
    let rs = solve_tail_indicial(&f(2), 1, &c).unwrap();
    let csv = rs.to_csv(20);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re,im,residual"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn dirac_exponents_at_unit_rate() {
    let c = ctx();
    let k = KernelSpec::parse("cpoisson:q=[1];measure=dirac:1", c.bits()).unwrap();
    let (p, w) = dirac_exponents(&k, &c).unwrap();
    let ln2 = Float::with_val(c.bits(), rug::float::Constant::Log2);
    assert!(close(&p, &(Float::with_val(c.bits(), ln2.clone().recip()) - 1u32), 1e-55));
    let w_expected = Float::with_val(c.bits(), crate::scalar::pi(c.bits()) * 2u32) / &ln2;
    assert!(close(&w, &w_expected, 1e-55));
}

#[test]
fn dirac_exponents_general_q() {
    // q = z + z^2: q(1) = 2, q'(1) = 3, so kappa = 2 r0 / ln(1 + 3 r0).
    let c = ctx();
    let k = KernelSpec::parse("cpoisson:q=[1,1];measure=dirac:0.5", c.bits()).unwrap();
    let (p, _) = dirac_exponents(&k, &c).unwrap();
    let expected = Float::with_val(c.bits(), Float::with_val(c.bits(), 2.5).ln().recip()) - 1u32;
    assert!(close(&p, &expected, 1e-55));
}

#[test]
fn dirac_model_needs_constants() {
    let c = ctx();
    let k = KernelSpec::parse("cpoisson:q=[1];measure=dirac:1", c.bits()).unwrap();
    let m = dirac_poisson_model(&k, &c).unwrap();
    assert_eq!(m.terms.len(), 2);
    assert!(matches!(m.eval(100, c.bits()), Err(crate::Error::ModelIncomplete(_))));
    let m = m.with_estimated_constant(f(1.25)).with_oscillation(f(0.0), f(0.0));
    let ln2 = Float::with_val(c.bits(), rug::float::Constant::Log2);
    let p = Float::with_val(c.bits(), ln2.recip()) - 1u32;
    let expected = Float::with_val(c.bits(), Float::with_val(c.bits(), 64).pow(&p)) * 1.25f64;
    assert!(close(&m.eval(64, c.bits()).unwrap(), &expected, 1e-50));
    let full = KernelSpec::parse("cpoisson:q=[1];measure=full", c.bits()).unwrap();
    assert!(dirac_poisson_model(&full, &c).is_err());
}
