use std::ffi::{CStr, CString};
use std::ptr;

use ratiolim_ffi::*;

fn last_error() -> String {
    let p = rl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn compute(kernel: &str, route: Option<&str>, n: usize, digits: u32) -> Result<*mut RlRatioTable, RlStatus> {
    let k = CString::new(kernel).unwrap();
    let r = route.map(|r| CString::new(r).unwrap());
    let mut out = ptr::null_mut();
    let status = unsafe {
        rl_table_compute(k.as_ptr(), r.as_ref().map_or(ptr::null(), |r| r.as_ptr()), n, digits, &mut out)
    };
    if status == RlStatus::Ok {
        Ok(out)
    } else {
        assert!(out.is_null(), "out-pointer must stay untouched on failure");
        Err(status)
    }
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { rl_string_free(p) };
    s
}

#[test]
fn version_matches_the_package() {
    let v = unsafe { CStr::from_ptr(rl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn identity_kernel_table() {
    let t = compute("cpoisson:q=[1];measure=full", Some("product"), 50, 40).unwrap();
    assert_eq!(unsafe { rl_table_len(t) }, 50);
    for n in [1usize, 7, 50] {
        let mut v = 0.0;
        assert_eq!(unsafe { rl_table_get(t, n, &mut v) }, RlStatus::Ok);
        assert_eq!(v, n as f64);
    }
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { rl_table_get_string(t, 3, 5, &mut s) }, RlStatus::Ok);
    assert_eq!(take_string(s), "3.0000e0");
    unsafe { rl_table_free(t) };
}

#[test]
fn binomial_table_values_and_residual() {
    let t = compute("binomial:m=2", None, 300, 50).unwrap();
    let mut v = 0.0;
    assert_eq!(unsafe { rl_table_get(t, 2, &mut v) }, RlStatus::Ok);
    assert_eq!(v, 2.5);
    let mut r = 1.0;
    assert_eq!(unsafe { rl_table_schroder_residual(t, &mut r) }, RlStatus::Ok);
    assert!(r < 1e-40, "residual {r}");
    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { rl_table_to_csv(t, &mut csv) }, RlStatus::Ok);
    let csv = take_string(csv);
    assert!(csv.starts_with("n,phi,route,digits\n1,"));
    assert_eq!(csv.lines().count(), 301);
    unsafe { rl_table_free(t) };
}

#[test]
fn status_codes_follow_the_error_class() {
    assert_eq!(compute("cpoisson:q=[1];color=red", None, 10, 30), Err(RlStatus::InvalidInput));
    assert!(last_error().contains("color"));
    assert_eq!(compute("binomial:m=2", Some("closed"), 10, 30), Err(RlStatus::Inapplicable));
    assert!(last_error().contains("not applicable"));
    assert_eq!(compute("binomial:m=2", Some("sideways"), 10, 30), Err(RlStatus::InvalidInput));
    assert_eq!(compute("binomial:m=2", None, 0, 30), Err(RlStatus::OutOfRange));
    assert_eq!(compute("binomial:m=2", None, 10, 0), Err(RlStatus::InvalidInput));

    let bad = [0xffu8, 0xfe, 0];
    let mut out = ptr::null_mut();
    let s = unsafe { rl_table_compute(bad.as_ptr().cast(), ptr::null(), 5, 30, &mut out) };
    assert_eq!(s, RlStatus::InvalidUtf8);
}

#[test]
fn null_arguments_are_rejected() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rl_table_compute(ptr::null(), ptr::null(), 5, 30, &mut out) }, RlStatus::NullPointer);
    let k = CString::new("binomial:m=1").unwrap();
    assert_eq!(
        unsafe { rl_table_compute(k.as_ptr(), ptr::null(), 5, 30, ptr::null_mut()) },
        RlStatus::NullPointer
    );
    let mut v = 0.0;
    assert_eq!(unsafe { rl_table_get(ptr::null(), 1, &mut v) }, RlStatus::NullPointer);
    assert_eq!(unsafe { rl_table_len(ptr::null()) }, 0);
    assert_eq!(unsafe { rl_roots_len(ptr::null()) }, 0);
    unsafe {
        rl_table_free(ptr::null_mut());
        rl_roots_free(ptr::null_mut());
        rl_string_free(ptr::null_mut());
    }
}

#[test]
fn table_indices_are_one_based_and_checked() {
    let t = compute("binomial:m=1", None, 10, 30).unwrap();
    let mut v = -1.0;
    assert_eq!(unsafe { rl_table_get(t, 0, &mut v) }, RlStatus::OutOfRange);
    assert_eq!(unsafe { rl_table_get(t, 11, &mut v) }, RlStatus::OutOfRange);
    assert_eq!(v, -1.0);
    assert!(last_error().contains("1..=10"));
    unsafe { rl_table_free(t) };
}

#[test]
fn binomial_roots() {
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { rl_roots_binomial(3, 1, 40, &mut set) }, RlStatus::Ok);
    let len = unsafe { rl_roots_len(set) };
    assert_eq!(len, 4);
    let roots: Vec<(f64, f64)> = (0..len)
        .map(|i| {
            let (mut re, mut im) = (0.0, 0.0);
            assert_eq!(unsafe { rl_roots_get(set, i, &mut re, &mut im) }, RlStatus::Ok);
            (re, im)
        })
        .collect();
    assert_eq!(roots[0], (-1.0, 0.0));
    assert_eq!(roots[1], (0.0, 0.0));
    let upper = roots.iter().find(|z| z.1 > 0.0).unwrap();
    assert!((upper.0 - 1.069829398878181).abs() < 1e-12);
    assert!((upper.1 - 5.361490035297498).abs() < 1e-12);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { rl_roots_get(set, len, &mut re, &mut im) }, RlStatus::OutOfRange);
    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { rl_roots_to_csv(set, 20, &mut csv) }, RlStatus::Ok);
    assert!(take_string(csv).starts_with("re,im,residual\n"));
    unsafe { rl_roots_free(set) };
    assert_eq!(unsafe { rl_roots_binomial(0, 1, 40, &mut set) }, RlStatus::Inapplicable);
}

#[test]
fn tail_roots_from_a_rational_rate() {
    let a = CString::new("2").unwrap();
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { rl_roots_tail(a.as_ptr(), 1, 40, &mut set) }, RlStatus::Ok);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { rl_roots_get(set, 0, &mut re, &mut im) }, RlStatus::Ok);
    assert!((re + 2.469874943242969).abs() < 1e-12 && im == 0.0);
    unsafe { rl_roots_free(set) };
    let bad = CString::new("two").unwrap();
    assert_eq!(unsafe { rl_roots_tail(bad.as_ptr(), 1, 40, &mut set) }, RlStatus::InvalidInput);
}

#[test]
fn errors_are_per_thread() {
    assert_eq!(compute("binomial:m=x", None, 5, 30), Err(RlStatus::InvalidInput));
    std::thread::spawn(|| assert!(rl_last_error().is_null())).join().unwrap();
    assert!(!rl_last_error().is_null());
}
