use std::ffi::{c_char, CStr, CString};
use std::ptr;

use quasistable::fixtures::{COMPLEMENTARY_TABLE_JSON, M1_JSON};
use quasistable_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a returned string.
fn take(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { qs_string_free(p) };
    s
}

fn last_error() -> String {
    let p = qs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn load(json: &str) -> *mut QsMarket {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { qs_market_from_json(cs(json).as_ptr(), &mut m) }, QsStatus::Ok);
    m
}

#[test]
fn check_and_blocking() {
    let m = load(M1_JSON);
    let mut c = QsCheck::default();
    let st = unsafe { qs_check(m, ptr::null(), ptr::null(), cs("b,c").as_ptr(), &mut c) };
    assert_eq!(st, QsStatus::Ok);
    assert_eq!(
        c,
        QsCheck {
            is_allocation: true,
            individually_rational: true,
            quasi_stable: true,
            stable: true
        }
    );

    let mut s = ptr::null_mut();
    let st = unsafe { qs_blocking_contracts(m, ptr::null(), ptr::null(), cs("a,b").as_ptr(), &mut s) };
    assert_eq!(st, QsStatus::Ok);
    assert_eq!(take(s), "c");

    // Restricting to firm f2 leaves only b and d.
    let st = unsafe { qs_check(m, ptr::null(), cs("f2").as_ptr(), cs("a").as_ptr(), &mut c) };
    assert_eq!(st, QsStatus::Ok);
    assert!(!c.is_allocation);
    unsafe { qs_market_free(m) };
}

#[test]
fn deferred_acceptance_trace() {
    let m = load(M1_JSON);
    let mut t = ptr::null_mut();
    let st = unsafe {
        qs_da_run(
            m,
            ptr::null(),
            ptr::null(),
            cs("").as_ptr(),
            cs("single").as_ptr(),
            0,
            &mut t,
        )
    };
    assert_eq!(st, QsStatus::Ok);
    assert_eq!(unsafe { qs_trace_len(t) }, 2);
    let steps: Vec<String> = (0..=2)
        .map(|i| {
            let mut s = ptr::null_mut();
            assert_eq!(unsafe { qs_trace_allocation(t, i, &mut s) }, QsStatus::Ok);
            take(s)
        })
        .collect();
    assert_eq!(steps, vec!["", "b", "b,c"]);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { qs_trace_outcome(t, &mut s) }, QsStatus::Ok);
    assert_eq!(take(s), "b,c");
    assert_eq!(unsafe { qs_trace_to_text(t, &mut s) }, QsStatus::Ok);
    assert!(take(s).starts_with("strategy single\n"));
    assert_eq!(unsafe { qs_trace_allocation(t, 3, &mut s) }, QsStatus::Input);

    let mut wp = ptr::null_mut();
    assert_eq!(
        unsafe { qs_worker_pessimal(m, ptr::null(), ptr::null(), &mut wp) },
        QsStatus::Ok
    );
    assert_eq!(take(wp), "b,c");

    let st = unsafe { qs_da_run(m, ptr::null(), ptr::null(), cs("a,b").as_ptr(), ptr::null(), 0, &mut t) };
    assert_eq!(st, QsStatus::Precondition);
    let st = unsafe {
        qs_da_run(
            m,
            ptr::null(),
            ptr::null(),
            cs("").as_ptr(),
            cs("bogus").as_ptr(),
            0,
            &mut t,
        )
    };
    assert_eq!(st, QsStatus::Input);
    unsafe {
        qs_trace_free(t);
        qs_market_free(m);
    }
}

#[test]
fn lattice_operations() {
    let m = load(M1_JSON);
    let mut s = ptr::null_mut();
    let st = unsafe {
        qs_join(
            m,
            ptr::null(),
            ptr::null(),
            cs("a,d").as_ptr(),
            cs("b,c").as_ptr(),
            &mut s,
        )
    };
    assert_eq!(st, QsStatus::Ok);
    assert_eq!(take(s), "a,d");
    let st = unsafe { qs_tarski(m, ptr::null(), ptr::null(), cs("b").as_ptr(), &mut s) };
    assert_eq!(st, QsStatus::Ok);
    assert_eq!(take(s), "b,c");

    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { qs_enumerate(m, ptr::null(), ptr::null(), &mut json) },
        QsStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["allocations"], 16);
    assert_eq!(v["stable"], serde_json::json!([["a", "d"], ["b", "c"]]));

    let mut passed = false;
    assert_eq!(
        unsafe { qs_certify(m, ptr::null(), ptr::null(), &mut passed) },
        QsStatus::Ok
    );
    assert!(passed);
    unsafe { qs_market_free(m) };
}

#[test]
fn preference_verification() {
    let mut failed = usize::MAX;
    let m = load(M1_JSON);
    assert_eq!(unsafe { qs_verify_prefs(m, &mut failed) }, QsStatus::Ok);
    assert_eq!(failed, 0);
    let c = load(COMPLEMENTARY_TABLE_JSON);
    assert_eq!(unsafe { qs_verify_prefs(c, &mut failed) }, QsStatus::Ok);
    assert_eq!(failed, 3);
    unsafe {
        qs_market_free(m);
        qs_market_free(c);
    }
}

#[test]
fn json_and_dual_round_trip() {
    let m = load(M1_JSON);
    let mut d = ptr::null_mut();
    let mut dd = ptr::null_mut();
    unsafe {
        assert_eq!(qs_market_dualize(m, &mut d), QsStatus::Ok);
        assert_eq!(qs_market_dualize(d, &mut dd), QsStatus::Ok);
    }
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(qs_market_to_json(m, &mut a), QsStatus::Ok);
        assert_eq!(qs_market_to_json(dd, &mut b), QsStatus::Ok);
    }
    let (a, b) = (take(a), take(b));
    assert_eq!(a, b);
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { qs_worker_pessimal(d, ptr::null(), ptr::null(), &mut s) },
        QsStatus::Ok
    );
    assert_eq!(take(s), "a,d");
    assert_eq!(unsafe { qs_market_num_contracts(m) }, 4);
    unsafe {
        qs_market_free(m);
        qs_market_free(d);
        qs_market_free(dd);
    }
}

#[test]
fn generation_is_seeded() {
    let mut p = qs_gen_params_default();
    p.n_workers = 3;
    p.n_firms = 3;
    p.seed = 42;
    let json = |p: &QsGenParams| {
        let mut m = ptr::null_mut();
        assert_eq!(unsafe { qs_gen(p, &mut m) }, QsStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { qs_market_to_json(m, &mut s) }, QsStatus::Ok);
        unsafe { qs_market_free(m) };
        take(s)
    };
    assert_eq!(json(&p), json(&p));
    let mut q = p;
    q.seed = 43;
    assert_ne!(json(&p), json(&q));

    let mut m = ptr::null_mut();
    q.family = 9;
    assert_eq!(unsafe { qs_gen(&q, &mut m) }, QsStatus::Input);
    q.family = QsFamily::Mixed as u32;
    assert_eq!(unsafe { qs_gen(&q, &mut m) }, QsStatus::Ok);
    unsafe { qs_market_free(m) };
}

#[test]
fn failures_set_last_error() {
    let mut m = ptr::null_mut();
    let st = unsafe { qs_market_from_json(cs("{\n  \"workers\": [\n").as_ptr(), &mut m) };
    assert_eq!(st, QsStatus::Format);
    assert!(last_error().starts_with("line 3, column 0"));
    assert!(m.is_null());

    assert_eq!(
        unsafe { qs_market_from_json(ptr::null(), &mut m) },
        QsStatus::NullPointer
    );
    assert_eq!(
        unsafe { qs_market_load(cs("/nonexistent/m.json").as_ptr(), &mut m) },
        QsStatus::Io
    );

    let mk = load(M1_JSON);
    assert!(qs_last_error().is_null());
    let mut c = QsCheck::default();
    let st = unsafe { qs_check(mk, ptr::null(), ptr::null(), cs("zz").as_ptr(), &mut c) };
    assert_eq!(st, QsStatus::Input);
    assert!(last_error().contains("\"zz\""));
    let st = unsafe { qs_check(mk, cs("f1").as_ptr(), ptr::null(), cs("").as_ptr(), &mut c) };
    assert_eq!(st, QsStatus::Input);
    assert_eq!(
        unsafe { qs_check(mk, ptr::null(), ptr::null(), cs("").as_ptr(), ptr::null_mut()) },
        QsStatus::NullPointer
    );
    let bad = [0xffu8, 0];
    let st = unsafe { qs_check(mk, ptr::null(), ptr::null(), bad.as_ptr().cast(), &mut c) };
    assert_eq!(st, QsStatus::InvalidUtf8);
    unsafe { qs_market_free(mk) };

    unsafe {
        qs_market_free(ptr::null_mut());
        qs_trace_free(ptr::null_mut());
        qs_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { qs_market_num_contracts(ptr::null()) }, 0);
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(qs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
