use std::ffi::{c_char, CStr, CString};
use std::ptr;

use configcount_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        let n = cc_last_error_message(buf.as_mut_ptr(), buf.len());
        assert!(n <= buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn table(q: usize, m: usize, f: impl Fn(usize) -> f64) -> *mut CcFieldFunction {
    let values: Vec<f64> = (0..q.pow(m as u32)).map(f).collect();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { cc_field_function_new(q, m, values.as_ptr(), values.len(), &mut h) }, CcStatus::Ok);
    h
}

#[test]
fn constant_family_counts() {
    unsafe {
        let f = table(3, 4, |_| 0.5);
        let mut fam = ptr::null_mut();
        assert_eq!(cc_family_uniform(2, 2, f, &mut fam), CcStatus::Ok);
        assert_eq!(cc_family_edge_count(fam), 4);
        let mut m = 0.0;
        assert_eq!(cc_eval_m(fam, &mut m), CcStatus::Ok);
        assert!((m - 0.0625).abs() < 1e-12);
        let mut b = 0.0;
        assert_eq!(cc_box_norm(f, 2, &mut b), CcStatus::Ok);
        assert!((b - 0.5).abs() < 1e-12);
        let ts = [1u64, 2];
        let mut n = 0.0;
        assert_eq!(cc_eval_n(fam, ts.as_ptr(), 2, &mut n), CcStatus::Ok);
        assert!(n > 0.0);
        let mut mb = 0.0;
        assert_eq!(cc_min_box_norm(fam, &mut mb), CcStatus::Ok);
        assert!((mb - 0.5).abs() < 1e-12);
        cc_family_free(fam);
        cc_field_function_free(f);
    }
}

#[test]
fn family_from_handles_and_regularity() {
    unsafe {
        let fs: Vec<*mut CcFieldFunction> =
            (0..4).map(|e| table(3, 4, move |i| if (i * 7 + e) % 3 == 0 { 1.0 } else { -1.0 })).collect();
        let ptrs: Vec<*const CcFieldFunction> = fs.iter().map(|&p| p as *const _).collect();
        let mut fam = ptr::null_mut();
        assert_eq!(cc_family_new(2, 2, 3, ptrs.as_ptr(), 4, &mut fam), CcStatus::Ok);
        let mut reg = ptr::null_mut();
        assert_eq!(cc_weak_regularize(fam, 0.5, &mut reg), CcStatus::Ok);
        assert!(cc_regularization_max_residual(reg) <= 0.5);
        assert!(cc_regularization_energy(reg) >= 0.0);
        let _ = cc_regularization_iterations(reg);
        cc_regularization_free(reg);
        assert_eq!(cc_family_new(2, 2, 3, ptrs.as_ptr(), 3, &mut fam), CcStatus::DimensionMismatch);
        cc_family_free(fam);
        for f in fs {
            cc_field_function_free(f);
        }
    }
}

#[test]
fn errors_and_null_handles() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(cc_box_norm(ptr::null(), 2, &mut out), CcStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut a = 0.0;
        let mut b = 0.0;
        assert_eq!(cc_sphere_decay(9, 1, &mut a, &mut b), CcStatus::NotPrime);
        assert!(last_error().contains('9'));
        assert_eq!(cc_sphere_decay(13, 2, &mut a, &mut b), CcStatus::Ok);
        assert!(b <= 3.0);
        assert_eq!(last_error(), "");
        let v = [2.0f64; 9];
        let mut h = ptr::null_mut();
        assert_eq!(cc_field_function_new(3, 2, v.as_ptr(), 9, &mut h), CcStatus::Ok);
        assert_eq!(cc_box_norm(h, 1, &mut out), CcStatus::Ok);
        cc_field_function_free(h);
        assert_eq!(cc_field_function_new(3, 2, v.as_ptr(), 8, &mut h), CcStatus::DimensionMismatch);
        assert!(!CStr::from_ptr(cc_version()).to_bytes().is_empty());
    }
}

#[test]
fn simplex_counts() {
    unsafe {
        let pts = [0i64, 0, 0, 0, 0, 1, 0, 0, 0, 0];
        let mut s = ptr::null_mut();
        assert_eq!(cc_simplex_new(5, 2, pts.as_ptr(), pts.len(), &mut s), CcStatus::Ok);
        let mut count = 0u64;
        assert_eq!(cc_count_copies(s, 2, 1, &mut count), CcStatus::Ok);
        assert_eq!(count, 40);
        cc_simplex_free(s);

        let json = CString::new(r#"{"n": 5, "points": [[0,0,0,0,0],[1,0,0,0,0],[0,1,0,0,0]]}"#).unwrap();
        assert_eq!(cc_simplex_from_json(json.as_ptr(), &mut s), CcStatus::Ok);
        assert_eq!(cc_count_copies(s, 4, 1, &mut count), CcStatus::Ok);
        assert_eq!(count, 880);
        cc_simplex_free(s);

        let degenerate = [0i64, 0, 1, 0, 2, 0];
        assert_eq!(cc_simplex_new(2, 3, degenerate.as_ptr(), 6, &mut s), CcStatus::DegenerateSimplex);
    }
}

#[test]
fn lattice_set_increment() {
    unsafe {
        let corner = [0i64; 2];
        let members: Vec<u8> = (0..36).map(|i| ((i / 6) % 2 == 0 && (i % 6) % 2 == 0) as u8).collect();
        let mut s = ptr::null_mut();
        assert_eq!(cc_lattice_set_new(2, corner.as_ptr(), 6, members.as_ptr(), 36, &mut s), CcStatus::Ok);
        assert!((cc_lattice_set_density(s) - 0.25).abs() < 1e-12);
        let mut u = CcUniformity::default();
        let mut residue = [9i64; 2];
        assert_eq!(cc_uniformity_test(s, 0.5, 2, &mut u, residue.as_mut_ptr()), CcStatus::Ok);
        assert!(!u.is_uniform);
        assert_eq!((u.max_relative, residue), (1.0, [0, 0]));
        let mut inc = std::mem::MaybeUninit::<CcIncrement>::uninit();
        assert_eq!(cc_density_increment(s, 0.5, 2, inc.as_mut_ptr()), CcStatus::Ok);
        let inc = inc.assume_init();
        assert_eq!((inc.steps, inc.status), (1, CcIncrementStatus::Uniform));
        assert_eq!(inc.final_density, 1.0);
        cc_lattice_set_free(s);
    }
}

#[test]
fn q_epsilon_string() {
    unsafe {
        let mut needed = 0usize;
        assert_eq!(cc_q_epsilon(1.0, 10.0, 1000, ptr::null_mut(), 0, &mut needed), CcStatus::BufferTooSmall);
        assert_eq!(needed, 5);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(cc_q_epsilon(1.0, 10.0, 1000, buf.as_mut_ptr(), buf.len(), &mut needed), CcStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "2520");
        assert_eq!(cc_q_epsilon(0.1, 10.0, 1000, buf.as_mut_ptr(), buf.len(), &mut needed), CcStatus::CapExceeded);
    }
}
