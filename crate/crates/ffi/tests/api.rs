use std::ffi::{CStr, CString};
use std::ptr;

use contention_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ctn_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn build(n: u32, eps: f64) -> *mut CtnCodebook {
    let mut cb = ptr::null_mut();
    assert_eq!(
        unsafe { ctn_codebook_build(n, eps, &mut cb) },
        CtnStatus::Ok
    );
    assert!(!cb.is_null());
    cb
}

#[test]
fn codebook_round_trip() {
    let cb = build(2, 1e-4);
    unsafe {
        let mut len = 0;
        assert_eq!(ctn_codebook_len(cb, &mut len), CtnStatus::Ok);
        assert!(len >= 7);

        let expected = [(0.5, "1"), (0.75, "e1"), (0.25, "01"), (0.875, "ee1")];
        for (i, (y, word)) in expected.into_iter().enumerate() {
            let mut e = CtnEntry::default();
            assert_eq!(ctn_codebook_entry(cb, i, &mut e), CtnStatus::Ok);
            assert_eq!(e.threshold, y);
            assert_eq!(e.depth, word.len());

            let mut buf = [0 as std::ffi::c_char; 16];
            let mut needed = 0;
            assert_eq!(
                ctn_codebook_codeword(cb, i, buf.as_mut_ptr(), buf.len(), &mut needed),
                CtnStatus::Ok
            );
            assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), word);
            assert_eq!(needed, word.len() + 1);
        }

        let mut idx = 0;
        assert_eq!(ctn_codebook_resolve(cb, 0.55, 0.9, &mut idx), CtnStatus::Ok);
        assert_eq!(idx, 1);

        let mut mass = -1.0;
        assert_eq!(ctn_codebook_residual_mass(cb, &mut mass), CtnStatus::Ok);
        assert!((0.0..1e-4).contains(&mass));
        ctn_codebook_free(cb);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut cb = ptr::null_mut();
        assert_eq!(
            ctn_codebook_build(1, 1e-4, &mut cb),
            CtnStatus::InvalidArgument
        );
        assert!(cb.is_null());
        assert!(last_error().contains("1 users"), "{}", last_error());
        assert_eq!(
            ctn_codebook_build(2, 0.0, &mut cb),
            CtnStatus::InvalidArgument
        );
        assert_eq!(
            ctn_codebook_build(2, 1e-3, ptr::null_mut()),
            CtnStatus::NullPointer
        );

        let mut len = 0;
        assert_eq!(
            ctn_codebook_len(ptr::null(), &mut len),
            CtnStatus::NullPointer
        );

        let cb = build(2, 1e-3);
        let mut e = CtnEntry::default();
        assert_eq!(ctn_codebook_entry(cb, 1 << 30, &mut e), CtnStatus::NotFound);
        let mut needed = 0;
        assert_eq!(
            ctn_codebook_codeword(cb, 3, ptr::null_mut(), 0, &mut needed),
            CtnStatus::BufferTooSmall
        );
        assert_eq!(needed, 4);
        let mut idx = 0;
        assert_eq!(
            ctn_codebook_resolve(cb, 0.5 - 1e-9, 0.5 + 1e-9, &mut idx),
            CtnStatus::Ok
        );
        assert_eq!(
            ctn_codebook_resolve(cb, 0.9999999, 0.99999995, &mut idx),
            CtnStatus::NotFound
        );
        ctn_codebook_free(cb);
        ctn_codebook_free(ptr::null_mut());

        let mut y = 0.0;
        assert_eq!(ctn_optimal_threshold(0.0, 1.0, 2, &mut y), CtnStatus::Ok);
        assert_eq!(y, 0.5);
        assert_eq!(last_error(), "");
        assert_eq!(
            ctn_success_prob(0.0, 1.0, 2, 1.5, &mut y),
            CtnStatus::InvalidArgument
        );
        assert_eq!(ctn_region_mass(0.0, 1.0, 2, &mut y), CtnStatus::Ok);
        assert_eq!(y, 1.0);
    }
}

#[test]
fn simulate_through_c_strings() {
    let ch = CString::new("iid").unwrap();
    let osa = CString::new("osa").unwrap();
    let bad = CString::new("greedy").unwrap();
    let mut a = CtnBatchStats::default();
    let mut b = CtnBatchStats::default();
    unsafe {
        assert_eq!(
            ctn_simulate(ch.as_ptr(), 2, osa.as_ptr(), 20_000, 64, 9, &mut a),
            CtnStatus::Ok
        );
        assert_eq!(
            ctn_simulate(ch.as_ptr(), 2, osa.as_ptr(), 20_000, 64, 9, &mut b),
            CtnStatus::Ok
        );
        assert_eq!(a.mean_delay_charged, b.mean_delay_charged);
        assert!((a.mean_delay_charged - 2.0).abs() < 5.0 * a.delay_std_error);
        assert_eq!(
            ctn_simulate(ch.as_ptr(), 2, bad.as_ptr(), 10, 64, 9, &mut a),
            CtnStatus::InvalidArgument
        );
        assert_eq!(
            ctn_simulate(ptr::null(), 2, osa.as_ptr(), 10, 64, 9, &mut a),
            CtnStatus::NullPointer
        );
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ctn_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
