use std::ffi::CStr;
use std::ptr;

use funkvol_ffi::*;

fn square() -> *mut FunkvolPolytope {
    let coords = [1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0];
    let mut p = ptr::null_mut();
    let s = unsafe { funkvol_polytope_new(coords.as_ptr(), 4, 2, &mut p) };
    assert_eq!(s, FunkvolStatus::Ok);
    p
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let len = unsafe { funkvol_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_owned();
    assert_eq!(len, msg.len());
    msg
}

#[test]
fn square_through_the_c_interface() {
    let p = square();
    unsafe {
        assert_eq!(funkvol_polytope_dim(p), 2);
        assert_eq!(funkvol_polytope_num_vertices(p), 4);
        assert_eq!(funkvol_polytope_num_flags(p), 8);

        let (mut v, mut err) = (0.0, 0.0);
        assert_eq!(funkvol_ball_volume(p, ptr::null(), 2f64.ln(), 1e-9, &mut v, &mut err), FunkvolStatus::Ok);
        let exact = funkvol_hanner_ball_volume(2, 2f64.ln());
        assert!((v - exact).abs() <= 1e-9 && err >= 0.0);
        assert!((exact - 2.0 * 3f64.ln().powi(2) / std::f64::consts::PI).abs() < 1e-14);

        let mut c = 0.0;
        assert_eq!(funkvol_c0(p, &mut c), FunkvolStatus::Ok);
        assert_eq!(c, 2.0);
        assert_eq!(funkvol_c1(p, &mut c), FunkvolStatus::Ok);
        assert!((c - 4.0 * 2f64.ln()).abs() < 1e-12);
        let x = [0.2, -0.1];
        assert_eq!(funkvol_c1_at_point(p, x.as_ptr(), &mut c), FunkvolStatus::Ok);
        assert!(c > 4.0 * 2f64.ln());

        let mut s = [f64::NAN; 2];
        let mut res = f64::NAN;
        assert_eq!(funkvol_santalo_infinity(p, 1e-10, s.as_mut_ptr(), &mut res), FunkvolStatus::Ok);
        assert!(s[0].abs() < 1e-12 && s[1].abs() < 1e-12 && res <= 1e-10);
        funkvol_polytope_free(p);
    }
}

#[test]
fn simplex_recursion_matches_segment_formula() {
    let mut v = 0.0;
    let r: f64 = 1.3;
    assert_eq!(unsafe { funkvol_simplex_volume(1, r, 1e-10, &mut v) }, FunkvolStatus::Ok);
    assert!((v - (2.0 * r.exp() - 1.0).ln()).abs() < 1e-12);
    assert_eq!(unsafe { funkvol_simplex_volume(0, r, 1e-10, &mut v) }, FunkvolStatus::InvalidArgument);
    assert!(funkvol_hanner_ball_volume(2, -1.0).is_nan());
}

#[test]
fn errors_are_reported() {
    unsafe {
        let flat = [1.0, 0.0, 0.0, 1.0];
        let mut p = ptr::null_mut();
        assert_eq!(funkvol_polytope_new(flat.as_ptr(), 2, 2, &mut p), FunkvolStatus::Geometry);
        assert!(p.is_null());
        assert!(last_error().contains("degenerate"));

        let sq = square();
        let mut v = 0.0;
        let outside = [3.0, 0.0];
        assert_eq!(funkvol_ball_volume(sq, outside.as_ptr(), 1.0, 0.0, &mut v, ptr::null_mut()), FunkvolStatus::Geometry);
        assert!(last_error().contains("interior"));
        assert_eq!(funkvol_ball_volume(sq, ptr::null(), 1.0, 1e-300, &mut v, ptr::null_mut()), FunkvolStatus::Quadrature);
        assert_eq!(funkvol_ball_volume(ptr::null(), ptr::null(), 1.0, 0.0, &mut v, ptr::null_mut()), FunkvolStatus::NullPointer);
        assert_eq!(funkvol_c0(sq, ptr::null_mut()), FunkvolStatus::NullPointer);
        assert_eq!(funkvol_polytope_dim(ptr::null()), 0);
        assert_eq!(funkvol_last_error_message(ptr::null_mut(), 0), last_error().len());
        funkvol_polytope_free(sq);
        funkvol_polytope_free(ptr::null_mut());

        let s = CStr::from_ptr(funkvol_status_string(FunkvolStatus::Quadrature));
        assert_eq!(s.to_str().unwrap(), "quadrature tolerance not reached");
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/funkvol.h")).unwrap();
    for name in [
        "typedef struct FunkvolPolytope FunkvolPolytope;",
        "FUNKVOL_STATUS_QUADRATURE = 4",
        "funkvol_polytope_new",
        "funkvol_polytope_free",
        "funkvol_ball_volume",
        "funkvol_c1_at_point",
        "funkvol_santalo_infinity",
        "funkvol_simplex_volume",
        "funkvol_last_error_message",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
