use std::ffi::CStr;
use std::ptr;

use sepdec::channels::{choi_of_holevo, dephasing_form, identity_choi};
use sepdec::BipartiteMatrix;
use sepdec_ffi::*;

const BELL: [f64; 16] = [
    0.5, 0.0, 0.0, 0.5, //
    0.0, 0.0, 0.0, 0.0, //
    0.0, 0.0, 0.0, 0.0, //
    0.5, 0.0, 0.0, 0.5,
];

/// ½ P_e1⊗P_e1 + ½ P_h⊗P_h with h = (e1+e2)/√2.
fn mr_entries() -> Vec<f64> {
    let a = [[1.0, 0.0], [0.0, 0.0]];
    let b = [[0.5, 0.5], [0.5, 0.5]];
    let mut out = Vec::with_capacity(16);
    for r in 0..4 {
        for c in 0..4 {
            let (i, k, j, l) = (r / 2, r % 2, c / 2, c % 2);
            out.push(0.5 * a[i][j] * a[k][l] + 0.5 * b[i][j] * b[k][l]);
        }
    }
    out
}

fn matrix(m: usize, n: usize, re: &[f64], im: Option<&[f64]>) -> *mut SepdecMatrix {
    let mut h = ptr::null_mut();
    let st = unsafe {
        sepdec_matrix_new(m, n, re.as_ptr(), im.map_or(ptr::null(), |v| v.as_ptr()), &mut h)
    };
    assert_eq!(st, SepdecStatus::Ok, "{}", last_error());
    h
}

fn from_bipartite(t: &BipartiteMatrix) -> *mut SepdecMatrix {
    let entries = t.mat().row_major();
    let re: Vec<f64> = entries.iter().map(|z| z.re).collect();
    let im: Vec<f64> = entries.iter().map(|z| z.im).collect();
    matrix(t.m(), t.n(), &re, Some(&im))
}

fn last_error() -> String {
    let need = unsafe { sepdec_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; need];
    unsafe { sepdec_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn decomposition_round_trip() {
    let re = mr_entries();
    let t = matrix(2, 2, &re, None);
    let (mut m, mut n) = (0, 0);
    assert_eq!(unsafe { sepdec_matrix_dims(t, &mut m, &mut n) }, SepdecStatus::Ok);
    assert_eq!((m, n), (2, 2));

    let mut dec = ptr::null_mut();
    assert_eq!(unsafe { sepdec_decompose(t, SepdecSide::B, ptr::null(), &mut dec) }, SepdecStatus::Ok);
    let p = unsafe { sepdec_decomposition_term_count(dec) };
    assert_eq!(p, 2);

    let mut sum = [0.0; 16];
    for g in 0..p {
        let (mut ar, mut ai, mut br, mut bi) = ([0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]);
        let st = unsafe {
            sepdec_decomposition_term(dec, g, ar.as_mut_ptr(), ai.as_mut_ptr(), br.as_mut_ptr(), bi.as_mut_ptr())
        };
        assert_eq!(st, SepdecStatus::Ok);
        assert!(ai.iter().chain(&bi).all(|v| v.abs() < 1e-12));
        for r in 0..4 {
            for c in 0..4 {
                sum[r * 4 + c] += ar[(r / 2) * 2 + c / 2] * br[(r % 2) * 2 + c % 2];
            }
        }
    }
    let err = sum.iter().zip(&re).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err}");

    let mut residual = 1.0;
    assert_eq!(unsafe { sepdec_decomposition_residual(dec, &mut residual) }, SepdecStatus::Ok);
    assert!(residual < 1e-10);
    let mut unique = false;
    assert_eq!(unsafe { sepdec_decomposition_is_unique(dec, &mut unique) }, SepdecStatus::Ok);
    assert!(unique);

    let mut buf = [0.0; 4];
    let st = unsafe {
        sepdec_decomposition_term(dec, 2, buf.as_mut_ptr(), buf.as_mut_ptr(), buf.as_mut_ptr(), buf.as_mut_ptr())
    };
    assert_eq!(st, SepdecStatus::OutOfRange);
    assert!(last_error().contains("out of range"));

    unsafe {
        sepdec_decomposition_free(dec);
        sepdec_matrix_free(t);
    }
}

#[test]
fn rejections_carry_status_and_message() {
    let t = matrix(2, 2, &BELL, None);
    let mut dec = ptr::null_mut();
    let st = unsafe { sepdec_decompose(t, SepdecSide::B, ptr::null(), &mut dec) };
    assert_eq!(st, SepdecStatus::NotBIndependent);
    assert!(dec.is_null());
    assert!(last_error().contains("block (1,2)"), "{}", last_error());

    let st = unsafe { sepdec_decompose(t, SepdecSide::A, ptr::null(), &mut dec) };
    assert_eq!(st, SepdecStatus::NotAIndependent);

    let mut ppt = true;
    assert_eq!(unsafe { sepdec_ppt(t, &mut ppt) }, SepdecStatus::Ok);
    assert!(!ppt);
    let mut v = SepdecMarginalVerdict::Separable;
    assert_eq!(unsafe { sepdec_marginal_rank(t, &mut v) }, SepdecStatus::Ok);
    assert_eq!(v, SepdecMarginalVerdict::NotMarginalRank);

    let neg = [-1.0, 0.0, 0.0, 0.0];
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sepdec_matrix_new(1, 2, neg.as_ptr(), ptr::null(), &mut h) }, SepdecStatus::Ok);
    assert_eq!(unsafe { sepdec_decompose(h, SepdecSide::B, ptr::null(), &mut dec) }, SepdecStatus::NotPsd);
    unsafe {
        sepdec_matrix_free(h);
        sepdec_matrix_free(t);
    }
}

#[test]
fn invalid_arguments() {
    let mut h = ptr::null_mut();
    let re = [1.0];
    assert_eq!(unsafe { sepdec_matrix_new(1, 1, ptr::null(), ptr::null(), &mut h) }, SepdecStatus::NullPointer);
    assert_eq!(unsafe { sepdec_matrix_new(0, 1, re.as_ptr(), ptr::null(), &mut h) }, SepdecStatus::InvalidArgument);
    assert_eq!(unsafe { sepdec_matrix_new(1, 1, re.as_ptr(), ptr::null(), ptr::null_mut()) }, SepdecStatus::NullPointer);
    assert!(h.is_null());

    let mut dec = ptr::null_mut();
    assert_eq!(
        unsafe { sepdec_decompose(ptr::null(), SepdecSide::B, ptr::null(), &mut dec) },
        SepdecStatus::NullPointer
    );
    assert_eq!(unsafe { sepdec_decomposition_term_count(ptr::null()) }, 0);

    let t = matrix(1, 1, &re, None);
    let mut tol = sepdec_tolerances_default();
    tol.cluster = -1.0;
    assert_eq!(unsafe { sepdec_decompose(t, SepdecSide::B, &tol, &mut dec) }, SepdecStatus::InvalidArgument);
    unsafe {
        sepdec_matrix_free(t);
        sepdec_matrix_free(ptr::null_mut());
        sepdec_decomposition_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates_and_terminates() {
    let mut h = ptr::null_mut();
    unsafe { sepdec_matrix_new(1, 1, ptr::null(), ptr::null(), &mut h) };
    let full = last_error();
    assert_eq!(full, "re is null");
    let mut buf = [b'x' as std::ffi::c_char; 4];
    let need = unsafe { sepdec_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(need, full.len() + 1);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "re ");

    let one = [1.0];
    let t = matrix(1, 1, &one, None);
    assert_eq!(last_error(), "");
    unsafe { sepdec_matrix_free(t) };
}

#[test]
fn channel_classification() {
    let deph = from_bipartite(&choi_of_holevo(&dephasing_form(3)).unwrap());
    let ident = from_bipartite(&identity_choi(2));
    let mut k = SepdecChannelKind::None;
    assert_eq!(unsafe { sepdec_detect_qc(deph, &mut k) }, SepdecStatus::Ok);
    assert_eq!(k, SepdecChannelKind::Qc);
    assert_eq!(unsafe { sepdec_detect_cq(deph, &mut k) }, SepdecStatus::Ok);
    assert_eq!(k, SepdecChannelKind::Cq);
    assert_eq!(unsafe { sepdec_detect_qc(ident, &mut k) }, SepdecStatus::Ok);
    assert_eq!(k, SepdecChannelKind::None);
    unsafe {
        sepdec_matrix_free(deph);
        sepdec_matrix_free(ident);
    }
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_header_links() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libsepdec_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include "sepdec.h"
#include <stdio.h>
int main(void) {
    double re[16] = {0.5,0,0,0.5, 0,0,0,0, 0,0,0,0, 0.5,0,0,0.5};
    double id[4] = {1,0,0,0};
    SepdecMatrix *t = NULL;
    SepdecDecomposition *d = NULL;
    if (sepdec_matrix_new(2, 2, re, NULL, &t) != SEPDEC_STATUS_OK) return 1;
    if (sepdec_decompose(t, SEPDEC_SIDE_B, NULL, &d) != SEPDEC_STATUS_NOT_B_INDEPENDENT) return 2;
    sepdec_matrix_free(t);
    if (sepdec_matrix_new(1, 2, id, NULL, &t) != SEPDEC_STATUS_OK) return 3;
    SepdecTolerances tol = sepdec_tolerances_default();
    if (sepdec_decompose(t, SEPDEC_SIDE_B, &tol, &d) != SEPDEC_STATUS_OK) return 4;
    printf("%zu\n", sepdec_decomposition_term_count(d));
    sepdec_decomposition_free(d);
    sepdec_matrix_free(t);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let status = std::process::Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1\n");
    std::fs::remove_dir_all(dir).ok();
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("sepdec-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
