//! C ABI for `sepdec`.
//!
//! Objects are opaque handles created by `*_new`/`sepdec_decompose` and
//! released with the matching `*_free`. Every function returns a
//! [`SepdecStatus`]; on failure the message is available through
//! [`sepdec_last_error_message`] on the same thread. Matrices cross the
//! boundary as separate row-major real and imaginary `double` arrays.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use sepdec::channels::{detect_cq, detect_qc, ChannelKind};
use sepdec::decompose::{
    independent_form, is_unique_pure_decomposition, marginal_rank_separability, ppt_check,
    CanonicalDecomposition, MarginalRankVerdict, Side,
};
use sepdec::{BipartiteMatrix, ComplexMatrix, Error, Tolerances, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepdecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPsd = 3,
    NotBIndependent = 4,
    NotAIndependent = 5,
    ClusterAmbiguity = 6,
    Numerical = 7,
    OutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepdecSide {
    A = 0,
    B = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepdecMarginalVerdict {
    Separable = 0,
    Entangled = 1,
    NotMarginalRank = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepdecChannelKind {
    Qc = 0,
    Cq = 1,
    OrthogonalOnly = 2,
    None = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepdecTolerances {
    pub herm: f64,
    pub psd: f64,
    pub rank: f64,
    pub normal: f64,
    pub commute: f64,
    pub cluster: f64,
    pub recon: f64,
}

impl From<Tolerances> for SepdecTolerances {
    fn from(t: Tolerances) -> Self {
        Self {
            herm: t.herm,
            psd: t.psd,
            rank: t.rank,
            normal: t.normal,
            commute: t.commute,
            cluster: t.cluster,
            recon: t.recon,
        }
    }
}

impl From<SepdecTolerances> for Tolerances {
    fn from(t: SepdecTolerances) -> Self {
        Self {
            herm: t.herm,
            psd: t.psd,
            rank: t.rank,
            normal: t.normal,
            commute: t.commute,
            cluster: t.cluster,
            recon: t.recon,
        }
    }
}

/// A bipartite matrix on `C^m ⊗ C^n`.
pub struct SepdecMatrix {
    inner: BipartiteMatrix,
}

/// A canonical decomposition `Σ A_γ ⊗ B_γ`.
pub struct SepdecDecomposition {
    inner: CanonicalDecomposition,
    residual: f64,
    unique: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> SepdecStatus {
    match e {
        Error::NotPsd { .. } | Error::NotHermitian { .. } => SepdecStatus::NotPsd,
        Error::NotBIndependent(_) => SepdecStatus::NotBIndependent,
        Error::NotAIndependent(_) => SepdecStatus::NotAIndependent,
        Error::ClusterAmbiguity { .. } => SepdecStatus::ClusterAmbiguity,
        Error::Numerical(_) => SepdecStatus::Numerical,
        _ => SepdecStatus::InvalidArgument,
    }
}

/// Runs `f`, records errors and converts panics into [`SepdecStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (SepdecStatus, String)>) -> SepdecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SepdecStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SepdecStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SepdecStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SepdecStatus, String) {
    (SepdecStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SepdecStatus, String)> {
    // SAFETY: the caller passes a handle obtained from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), (SepdecStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the API contract, valid for writes.
    unsafe { p.write(v) };
    Ok(())
}

unsafe fn copy_matrix(
    m: &ComplexMatrix,
    re: *mut f64,
    im: *mut f64,
) -> Result<(), (SepdecStatus, String)> {
    if re.is_null() || im.is_null() {
        return Err(null("output buffer"));
    }
    let entries = m.row_major();
    // SAFETY: the caller provides buffers of at least rows·cols doubles.
    let (re, im) = unsafe {
        (
            std::slice::from_raw_parts_mut(re, entries.len()),
            std::slice::from_raw_parts_mut(im, entries.len()),
        )
    };
    for (k, z) in entries.iter().enumerate() {
        re[k] = z.re;
        im[k] = z.im;
    }
    Ok(())
}

#[no_mangle]
pub extern "C" fn sepdec_tolerances_default() -> SepdecTolerances {
    Tolerances::default().into()
}

/// Creates an `mn × mn` matrix from row-major parts. `im` may be null for a
/// real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `(m·n)²` doubles; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_matrix_new(
    m: usize,
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut SepdecMatrix,
) -> SepdecStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let d = m
            .checked_mul(n)
            .and_then(|d| d.checked_mul(d).map(|len| (d, len)))
            .filter(|&(d, _)| d > 0);
        let (d, len) = d.ok_or_else(|| (SepdecStatus::InvalidArgument, "dimensions must be positive".to_string()))?;
        // SAFETY: the caller guarantees `len` readable doubles.
        let re = unsafe { std::slice::from_raw_parts(re, len) };
        let im = (!im.is_null()).then(|| unsafe { std::slice::from_raw_parts(im, len) });
        let entries = (0..len)
            .map(|k| C64::new(re[k], im.map_or(0.0, |v| v[k])))
            .collect();
        let mat = ComplexMatrix::from_row_major(d, d, entries).map_err(lib_err)?;
        let inner = BipartiteMatrix::new(m, n, mat).map_err(lib_err)?;
        // SAFETY: `out` checked non-null above.
        unsafe { out.write(Box::into_raw(Box::new(SepdecMatrix { inner }))) };
        Ok(())
    })
}

/// # Safety
/// `mat` must be null or a handle from [`sepdec_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepdec_matrix_free(mat: *mut SepdecMatrix) {
    if !mat.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(mat) });
    }
}

/// # Safety
/// `mat` must be a live handle; `m` and `n` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_matrix_dims(
    mat: *const SepdecMatrix,
    m: *mut usize,
    n: *mut usize,
) -> SepdecStatus {
    guard(|| {
        let mat = unsafe { borrow(mat, "matrix") }?;
        unsafe { write_out(m, mat.inner.m(), "m") }?;
        unsafe { write_out(n, mat.inner.n(), "n") }
    })
}

/// Canonical decomposition with the independent images on `side`. `tol` may be
/// null for the defaults.
///
/// # Safety
/// `mat` must be a live handle, `tol` null or valid, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_decompose(
    mat: *const SepdecMatrix,
    side: SepdecSide,
    tol: *const SepdecTolerances,
    out: *mut *mut SepdecDecomposition,
) -> SepdecStatus {
    guard(|| {
        let mat = unsafe { borrow(mat, "matrix") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let tol: Tolerances = match unsafe { tol.as_ref() } {
            Some(t) => (*t).into(),
            None => Tolerances::default(),
        };
        tol.validate()
            .map_err(|e| (SepdecStatus::InvalidArgument, e.to_string()))?;
        let side = match side {
            SepdecSide::A => Side::A,
            SepdecSide::B => Side::B,
        };
        let inner = independent_form(&mat.inner, side, &tol).map_err(lib_err)?;
        let dec = SepdecDecomposition {
            residual: inner.relative_residual(&mat.inner),
            unique: is_unique_pure_decomposition(&inner, &tol),
            inner,
        };
        unsafe { out.write(Box::into_raw(Box::new(dec))) };
        Ok(())
    })
}

/// # Safety
/// `dec` must be null or a handle from [`sepdec_decompose`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepdec_decomposition_free(dec: *mut SepdecDecomposition) {
    if !dec.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(dec) });
    }
}

/// Number of terms, or 0 for a null handle.
///
/// # Safety
/// `dec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sepdec_decomposition_term_count(dec: *const SepdecDecomposition) -> usize {
    unsafe { dec.as_ref() }.map_or(0, |d| d.inner.p())
}

/// Copies term `index`: `A` into `m·m` and `B` into `n·n` row-major buffers.
///
/// # Safety
/// `dec` must be a live handle and the four buffers large enough.
#[no_mangle]
pub unsafe extern "C" fn sepdec_decomposition_term(
    dec: *const SepdecDecomposition,
    index: usize,
    a_re: *mut f64,
    a_im: *mut f64,
    b_re: *mut f64,
    b_im: *mut f64,
) -> SepdecStatus {
    guard(|| {
        let dec = unsafe { borrow(dec, "decomposition") }?;
        let term = dec.inner.terms.get(index).ok_or_else(|| {
            (
                SepdecStatus::OutOfRange,
                format!("term {index} out of range (p = {})", dec.inner.p()),
            )
        })?;
        unsafe { copy_matrix(&term.a, a_re, a_im) }?;
        unsafe { copy_matrix(&term.b, b_re, b_im) }
    })
}

/// # Safety
/// `dec` must be a live handle; `unique` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_decomposition_is_unique(
    dec: *const SepdecDecomposition,
    unique: *mut bool,
) -> SepdecStatus {
    guard(|| {
        let dec = unsafe { borrow(dec, "decomposition") }?;
        unsafe { write_out(unique, dec.unique, "unique") }
    })
}

/// Relative reconstruction residual `‖T − Σ A_γ ⊗ B_γ‖_F / ‖T‖_F`.
///
/// # Safety
/// `dec` must be a live handle; `residual` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_decomposition_residual(
    dec: *const SepdecDecomposition,
    residual: *mut f64,
) -> SepdecStatus {
    guard(|| {
        let dec = unsafe { borrow(dec, "decomposition") }?;
        unsafe { write_out(residual, dec.residual, "residual") }
    })
}

/// # Safety
/// `mat` must be a live handle; `ppt` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_ppt(mat: *const SepdecMatrix, ppt: *mut bool) -> SepdecStatus {
    guard(|| {
        let mat = unsafe { borrow(mat, "matrix") }?;
        unsafe { write_out(ppt, ppt_check(&mat.inner, &Tolerances::default()), "ppt") }
    })
}

/// # Safety
/// `mat` must be a live handle; `verdict` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_marginal_rank(
    mat: *const SepdecMatrix,
    verdict: *mut SepdecMarginalVerdict,
) -> SepdecStatus {
    guard(|| {
        let mat = unsafe { borrow(mat, "matrix") }?;
        let v = match marginal_rank_separability(&mat.inner, &Tolerances::default()).map_err(lib_err)? {
            MarginalRankVerdict::Separable(_) => SepdecMarginalVerdict::Separable,
            MarginalRankVerdict::Entangled(_) => SepdecMarginalVerdict::Entangled,
            MarginalRankVerdict::NotMarginalRank { .. } => SepdecMarginalVerdict::NotMarginalRank,
        };
        unsafe { write_out(verdict, v, "verdict") }
    })
}

fn kind(k: ChannelKind) -> SepdecChannelKind {
    match k {
        ChannelKind::Qc => SepdecChannelKind::Qc,
        ChannelKind::Cq => SepdecChannelKind::Cq,
        ChannelKind::OrthogonalOnly => SepdecChannelKind::OrthogonalOnly,
        ChannelKind::None => SepdecChannelKind::None,
    }
}

/// Classifies a Choi matrix as quantum-classical.
///
/// # Safety
/// `choi` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_detect_qc(
    choi: *const SepdecMatrix,
    out: *mut SepdecChannelKind,
) -> SepdecStatus {
    guard(|| {
        let c = unsafe { borrow(choi, "choi") }?;
        let class = detect_qc(&c.inner, &Tolerances::default()).map_err(lib_err)?;
        unsafe { write_out(out, kind(class.kind), "out") }
    })
}

/// Classifies a Choi matrix as classical-quantum.
///
/// # Safety
/// `choi` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_detect_cq(
    choi: *const SepdecMatrix,
    out: *mut SepdecChannelKind,
) -> SepdecStatus {
    guard(|| {
        let c = unsafe { borrow(choi, "choi") }?;
        let class = detect_cq(&c.inner, &Tolerances::default()).map_err(lib_err)?;
        unsafe { write_out(out, kind(class.kind), "out") }
    })
}

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to `len` bytes) and returns the length needed including the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sepdec_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let k = bytes.len().min(len - 1);
            // SAFETY: `buf` holds at least `len` bytes.
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, k);
                buf.add(k).write(0);
            }
        }
        bytes.len() + 1
    })
}
