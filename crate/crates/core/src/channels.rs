//! Holevo-form channels `Φ(X) = Σ_k tr(F_k X) R_k`, their Choi matrices, and
//! detection of quantum-classical (QC) and classical-quantum (CQ) channels.
//!
//! The Choi matrix is `C_Φ = Σ_ij E_ij ⊗ Φ(E_ij)`, so a Holevo form maps to
//! `Σ_k F_kᵗ ⊗ R_k`, with `ᵗ` the entrywise transpose in the standard basis.

use crate::bipartite::{blocks, partial_trace_b, swap_sides, BipartiteMatrix};
use crate::decompose::{b_orthogonal_form, spectral_pieces};
use crate::error::{Error, Result};
use crate::matcore::{kron, ComplexMatrix, Tolerances, C64};

/// `Φ(X) = Σ_k tr(F_k X) R_k` with `F_k` of size `m × m` and `R_k` of size `n × n`.
#[derive(Debug, Clone)]
pub struct HolevoForm {
    pub m: usize,
    pub n: usize,
    pub pairs: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl HolevoForm {
    pub fn new(m: usize, n: usize, pairs: Vec<(ComplexMatrix, ComplexMatrix)>) -> Result<Self> {
        for (f, r) in &pairs {
            if f.rows() != m || f.cols() != m || r.rows() != n || r.cols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "Holevo pairs must be {m}x{m} and {n}x{n}"
                )));
            }
        }
        Ok(Self { m, n, pairs })
    }

    /// Direct evaluation of `Σ_k tr(F_k X) R_k`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.m || x.cols() != self.m {
            return Err(Error::ShapeMismatch(format!(
                "channel input must be {0}x{0}",
                self.m
            )));
        }
        Ok(self
            .pairs
            .iter()
            .fold(ComplexMatrix::zeros(self.n, self.n), |acc, (f, r)| {
                &acc + &r.scale((f * x).trace())
            }))
    }

    /// `Σ_k F_k`.
    pub fn effect_sum(&self) -> ComplexMatrix {
        self.pairs
            .iter()
            .fold(ComplexMatrix::zeros(self.m, self.m), |acc, (f, _)| &acc + f)
    }

    /// `‖Σ_k F_k − I‖_F ≤ tol.recon · √m`.
    pub fn is_trace_preserving(&self, tol: &Tolerances) -> bool {
        self.effect_sum().dist(&ComplexMatrix::identity(self.m)) <= tol.recon * (self.m as f64).sqrt()
    }
}

/// `Σ_k F_kᵗ ⊗ R_k`.
pub fn choi_of_holevo(h: &HolevoForm) -> Result<BipartiteMatrix> {
    let d = h.m * h.n;
    let mat = h
        .pairs
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, (f, r)| &acc + &kron(&f.transpose(), r));
    BipartiteMatrix::new(h.m, h.n, mat)
}

/// `Φ(X) = Σ_ij X_ij · C_ij` where `C_ij` are the blocks of the Choi matrix.
pub fn apply_channel_from_choi(c: &BipartiteMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.rows() != c.m() || x.cols() != c.m() {
        return Err(Error::ShapeMismatch(format!(
            "channel input must be {0}x{0}",
            c.m()
        )));
    }
    let g = blocks(c);
    Ok(g.iter().fold(ComplexMatrix::zeros(c.n(), c.n()), |acc, ((i, j), b)| {
        &acc + &b.scale(x.get(i, j))
    }))
}

/// `‖tr_B C − I_m‖_F ≤ tol.recon · √m`.
pub fn is_trace_preserving_choi(c: &BipartiteMatrix, tol: &Tolerances) -> bool {
    partial_trace_b(c).dist(&ComplexMatrix::identity(c.m())) <= tol.recon * (c.m() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ChannelKind {
    Qc,
    Cq,
    /// The orthogonality structure holds but the channel is not trace preserving.
    OrthogonalOnly,
    None,
}

#[derive(Debug, Clone)]
pub struct ChannelClass {
    pub kind: ChannelKind,
    pub witness: Option<HolevoForm>,
}

impl ChannelClass {
    fn bare(kind: ChannelKind) -> Self {
        Self { kind, witness: None }
    }
}

/// Extends orthonormal `vs` to an orthonormal basis of `C^n` using the standard
/// basis vectors in order.
fn complete_basis(mut vs: Vec<Vec<C64>>, n: usize) -> Vec<Vec<C64>> {
    let given = vs.len();
    for j in 0..n {
        if vs.len() == n {
            break;
        }
        let mut w = vec![C64::default(); n];
        w[j] = C64::new(1.0, 0.0);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for v in &vs {
                let proj: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= proj * vk;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            vs.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    vs.split_off(given)
}

/// QC iff `C` is B-orthogonal and trace preserving. The witness has rank-one
/// orthogonal `R_k` summing to `I_n`; padded outputs carry `F_k = 0`.
pub fn detect_qc(c: &BipartiteMatrix, tol: &Tolerances) -> Result<ChannelClass> {
    let dec = match b_orthogonal_form(c, tol) {
        Ok(dec) => dec,
        Err(Error::NotBOrthogonal(_)) => return Ok(ChannelClass::bare(ChannelKind::None)),
        Err(e) => return Err(e),
    };
    if !is_trace_preserving_choi(c, tol) {
        return Ok(ChannelClass::bare(ChannelKind::OrthogonalOnly));
    }
    let (m, n) = c.dims();
    let mut pairs = Vec::new();
    let mut outputs = Vec::new();
    for term in &dec.terms {
        for (beta, y) in spectral_pieces(&term.b, tol) {
            pairs.push((term.a.scale_real(beta).transpose(), ComplexMatrix::projector(&y)));
            outputs.push(y);
        }
    }
    for y in complete_basis(outputs, n) {
        pairs.push((ComplexMatrix::zeros(m, m), ComplexMatrix::projector(&y)));
    }
    Ok(ChannelClass {
        kind: ChannelKind::Qc,
        witness: Some(HolevoForm::new(m, n, pairs)?),
    })
}

/// CQ iff `C` is A-orthogonal and trace preserving. The witness has rank-one
/// projections `F_k` summing to `I_m`.
pub fn detect_cq(c: &BipartiteMatrix, tol: &Tolerances) -> Result<ChannelClass> {
    let dec = match b_orthogonal_form(&swap_sides(c), tol) {
        Ok(dec) => dec,
        Err(Error::NotBOrthogonal(_)) => return Ok(ChannelClass::bare(ChannelKind::None)),
        Err(e) => return Err(e),
    };
    if !is_trace_preserving_choi(c, tol) {
        return Ok(ChannelClass::bare(ChannelKind::OrthogonalOnly));
    }
    let (m, n) = c.dims();
    // in the swapped decomposition `a` lives on B (n × n) and `b` on A (m × m)
    let mut pairs = Vec::new();
    for term in &dec.terms {
        for (beta, x) in spectral_pieces(&term.b, tol) {
            pairs.push((
                ComplexMatrix::projector(&x).transpose(),
                term.a.scale_real(beta),
            ));
        }
    }
    Ok(ChannelClass {
        kind: ChannelKind::Cq,
        witness: Some(HolevoForm::new(m, n, pairs)?),
    })
}

/// `Σ_ij E_ij ⊗ E_ij`, the Choi matrix of the identity channel on `C^d`.
pub fn identity_choi(d: usize) -> BipartiteMatrix {
    let mat = ComplexMatrix::from_fn(d * d, d * d, |r, s| {
        let (i, k) = (r / d, r % d);
        let (j, l) = (s / d, s % d);
        if i == k && j == l {
            C64::new(1.0, 0.0)
        } else {
            C64::default()
        }
    });
    BipartiteMatrix::new(d, d, mat).expect("square by construction")
}

/// `X ↦ Σ_k ⟨k|X|k⟩ E_kk`.
pub fn dephasing_form(d: usize) -> HolevoForm {
    let pairs = (0..d)
        .map(|k| (ComplexMatrix::unit(d, k, k), ComplexMatrix::unit(d, k, k)))
        .collect();
    HolevoForm::new(d, d, pairs).expect("consistent shapes")
}

/// `X ↦ tr(X) I_n / n`, written with outputs `E_kk` and effects `I_m / n`.
pub fn depolarizing_form(m: usize, n: usize) -> HolevoForm {
    let pairs = (0..n)
        .map(|k| {
            (
                ComplexMatrix::identity(m).scale_real(1.0 / n as f64),
                ComplexMatrix::unit(n, k, k),
            )
        })
        .collect();
    HolevoForm::new(m, n, pairs).expect("consistent shapes")
}
