//! Joint eigenspaces of a commuting family of normal blocks.
//!
//! The family is first certified (every block normal, every pair commuting),
//! then split by deterministic refinement: starting from the whole space, the
//! Hermitian part and the skew part of each block in row-major order are
//! compressed to every current subspace, diagonalized, and the subspace is cut
//! wherever consecutive eigenvalues differ by more than the cluster threshold.
//! Only Hermitian eigensolvers are involved, and repeated runs give identical
//! output.

use std::cmp::Ordering;

use crate::bipartite::BlockGrid;
use crate::error::{Error, FamilyDiagnostics, Offender, Result};
use crate::matcore::{commutator_defect, herm_eig, normal_defect, ComplexMatrix, Tolerances};

/// Joint eigenspace projections `Q_γ` with their eigenvalue tuples `Λ_γ`.
#[derive(Debug, Clone)]
pub struct JointEigenstructure {
    /// `Q_γ`, mutually orthogonal projections (joint zero eigenspace excluded).
    pub projections: Vec<ComplexMatrix>,
    /// Orthonormal bases (columns) of the `Q_γ`.
    pub bases: Vec<ComplexMatrix>,
    /// `Λ_γ` with `Λ_γ[i, j]` the eigenvalue of block `(i, j)` on `Q_γ`.
    pub tuples: Vec<ComplexMatrix>,
    /// `Σ_γ Q_γ`.
    pub support: ComplexMatrix,
    /// Largest block Frobenius norm of the source grid.
    pub scale: f64,
    /// `max ‖(T_ij − λ_γ^{ij}) Q_γ‖_F / scale` over all `γ, i, j`.
    pub max_residual: f64,
}

impl JointEigenstructure {
    pub fn q(&self) -> usize {
        self.projections.len()
    }
}

/// Checks that every block is normal and every pair of blocks commutes.
///
/// Defects are measured relative to `scale²`, `scale` being the largest block
/// norm of the grid, so that blocks which vanish up to rounding never fail on
/// their own relative noise.
pub fn is_commuting_normal_family(g: &BlockGrid, tol: &Tolerances) -> FamilyDiagnostics {
    let scale = g.scale();
    let mut diag = FamilyDiagnostics {
        passed: true,
        offender: None,
        max_normal_defect: 0.0,
        max_commutator_defect: 0.0,
    };
    if scale == 0.0 {
        return diag;
    }
    let s2 = scale * scale;
    let blocks: Vec<_> = g.iter().collect();

    let mut worst_normal: Option<((usize, usize), f64)> = None;
    for (ij, b) in &blocks {
        let d = normal_defect(b) / s2;
        diag.max_normal_defect = diag.max_normal_defect.max(d);
        if d > tol.normal && worst_normal.is_none_or(|(_, w)| d > w) {
            worst_normal = Some((*ij, d));
        }
    }

    let mut worst_pair: Option<((usize, usize), (usize, usize), f64)> = None;
    for (a, (ij, x)) in blocks.iter().enumerate() {
        for (kl, y) in blocks.iter().skip(a + 1) {
            let d = commutator_defect(x, y) / s2;
            diag.max_commutator_defect = diag.max_commutator_defect.max(d);
            if d > tol.commute && worst_pair.is_none_or(|(_, _, w)| d > w) {
                worst_pair = Some((*ij, *kl, d));
            }
        }
    }

    diag.offender = match (worst_normal, worst_pair) {
        (Some((block, defect)), _) => Some(Offender::NonNormal { block, defect }),
        (None, Some((first, second, defect))) => Some(Offender::NonCommuting {
            first,
            second,
            defect,
        }),
        (None, None) => None,
    };
    diag.passed = diag.offender.is_none();
    diag
}

/// Lexicographic comparison of matrix entries (row-major, real part before
/// imaginary part) where differences of at most `eps` count as ties.
pub fn tolerant_cmp(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> Ordering {
    for (x, y) in a.row_major().iter().zip(b.row_major().iter()) {
        for (u, v) in [(x.re, y.re), (x.im, y.im)] {
            if (u - v).abs() > eps {
                return u.total_cmp(&v);
            }
        }
    }
    Ordering::Equal
}

/// Indices that sort `keys` in descending order under [`tolerant_cmp`], ties
/// kept in input order. Insertion sort: the tolerant comparison is not a total
/// order, and families here are small.
pub fn canonical_order(keys: &[ComplexMatrix], eps: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = Vec::with_capacity(keys.len());
    for k in 0..keys.len() {
        let pos = idx
            .iter()
            .position(|&j| tolerant_cmp(&keys[k], &keys[j], eps) == Ordering::Greater)
            .unwrap_or(idx.len());
        idx.insert(pos, k);
    }
    idx
}

/// Hermitian generators of the family, in row-major block order.
fn generators(g: &BlockGrid) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(2 * g.m() * g.m());
    for (_, b) in g.iter() {
        out.push(b.hermitian_part());
        out.push(b.skew_part());
    }
    out
}

/// Splits subspace `v` by the eigenvalue clusters of `V† H V`.
fn split(
    v: &ComplexMatrix,
    h: &ComplexMatrix,
    threshold: f64,
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    if v.cols() == 1 {
        return Ok(vec![v.clone()]);
    }
    let compressed = h.compress(v).hermitian_part();
    let eig = herm_eig(&compressed, tol)?;
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..eig.values.len() {
        let gap = eig.values[k - 1] - eig.values[k];
        if gap >= 0.1 * threshold && gap <= 10.0 * threshold {
            return Err(Error::ClusterAmbiguity { gap, threshold });
        }
        if gap > threshold {
            groups.push(vec![k]);
        } else {
            groups.last_mut().expect("non-empty").push(k);
        }
    }
    if groups.len() == 1 {
        return Ok(vec![v.clone()]);
    }
    Ok(groups
        .iter()
        .map(|cols| v * &eig.vectors.select_columns(cols))
        .collect())
}

/// Joint eigenspaces of a commuting normal block family, joint zero eigenspace
/// excluded, in canonical order of their eigenvalue tuples.
pub fn joint_eigenspaces(g: &BlockGrid, tol: &Tolerances) -> Result<JointEigenstructure> {
    let diag = is_commuting_normal_family(g, tol);
    if !diag.passed {
        return Err(Error::NotCommutingFamily(diag));
    }
    let (m, n) = (g.m(), g.n());
    let scale = g.scale();
    if scale == 0.0 {
        return Ok(JointEigenstructure {
            projections: vec![],
            bases: vec![],
            tuples: vec![],
            support: ComplexMatrix::zeros(n, n),
            scale,
            max_residual: 0.0,
        });
    }
    let threshold = tol.cluster * scale;

    let mut spaces = vec![ComplexMatrix::identity(n)];
    for h in generators(g) {
        let mut next = Vec::with_capacity(spaces.len());
        for v in &spaces {
            next.extend(split(v, &h, threshold, tol)?);
        }
        spaces = next;
    }

    let mut bases = Vec::new();
    let mut tuples = Vec::new();
    for v in spaces {
        let d = v.cols() as f64;
        let tuple = ComplexMatrix::from_fn(m, m, |i, j| g.get(i, j).compress(&v).trace() / d);
        if tuple.max_abs() <= threshold {
            continue;
        }
        bases.push(v);
        tuples.push(tuple);
    }

    let order = canonical_order(&tuples, threshold);
    let bases: Vec<ComplexMatrix> = order.iter().map(|&k| bases[k].clone()).collect();
    let tuples: Vec<ComplexMatrix> = order.iter().map(|&k| tuples[k].clone()).collect();
    let projections: Vec<ComplexMatrix> = bases.iter().map(|v| v * &v.adjoint()).collect();

    let mut max_residual: f64 = 0.0;
    for (v, t) in bases.iter().zip(&tuples) {
        for ((i, j), b) in g.iter() {
            let r = &(b * v) - &v.scale(t.get(i, j));
            max_residual = max_residual.max(r.norm_fro() / scale);
        }
    }

    let support = projections
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, q| &acc + q);
    Ok(JointEigenstructure {
        projections,
        bases,
        tuples,
        support,
        scale,
        max_residual,
    })
}

/// `Σ_γ Λ_γ[i, j] Q_γ` for every block, i.e. the grid a structure describes.
pub fn grid_from_structure(js: &JointEigenstructure, m: usize, n: usize) -> Result<BlockGrid> {
    BlockGrid::from_fn(m, n, |i, j| {
        js.projections
            .iter()
            .zip(&js.tuples)
            .fold(ComplexMatrix::zeros(n, n), |acc, (q, t)| {
                &acc + &q.scale(t.get(i, j))
            })
    })
}
