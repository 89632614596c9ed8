//! Bipartite structure on `mn × mn` matrices.
//!
//! Basis convention: `e_i ⊗ f_k` sits at row `i·n + k` (0-based), so block
//! `(i, j)` of the grid is the `n × n` sub-matrix at rows `i·n..(i+1)·n` and
//! columns `j·n..(j+1)·n`. Diagnostics print blocks 1-based.

use crate::error::{Error, Result};
use crate::matcore::{
    kron, pinv_sqrt, psd_eig, psd_sqrt, support_projection, ComplexMatrix, Tolerances, C64,
};

/// A matrix on `C^m ⊗ C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteMatrix {
    m: usize,
    n: usize,
    mat: ComplexMatrix,
}

impl BipartiteMatrix {
    pub fn new(m: usize, n: usize, mat: ComplexMatrix) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::ShapeMismatch("factor dimensions must be positive".into()));
        }
        if mat.rows() != m * n || mat.cols() != m * n {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for factor dimensions ({m}, {n})",
                mat.rows(),
                mat.cols()
            )));
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { m, n, mat })
    }

    /// `A ⊗ B`.
    pub fn product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() {
            return Err(Error::ShapeMismatch("tensor factors must be square".into()));
        }
        Self::new(a.rows(), b.rows(), kron(a, b))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Rescales to unit trace. Never applied implicitly.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        Ok(Self {
            m: self.m,
            n: self.n,
            mat: self.mat.scale_real(1.0 / t),
        })
    }

    /// Checks that the matrix is Hermitian and PSD within tolerance.
    pub fn check_state(&self, tol: &Tolerances) -> Result<()> {
        psd_eig(&self.mat, tol).map(|_| ())
    }

    /// `(X ⊗ Y) T (X ⊗ Y)†`.
    pub fn local_conjugate(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<Self> {
        if x.rows() != self.m || x.cols() != self.m || y.rows() != self.n || y.cols() != self.n {
            return Err(Error::ShapeMismatch("local operator dimensions".into()));
        }
        let k = kron(x, y);
        Self::new(self.m, self.n, &(&k * &self.mat) * &k.adjoint())
    }
}

/// The `m × m` grid of `n × n` blocks of a bipartite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    m: usize,
    n: usize,
    blocks: Vec<ComplexMatrix>,
}

impl BlockGrid {
    /// `blocks` is row-major over `(i, j)`.
    pub fn new(m: usize, n: usize, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != m * m {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for an {m}x{m} grid",
                blocks.len()
            )));
        }
        if blocks.iter().any(|b| b.rows() != n || b.cols() != n) {
            return Err(Error::ShapeMismatch(format!("blocks must all be {n}x{n}")));
        }
        Ok(Self { m, n, blocks })
    }

    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(usize, usize) -> ComplexMatrix) -> Result<Self> {
        let mut blocks = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                blocks.push(f(i, j));
            }
        }
        Self::new(m, n, blocks)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[i * self.m + j]
    }

    /// Iterates `((i, j), block)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &ComplexMatrix)> {
        let m = self.m;
        self.blocks
            .iter()
            .enumerate()
            .map(move |(k, b)| ((k / m, k % m), b))
    }

    /// Largest block Frobenius norm.
    pub fn scale(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_fro()).fold(0.0, f64::max)
    }
}

/// Splits `T` into its block grid. Pure reindexing.
pub fn blocks(t: &BipartiteMatrix) -> BlockGrid {
    let (m, n) = t.dims();
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            out.push(ComplexMatrix::from_fn(n, n, |k, l| {
                t.mat.get(i * n + k, j * n + l)
            }));
        }
    }
    BlockGrid { m, n, blocks: out }
}

/// Reassembles `Σ_ij E_ij ⊗ G_ij`.
pub fn from_blocks(g: &BlockGrid) -> Result<BipartiteMatrix> {
    let (m, n) = (g.m, g.n);
    if g.blocks.len() != m * m || g.blocks.iter().any(|b| b.rows() != n || b.cols() != n) {
        return Err(Error::ShapeMismatch("inconsistent block shapes".into()));
    }
    let mat = ComplexMatrix::from_fn(m * n, m * n, |r, s| {
        g.get(r / n, s / n).get(r % n, s % n)
    });
    BipartiteMatrix::new(m, n, mat)
}

/// `T_A = tr_B T = Σ_ij tr(T_ij) E_ij`.
pub fn partial_trace_b(t: &BipartiteMatrix) -> ComplexMatrix {
    let (m, n) = t.dims();
    ComplexMatrix::from_fn(m, m, |i, j| {
        (0..n).map(|k| t.mat.get(i * n + k, j * n + k)).sum()
    })
}

/// `T_B = tr_A T = Σ_i T_ii`.
pub fn partial_trace_a(t: &BipartiteMatrix) -> ComplexMatrix {
    let (m, n) = t.dims();
    ComplexMatrix::from_fn(n, n, |k, l| {
        (0..m).map(|i| t.mat.get(i * n + k, i * n + l)).sum()
    })
}

/// Partial transpose on the A factor: `Σ_ij E_ji ⊗ T_ij`. Has the same spectrum
/// as the blockwise transpose `Σ_ij E_ij ⊗ T_ijᵗ`.
pub fn partial_transpose_a(t: &BipartiteMatrix) -> BipartiteMatrix {
    let (m, n) = t.dims();
    let mat = ComplexMatrix::from_fn(m * n, m * n, |r, s| {
        let (i, k) = (r / n, r % n);
        let (j, l) = (s / n, s % n);
        t.mat.get(j * n + k, i * n + l)
    });
    BipartiteMatrix { m, n, mat }
}

/// Blockwise transpose `Σ_ij E_ij ⊗ (T_ij)ᵗ` (partial transpose on the B factor).
pub fn partial_transpose_b(t: &BipartiteMatrix) -> BipartiteMatrix {
    let (m, n) = t.dims();
    let mat = ComplexMatrix::from_fn(m * n, m * n, |r, s| {
        let (i, k) = (r / n, r % n);
        let (j, l) = (s / n, s % n);
        t.mat.get(i * n + l, j * n + k)
    });
    BipartiteMatrix { m, n, mat }
}

/// Conjugates `T` by the swap `e_i ⊗ f_k ↦ f_k ⊗ e_i`; dimensions become `(n, m)`.
pub fn swap_sides(t: &BipartiteMatrix) -> BipartiteMatrix {
    let (m, n) = t.dims();
    // row k·m + i of the result is row i·n + k of T
    let mat = ComplexMatrix::from_fn(m * n, m * n, |r, s| {
        let (k, i) = (r / m, r % m);
        let (l, j) = (s / m, s % m);
        t.mat.get(i * n + k, j * n + l)
    });
    BipartiteMatrix { m: n, n: m, mat }
}

/// The pair `(T̃, T_B)` with `T̃ = (I ⊗ (T_B^#)^{1/2}) T (I ⊗ (T_B^#)^{1/2})`.
#[derive(Debug, Clone)]
pub struct FilteredPair {
    pub t_tilde: BipartiteMatrix,
    /// The B marginal `tr_A T`.
    pub t_b: ComplexMatrix,
    /// Projection onto the image of `t_b`.
    pub p_b: ComplexMatrix,
}

/// One-sided local filter that turns the B marginal into a projection.
pub fn local_filter_b(t: &BipartiteMatrix, tol: &Tolerances) -> Result<FilteredPair> {
    t.check_state(tol)?;
    if t.mat.norm_fro() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let (m, n) = t.dims();
    let t_b = partial_trace_a(t).hermitian_part();
    let f = pinv_sqrt(&t_b, tol)?;
    let p_b = support_projection(&t_b, tol)?;
    if p_b.norm_fro() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let k = kron(&ComplexMatrix::identity(m), &f);
    let filtered = (&(&k * &t.mat) * &k).hermitian_part();
    Ok(FilteredPair {
        t_tilde: BipartiteMatrix::new(m, n, filtered)?,
        t_b,
        p_b,
    })
}

/// Undoes the filter: `(I ⊗ T_B^{1/2}) T̃ (I ⊗ T_B^{1/2})`.
pub fn reconstruct(fp: &FilteredPair, tol: &Tolerances) -> Result<BipartiteMatrix> {
    let (m, n) = fp.t_tilde.dims();
    if fp.t_b.rows() != n || fp.t_b.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "marginal is {}x{}, expected {n}x{n}",
            fp.t_b.rows(),
            fp.t_b.cols()
        )));
    }
    let s = psd_sqrt(&fp.t_b, tol)?;
    let k = kron(&ComplexMatrix::identity(m), &s);
    BipartiteMatrix::new(m, n, &(&k * fp.t_tilde.mat()) * &k)
}

/// Projections onto `im T_A` and `im T_B`: the smallest product subspace holding `im T`.
pub fn product_range(
    t: &BipartiteMatrix,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    t.check_state(tol)?;
    let p_a = support_projection(&partial_trace_b(t).hermitian_part(), tol)?;
    let p_b = support_projection(&partial_trace_a(t).hermitian_part(), tol)?;
    Ok((p_a, p_b))
}

/// `Σ_ij E_ij ⊗ E_ij / d`, the maximally entangled state on `C^d ⊗ C^d`.
pub fn maximally_entangled(d: usize) -> BipartiteMatrix {
    let mut psi = vec![C64::default(); d * d];
    for i in 0..d {
        psi[i * d + i] = C64::new(1.0, 0.0);
    }
    let mat = ComplexMatrix::projector(&psi);
    BipartiteMatrix { m: d, n: d, mat }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, re};
    use crate::toolkit::random::{random_matrix, random_psd, seeded_rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(n: usize, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(n, i, j)
    }

    #[test]
    fn blocks_of_elementary_product() {
        let b = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let t = BipartiteMatrix::product(&e(2, 0, 0), &b).unwrap();
        let g = blocks(&t);
        assert_eq!(g.get(0, 0), &b);
        for (ij, blk) in g.iter() {
            if ij != (0, 0) {
                assert_eq!(blk.norm_fro(), 0.0);
            }
        }
    }

    #[test]
    fn bell_blocks_and_marginals() {
        let bell = maximally_entangled(2);
        let g = blocks(&bell);
        for i in 0..2 {
            for j in 0..2 {
                assert!(g.get(i, j).dist(&e(2, i, j).scale_real(0.5)) < 1e-15);
            }
        }
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(partial_trace_a(&bell).dist(&half) < 1e-15);
        assert!(partial_trace_b(&bell).dist(&half) < 1e-15);
        // Bell grid reassembles the Bell matrix
        let grid = BlockGrid::from_fn(2, 2, |i, j| e(2, i, j).scale_real(0.5)).unwrap();
        assert!(from_blocks(&grid).unwrap().mat().dist(bell.mat()) < 1e-15);
    }

    #[test]
    fn from_blocks_examples() {
        let grid = BlockGrid::from_fn(2, 2, |i, j| {
            if (i, j) == (0, 0) {
                ComplexMatrix::identity(2)
            } else {
                ComplexMatrix::zeros(2, 2)
            }
        })
        .unwrap();
        let t = from_blocks(&grid).unwrap();
        assert_eq!(t.mat(), &kron(&e(2, 0, 0), &ComplexMatrix::identity(2)));
        assert_eq!(blocks(&t), grid);
        assert!(matches!(
            BlockGrid::new(2, 2, vec![ComplexMatrix::identity(2); 3]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut r = seeded_rng(1);
        let t = BipartiteMatrix::new(3, 2, random_matrix(&mut r, 6, 6)).unwrap();
        assert_eq!(from_blocks(&blocks(&t)).unwrap(), t);
        assert_eq!(swap_sides(&swap_sides(&t)), t);
    }

    #[test]
    fn partial_traces_of_products() {
        let mut r = seeded_rng(2);
        let a = random_matrix(&mut r, 3, 3);
        let b = random_matrix(&mut r, 2, 2);
        let t = BipartiteMatrix::product(&a, &b).unwrap();
        assert!(partial_trace_b(&t).dist(&a.scale(b.trace())) < 1e-12);
        assert!(partial_trace_a(&t).dist(&b.scale(a.trace())) < 1e-12);
        let px = ComplexMatrix::projector(&[re(1.0), c(0.0, 2.0), re(-1.0)]);
        let py = ComplexMatrix::projector(&[re(0.6), c(0.0, 0.8)]);
        let t = BipartiteMatrix::product(&px, &py).unwrap();
        assert!(partial_trace_a(&t).dist(&py) < 1e-12);
        let t = BipartiteMatrix::new(3, 2, random_matrix(&mut r, 6, 6)).unwrap();
        assert!((partial_trace_b(&t).trace() - t.mat().trace()).norm() < 1e-12);
    }

    #[test]
    fn swap_examples() {
        let mut r = seeded_rng(3);
        let a = random_matrix(&mut r, 2, 2);
        let b = random_matrix(&mut r, 3, 3);
        let t = BipartiteMatrix::product(&a, &b).unwrap();
        let s = swap_sides(&t);
        assert_eq!(s.dims(), (3, 2));
        assert!(s.mat().dist(&kron(&b, &a)) < 1e-14);
        let t = BipartiteMatrix::new(2, 3, random_matrix(&mut r, 6, 6)).unwrap();
        assert!(partial_trace_a(&swap_sides(&t)).dist(&partial_trace_b(&t)) < 1e-12);
    }

    #[test]
    fn filter_of_product_of_projections() {
        let px = ComplexMatrix::projector(&[re(1.0), re(1.0)]);
        let py = ComplexMatrix::projector(&[re(1.0), c(0.0, 1.0), re(0.0)]);
        let t = BipartiteMatrix::product(&px, &py).unwrap();
        let fp = local_filter_b(&t, &tol()).unwrap();
        assert!(fp.t_tilde.mat().dist(t.mat()) < 1e-12);
        assert!(fp.p_b.dist(&py) < 1e-12);
        assert!(reconstruct(&fp, &tol()).unwrap().mat().dist(t.mat()) < 1e-12);
    }

    #[test]
    fn filter_rescales_diagonal_marginal() {
        let px = ComplexMatrix::projector(&[re(0.6), re(0.8)]);
        let t = BipartiteMatrix::product(&px, &ComplexMatrix::identity(2).scale_real(0.5)).unwrap();
        let fp = local_filter_b(&t, &tol()).unwrap();
        let expected = kron(&px, &ComplexMatrix::identity(2));
        assert!(fp.t_tilde.mat().dist(&expected) < 1e-12);
    }

    #[test]
    fn filter_of_bell_state() {
        let bell = maximally_entangled(2);
        let fp = local_filter_b(&bell, &tol()).unwrap();
        assert!(fp.t_tilde.mat().dist(&bell.mat().scale_real(2.0)) < 1e-12);
        assert!(fp.p_b.dist(&ComplexMatrix::identity(2)) < 1e-12);
        assert!(reconstruct(&fp, &tol()).unwrap().mat().dist(bell.mat()) < 1e-12);
    }

    #[test]
    fn reconstruct_with_identity_marginal() {
        let mut r = seeded_rng(8);
        let t = BipartiteMatrix::new(2, 2, random_psd(&mut r, 4, 4)).unwrap();
        let fp = FilteredPair {
            t_tilde: t.clone(),
            t_b: ComplexMatrix::identity(2),
            p_b: ComplexMatrix::identity(2),
        };
        assert!(reconstruct(&fp, &tol()).unwrap().mat().dist(t.mat()) < 1e-13);
        let bad = FilteredPair {
            t_b: ComplexMatrix::identity(3),
            ..fp
        };
        assert!(matches!(reconstruct(&bad, &tol()), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn filter_rejects_zero_and_indefinite() {
        let z = BipartiteMatrix::new(2, 2, ComplexMatrix::zeros(4, 4)).unwrap();
        assert!(matches!(local_filter_b(&z, &tol()), Err(Error::ZeroMatrix)));
        let neg = BipartiteMatrix::new(2, 1, ComplexMatrix::from_real_diagonal(&[1.0, -1.0])).unwrap();
        assert!(matches!(local_filter_b(&neg, &tol()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn product_range_examples() {
        let px = ComplexMatrix::projector(&[re(1.0), re(2.0)]);
        let py = ComplexMatrix::projector(&[re(0.0), re(1.0), c(0.0, 1.0)]);
        let t = BipartiteMatrix::product(&px, &py).unwrap();
        let (pa, pb) = product_range(&t, &tol()).unwrap();
        assert!(pa.dist(&px) < 1e-12 && pb.dist(&py) < 1e-12);
        let (pa, pb) = product_range(&maximally_entangled(2), &tol()).unwrap();
        assert!(pa.dist(&ComplexMatrix::identity(2)) < 1e-12);
        assert!(pb.dist(&ComplexMatrix::identity(2)) < 1e-12);
        let mut r = seeded_rng(4);
        let t = BipartiteMatrix::new(2, 3, random_psd(&mut r, 6, 6)).unwrap();
        let (pa, pb) = product_range(&t, &tol()).unwrap();
        assert!(pa.dist(&ComplexMatrix::identity(2)) < 1e-10);
        assert!(pb.dist(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn partial_transposes_share_spectrum() {
        let bell = maximally_entangled(2);
        let t = Tolerances::default();
        let ea = crate::matcore::herm_eig(partial_transpose_a(&bell).mat(), &t).unwrap();
        let eb = crate::matcore::herm_eig(partial_transpose_b(&bell).mat(), &t).unwrap();
        for (x, y) in ea.values.iter().zip(&eb.values) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!((eb.values[3] + 0.5).abs() < 1e-14);
    }
}
