//! Canonical decompositions `T = Σ_γ A_γ ⊗ B_γ` of B-orthogonal and
//! B-independent states (and their A-side mirrors), pure-product refinement,
//! the marginal-rank separability test, PPT, and the face-structure report.

use serde::{Deserialize, Serialize};

use crate::bipartite::{
    blocks, local_filter_b, partial_trace_a, partial_transpose_b, swap_sides, BipartiteMatrix,
};
use crate::error::{Error, FamilyDiagnostics, Result};
use crate::jointdiag::{canonical_order, joint_eigenspaces, JointEigenstructure};
use crate::matcore::{
    herm_eig, joint_column_rank, kron, psd_sqrt, rank_tol, ComplexMatrix, Tolerances, C64,
};

/// Which tensor factor carries the independent images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Side::A),
            "B" | "b" => Ok(Side::B),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown side {other:?}"),
            }),
        }
    }
}

/// One summand `a ⊗ b` (`a` is `m × m`, `b` is `n × n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

/// `T = Σ_γ a_γ ⊗ b_γ` where, for side B, every `a_γ` has unit trace, the
/// `a_γ` are distinct and the images of the `b_γ` are independent. Side A
/// swaps the roles.
#[derive(Debug, Clone)]
pub struct CanonicalDecomposition {
    pub side: Side,
    pub m: usize,
    pub n: usize,
    pub terms: Vec<Term>,
}

impl CanonicalDecomposition {
    /// Wraps user-supplied terms after checking shapes; no mathematical checks.
    pub fn from_terms(side: Side, m: usize, n: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.a.rows() != m || t.a.cols() != m || t.b.rows() != n || t.b.cols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "term factors must be {m}x{m} and {n}x{n}"
                )));
            }
            if !t.a.is_finite() || !t.b.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { side, m, n, terms })
    }

    pub fn p(&self) -> usize {
        self.terms.len()
    }

    /// The unit-trace factor of term `γ`.
    pub fn normalized(&self, gamma: usize) -> &ComplexMatrix {
        match self.side {
            Side::B => &self.terms[gamma].a,
            Side::A => &self.terms[gamma].b,
        }
    }

    /// The factor of term `γ` on the independent side.
    pub fn independent(&self, gamma: usize) -> &ComplexMatrix {
        match self.side {
            Side::B => &self.terms[gamma].b,
            Side::A => &self.terms[gamma].a,
        }
    }

    /// `Σ_γ a_γ ⊗ b_γ`.
    pub fn reassemble(&self) -> ComplexMatrix {
        let d = self.m * self.n;
        self.terms
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, t| &acc + &kron(&t.a, &t.b))
    }

    /// `‖T − Σ a_γ ⊗ b_γ‖_F / ‖T‖_F`.
    pub fn relative_residual(&self, t: &BipartiteMatrix) -> f64 {
        let norm = t.mat().norm_fro();
        let r = self.reassemble().dist(t.mat());
        if norm == 0.0 {
            r
        } else {
            r / norm
        }
    }

    /// Puts the terms in canonical order (descending by the normalized factor).
    pub fn canonicalize(&mut self, eps: f64) {
        let keys: Vec<ComplexMatrix> = (0..self.p()).map(|g| self.normalized(g).clone()).collect();
        let order = canonical_order(&keys, eps);
        self.terms = order.iter().map(|&k| self.terms[k].clone()).collect();
    }

    /// Largest entrywise distance between corresponding factors of two
    /// decompositions with the same number of terms.
    pub fn max_term_distance(&self, other: &Self) -> Option<f64> {
        if self.p() != other.p() || self.m != other.m || self.n != other.n {
            return None;
        }
        Some(
            self.terms
                .iter()
                .zip(&other.terms)
                .map(|(x, y)| (&x.a - &y.a).max_abs().max((&x.b - &y.b).max_abs()))
                .fold(0.0, f64::max),
        )
    }
}

fn terms_from_structure(
    js: &JointEigenstructure,
    mut b_factor: impl FnMut(&ComplexMatrix) -> ComplexMatrix,
) -> Result<Vec<Term>> {
    let mut terms = Vec::with_capacity(js.q());
    for (q, lambda) in js.projections.iter().zip(&js.tuples) {
        let s = lambda.trace().re;
        if !(s > 0.0) {
            return Err(Error::Numerical(format!(
                "joint eigenspace with non-positive tuple trace {s:.3e}"
            )));
        }
        terms.push(Term {
            a: lambda.scale_real(1.0 / s).hermitian_part(),
            b: b_factor(q).scale_real(s),
        });
    }
    Ok(terms)
}

fn check_residual(dec: &CanonicalDecomposition, t: &BipartiteMatrix, tol: &Tolerances) -> Result<()> {
    let r = dec.relative_residual(t);
    if r > tol.recon {
        return Err(Error::Numerical(format!(
            "reconstruction residual {r:.3e} exceeds {:.1e}",
            tol.recon
        )));
    }
    Ok(())
}

/// Canonical form `T = Σ A_γ ⊗ c_γ Q_γ` of a B-orthogonal state, with the `Q_γ`
/// the joint eigenspace projections of the blocks of `T`.
pub fn b_orthogonal_form(t: &BipartiteMatrix, tol: &Tolerances) -> Result<CanonicalDecomposition> {
    t.check_state(tol)?;
    let js = joint_eigenspaces(&blocks(t), tol).map_err(|e| match e {
        Error::NotCommutingFamily(d) => Error::NotBOrthogonal(d),
        other => other,
    })?;
    let terms = terms_from_structure(&js, |q| q.clone())?;
    let mut dec = CanonicalDecomposition {
        side: Side::B,
        m: t.m(),
        n: t.n(),
        terms,
    };
    dec.canonicalize(tol.cluster);
    check_residual(&dec, t, tol)?;
    Ok(dec)
}

/// Canonical form of a B-independent state: filter the B side, split the
/// filtered blocks into joint eigenspaces `Q_γ`, and map them back with
/// `B_γ = T_B^{1/2} Q_γ T_B^{1/2}`.
pub fn b_independent_form(
    t: &BipartiteMatrix,
    tol: &Tolerances,
) -> Result<CanonicalDecomposition> {
    let fp = local_filter_b(t, tol)?;
    let js = joint_eigenspaces(&blocks(&fp.t_tilde), tol).map_err(|e| match e {
        Error::NotCommutingFamily(d) => Error::NotBIndependent(d),
        other => other,
    })?;
    let support_gap = js.support.dist(&fp.p_b);
    if support_gap > tol.cluster * js.support.norm_fro().max(1.0) {
        return Err(Error::Numerical(format!(
            "joint eigenspaces do not cover the marginal support (gap {support_gap:.3e})"
        )));
    }
    let root = psd_sqrt(&fp.t_b, tol)?;
    let terms = terms_from_structure(&js, |q| (&(&root * q) * &root).hermitian_part())?;
    let mut dec = CanonicalDecomposition {
        side: Side::B,
        m: t.m(),
        n: t.n(),
        terms,
    };
    dec.canonicalize(tol.cluster);
    check_residual(&dec, t, tol)?;
    Ok(dec)
}

/// B-independent form for side B; for side A the same pipeline runs on the
/// swapped matrix and the term roles are swapped back.
pub fn independent_form(
    t: &BipartiteMatrix,
    side: Side,
    tol: &Tolerances,
) -> Result<CanonicalDecomposition> {
    match side {
        Side::B => b_independent_form(t, tol),
        Side::A => {
            let swapped = b_independent_form(&swap_sides(t), tol).map_err(|e| match e {
                Error::NotBIndependent(d) => Error::NotAIndependent(d),
                other => other,
            })?;
            Ok(CanonicalDecomposition {
                side: Side::A,
                m: t.m(),
                n: t.n(),
                terms: swapped
                    .terms
                    .into_iter()
                    .map(|term| Term {
                        a: term.b,
                        b: term.a,
                    })
                    .collect(),
            })
        }
    }
}

/// Spectral pieces `(λ, v)` of a Hermitian factor above the rank cutoff.
pub(crate) fn spectral_pieces(m: &ComplexMatrix, tol: &Tolerances) -> Vec<(f64, Vec<C64>)> {
    let eig = herm_eig(&m.hermitian_part(), tol).expect("factor is square and finite");
    let max = eig.max_value();
    if max <= 0.0 {
        return vec![];
    }
    eig.values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > tol.rank * max)
        .map(|(k, &v)| (v, eig.vector(k)))
        .collect()
}

/// Number of eigenvalues of the Hermitian part above `tol.rank · λ_max`.
pub(crate) fn numerical_rank(m: &ComplexMatrix, tol: &Tolerances) -> usize {
    spectral_pieces(m, tol).len()
}

/// `weight · P_x ⊗ P_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureProductTerm {
    pub weight: f64,
    pub x: Vec<C64>,
    pub y: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct PureProductDecomposition {
    pub terms: Vec<PureProductTerm>,
    /// Whether this is the only decomposition of `T` into pure product states.
    pub unique: bool,
}

impl PureProductDecomposition {
    pub fn reassemble(&self) -> ComplexMatrix {
        let d = self.terms.first().map(|t| t.x.len() * t.y.len()).unwrap_or(0);
        self.terms.iter().fold(ComplexMatrix::zeros(d, d), |acc, t| {
            let px = ComplexMatrix::projector(&t.x);
            let py = ComplexMatrix::projector(&t.y);
            &acc + &kron(&px, &py).scale_real(t.weight)
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }
}

/// Splits every factor of a canonical decomposition spectrally into rank-one
/// projections.
pub fn pure_product_decomposition(
    dec: &CanonicalDecomposition,
    tol: &Tolerances,
) -> PureProductDecomposition {
    let mut terms = Vec::new();
    for t in &dec.terms {
        let a = spectral_pieces(&t.a, tol);
        let b = spectral_pieces(&t.b, tol);
        for (alpha, x) in &a {
            for (beta, y) in &b {
                terms.push(PureProductTerm {
                    weight: alpha * beta,
                    x: x.clone(),
                    y: y.clone(),
                });
            }
        }
    }
    PureProductDecomposition {
        terms,
        unique: is_unique_pure_decomposition(dec, tol),
    }
}

/// The pure-product decomposition is unique iff every factor of the canonical
/// decomposition has rank one.
pub fn is_unique_pure_decomposition(dec: &CanonicalDecomposition, tol: &Tolerances) -> bool {
    dec.terms
        .iter()
        .all(|t| numerical_rank(&t.a, tol) == 1 && numerical_rank(&t.b, tol) == 1)
}

#[derive(Debug, Clone)]
pub enum MarginalRankVerdict {
    Separable(CanonicalDecomposition),
    Entangled(FamilyDiagnostics),
    /// `rank T ≠ rank T_B`; the test says nothing about such states.
    NotMarginalRank { rank_t: usize, rank_t_b: usize },
}

/// Separability test for states with `rank T = rank T_B`.
pub fn marginal_rank_separability(
    t: &BipartiteMatrix,
    tol: &Tolerances,
) -> Result<MarginalRankVerdict> {
    t.check_state(tol)?;
    let rank_t = rank_tol(t.mat(), tol)?;
    let rank_t_b = rank_tol(&partial_trace_a(t).hermitian_part(), tol)?;
    if rank_t != rank_t_b {
        return Ok(MarginalRankVerdict::NotMarginalRank { rank_t, rank_t_b });
    }
    match b_independent_form(t, tol) {
        Ok(dec) => Ok(MarginalRankVerdict::Separable(dec)),
        Err(Error::NotBIndependent(d)) => Ok(MarginalRankVerdict::Entangled(d)),
        Err(e) => Err(e),
    }
}

/// Smallest eigenvalue of the partial transpose.
pub fn ppt_min_eigenvalue(t: &BipartiteMatrix, tol: &Tolerances) -> Result<f64> {
    let eig = herm_eig(partial_transpose_b(t).mat(), tol)?;
    Ok(eig.values.last().copied().unwrap_or(0.0))
}

/// Positive-partial-transpose test at `tol.psd` (relative to the largest eigenvalue).
pub fn ppt_check(t: &BipartiteMatrix, tol: &Tolerances) -> bool {
    match herm_eig(partial_transpose_b(t).mat(), tol) {
        Ok(eig) => {
            let max = eig.max_value().max(0.0);
            let min = eig.values.last().copied().unwrap_or(0.0);
            min >= -tol.psd * max
        }
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceMode {
    /// Normalized factors with pairwise disjoint images.
    DisjointA,
    /// Normalized factors of rank one; summands merged by coinciding `P_x`.
    RankOneA,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceSummand {
    /// Indices of the canonical terms merged into this summand.
    pub terms: Vec<usize>,
    pub rank_a: usize,
    pub rank_b: usize,
    /// Real dimension of the face generated by the summand, when known.
    pub face_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceReport {
    pub prerequisites_met: bool,
    pub mode: FaceMode,
    pub summands: Vec<FaceSummand>,
}

/// Structural description of the face of the separable states generated by
/// `T`, read off its canonical decomposition.
pub fn face_summary(dec: &CanonicalDecomposition, tol: &Tolerances) -> FaceReport {
    let p = dec.p();
    let norm_ranks: Vec<usize> = (0..p).map(|g| numerical_rank(dec.normalized(g), tol)).collect();
    let ind_ranks: Vec<usize> = (0..p).map(|g| numerical_rank(dec.independent(g), tol)).collect();
    let (a_ranks, b_ranks) = match dec.side {
        Side::B => (&norm_ranks, &ind_ranks),
        Side::A => (&ind_ranks, &norm_ranks),
    };

    let independent = {
        let refs: Vec<&ComplexMatrix> = (0..p).map(|g| dec.independent(g)).collect();
        p == 0 || independent_images(&refs, tol)
    };
    let per_term = || -> Vec<FaceSummand> {
        (0..p)
            .map(|g| FaceSummand {
                terms: vec![g],
                rank_a: a_ranks[g],
                rank_b: b_ranks[g],
                face_dim: None,
            })
            .collect()
    };

    if independent && norm_ranks.iter().all(|&r| r == 1) {
        // merge terms whose rank-one normalized factors coincide
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for g in 0..p {
            let x = dec.normalized(g);
            match groups
                .iter_mut()
                .find(|grp| dec.normalized(grp[0]).dist(x) <= tol.cluster)
            {
                Some(grp) => grp.push(g),
                None => groups.push(vec![g]),
            }
        }
        let summands = groups
            .into_iter()
            .map(|grp| {
                let sum = grp
                    .iter()
                    .map(|&g| dec.independent(g).clone())
                    .sum::<ComplexMatrix>();
                let r = numerical_rank(&sum, tol);
                let (rank_a, rank_b) = match dec.side {
                    Side::B => (1, r),
                    Side::A => (r, 1),
                };
                FaceSummand {
                    terms: grp,
                    rank_a,
                    rank_b,
                    face_dim: Some(r * r - 1),
                }
            })
            .collect();
        return FaceReport {
            prerequisites_met: true,
            mode: FaceMode::RankOneA,
            summands,
        };
    }

    let disjoint = (0..p).all(|a| {
        (a + 1..p).all(|b| {
            let x = dec.normalized(a);
            let y = dec.normalized(b);
            joint_column_rank(&[x, y], tol)
                .map(|r| r == norm_ranks[a] + norm_ranks[b])
                .unwrap_or(false)
        })
    });
    if independent && disjoint {
        FaceReport {
            prerequisites_met: true,
            mode: FaceMode::DisjointA,
            summands: per_term(),
        }
    } else {
        FaceReport {
            prerequisites_met: false,
            mode: FaceMode::None,
            summands: per_term(),
        }
    }
}

/// Images of PSD matrices are independent iff `rank Σ X_i = Σ rank X_i`.
pub fn independent_images(mats: &[&ComplexMatrix], tol: &Tolerances) -> bool {
    if mats.is_empty() {
        return true;
    }
    let sum = mats.iter().map(|m| (*m).clone()).sum::<ComplexMatrix>();
    let total: usize = mats.iter().map(|m| numerical_rank(m, tol)).sum();
    numerical_rank(&sum, tol) == total
}
