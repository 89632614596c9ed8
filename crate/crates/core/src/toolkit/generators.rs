//! Seeded ground-truth instances.
//!
//! Every generator resamples until the instance is well posed for the default
//! tolerances: distinct factors differ by more than `1e-3` entrywise, and no
//! pair of corresponding entries differs by an amount inside `(1e-9, 1e-4)`,
//! where the eigenvalue clustering would be ambiguous. Independent images come
//! from a random frame with condition number at most [`MAX_FRAME_CONDITION`].

use rand::Rng;

use crate::bipartite::{BipartiteMatrix, BlockGrid};
use crate::channels::HolevoForm;
use crate::decompose::{CanonicalDecomposition, Side, Term};
use crate::error::{Error, Result};
use crate::jointdiag::canonical_order;
use crate::matcore::{kron, kron_vec, pinv_sqrt, ComplexMatrix, Tolerances, C64};
use crate::toolkit::random::{
    random_density, random_matrix, random_orthonormal, random_psd, random_unit_vector,
    random_unitary, seeded_rng,
};

pub const MAX_FRAME_CONDITION: f64 = 1e2;
const MAX_ATTEMPTS: usize = 10_000;
const MIN_SEPARATION: f64 = 1e-3;
const AMBIGUOUS_BAND: (f64, f64) = (1e-9, 1e-4);

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleRanks(msg.into())
}

/// Pairwise distinct beyond [`MIN_SEPARATION`], and no entry difference
/// inside the ambiguous band.
pub fn well_separated(mats: &[ComplexMatrix]) -> bool {
    let ambiguous = |d: f64| d > AMBIGUOUS_BAND.0 && d < AMBIGUOUS_BAND.1;
    for (k, a) in mats.iter().enumerate() {
        for b in &mats[k + 1..] {
            let diff = a - b;
            if diff.max_abs() <= MIN_SEPARATION {
                return false;
            }
            if diff
                .row_major()
                .iter()
                .any(|z| ambiguous(z.re.abs()) || ambiguous(z.im.abs()))
            {
                return false;
            }
        }
    }
    true
}

fn sample<R: Rng, T>(rng: &mut R, mut draw: impl FnMut(&mut R) -> Option<T>) -> Result<T> {
    for _ in 0..MAX_ATTEMPTS {
        if let Some(x) = draw(rng) {
            return Ok(x);
        }
    }
    Err(Error::Numerical(
        "generator failed to draw a well-posed instance".into(),
    ))
}

fn condition_number(g: &ComplexMatrix) -> f64 {
    let sv = g.as_nalgebra().clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `n × k` Gaussian frame (`k ≤ n`) with condition number within bounds.
fn random_frame<R: Rng>(rng: &mut R, n: usize, k: usize) -> Result<ComplexMatrix> {
    sample(rng, |rng| {
        let g = random_matrix(rng, n, k);
        (condition_number(&g) <= MAX_FRAME_CONDITION).then_some(g)
    })
}

/// PSD matrices of the given ranks with independent images: the frame columns
/// are split into consecutive groups and each group is weighted by `[0.5, 1.5]`.
fn independent_family<R: Rng>(rng: &mut R, n: usize, ranks: &[usize]) -> Result<Vec<ComplexMatrix>> {
    let total: usize = ranks.iter().sum();
    let frame = random_frame(rng, n, total)?;
    let mut out = Vec::with_capacity(ranks.len());
    let mut offset = 0;
    for &r in ranks {
        let cols: Vec<usize> = (offset..offset + r).collect();
        let g = frame.select_columns(&cols);
        let w: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..1.5)).collect();
        let b = &(&g * &ComplexMatrix::from_real_diagonal(&w)) * &g.adjoint();
        out.push(b.hermitian_part());
        offset += r;
    }
    Ok(out)
}

fn check_ranks(n: usize, ranks: &[usize]) -> Result<()> {
    if ranks.is_empty() {
        return Err(infeasible("at least one term is required"));
    }
    if ranks.contains(&0) {
        return Err(infeasible("ranks must be at least 1"));
    }
    let total: usize = ranks.iter().sum();
    if total > n {
        return Err(infeasible(format!("ranks sum to {total} > n = {n}")));
    }
    Ok(())
}

fn assemble(m: usize, n: usize, terms: &[Term]) -> Result<BipartiteMatrix> {
    let d = m * n;
    let mat = terms
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, t| &acc + &kron(&t.a, &t.b));
    BipartiteMatrix::new(m, n, mat.hermitian_part())
}

fn ground_truth(m: usize, n: usize, terms: Vec<Term>) -> Result<CanonicalDecomposition> {
    let mut gt = CanonicalDecomposition::from_terms(Side::B, m, n, terms)?;
    gt.canonicalize(Tolerances::default().cluster);
    Ok(gt)
}

/// Unit-trace `T = Σ A_γ ⊗ B_γ` with random distinct densities `A_γ` and PSD
/// `B_γ` of the given ranks with independent images.
pub fn generate_b_independent(
    m: usize,
    n: usize,
    ranks: &[usize],
    seed: u64,
) -> Result<(BipartiteMatrix, CanonicalDecomposition)> {
    generate_b_independent_with(m, n, ranks, None, seed)
}

/// As [`generate_b_independent`], optionally prescribing the ranks of the `A_γ`.
pub fn generate_b_independent_with(
    m: usize,
    n: usize,
    ranks: &[usize],
    a_ranks: Option<&[usize]>,
    seed: u64,
) -> Result<(BipartiteMatrix, CanonicalDecomposition)> {
    if m == 0 || n == 0 {
        return Err(infeasible("dimensions must be positive"));
    }
    check_ranks(n, ranks)?;
    let p = ranks.len();
    if m == 1 && p > 1 {
        return Err(infeasible("m = 1 admits a single unit-trace factor"));
    }
    let a_ranks: Vec<usize> = match a_ranks {
        Some(r) if r.len() != p => return Err(infeasible("one A-rank per term is required")),
        Some(r) if r.iter().any(|&k| k == 0 || k > m) => {
            return Err(infeasible(format!("A-ranks must lie in 1..={m}")))
        }
        Some(r) => r.to_vec(),
        None => Vec::new(),
    };
    let mut rng = seeded_rng(seed);
    let a: Vec<ComplexMatrix> = sample(&mut rng, |rng| {
        let a: Vec<ComplexMatrix> = (0..p)
            .map(|g| {
                let r = a_ranks.get(g).copied().unwrap_or_else(|| rng.random_range(1..=m));
                random_density(rng, m, r).hermitian_part()
            })
            .collect();
        well_separated(&a).then_some(a)
    })?;
    let b = independent_family(&mut rng, n, ranks)?;
    let total: f64 = b.iter().map(|x| x.trace().re).sum();
    let terms: Vec<Term> = a
        .into_iter()
        .zip(b)
        .map(|(a, b)| Term { a, b: b.scale_real(1.0 / total) })
        .collect();
    let t = assemble(m, n, &terms)?;
    Ok((t, ground_truth(m, n, terms)?))
}

/// `T = Σ λ_γ P_{x_γ} ⊗ P_{y_γ}` with distinct `P_x`, linearly independent unit
/// `y_γ` and random convex weights, so `rank T = rank T_B = p`.
pub fn generate_marginal_rank(
    m: usize,
    n: usize,
    p: usize,
    seed: u64,
) -> Result<(BipartiteMatrix, CanonicalDecomposition)> {
    if p == 0 || p > n {
        return Err(infeasible(format!("need 1 <= p <= n = {n}, got p = {p}")));
    }
    if m == 1 && p > 1 {
        return Err(infeasible("m = 1 admits a single pure state"));
    }
    let mut rng = seeded_rng(seed);
    let px: Vec<ComplexMatrix> = sample(&mut rng, |rng| {
        let px: Vec<ComplexMatrix> = (0..p)
            .map(|_| ComplexMatrix::projector(&random_unit_vector(rng, m)))
            .collect();
        well_separated(&px).then_some(px)
    })?;
    let frame = random_frame(&mut rng, n, p)?;
    let raw: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let terms: Vec<Term> = px
        .into_iter()
        .enumerate()
        .map(|(g, a)| {
            let y = frame.column(g);
            let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let y: Vec<C64> = y.into_iter().map(|z| z / norm).collect();
            Term { a, b: ComplexMatrix::projector(&y).scale_real(raw[g] / sum) }
        })
        .collect();
    let t = assemble(m, n, &terms)?;
    Ok((t, ground_truth(m, n, terms)?))
}

fn entangled_pure(m: usize, n: usize, r: usize, seed: u64, uniform: bool) -> Result<BipartiteMatrix> {
    if r < 2 || r > m.min(n) {
        return Err(infeasible(format!(
            "Schmidt rank must lie in 2..={}",
            m.min(n)
        )));
    }
    let mut rng = seeded_rng(seed);
    let u = random_orthonormal(&mut rng, m, r);
    let v = random_orthonormal(&mut rng, n, r);
    let raw: Vec<f64> = if uniform {
        vec![1.0; r]
    } else {
        (0..r).map(|_| rng.random_range(0.2..1.0)).collect()
    };
    let norm = raw.iter().map(|s| s * s).sum::<f64>().sqrt();
    let mut psi = vec![C64::default(); m * n];
    for k in 0..r {
        for (p, z) in psi.iter_mut().zip(kron_vec(&u[k], &v[k])) {
            *p += z * (raw[k] / norm);
        }
    }
    BipartiteMatrix::new(m, n, ComplexMatrix::projector(&psi))
}

/// `P_ψ` for `ψ = Σ_k s_k u_k ⊗ v_k` with random orthonormal `u`, `v` and random
/// positive Schmidt weights.
pub fn generate_entangled_pure(m: usize, n: usize, r: usize, seed: u64) -> Result<BipartiteMatrix> {
    entangled_pure(m, n, r, seed, false)
}

/// As [`generate_entangled_pure`] with equal Schmidt weights.
pub fn generate_entangled_pure_uniform(
    m: usize,
    n: usize,
    r: usize,
    seed: u64,
) -> Result<BipartiteMatrix> {
    entangled_pure(m, n, r, seed, true)
}

/// Trace-preserving QC form: outputs are `q ≤ n` rank-one projections onto
/// random orthonormal vectors; effects `F_k = S^{-1/2} G_k S^{-1/2}` with
/// random PSD `G_k` and `S = Σ G_k`.
pub fn generate_qc_form(m: usize, n: usize, seed: u64) -> Result<HolevoForm> {
    if m == 0 || n == 0 {
        return Err(infeasible("dimensions must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let q = if rng.random_bool(0.5) { n } else { rng.random_range(1..=n) };
    let tol = Tolerances::default();
    let effects: Vec<ComplexMatrix> = sample(&mut rng, |rng| {
        let g: Vec<ComplexMatrix> = (0..q)
            .map(|_| {
                let r = rng.random_range(1..=m);
                random_psd(rng, m, r)
            })
            .collect();
        let s: ComplexMatrix = g.iter().cloned().sum();
        let root = pinv_sqrt(&s.hermitian_part(), &tol).ok()?;
        if crate::matcore::rank_tol(&s.hermitian_part(), &tol).ok()? < m {
            return None;
        }
        let f: Vec<ComplexMatrix> = g
            .iter()
            .map(|gk| (&(&root * gk) * &root).hermitian_part())
            .collect();
        well_separated(&f).then_some(f)
    })?;
    let ys = random_orthonormal(&mut rng, n, q);
    let pairs = effects
        .into_iter()
        .zip(ys)
        .map(|(f, y)| (f, ComplexMatrix::projector(&y)))
        .collect();
    HolevoForm::new(m, n, pairs)
}

/// CQ form: effects are the projections onto a random orthonormal basis of
/// `C^m`; outputs are random densities.
pub fn generate_cq_form(m: usize, n: usize, seed: u64) -> Result<HolevoForm> {
    if m == 0 || n == 0 {
        return Err(infeasible("dimensions must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let xs = random_orthonormal(&mut rng, m, m);
    let outputs: Vec<ComplexMatrix> = sample(&mut rng, |rng| {
        let r: Vec<ComplexMatrix> = (0..m)
            .map(|_| {
                let k = rng.random_range(1..=n);
                random_density(rng, n, k).hermitian_part()
            })
            .collect();
        well_separated(&r).then_some(r)
    })?;
    let pairs = xs
        .iter()
        .zip(outputs)
        .map(|(x, r)| (ComplexMatrix::projector(x), r))
        .collect();
    HolevoForm::new(m, n, pairs)
}

/// Independent PSD matrices on `C^n` with the given ranks.
pub fn generate_independent_family(n: usize, ranks: &[usize], seed: u64) -> Result<Vec<ComplexMatrix>> {
    check_ranks(n, ranks)?;
    independent_family(&mut seeded_rng(seed), n, ranks)
}

/// A commuting normal family `T_ij = Σ_γ λ_γ^{ij} Q_γ` on `C^n` together with
/// its ground truth.
#[derive(Debug, Clone)]
pub struct CommutingFamily {
    pub grid: BlockGrid,
    /// Joint eigenspace projections, in canonical order of the tuples.
    pub projections: Vec<ComplexMatrix>,
    pub tuples: Vec<ComplexMatrix>,
}

/// Random partition of `C^n` into `q` joint eigenspaces with random complex
/// `m × m` eigenvalue tuples.
pub fn generate_commuting_family(m: usize, n: usize, q: usize, seed: u64) -> Result<CommutingFamily> {
    if m == 0 || q == 0 || q > n {
        return Err(infeasible(format!("need m >= 1 and 1 <= q <= n = {n}")));
    }
    let mut rng = seeded_rng(seed);
    let mut sizes = vec![1usize; q];
    for _ in q..n {
        let k = rng.random_range(0..q);
        sizes[k] += 1;
    }
    let u = random_unitary(&mut rng, n);
    let mut projections = Vec::with_capacity(q);
    let mut offset = 0;
    for &s in &sizes {
        let cols: Vec<usize> = (offset..offset + s).collect();
        let v = u.select_columns(&cols);
        projections.push((&v * &v.adjoint()).hermitian_part());
        offset += s;
    }
    let tuples: Vec<ComplexMatrix> = sample(&mut rng, |rng| {
        let t: Vec<ComplexMatrix> = (0..q).map(|_| random_matrix(rng, m, m)).collect();
        well_separated(&t).then_some(t)
    })?;
    let order = canonical_order(&tuples, Tolerances::default().cluster);
    let projections: Vec<ComplexMatrix> = order.iter().map(|&k| projections[k].clone()).collect();
    let tuples: Vec<ComplexMatrix> = order.iter().map(|&k| tuples[k].clone()).collect();
    let grid = BlockGrid::from_fn(m, n, |i, j| {
        projections
            .iter()
            .zip(&tuples)
            .fold(ComplexMatrix::zeros(n, n), |acc, (p, t)| &acc + &p.scale(t.get(i, j)))
    })?;
    Ok(CommutingFamily { grid, projections, tuples })
}
