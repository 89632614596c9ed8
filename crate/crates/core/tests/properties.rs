use proptest::prelude::*;
use rand::Rng;

use sepdec::bipartite::{
    blocks, local_filter_b, partial_trace_a, partial_trace_b, reconstruct, swap_sides, BipartiteMatrix,
};
use sepdec::channels::{
    apply_channel_from_choi, choi_of_holevo, detect_cq, detect_qc, identity_choi, ChannelKind, HolevoForm,
};
use sepdec::decompose::{
    b_independent_form, b_orthogonal_form, marginal_rank_separability, ppt_check, CanonicalDecomposition,
    MarginalRankVerdict, Term,
};
use sepdec::jointdiag::joint_eigenspaces;
use sepdec::matcore::{kron, psd_eig, rank_tol, support_basis, ComplexMatrix, Tolerances};
use sepdec::toolkit::generators::{
    generate_b_independent, generate_commuting_family, generate_cq_form, generate_entangled_pure,
    generate_marginal_rank, generate_qc_form,
};
use sepdec::toolkit::random::{random_density, random_matrix, random_psd, random_unitary, seeded_rng};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn ranks_for(seed: u64, n: usize) -> Vec<usize> {
    let mut rng = seeded_rng(seed ^ 0x5eed);
    let p = rng.random_range(1..=n);
    let mut ranks = vec![1; p];
    let mut spare = n - p;
    for r in ranks.iter_mut() {
        let extra = rng.random_range(0..=spare);
        *r += extra;
        spare -= extra;
    }
    ranks
}

fn random_state(seed: u64, m: usize, n: usize) -> BipartiteMatrix {
    let mut rng = seeded_rng(seed);
    let rank = rng.random_range(1..=m * n);
    BipartiteMatrix::new(m, n, random_psd(&mut rng, m * n, rank)).unwrap()
}

fn reassemble(m: usize, n: usize, terms: &[Term]) -> BipartiteMatrix {
    let mat = terms
        .iter()
        .fold(ComplexMatrix::zeros(m * n, m * n), |acc, t| &acc + &kron(&t.a, &t.b));
    BipartiteMatrix::new(m, n, mat).unwrap()
}

/// Rank of the union of column spaces, from the SVD of the stacked support bases.
fn union_dimension(mats: &[ComplexMatrix]) -> usize {
    let n = mats[0].rows();
    let cols: Vec<Vec<_>> = mats
        .iter()
        .flat_map(|a| {
            let v = support_basis(a, &tol()).unwrap();
            (0..v.cols()).map(move |j| v.column(j)).collect::<Vec<_>>()
        })
        .collect();
    if cols.is_empty() {
        return 0;
    }
    ComplexMatrix::from_columns(n, &cols).as_nalgebra().rank(1e-8)
}

fn permutation(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for k in (1..n).rev() {
        idx.swap(k, rng.random_range(0..=k));
    }
    ComplexMatrix::from_fn(n, n, |i, j| {
        if idx[i] == j {
            sepdec::C64::new(1.0, 0.0)
        } else {
            sepdec::C64::default()
        }
    })
}

fn orthogonal_kind(k: ChannelKind) -> bool {
    matches!(k, ChannelKind::Qc | ChannelKind::Cq | ChannelKind::OrthogonalOnly)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // bipartite

    #[test]
    fn partial_traces_of_nonzero_states_are_nonzero(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        let t = random_state(seed, m, n);
        prop_assert!(partial_trace_a(&t).trace().re > 0.0);
        prop_assert!(partial_trace_b(&t).trace().re > 0.0);
    }

    #[test]
    fn filter_identities(seed in any::<u64>(), m in 1usize..5, n in 1usize..5) {
        let t = random_state(seed, m, n);
        let fp = local_filter_b(&t, &tol()).unwrap();
        prop_assert!(partial_trace_a(&fp.t_tilde).dist(&fp.p_b) <= 1e-10);
        let back = reconstruct(&fp, &tol()).unwrap();
        prop_assert!(back.mat().dist(t.mat()) <= 1e-10 * t.mat().norm_fro());
    }

    #[test]
    fn compression_commutes_with_b_trace(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        let t = random_state(seed, m, n);
        let x = random_matrix(&mut seeded_rng(seed.wrapping_add(1)), m, m);
        let lhs = partial_trace_b(&t.local_conjugate(&x, &ComplexMatrix::identity(n)).unwrap());
        let rhs = &(&x * &partial_trace_b(&t)) * &x.adjoint();
        prop_assert!(lhs.dist(&rhs) <= 1e-10 * rhs.norm_fro().max(1.0));
    }

    #[test]
    fn image_of_sum_is_sum_of_images(seed in any::<u64>(), n in 2usize..6, k in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let mats: Vec<ComplexMatrix> = (0..k)
            .map(|_| {
                let r = rng.random_range(1..n);
                random_psd(&mut rng, n, r)
            })
            .collect();
        let sum: ComplexMatrix = mats.iter().cloned().sum();
        prop_assert_eq!(rank_tol(&sum, &tol()).unwrap(), union_dimension(&mats));
    }

    // jointdiag

    #[test]
    fn filtered_support_is_marginal_projection(seed in any::<u64>(), m in 2usize..4, n in 2usize..5) {
        let (t, _) = generate_b_independent(m, n, &ranks_for(seed, n), seed).unwrap();
        let fp = local_filter_b(&t, &tol()).unwrap();
        let js = joint_eigenspaces(&blocks(&fp.t_tilde), &tol()).unwrap();
        prop_assert!(js.support.dist(&fp.p_b) <= tol().recon);
    }

    #[test]
    fn refinement_is_exact_and_maximal(seed in any::<u64>(), m in 1usize..4, n in 1usize..7) {
        let q = 1 + (seed as usize) % n.min(4);
        let fam = generate_commuting_family(m, n, q, seed).unwrap();
        let js = joint_eigenspaces(&fam.grid, &tol()).unwrap();
        let scale = fam.grid.scale();
        for (proj, lambda) in js.projections.iter().zip(&js.tuples) {
            for ((i, j), b) in fam.grid.iter() {
                let shifted = b - &ComplexMatrix::identity(n).scale(lambda.get(i, j));
                prop_assert!((&shifted * proj).norm_fro() <= tol().recon * scale);
            }
        }
        for (a, x) in js.tuples.iter().enumerate() {
            for y in &js.tuples[a + 1..] {
                prop_assert!((x - y).max_abs() > tol().cluster * scale);
            }
        }
    }

    #[test]
    fn relabeling_a_basis_keeps_projections(seed in any::<u64>(), m in 2usize..4, n in 2usize..5) {
        let (t, _) = generate_b_independent(m, n, &ranks_for(seed, n), seed).unwrap();
        let p = permutation(m, seed);
        let permuted = t.local_conjugate(&p, &ComplexMatrix::identity(n)).unwrap();
        let before = joint_eigenspaces(&blocks(&local_filter_b(&t, &tol()).unwrap().t_tilde), &tol()).unwrap();
        let after = joint_eigenspaces(&blocks(&local_filter_b(&permuted, &tol()).unwrap().t_tilde), &tol()).unwrap();
        prop_assert_eq!(before.q(), after.q());
        for q in &before.projections {
            let nearest = after.projections.iter().map(|r| q.dist(r)).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest <= 1e-8);
        }
    }

    // decompose

    #[test]
    fn canonical_list_is_stable(seed in any::<u64>(), m in 2usize..5, n in 2usize..5) {
        let (_, gt) = generate_b_independent(m, n, &ranks_for(seed, n), seed).unwrap();
        let mut rng = seeded_rng(seed.rotate_left(7));
        let mut terms = gt.terms.clone();
        terms.reverse();
        let terms: Vec<Term> = terms
            .into_iter()
            .map(|t| {
                let c: f64 = rng.random_range(0.1..10.0);
                Term { a: t.a.scale_real(c), b: t.b.scale_real(1.0 / c) }
            })
            .collect();
        let dec = b_independent_form(&reassemble(m, n, &terms), &tol()).unwrap();
        prop_assert!(dec.max_term_distance(&gt).unwrap() <= 1e-7);
    }

    #[test]
    fn independence_iff_filtered_orthogonality(seed in any::<u64>(), m in 2usize..4, n in 2usize..4, constructed in any::<bool>()) {
        let t = if constructed {
            generate_b_independent(m, n, &ranks_for(seed, n), seed).unwrap().0
        } else {
            random_state(seed, m, n)
        };
        let fp = local_filter_b(&t, &tol()).unwrap();
        let independent = b_independent_form(&t, &tol()).is_ok();
        let orthogonal = b_orthogonal_form(&fp.t_tilde, &tol()).is_ok();
        prop_assert_eq!(independent, orthogonal);
        if constructed {
            prop_assert!(independent);
        }
    }

    #[test]
    fn verdict_survives_local_invertible_filters(seed in any::<u64>(), m in 2usize..4, n in 2usize..4, kind in 0u8..3) {
        let t = match kind {
            0 => generate_b_independent(m, n, &ranks_for(seed, n), seed).unwrap().0,
            1 => generate_entangled_pure(m, n, 2, seed).unwrap(),
            _ => random_state(seed, m, n),
        };
        let mut rng = seeded_rng(seed.wrapping_mul(3));
        let u = random_unitary(&mut rng, m);
        let v = &random_psd(&mut rng, n, n) + &ComplexMatrix::identity(n).scale_real(0.5);
        let moved = t.local_conjugate(&u, &v).unwrap();
        prop_assert_eq!(b_independent_form(&t, &tol()).is_ok(), b_independent_form(&moved, &tol()).is_ok());
    }

    #[test]
    fn separable_verdicts_are_ppt(seed in any::<u64>(), m in 2usize..5, n in 2usize..5) {
        let p = 1 + (seed as usize) % n;
        let (t, _) = generate_marginal_rank(m, n, p, seed).unwrap();
        match marginal_rank_separability(&t, &tol()).unwrap() {
            MarginalRankVerdict::Separable(dec) => {
                prop_assert!(ppt_check(&t, &tol()));
                prop_assert!(ppt_check(&reassemble(m, n, &dec.terms), &tol()));
            }
            other => prop_assert!(false, "unexpected verdict {:?}", other),
        }
    }

    #[test]
    fn trace_bookkeeping(seed in any::<u64>(), m in 2usize..5, n in 2usize..5, scale in 0.01f64..100.0) {
        let (t, _) = generate_b_independent(m, n, &ranks_for(seed, n), seed).unwrap();
        let t = BipartiteMatrix::new(m, n, t.mat().scale_real(scale)).unwrap();
        let dec: CanonicalDecomposition = b_independent_form(&t, &tol()).unwrap();
        let sum: f64 = dec.terms.iter().map(|x| x.b.trace().re).sum();
        prop_assert!((sum - t.trace()).abs() <= 1e-10 * scale.max(1.0));
        prop_assert!(ppt_check(&reassemble(m, n, &dec.terms), &tol()));
    }

    // channels

    #[test]
    fn choi_matrices_are_psd(seed in any::<u64>(), m in 1usize..4, n in 1usize..4, k in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let pairs = (0..k)
            .map(|_| (random_psd(&mut rng, m, m), random_density(&mut rng, n, n)))
            .collect();
        let c = choi_of_holevo(&HolevoForm::new(m, n, pairs).unwrap()).unwrap();
        prop_assert!(psd_eig(c.mat(), &tol()).is_ok());
    }

    #[test]
    fn choi_application_matches_direct_evaluation(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        let h = generate_qc_form(m, n, seed).unwrap();
        let c = choi_of_holevo(&h).unwrap();
        let mut rng = seeded_rng(seed ^ 1);
        let x = random_matrix(&mut rng, m, m);
        let y = random_matrix(&mut rng, m, m);
        let via_choi = apply_channel_from_choi(&c, &x).unwrap();
        prop_assert!(via_choi.dist(&h.apply(&x).unwrap()) <= 1e-10);
        let sum = apply_channel_from_choi(&c, &(&x + &y)).unwrap();
        let parts = &via_choi + &apply_channel_from_choi(&c, &y).unwrap();
        prop_assert!(sum.dist(&parts) <= 1e-12);
    }

    #[test]
    fn qc_round_trip_on_random_inputs(seed in any::<u64>(), m in 1usize..5, n in 1usize..5) {
        let h = generate_qc_form(m, n, seed).unwrap();
        let class = detect_qc(&choi_of_holevo(&h).unwrap(), &tol()).unwrap();
        prop_assert_eq!(class.kind, ChannelKind::Qc);
        let w = class.witness.unwrap();
        prop_assert!(w.effect_sum().dist(&ComplexMatrix::identity(m)) <= 1e-9);
        let x = random_matrix(&mut seeded_rng(seed ^ 2), m, m);
        prop_assert!(w.apply(&x).unwrap().dist(&h.apply(&x).unwrap()) <= 1e-9);
    }

    #[test]
    fn cq_detection_mirrors_qc_of_swapped(seed in any::<u64>(), m in 2usize..4, n in 2usize..4, kind in 0u8..4) {
        let c = match kind {
            0 => choi_of_holevo(&generate_qc_form(m, n, seed).unwrap()).unwrap(),
            1 => choi_of_holevo(&generate_cq_form(m, n, seed).unwrap()).unwrap(),
            2 => identity_choi(m),
            _ => random_state(seed, m, n),
        };
        let cq = detect_cq(&c, &tol()).unwrap();
        let qc_swapped = detect_qc(&swap_sides(&c), &tol()).unwrap();
        prop_assert_eq!(orthogonal_kind(cq.kind), orthogonal_kind(qc_swapped.kind));
        if let Some(w) = cq.witness {
            prop_assert!(w.effect_sum().dist(&ComplexMatrix::identity(c.m())) <= 1e-9);
            let back = choi_of_holevo(&w).unwrap();
            prop_assert!(back.mat().dist(c.mat()) <= 1e-9);
        }
    }
}
