mod common;

use keyframe_select::io::{decode_embeddings, encode_embeddings};
use keyframe_select::linalg::{dense_inversion_count, ridge_gram, SquareMatrix};
use keyframe_select::{
    diversity_gain, lambda_bud, lambda_var, logdet_diversity, marginal_gain, normalize_embeddings,
    plan_selection, rdmv_select, rdmv_select_with, EmbeddingSet, GateMode, GramInverseState,
    RelevanceVector, Scan, SelectOptions, SelectionConfig,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(common::base_seed() ^ seed)
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    // Selected sets stay within the embedding rank; see the acceptance suite.
    #[test]
    fn inverse_matches_ridge_gram(seed: u64, d in 2usize..=16, n_extra in 0usize..48, eps_exp in -6i32..=-2) {
        let mut rng = rng_for(seed);
        let n = d + n_extra;
        let e = common::unit_rows(&mut rng, n, d);
        let m = rng.random_range(1..=d.min(n));
        let frames = common::distinct(&mut rng, n, m);
        let epsilon = 10f64.powi(eps_exp);
        let mut state = GramInverseState::new(epsilon);
        for &i in &frames {
            state.extend_in_place(&e, i).unwrap();
            let a = ridge_gram(&e, state.selected(), epsilon);
            let res = state.inverse().matmul(&a).frobenius_distance(&SquareMatrix::identity(state.len()));
            prop_assert!(res < 1e-7, "residual {res}");
            prop_assert!(state.inverse().asymmetry() < 1e-9);
        }
    }

    #[test]
    fn logdet_agrees_with_independent_factorization(seed: u64, d in 1usize..=12, m in 1usize..=12, eps_exp in -6i32..=-1) {
        let mut rng = rng_for(seed);
        let n = m + 4;
        let e = common::unit_rows(&mut rng, n, d);
        let subset = common::distinct(&mut rng, n, m);
        let epsilon = 10f64.powi(eps_exp);
        let ours = logdet_diversity(&e, &subset, epsilon).unwrap();
        let g = DMatrix::from_fn(m, m, |a, b| {
            let s: f64 = e.row(subset[a]).iter().zip(e.row(subset[b])).map(|(x, y)| x * y).sum();
            s + if a == b { epsilon } else { 0.0 }
        });
        let chol = g.cholesky().expect("ridge Gram is SPD");
        let theirs: f64 = chol.l().diagonal().iter().map(|p| 2.0 * p.ln()).sum();
        prop_assert!((ours - theirs).abs() < 1e-8 * (1.0 + theirs.abs()), "{ours} vs {theirs}");
    }

    #[test]
    fn gain_is_logdet_difference(seed: u64, d in 3usize..=16, lambda in 0.0f64..=1.0, r_i in 0.0f64..=1.0) {
        let mut rng = rng_for(seed);
        let n = d + 6;
        let e = common::unit_rows(&mut rng, n, d);
        let m = rng.random_range(0..d);
        let picks = common::distinct(&mut rng, n, m + 1);
        let (subset, i) = (&picks[..m], picks[m]);
        let state = GramInverseState::from_frames(&e, subset, 1e-6).unwrap();
        let got = marginal_gain(&state, &e, i, r_i, lambda).unwrap() - r_i;
        let want = lambda * (logdet_diversity(&e, &picks, 1e-6).unwrap() - logdet_diversity(&e, subset, 1e-6).unwrap());
        prop_assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn diversity_gain_shrinks_on_supersets(seed: u64, d in 2usize..=16, n in 4usize..=40) {
        let mut rng = rng_for(seed);
        let e = common::unit_rows(&mut rng, n, d);
        let big = rng.random_range(1..n);
        let picks = common::distinct(&mut rng, n, big + 1);
        let small = rng.random_range(0..=big);
        let i = picks[big];
        let inner = GramInverseState::from_frames(&e, &picks[..small], 1e-6).unwrap();
        let outer = GramInverseState::from_frames(&e, &picks[..big], 1e-6).unwrap();
        let (gi, go) = (diversity_gain(&inner, &e, i).unwrap(), diversity_gain(&outer, &e, i).unwrap());
        prop_assert!(gi >= go - 1e-9, "{gi} < {go}");
    }

    #[test]
    fn selection_is_deterministic(seed: u64, n in 2usize..=64, d in 1usize..=16, k in 1usize..=10, lambda in 0.0f64..=1.0) {
        let mut rng = rng_for(seed);
        let e = common::unit_rows(&mut rng, n, d);
        let r = common::uniform_scores(&mut rng, n);
        let a = rdmv_select(&e, &r, k, lambda, 1e-6).unwrap();
        let b = rdmv_select(&e, &r, k, lambda, 1e-6).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.indices.len(), k.min(n));
        prop_assert!(a.indices.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exact_duplicates_are_not_reselected(seed: u64, n in 6usize..=20, k in 2usize..=6, lambda in 0.05f64..=1.0) {
        let mut rng = rng_for(seed);
        let d = 48;
        let base = common::unit_rows(&mut rng, n - 1, d);
        let mut data = base.as_slice().to_vec();
        data.extend_from_slice(base.row(0));
        let e = EmbeddingSet::new(n, d, data).unwrap();
        let dup = n - 1;
        let r_dup: f64 = rng.random();
        let mut scores: Vec<f64> = (0..n).map(|_| rng.random_range((r_dup - 0.5).max(0.0)..=1.0)).collect();
        scores[0] = 1.0;
        scores[dup] = r_dup;
        let r = RelevanceVector::new(scores).unwrap();
        // leave at least one non-duplicate candidate at every step
        let k = k.min(n - 2);
        let result = rdmv_select(&e, &r, k, lambda, 1e-6).unwrap();
        prop_assert_eq!(result.selection_order[0], 0);
        prop_assert!(!result.indices.contains(&dup), "{:?}", result.selection_order);
    }

    #[test]
    fn normalized_rows_have_unit_norm(seed: u64, n in 1usize..=20, d in 1usize..=32, scale in 1e-3f64..1e3) {
        let mut rng = rng_for(seed);
        let data: Vec<f64> = (0..n * d).map(|_| scale * (rng.random::<f64>() + 0.01)).collect();
        let unit = normalize_embeddings(&EmbeddingSet::new(n, d, data).unwrap()).unwrap();
        for row in unit.rows() {
            let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_terms_are_monotone(a in 0.0f64..50.0, b in 0.0f64..50.0, cv1 in 0.0f64..10.0, cv2 in 0.0f64..10.0) {
        let cfg = SelectionConfig::default();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(lambda_bud(lo, &cfg) <= lambda_bud(hi, &cfg));
        let (c_lo, c_hi) = (cv1.min(cv2), cv1.max(cv2));
        prop_assert!(lambda_var(c_lo, &cfg) >= lambda_var(c_hi, &cfg));
    }

    #[test]
    fn trusted_lambda_stays_in_range(seed: u64, n in 2usize..=80, k in 1usize..=16) {
        let mut rng = rng_for(seed);
        let e = common::unit_rows(&mut rng, n, 8);
        let mut scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        scores[0] = 0.9;
        let cfg = SelectionConfig::default().with_k(k);
        let (plan, result) = plan_selection(&e, &RelevanceVector::new(scores).unwrap(), &cfg).unwrap();
        prop_assert_eq!(result.gate, GateMode::RelevanceDiversity);
        prop_assert!(plan.lambda_final >= cfg.lambda_min && plan.lambda_final <= cfg.lambda_max);
    }

    #[test]
    fn gated_selection_ignores_scores(seed: u64, n in 2usize..=40, k in 1usize..=8) {
        let mut rng = rng_for(seed);
        let e = common::unit_rows(&mut rng, n, 6);
        let cfg = SelectionConfig::default().with_k(k);
        let mut draw = || RelevanceVector::new((0..n).map(|_| rng.random_range(0.0..cfg.tau)).collect()).unwrap();
        let (s1, s2) = (draw(), draw());
        let (_, a) = plan_selection(&e, &s1, &cfg).unwrap();
        let (_, b) = plan_selection(&e, &s2, &cfg).unwrap();
        prop_assert_eq!(a.gate, GateMode::DiversityOnly);
        prop_assert_eq!(a.indices, b.indices);
    }

    #[test]
    fn hot_path_never_inverts_densely(seed: u64, n in 2usize..=64, d in 1usize..=16, k in 1usize..=12) {
        let mut rng = rng_for(seed);
        let e = common::unit_rows(&mut rng, n, d);
        let r = common::uniform_scores(&mut rng, n);
        let opts = SelectOptions { scan: Scan::Sequential, ..Default::default() };
        let before = dense_inversion_count();
        rdmv_select_with(&e, &r, k, 0.5, 1e-6, &opts).unwrap();
        prop_assert_eq!(dense_inversion_count(), before);
    }

    #[test]
    fn embedding_files_round_trip(seed: u64, n in 1usize..=16, d in 1usize..=16) {
        let mut rng = rng_for(seed);
        // f32-representable so the 32-bit payload is lossless
        let data: Vec<f64> = (0..n * d).map(|_| f64::from(rng.random::<f32>() - 0.5)).collect();
        let e = EmbeddingSet::new(n, d, data).unwrap();
        prop_assert_eq!(decode_embeddings(&encode_embeddings(&e).unwrap()).unwrap(), e);
    }
}

#[cfg(feature = "parallel")]
proptest! {
    #![proptest_config(config())]

    #[test]
    fn parallel_scan_matches_sequential(seed: u64, n in 2usize..=200, d in 1usize..=24, k in 1usize..=16, lambda in 0.0f64..=1.0) {
        let mut rng = rng_for(seed);
        let e = common::unit_rows(&mut rng, n, d);
        let r = common::uniform_scores(&mut rng, n);
        let run = |scan| rdmv_select_with(&e, &r, k, lambda, 1e-6, &SelectOptions { scan, ..Default::default() }).unwrap();
        prop_assert_eq!(run(Scan::Sequential), run(Scan::Parallel));
    }
}
