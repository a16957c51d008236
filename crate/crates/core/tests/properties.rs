//! Randomized invariant checks over the public API.

use std::collections::HashSet;

use proptest::prelude::*;

use fastrec_core::corpus::{kcore_filter, split_811, FeatureMatrix, RawInteraction};
use fastrec_core::dense::Dense;
use fastrec_core::graphs::{
    build_modality_item_graph, build_normalized_bipartite, layer_sum_readout, propagate_once,
};
use fastrec_core::model::softmax;

fn raw(pairs: &[(u8, u8)]) -> Vec<RawInteraction> {
    let mut seen = HashSet::new();
    pairs
        .iter()
        .filter(|p| seen.insert(**p))
        .map(|&(u, i)| RawInteraction {
            user_key: format!("u{u}"),
            item_key: format!("i{i}"),
        })
        .collect()
}

fn pairs_strategy(max_len: usize) -> impl Strategy<Value = Vec<(u8, u8)>> {
    proptest::collection::vec((0u8..12, 0u8..12), 1..max_len)
}

proptest! {
    #[test]
    fn kcore_is_idempotent(pairs in pairs_strategy(60), k in 1usize..4) {
        let rs = raw(&pairs);
        let once = kcore_filter(&rs, k);
        let twice = kcore_filter(&once, k);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn kcore_degrees_meet_threshold(pairs in pairs_strategy(60), k in 1usize..4) {
        let rs = raw(&pairs);
        let kept = kcore_filter(&rs, k);
        let mut udeg = std::collections::HashMap::new();
        let mut ideg = std::collections::HashMap::new();
        for r in &kept {
            *udeg.entry(&r.user_key).or_insert(0usize) += 1;
            *ideg.entry(&r.item_key).or_insert(0usize) += 1;
        }
        prop_assert!(udeg.values().all(|&d| d >= k));
        prop_assert!(ideg.values().all(|&d| d >= k));
    }

    #[test]
    fn split_partitions_interactions(pairs in pairs_strategy(80), seed in 0u64..1000) {
        let rs = raw(&pairs);
        let split = split_811(&rs, seed);
        let total = split.train.nnz() + split.validation.nnz() + split.test.nnz();
        prop_assert_eq!(total, rs.len());
        for (u, i) in split.train.pairs() {
            prop_assert!(!split.validation.contains(u, i));
            prop_assert!(!split.test.contains(u, i));
        }
        for (u, i) in split.validation.pairs() {
            prop_assert!(!split.test.contains(u, i));
        }
        // every user keeps at least one training interaction
        for u in 0..split.n_users() as u32 {
            prop_assert!(!split.train.row(u).is_empty());
        }
    }

    #[test]
    fn split_is_seed_deterministic(pairs in pairs_strategy(60), seed in 0u64..1000) {
        let rs = raw(&pairs);
        let a = split_811(&rs, seed);
        let b = split_811(&rs, seed);
        prop_assert_eq!(a.train, b.train);
        prop_assert_eq!(a.validation, b.validation);
        prop_assert_eq!(a.test, b.test);
    }

    #[test]
    fn propagation_is_linear(
        pairs in pairs_strategy(40),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        seed in 0u64..100,
    ) {
        use rand::{Rng, SeedableRng};
        let rs = raw(&pairs);
        let split = split_811(&rs, 0);
        let g = build_normalized_bipartite(&split.train);
        let n = g.n_users() + g.n_items();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let x = Dense::from_fn(3, n, |_, _| rng.gen_range(-1.0..1.0));
        let y = Dense::from_fn(3, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut combo = x.clone();
        combo.scale(a);
        combo.axpy(b, &y);
        let lhs = propagate_once(&combo, &g).unwrap();
        let mut rhs = propagate_once(&x, &g).unwrap();
        rhs.scale(a);
        rhs.axpy(b, &propagate_once(&y, &g).unwrap());
        for (p, q) in lhs.data().iter().zip(rhs.data()) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn readout_layer1_matches_single_step(pairs in pairs_strategy(40), seed in 0u64..100) {
        use rand::{Rng, SeedableRng};
        let rs = raw(&pairs);
        let split = split_811(&rs, 0);
        let g = build_normalized_bipartite(&split.train);
        let n = g.n_users() + g.n_items();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let x = Dense::from_fn(2, n, |_, _| rng.gen_range(-1.0..1.0));
        let read = layer_sum_readout(&x, &g, 1, false).unwrap();
        let step = propagate_once(&x, &g).unwrap();
        for (p, q) in read.data().iter().zip(step.data()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn item_graph_rows_bounded_and_nonnegative(
        seed in 0u64..200,
        n_items in 2usize..12,
        width in 1usize..6,
        k in 1usize..6,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let values: Vec<f32> = (0..n_items * width).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        let f = FeatureMatrix::new("visual", n_items, width, values);
        let g = build_modality_item_graph(&f, k);
        for r in 0..n_items {
            prop_assert!(g.raw.row_nnz(r) <= k);
            let (_, vals) = g.norm.row(r);
            prop_assert!(vals.iter().all(|&v| v >= 0.0 && v.is_finite()));
        }
    }

    #[test]
    fn softmax_is_a_distribution(logits in proptest::collection::vec(-30.0f64..30.0, 1..6)) {
        let a = softmax(&logits);
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(a.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn softmax_shift_invariant(
        logits in proptest::collection::vec(-10.0f64..10.0, 1..6),
        shift in -50.0f64..50.0,
    ) {
        let a = softmax(&logits);
        let shifted: Vec<f64> = logits.iter().map(|&x| x + shift).collect();
        let b = softmax(&shifted);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}
