//! Shared fixtures for unit tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::corpus::{split_811, DatasetSplit, FeatureMatrix, RawInteraction};

pub(crate) fn toy_features(seed: u64, modality: &str, n_items: usize, width: usize) -> FeatureMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let values: Vec<f32> = (0..n_items * width)
        .map(|_| rng.gen_range(-1.0f32..1.0))
        .collect();
    FeatureMatrix::new(modality, n_items, width, values)
}

pub(crate) fn toy_split(seed: u64, n_users: usize, n_items: usize) -> DatasetSplit {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rs = Vec::new();
    for u in 0..n_users {
        let mut picked: Vec<u32> = (0..n_items as u32).collect();
        picked.shuffle(&mut rng);
        let c = 3 + (u % 3);
        for &i in picked.iter().take(c.min(n_items - 1)) {
            rs.push(RawInteraction {
                user_key: format!("u{u}"),
                item_key: format!("i{i}"),
            });
        }
    }
    // every item key occurs at least once
    for i in 0..n_items {
        rs.push(RawInteraction {
            user_key: "u0".into(),
            item_key: format!("i{i}"),
        });
    }
    let mut seen = std::collections::HashSet::new();
    rs.retain(|r| seen.insert((r.user_key.clone(), r.item_key.clone())));
    split_811(&rs, seed)
}
