//! Community-structured synthetic corpora for integration tests and demos.
//!
//! Users and items are partitioned into communities; each user interacts
//! almost exclusively inside their own community, and item features for
//! every modality are the community centroid plus Gaussian noise. A
//! learnable signal therefore exists in both the interaction graph and
//! the features.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{split_811, DatasetSplit, FeatureMatrix, RawInteraction};

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub n_communities: usize,
    /// mean interactions per user, all drawn inside the community
    pub interactions_per_user: usize,
    /// probability of one extra out-of-community interaction
    pub crossover: f64,
    /// (modality name, feature width)
    pub modalities: Vec<(String, usize)>,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_users: 300,
            n_items: 150,
            n_communities: 3,
            interactions_per_user: 12,
            crossover: 0.1,
            modalities: vec![("visual".into(), 16), ("textual".into(), 12)],
            noise: 0.3,
            seed: 0,
        }
    }
}

fn community_of(index: usize, total: usize, communities: usize) -> usize {
    index * communities / total
}

fn community_members(total: usize, communities: usize, c: usize) -> std::ops::Range<usize> {
    (c * total).div_ceil(communities)..((c + 1) * total).div_ceil(communities)
}

/// Raw interactions plus per-modality features for a synthetic corpus. The
/// feature rows follow item index order, so they line up with the id maps
/// a later 5-core pass produces only if nothing is pruned; generated users
/// always clear a 5-core at the defaults.
pub fn generate(cfg: &SyntheticConfig) -> (Vec<RawInteraction>, Vec<FeatureMatrix>) {
    assert!(cfg.n_communities >= 1);
    assert!(cfg.n_users >= cfg.n_communities && cfg.n_items >= cfg.n_communities);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    let mut interactions = Vec::new();
    for u in 0..cfg.n_users {
        let c = community_of(u, cfg.n_users, cfg.n_communities);
        let members: Vec<usize> = community_members(cfg.n_items, cfg.n_communities, c).collect();
        let mut pool = members.clone();
        pool.shuffle(&mut rng);
        let take = cfg.interactions_per_user.min(pool.len());
        for &i in pool.iter().take(take) {
            interactions.push(RawInteraction {
                user_key: format!("user_{u:04}"),
                item_key: format!("item_{i:04}"),
            });
        }
        if rng.gen_bool(cfg.crossover) {
            let i = rng.gen_range(0..cfg.n_items);
            if !members.contains(&i) {
                interactions.push(RawInteraction {
                    user_key: format!("user_{u:04}"),
                    item_key: format!("item_{i:04}"),
                });
            }
        }
    }

    let mut features = Vec::new();
    for (name, width) in &cfg.modalities {
        let centroids: Vec<Vec<f32>> = (0..cfg.n_communities)
            .map(|_| {
                (0..*width)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z as f32
                    })
                    .collect()
            })
            .collect();
        let mut values = Vec::with_capacity(cfg.n_items * width);
        for i in 0..cfg.n_items {
            let c = community_of(i, cfg.n_items, cfg.n_communities);
            for &base in centroids[c].iter().take(*width) {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(base + (cfg.noise * z) as f32);
            }
        }
        features.push(FeatureMatrix::new(name, cfg.n_items, *width, values));
    }
    (interactions, features)
}

/// Generate and split in one step. Feature rows are reordered to match the
/// item id map that first-occurrence assignment produces.
pub fn generate_split(cfg: &SyntheticConfig) -> (DatasetSplit, Vec<FeatureMatrix>) {
    let (interactions, features) = generate(cfg);
    let split = split_811(&interactions, cfg.seed);
    let reordered = features
        .iter()
        .map(|f| {
            let mut values = Vec::with_capacity(split.n_items() * f.width());
            for idx in 0..split.n_items() as u32 {
                let raw: usize = split.items.key(idx)["item_".len()..].parse().unwrap();
                values.extend_from_slice(f.row(raw));
            }
            FeatureMatrix::new(&f.modality, split.n_items(), f.width(), values)
        })
        .collect();
    (split, reordered)
}
