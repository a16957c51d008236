//! Test-phase embedding materialization and top-K ranking.

use crate::corpus::{DatasetSplit, FeatureMatrix, InteractionTable};
use crate::dense::{dot, Dense};
use crate::error::Result;
use crate::graphs::{layer_sum_readout, ItemItemGraphSet, NormalizedBipartite};
use crate::model::{enhance_items, fuse_embeddings, GcnPhase, HyperParams, ItemGraphMode, ModelParams};

/// Final user/item tables, reconstructed once after training so that
/// ranking never re-runs propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterializedEmbeddings {
    pub users: Dense,
    pub items: Dense,
}

/// Per evaluated user, the top-K items with descending scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub per_user: Vec<(u32, Vec<(u32, f64)>)>,
    pub k: usize,
}

/// Which split supplies the ground truth; masking defaults follow from it:
/// validation masks train, test masks train ∪ validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSplit {
    Validation,
    Test,
}

/// Build final embeddings: fuse, enhance items (in item-graph modes train
/// and test), then run the L-layer layer-sum propagation when the GCN phase
/// is `test`. With gcn_phase = train, propagation lived inside the training
/// forward and is not applied again; with `none` it is skipped entirely.
pub fn materialize(
    params: &ModelParams,
    features: &[FeatureMatrix],
    graphs: &ItemItemGraphSet,
    bipartite: &NormalizedBipartite,
    h: &HyperParams,
) -> Result<MaterializedEmbeddings> {
    let (e_users, mut e_items) = fuse_embeddings(params, features);
    if h.item_graph_mode != ItemGraphMode::Off {
        e_items = enhance_items(&e_items, graphs, &params.alpha(), h.item_hops)?;
    }
    let (users, items) = if h.gcn_phase == GcnPhase::Test {
        let stacked = Dense::hstack(&[&e_users, &e_items]);
        let readout = layer_sum_readout(&stacked, bipartite, h.gcn_layers, h.include_layer0)?;
        (
            readout.slice_cols(0, bipartite.n_users()),
            readout.slice_cols(bipartite.n_users(), bipartite.n_items()),
        )
    } else {
        (e_users, e_items)
    };
    Ok(MaterializedEmbeddings { users, items })
}

/// Full ranking over unmasked items for every user with ground truth in the
/// chosen split. Ties are broken by ascending item index.
pub fn rank_topk(
    m: &MaterializedEmbeddings,
    split: &DatasetSplit,
    k: usize,
    eval: EvalSplit,
) -> Result<RankingResult> {
    assert!(k >= 1);
    let truth = match eval {
        EvalSplit::Validation => &split.validation,
        EvalSplit::Test => &split.test,
    };
    let mut per_user = Vec::new();
    for u in 0..split.n_users() as u32 {
        if truth.row(u).is_empty() {
            continue;
        }
        let eu = m.users.col(u as usize);
        let scores: Vec<f64> = (0..split.n_items())
            .map(|i| dot(eu, m.items.col(i)))
            .collect();
        per_user.push((u, top_k_masked(&scores, k, |i| masked(split, eval, u, i))));
    }
    Ok(RankingResult { per_user, k })
}

fn masked(split: &DatasetSplit, eval: EvalSplit, u: u32, i: u32) -> bool {
    match eval {
        EvalSplit::Validation => split.train.contains(u, i),
        EvalSplit::Test => split.train.contains(u, i) || split.validation.contains(u, i),
    }
}

fn top_k_masked(scores: &[f64], k: usize, is_masked: impl Fn(u32) -> bool) -> Vec<(u32, f64)> {
    let mut cand: Vec<(u32, f64)> = scores
        .iter()
        .enumerate()
        .filter(|&(i, _)| !is_masked(i as u32))
        .map(|(i, &s)| (i as u32, s))
        .collect();
    cand.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    cand.truncate(k);
    cand
}

/// Non-personalized baseline: items ordered by training interaction count,
/// ties by index, masked per user like `rank_topk`.
pub fn popularity_rank(split: &DatasetSplit, k: usize, eval: EvalSplit) -> RankingResult {
    let truth: &InteractionTable = match eval {
        EvalSplit::Validation => &split.validation,
        EvalSplit::Test => &split.test,
    };
    let degrees = split.train.item_degrees();
    let scores: Vec<f64> = degrees.iter().map(|&d| d as f64).collect();
    let mut per_user = Vec::new();
    for u in 0..split.n_users() as u32 {
        if truth.row(u).is_empty() {
            continue;
        }
        per_user.push((u, top_k_masked(&scores, k, |i| masked(split, eval, u, i))));
    }
    RankingResult { per_user, k }
}
