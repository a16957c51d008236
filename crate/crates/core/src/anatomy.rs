//! Diagnostics: exact decompositions of one-layer graph-convolved scores and
//! ranking margins, cross-modal similarity, and the train-phase vs
//! test-phase comparison harness.

use std::time::Instant;

use crate::corpus::{DatasetSplit, FeatureMatrix};
use crate::dense::{dot, Dense};
use crate::error::{Error, Result};
use crate::graphs::{propagate_once, ItemItemGraphSet, NormalizedBipartite};
use crate::inference::{materialize, rank_topk, EvalSplit};
use crate::metrics::evaluate;
use crate::model::{train, GcnPhase, HyperParams};

/// Three-part split of the self-inclusive one-layer convolved inner product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityDecomposition {
    pub node_node: f64,
    pub node_with_neighbors: f64,
    pub neighbors_with_neighbors: f64,
    /// independently computed via one propagation step
    pub total: f64,
}

/// Five-part split of the one-layer ranking margin (raw margins, before the
/// sigmoid and log).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BprDecomposition {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub p5: f64,
    pub total_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossModalReport {
    /// mean per-node cosine between the two modality blocks
    pub s: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct PhaseRow {
    pub gcn_phase: GcnPhase,
    pub layers: usize,
    pub recall20: f64,
    pub ndcg20: f64,
    pub seconds_per_epoch: f64,
    pub cross_modal_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct PhaseComparison {
    pub rows: Vec<PhaseRow>,
}

fn weight(g: &NormalizedBipartite, a: usize, b: usize) -> f64 {
    1.0 / ((g.degree(a) as f64) * (g.degree(b) as f64)).sqrt()
}

/// Split the one-layer similarity between user `u` and item `i` into
/// node-node, node-neighbors, and neighbors-neighbors terms. The total is
/// cross-checked through an independent propagation step over the full
/// embedding block (d × nodes, users then items).
pub fn decompose_similarity(
    u: u32,
    i: u32,
    embeddings: &Dense,
    g: &NormalizedBipartite,
) -> Result<SimilarityDecomposition> {
    let un = u as usize;
    let in_ = g.item_node(i);
    let e_u = embeddings.col(un);
    let e_i = embeddings.col(in_);

    let node_node = dot(e_u, e_i);

    let (i_nbrs, _) = g.neighbors(in_);
    let (u_nbrs, _) = g.neighbors(un);
    let mut node_with_neighbors = 0.0;
    for &other_u in i_nbrs {
        node_with_neighbors +=
            dot(e_u, embeddings.col(other_u as usize)) * weight(g, in_, other_u as usize);
    }
    for &other_i in u_nbrs {
        node_with_neighbors +=
            dot(e_i, embeddings.col(other_i as usize)) * weight(g, un, other_i as usize);
    }

    let mut neighbors_with_neighbors = 0.0;
    for &other_i in u_nbrs {
        for &other_u in i_nbrs {
            neighbors_with_neighbors += dot(
                embeddings.col(other_i as usize),
                embeddings.col(other_u as usize),
            ) * weight(g, un, other_i as usize)
                * weight(g, in_, other_u as usize);
        }
    }

    let prop = propagate_once(embeddings, g)?;
    let mut su: Vec<f64> = e_u.to_vec();
    for (a, b) in su.iter_mut().zip(prop.col(un)) {
        *a += b;
    }
    let mut si: Vec<f64> = e_i.to_vec();
    for (a, b) in si.iter_mut().zip(prop.col(in_)) {
        *a += b;
    }
    Ok(SimilarityDecomposition {
        node_node,
        node_with_neighbors,
        neighbors_with_neighbors,
        total: dot(&su, &si),
    })
}

/// Split the one-layer ranking margin for triplet (u, p, n) into the five
/// bracketed terms; total margin is taken from the similarity totals.
pub fn decompose_bpr(
    u: u32,
    p: u32,
    n: u32,
    embeddings: &Dense,
    g: &NormalizedBipartite,
) -> Result<BprDecomposition> {
    let un = u as usize;
    let pn = g.item_node(p);
    let nn = g.item_node(n);
    let e_u = embeddings.col(un);
    let e_p = embeddings.col(pn);
    let e_n = embeddings.col(nn);

    let p1 = dot(e_u, e_p) - dot(e_u, e_n);

    let (p_nbrs, _) = g.neighbors(pn);
    let (n_nbrs, _) = g.neighbors(nn);
    let (u_nbrs, _) = g.neighbors(un);

    let mut p2 = 0.0;
    for &up in p_nbrs {
        p2 += dot(e_u, embeddings.col(up as usize)) * weight(g, pn, up as usize);
    }
    for &un_ in n_nbrs {
        p2 -= dot(e_u, embeddings.col(un_ as usize)) * weight(g, nn, un_ as usize);
    }

    let mut p3 = 0.0;
    for &it in u_nbrs {
        let w = weight(g, un, it as usize);
        p3 += dot(e_p, embeddings.col(it as usize)) * w;
        p3 -= dot(e_n, embeddings.col(it as usize)) * w;
    }

    let mut p4 = 0.0;
    for &it in u_nbrs {
        for &up in p_nbrs {
            p4 += dot(embeddings.col(it as usize), embeddings.col(up as usize))
                * weight(g, un, it as usize)
                * weight(g, pn, up as usize);
        }
    }
    let mut p5 = 0.0;
    for &it in u_nbrs {
        for &un_ in n_nbrs {
            p5 += dot(embeddings.col(it as usize), embeddings.col(un_ as usize))
                * weight(g, un, it as usize)
                * weight(g, nn, un_ as usize);
        }
    }

    let sp = decompose_similarity(u, p, embeddings, g)?;
    let sn = decompose_similarity(u, n, embeddings, g)?;
    Ok(BprDecomposition {
        p1,
        p2,
        p3,
        p4,
        p5,
        total_margin: sp.total - sn.total,
    })
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// Mean per-node cosine between two modality representations over all
/// users and items.
pub fn cross_modal_similarity(visual: &Dense, textual: &Dense) -> Result<CrossModalReport> {
    if visual.rows() != textual.rows() || visual.cols() != textual.cols() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "cross-modal blocks {}x{} vs {}x{}",
                visual.rows(),
                visual.cols(),
                textual.rows(),
                textual.cols()
            ),
        });
    }
    let n = visual.cols();
    assert!(n > 0);
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for c in 0..n {
        let s = cosine(visual.col(c), textual.col(c));
        sum += s;
        min = min.min(s);
        max = max.max(s);
    }
    let mean = sum / n as f64;
    Ok(CrossModalReport {
        s: mean,
        min,
        max,
        mean,
    })
}

/// Cross-modal report for a model state: compares the first two per-modality
/// d-wide blocks of the materialized user and item tables.
pub fn cross_modal_from_materialized(
    users: &Dense,
    items: &Dense,
    d: usize,
) -> Result<CrossModalReport> {
    assert!(users.rows() >= 2 * d, "need at least two modality blocks");
    let joint = Dense::hstack(&[users, items]);
    let v = joint.slice_rows(0, d);
    let t = joint.slice_rows(d, d);
    cross_modal_similarity(&v, &t)
}

/// Train the gcn_phase = train and gcn_phase = test variants from identical
/// seeds for each layer count, recording quality, mean seconds per epoch,
/// and post-training cross-modal similarity. Variants run sequentially so
/// the timing stays clean.
pub fn phase_comparison(
    split: &DatasetSplit,
    features: &[FeatureMatrix],
    graphs: &ItemItemGraphSet,
    bipartite: &NormalizedBipartite,
    base: &HyperParams,
    layer_counts: &[usize],
) -> Result<PhaseComparison> {
    let mut rows = Vec::new();
    for &layers in layer_counts {
        for phase in [GcnPhase::Train, GcnPhase::Test] {
            let h = HyperParams {
                gcn_phase: phase,
                gcn_layers: layers,
                ..base.clone()
            };
            let started = Instant::now();
            let (params, log) = train(split, features, graphs, bipartite, &h)?;
            let _elapsed = started.elapsed();
            let seconds_per_epoch = if log.epochs.is_empty() {
                0.0
            } else {
                log.epochs.iter().map(|e| e.seconds).sum::<f64>() / log.epochs.len() as f64
            };
            let m = materialize(&params, features, graphs, bipartite, &h)?;
            let ranking = rank_topk(&m, split, 20, EvalSplit::Test)?;
            let report = evaluate(&ranking, &split.test);
            let s = cross_modal_from_materialized(&m.users, &m.items, h.d)?.s;
            rows.push(PhaseRow {
                gcn_phase: phase,
                layers,
                recall20: report.recall20,
                ndcg20: report.ndcg20,
                seconds_per_epoch,
                cross_modal_s: s,
            });
        }
    }
    Ok(PhaseComparison { rows })
}
