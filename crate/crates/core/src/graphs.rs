//! User-item bipartite propagation and per-modality item-item kNN graphs.
//!
//! Node indexing convention for the bipartite graph: users occupy
//! [0, n_users), items occupy [n_users, n_users + n_items).

use crate::corpus::{FeatureMatrix, InteractionTable};
use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::sparse::Csr;

/// Symmetric-normalized user-item adjacency over the joint node space.
/// Every stored edge weight is 1/√(deg(u)·deg(i)) with deg taken from the
/// training table.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedBipartite {
    n_users: usize,
    n_items: usize,
    adj: Csr,
    degrees: Vec<u32>,
}

impl NormalizedBipartite {
    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_nodes(&self) -> usize {
        self.n_users + self.n_items
    }

    pub fn degree(&self, node: usize) -> u32 {
        self.degrees[node]
    }

    pub fn item_node(&self, item: u32) -> usize {
        self.n_users + item as usize
    }

    /// Neighbor (node, weight) pairs of a node.
    pub fn neighbors(&self, node: usize) -> (&[u32], &[f64]) {
        self.adj.row(node)
    }

    pub fn adjacency(&self) -> &Csr {
        &self.adj
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        self.adj.save(path)
    }

    pub fn load(path: &std::path::Path, n_users: usize, n_items: usize) -> Result<Self> {
        let adj = Csr::load(path)?;
        if adj.rows() != n_users + n_items {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "bipartite file has {} nodes, expected {}",
                    adj.rows(),
                    n_users + n_items
                ),
            });
        }
        let degrees = (0..adj.rows()).map(|r| adj.row_nnz(r) as u32).collect();
        Ok(NormalizedBipartite {
            n_users,
            n_items,
            adj,
            degrees,
        })
    }
}

pub fn build_normalized_bipartite(train: &InteractionTable) -> NormalizedBipartite {
    let n_users = train.n_users();
    let n_items = train.n_items();
    let item_deg = train.item_degrees();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_users + n_items];
    for u in 0..n_users as u32 {
        let du = train.row(u).len() as f64;
        for &i in train.row(u) {
            let di = item_deg[i as usize] as f64;
            let w = 1.0 / (du * di).sqrt();
            rows[u as usize].push((n_users as u32 + i, w));
            rows[n_users + i as usize].push((u, w));
        }
    }
    for row in &mut rows {
        row.sort_unstable_by_key(|&(c, _)| c);
    }
    let mut degrees = vec![0u32; n_users + n_items];
    for (u, d) in degrees.iter_mut().take(n_users).enumerate() {
        *d = train.row(u as u32).len() as u32;
    }
    for (i, &d) in item_deg.iter().enumerate() {
        degrees[n_users + i] = d;
    }
    NormalizedBipartite {
        n_users,
        n_items,
        adj: Csr::from_rows(n_users + n_items, rows),
        degrees,
    }
}

/// One propagation step: out[:, v] = Σ_{w ∈ N(v)} weight(v, w) · x[:, w].
pub fn propagate_once(x: &Dense, g: &NormalizedBipartite) -> Result<Dense> {
    if x.cols() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "embedding block has {} columns, graph has {} nodes",
                x.cols(),
                g.n_nodes()
            ),
        });
    }
    Ok(g.adj.right_mul_transpose(x))
}

/// Σ_{l=1..L} propagateˡ(x0), plus x0 itself when `include_layer0` is set.
pub fn layer_sum_readout(
    x0: &Dense,
    g: &NormalizedBipartite,
    layers: usize,
    include_layer0: bool,
) -> Result<Dense> {
    assert!(layers >= 1);
    let mut total = if include_layer0 {
        x0.clone()
    } else {
        Dense::zeros(x0.rows(), x0.cols())
    };
    let mut cur = x0.clone();
    for _ in 0..layers {
        cur = propagate_once(&cur, g)?;
        total.add_assign(&cur);
    }
    Ok(total)
}

/// One modality's item graph: the raw top-k matrix S̄ kept for audit and its
/// symmetric normalization S̃ = D^{-1/2} S̄ D^{-1/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemItemGraph {
    pub modality: String,
    pub raw: Csr,
    pub norm: Csr,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemItemGraphSet {
    pub graphs: Vec<ItemItemGraph>,
}

impl ItemItemGraphSet {
    pub fn n_modalities(&self) -> usize {
        self.graphs.len()
    }

    pub fn n_items(&self) -> usize {
        self.graphs.first().map(|g| g.norm.rows()).unwrap_or(0)
    }

    /// Fused normalized graph Σ_m α_m S̃^m.
    pub fn fuse(&self, alpha: &[f64]) -> Result<Csr> {
        if alpha.len() != self.graphs.len() {
            return Err(Error::ModalityMismatch {
                graphs: self.graphs.len(),
                weights: alpha.len(),
            });
        }
        let mats: Vec<&Csr> = self.graphs.iter().map(|g| &g.norm).collect();
        Ok(Csr::weighted_sum(&mats, alpha))
    }
}

/// Cosine-similarity top-k item graph for one modality. Self-pairs are
/// excluded, ties broken by the smaller column index, surviving negative
/// values clamped to 0, then symmetric normalization by row-sum degrees.
pub fn build_modality_item_graph(features: &FeatureMatrix, k: usize) -> ItemItemGraph {
    assert!(k >= 1);
    let n = features.n_items();
    assert!(n >= 2);
    let width = features.width();
    let norms: Vec<f64> = (0..n)
        .map(|i| {
            features.row(i)
                .iter()
                .map(|&v| (v as f64) * (v as f64))
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let mut raw_rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let fi = features.row(i);
        let mut sims: Vec<(u32, f64)> = Vec::with_capacity(n - 1);
        for j in 0..n {
            if j == i {
                continue;
            }
            let s = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                let fj = features.row(j);
                let mut dot = 0.0f64;
                for w in 0..width {
                    dot += fi[w] as f64 * fj[w] as f64;
                }
                dot / (norms[i] * norms[j])
            };
            sims.push((j as u32, s));
        }
        // largest value first, ties by ascending column index
        sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        sims.truncate(k);
        let mut row: Vec<(u32, f64)> = sims
            .into_iter()
            .filter_map(|(j, s)| if s > 0.0 { Some((j, s)) } else { None })
            .collect();
        row.sort_unstable_by_key(|&(j, _)| j);
        raw_rows.push(row);
    }
    let raw = Csr::from_rows(n, raw_rows);

    // D from row sums; D^{-1/2}_rr = 0 for empty rows.
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|r| {
            let (_, vals) = raw.row(r);
            let d: f64 = vals.iter().sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let norm_rows: Vec<Vec<(u32, f64)>> = (0..n)
        .map(|r| {
            let (idx, vals) = raw.row(r);
            idx.iter()
                .zip(vals)
                .map(|(&c, &v)| (c, inv_sqrt[r] * v * inv_sqrt[c as usize]))
                .collect()
        })
        .collect();
    ItemItemGraph {
        modality: features.modality.clone(),
        raw,
        norm: Csr::from_rows(n, norm_rows),
        k,
    }
}

/// X · S̃^hops with S̃ = Σ_m α_m S̃^m, computed as successive sparse products.
pub fn fused_item_propagate(
    x: &Dense,
    graphs: &ItemItemGraphSet,
    alpha: &[f64],
    hops: usize,
) -> Result<Dense> {
    assert!(hops >= 1);
    let fused = graphs.fuse(alpha)?;
    let mut cur = fused.right_mul(x);
    for _ in 1..hops {
        cur = fused.right_mul(&cur);
    }
    Ok(cur)
}
