//! Trainable parameters, modality fusion, BPR loss with analytic gradients,
//! and the Adam training loop with validation early stopping.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::corpus::{DatasetSplit, FeatureMatrix};
use crate::dense::{dot, Dense};
use crate::error::{Error, Result};
use crate::graphs::{layer_sum_readout, ItemItemGraphSet, NormalizedBipartite};
use crate::sparse::Csr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcnPhase {
    Train,
    Test,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemGraphMode {
    Train,
    Test,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemEmbedMode {
    Projected,
    Free,
}

impl std::str::FromStr for GcnPhase {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(GcnPhase::Train),
            "test" => Ok(GcnPhase::Test),
            "none" => Ok(GcnPhase::None),
            _ => Err(format!("unknown gcn_phase {s:?}")),
        }
    }
}

impl std::fmt::Display for GcnPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GcnPhase::Train => "train",
            GcnPhase::Test => "test",
            GcnPhase::None => "none",
        })
    }
}

impl std::str::FromStr for ItemGraphMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(ItemGraphMode::Train),
            "test" => Ok(ItemGraphMode::Test),
            "off" => Ok(ItemGraphMode::Off),
            _ => Err(format!("unknown item_graph_mode {s:?}")),
        }
    }
}

impl std::fmt::Display for ItemGraphMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ItemGraphMode::Train => "train",
            ItemGraphMode::Test => "test",
            ItemGraphMode::Off => "off",
        })
    }
}

impl std::str::FromStr for ItemEmbedMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "projected" => Ok(ItemEmbedMode::Projected),
            "free" => Ok(ItemEmbedMode::Free),
            _ => Err(format!("unknown item_embed_mode {s:?}")),
        }
    }
}

impl std::fmt::Display for ItemEmbedMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ItemEmbedMode::Projected => "projected",
            ItemEmbedMode::Free => "free",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// embedding width per modality
    pub d: usize,
    /// item-graph neighbors
    pub k: usize,
    /// item-graph hops L_i
    pub item_hops: usize,
    /// test-phase GCN layers L
    pub gcn_layers: usize,
    pub lambda: f64,
    pub lr: f64,
    pub batch: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub gcn_phase: GcnPhase,
    pub item_graph_mode: ItemGraphMode,
    pub item_embed_mode: ItemEmbedMode,
    pub include_layer0: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            d: 64,
            k: 10,
            item_hops: 1,
            gcn_layers: 2,
            lambda: 1e-3,
            lr: 1e-4,
            batch: 2048,
            max_epochs: 1000,
            patience: 20,
            seed: 42,
            gcn_phase: GcnPhase::Test,
            item_graph_mode: ItemGraphMode::Train,
            item_embed_mode: ItemEmbedMode::Projected,
            include_layer0: false,
        }
    }
}

/// Model parameters: per-modality user tables, per-modality item projections
/// (or free item tables), and the modality-weight logits.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// d × n_users per modality
    pub user: Vec<Dense>,
    /// projected mode: d × d_m per modality; free mode: d × n_items
    pub item: Vec<Dense>,
    pub logits: Vec<f64>,
    pub item_embed_mode: ItemEmbedMode,
}

impl ModelParams {
    pub fn n_modalities(&self) -> usize {
        self.user.len()
    }

    pub fn alpha(&self) -> Vec<f64> {
        softmax(&self.logits)
    }

    pub fn is_finite(&self) -> bool {
        self.user.iter().all(|m| m.is_finite())
            && self.item.iter().all(|m| m.is_finite())
            && self.logits.iter().all(|v| v.is_finite())
    }
}

/// Gradients in the same shape as the parameters.
pub type GradientSet = ModelParams;

/// First/second Adam moments mirroring the parameter shape.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> AdamState {
        let zero = |blocks: &[Dense]| -> Vec<Dense> {
            blocks
                .iter()
                .map(|b| Dense::zeros(b.rows(), b.cols()))
                .collect()
        };
        let z = ModelParams {
            user: zero(&params.user),
            item: zero(&params.item),
            logits: vec![0.0; params.logits.len()],
            item_embed_mode: params.item_embed_mode,
        };
        AdamState {
            m: z.clone(),
            v: z,
            t: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    pub user: u32,
    pub pos: u32,
    pub neg: u32,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn xavier(rng: &mut ChaCha12Rng, rows: usize, cols: usize, fan_in: usize, fan_out: usize) -> Dense {
    let b = xavier_bound(fan_in, fan_out);
    Dense::from_fn(rows, cols, |_, _| rng.gen_range(-b..b))
}

/// Xavier-uniform initialization from a seeded generator. Modality logits
/// start at zero so every α_m = 1/|M|. In free item mode the item tables are
/// a seeded random projection of the features, then trained freely.
pub fn init_params(
    h: &HyperParams,
    n_users: usize,
    features: &[FeatureMatrix],
    seed: u64,
) -> ModelParams {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut user = Vec::new();
    let mut item = Vec::new();
    for f in features {
        user.push(xavier(&mut rng, h.d, n_users, h.d, n_users));
        let proj = xavier(&mut rng, h.d, f.width(), h.d, f.width());
        match h.item_embed_mode {
            ItemEmbedMode::Projected => item.push(proj),
            ItemEmbedMode::Free => item.push(project_features(&proj, f)),
        }
    }
    ModelParams {
        user,
        item,
        logits: vec![0.0; features.len()],
        item_embed_mode: h.item_embed_mode,
    }
}

/// W · Fᵀ: project d_m-wide feature rows into d dimensions (d × n_items).
pub fn project_features(w: &Dense, f: &FeatureMatrix) -> Dense {
    assert_eq!(w.cols(), f.width());
    let d = w.rows();
    let mut out = Dense::zeros(d, f.n_items());
    for i in 0..f.n_items() {
        let fi = f.row(i);
        let col = out.col_mut(i);
        for (c, &fv) in fi.iter().enumerate() {
            let wc = w.col(c);
            let fv = fv as f64;
            for (o, &wv) in col.iter_mut().zip(wc) {
                *o += wv * fv;
            }
        }
    }
    out
}

/// Per-modality item embeddings (d × n_items each).
pub fn item_modality_embeddings(params: &ModelParams, features: &[FeatureMatrix]) -> Vec<Dense> {
    match params.item_embed_mode {
        ItemEmbedMode::Projected => params
            .item
            .iter()
            .zip(features)
            .map(|(w, f)| project_features(w, f))
            .collect(),
        ItemEmbedMode::Free => params.item.clone(),
    }
}

/// α-weighted concatenation of the per-modality blocks:
/// fused column = Con(α_m · e^m).
pub fn fuse_embeddings(params: &ModelParams, features: &[FeatureMatrix]) -> (Dense, Dense) {
    let alpha = params.alpha();
    let items = item_modality_embeddings(params, features);
    let scaled = |blocks: &[Dense]| -> Dense {
        let scaled: Vec<Dense> = blocks
            .iter()
            .zip(&alpha)
            .map(|(b, &a)| {
                let mut s = b.clone();
                s.scale(a);
                s
            })
            .collect();
        let refs: Vec<&Dense> = scaled.iter().collect();
        Dense::vstack(&refs)
    };
    (scaled(&params.user), scaled(&items))
}

/// E_i + E_i · S̃^{L_i}: multi-hop item-graph enhancement.
pub fn enhance_items(
    e_items: &Dense,
    graphs: &ItemItemGraphSet,
    alpha: &[f64],
    hops: usize,
) -> Result<Dense> {
    let mut out = e_items.clone();
    out.add_assign(&crate::graphs::fused_item_propagate(
        e_items, graphs, alpha, hops,
    )?);
    Ok(out)
}

/// Inner-product score.
pub fn score(e_u: &[f64], e_i: &[f64]) -> Result<f64> {
    if e_u.len() != e_i.len() {
        return Err(Error::DimensionMismatch {
            context: format!("score widths {} vs {}", e_u.len(), e_i.len()),
        });
    }
    Ok(dot(e_u, e_i))
}

/// One uniform negative per positive, drawn by rejection sampling over items
/// the user has not interacted with in training.
pub fn sample_negatives(
    split: &DatasetSplit,
    positives: &[(u32, u32)],
    rng: &mut ChaCha12Rng,
) -> Result<Vec<Triplet>> {
    let n_items = split.n_items() as u32;
    let mut out = Vec::with_capacity(positives.len());
    for &(u, p) in positives {
        if split.train.row(u).len() >= n_items as usize {
            return Err(Error::DegenerateUser { user: u });
        }
        let neg = loop {
            let cand = rng.gen_range(0..n_items);
            if !split.train.contains(u, cand) {
                break cand;
            }
        };
        out.push(Triplet {
            user: u,
            pos: p,
            neg,
        });
    }
    Ok(out)
}

/// −log σ(x), computed via the stable log-sigmoid identity.
fn softplus_neg(x: f64) -> f64 {
    // −log σ(x) = log(1 + e^{−x}) = max(−x, 0) + ln(1 + e^{−|x|})
    (-x).max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Pairwise ranking loss over aligned score sequences plus L2 on the
/// touched-parameter norm (passed in precomputed).
pub fn bpr_loss(scores_pos: &[f64], scores_neg: &[f64], lambda: f64, touched_sq_norm: f64) -> f64 {
    assert_eq!(scores_pos.len(), scores_neg.len());
    let rank: f64 = scores_pos
        .iter()
        .zip(scores_neg)
        .map(|(&p, &n)| softplus_neg(p - n))
        .sum();
    rank + lambda * touched_sq_norm
}

/// Parameters touched by a batch: the regularization scope.
struct TouchedSet {
    users: BTreeSet<u32>,
    items: BTreeSet<u32>,
}

impl TouchedSet {
    fn from_batch(batch: &[Triplet]) -> TouchedSet {
        let mut users = BTreeSet::new();
        let mut items = BTreeSet::new();
        for t in batch {
            users.insert(t.user);
            items.insert(t.pos);
            items.insert(t.neg);
        }
        TouchedSet { users, items }
    }

    /// Σ‖θ‖² over touched user columns, touched item parameters, and w.
    /// In projected mode the whole projection matrix backs every item.
    fn sq_norm(&self, params: &ModelParams) -> f64 {
        let mut s = 0.0;
        for um in &params.user {
            for &u in &self.users {
                s += um.col(u as usize).iter().map(|v| v * v).sum::<f64>();
            }
        }
        match params.item_embed_mode {
            ItemEmbedMode::Projected => {
                for wm in &params.item {
                    s += wm.data().iter().map(|v| v * v).sum::<f64>();
                }
            }
            ItemEmbedMode::Free => {
                for im in &params.item {
                    for &i in &self.items {
                        s += im.col(i as usize).iter().map(|v| v * v).sum::<f64>();
                    }
                }
            }
        }
        s += params.logits.iter().map(|v| v * v).sum::<f64>();
        s
    }
}

/// Cached forward pass for one batch.
struct Forward {
    alpha: Vec<f64>,
    /// per-modality item embeddings before fusion (d × n_items)
    item_mods: Vec<Dense>,
    /// fused item-graph Σ α_m S̃^m, when item enhancement is active in training
    fused_graph: Option<Csr>,
    /// partial products A_t = C_i · Ŝ^t for t = 0..hops (A_0 = C_i)
    item_powers: Vec<Dense>,
    /// scoring-level user block (post GCN when gcn_phase = train)
    score_users: Dense,
    /// scoring-level item block
    score_items: Dense,
}

fn forward(
    params: &ModelParams,
    features: &[FeatureMatrix],
    graphs: &ItemItemGraphSet,
    bipartite: &NormalizedBipartite,
    h: &HyperParams,
) -> Result<Forward> {
    let alpha = params.alpha();
    let item_mods = item_modality_embeddings(params, features);
    let (e_users, e_items_raw) = fuse_embeddings(params, features);

    let mut fused_graph = None;
    let mut item_powers = Vec::new();
    let mut e_items = e_items_raw.clone();
    if h.item_graph_mode == ItemGraphMode::Train {
        let fused = graphs.fuse(&alpha)?;
        item_powers.push(e_items_raw.clone());
        for t in 0..h.item_hops {
            let next = fused.right_mul(&item_powers[t]);
            item_powers.push(next);
        }
        e_items.add_assign(&item_powers[h.item_hops]);
        fused_graph = Some(fused);
    }

    let (score_users, score_items) = if h.gcn_phase == GcnPhase::Train {
        let stacked = Dense::hstack(&[&e_users, &e_items]);
        let readout = layer_sum_readout(&stacked, bipartite, h.gcn_layers, h.include_layer0)?;
        let n_users = bipartite.n_users();
        (
            readout.slice_cols(0, n_users),
            readout.slice_cols(n_users, bipartite.n_items()),
        )
    } else {
        (e_users.clone(), e_items)
    };

    Ok(Forward {
        alpha,
        item_mods,
        fused_graph,
        item_powers,
        score_users,
        score_items,
    })
}

/// Total batch loss (ranking + touched-parameter L2), as a pure function of
/// the parameters. Used by training and by finite-difference checks.
pub fn batch_loss(
    params: &ModelParams,
    features: &[FeatureMatrix],
    graphs: &ItemItemGraphSet,
    bipartite: &NormalizedBipartite,
    h: &HyperParams,
    batch: &[Triplet],
) -> Result<f64> {
    let fwd = forward(params, features, graphs, bipartite, h)?;
    let mut pos = Vec::with_capacity(batch.len());
    let mut neg = Vec::with_capacity(batch.len());
    for t in batch {
        let eu = fwd.score_users.col(t.user as usize);
        pos.push(score(eu, fwd.score_items.col(t.pos as usize))?);
        neg.push(score(eu, fwd.score_items.col(t.neg as usize))?);
    }
    let touched = TouchedSet::from_batch(batch);
    Ok(bpr_loss(&pos, &neg, h.lambda, touched.sq_norm(params)))
}

/// Analytic gradients of `batch_loss` for every parameter, including the
/// logits through both uses of α (block scaling and the fused graph power),
/// and through the bipartite propagation when gcn_phase = train.
pub fn batch_backward(
    params: &ModelParams,
    features: &[FeatureMatrix],
    graphs: &ItemItemGraphSet,
    bipartite: &NormalizedBipartite,
    h: &HyperParams,
    batch: &[Triplet],
) -> Result<(f64, GradientSet)> {
    let fwd = forward(params, features, graphs, bipartite, h)?;
    let n_mods = params.n_modalities();
    let d = h.d;
    let n_users = bipartite.n_users();
    let n_items = bipartite.n_items();

    // Gradient at the scoring level.
    let mut g_users = Dense::zeros(n_mods * d, n_users);
    let mut g_items = Dense::zeros(n_mods * d, n_items);
    let mut loss = 0.0;
    for t in batch {
        let eu = fwd.score_users.col(t.user as usize).to_vec();
        let ep = fwd.score_items.col(t.pos as usize).to_vec();
        let en = fwd.score_items.col(t.neg as usize).to_vec();
        let margin = dot(&eu, &ep) - dot(&eu, &en);
        loss += softplus_neg(margin);
        let g = -sigmoid(-margin); // d/dmargin of −log σ(margin)
        {
            let gu = g_users.col_mut(t.user as usize);
            for ((o, &p), &n) in gu.iter_mut().zip(&ep).zip(&en) {
                *o += g * (p - n);
            }
        }
        {
            let gp = g_items.col_mut(t.pos as usize);
            for (o, &u) in gp.iter_mut().zip(&eu) {
                *o += g * u;
            }
        }
        {
            let gn = g_items.col_mut(t.neg as usize);
            for (o, &u) in gn.iter_mut().zip(&eu) {
                *o -= g * u;
            }
        }
    }

    // Unwind the test/train-phase propagation (self-adjoint adjacency).
    let (g_users, mut g_items) = if h.gcn_phase == GcnPhase::Train {
        let stacked = Dense::hstack(&[&g_users, &g_items]);
        let back = layer_sum_readout(&stacked, bipartite, h.gcn_layers, h.include_layer0)?;
        (
            back.slice_cols(0, n_users),
            back.slice_cols(n_users, n_items),
        )
    } else {
        (g_users, g_items)
    };

    // Unwind the item-graph enhancement; accumulate dL/dα on the way.
    let mut d_alpha = vec![0.0; n_mods];
    if h.item_graph_mode == ItemGraphMode::Train {
        let fused = fwd.fused_graph.as_ref().unwrap();
        // ∂(X Ŝ^L)/∂α_m = Σ_t X Ŝ^t S̃^m Ŝ^{L−1−t}; pair the cached forward
        // powers A_t with B_t = G (Ŝᵀ)^{L−1−t}.
        let mut b = g_items.clone();
        for t in (0..h.item_hops).rev() {
            let a_t = &fwd.item_powers[t];
            for (m, graph) in graphs.graphs.iter().enumerate() {
                let mut acc = 0.0;
                for (j, i, v) in graph.norm.iter() {
                    acc += v * dot(a_t.col(j), b.col(i as usize));
                }
                d_alpha[m] += acc;
            }
            b = fused.right_mul_transpose(&b);
        }
        // after the loop b = G (Ŝᵀ)^{L}; dL/dC_i = G + b
        g_items.add_assign(&b);
    }

    // Unwind fusion: block m of the fused columns is α_m · e^m.
    let mut grad_user = Vec::with_capacity(n_mods);
    let mut grad_item = Vec::with_capacity(n_mods);
    for m in 0..n_mods {
        let gu_block = g_users.slice_rows(m * d, d);
        let gi_block = g_items.slice_rows(m * d, d);
        d_alpha[m] += gu_block.inner(&params.user[m]);
        d_alpha[m] += gi_block.inner(&fwd.item_mods[m]);
        let mut du = gu_block;
        du.scale(fwd.alpha[m]);
        grad_user.push(du);
        let mut d_emb = gi_block;
        d_emb.scale(fwd.alpha[m]);
        match params.item_embed_mode {
            ItemEmbedMode::Projected => {
                // dW = dÊ · F  (d × n_items times n_items × d_m)
                let f = &features[m];
                let mut dw = Dense::zeros(d, f.width());
                for i in 0..f.n_items() {
                    let gcol = d_emb.col(i);
                    let frow = f.row(i);
                    for (c, &fv) in frow.iter().enumerate() {
                        let dst = dw.col_mut(c);
                        let fv = fv as f64;
                        for (o, &gv) in dst.iter_mut().zip(gcol) {
                            *o += gv * fv;
                        }
                    }
                }
                grad_item.push(dw);
            }
            ItemEmbedMode::Free => grad_item.push(d_emb),
        }
    }

    // Softmax Jacobian: dw_j = α_j (g_j − Σ_k α_k g_k).
    let mean: f64 = fwd
        .alpha
        .iter()
        .zip(&d_alpha)
        .map(|(&a, &g)| a * g)
        .sum();
    let mut grad_logits: Vec<f64> = fwd
        .alpha
        .iter()
        .zip(&d_alpha)
        .map(|(&a, &g)| a * (g - mean))
        .collect();

    // Regularization on the touched set.
    let touched = TouchedSet::from_batch(batch);
    loss += h.lambda * touched.sq_norm(params);
    let two_lambda = 2.0 * h.lambda;
    for (gm, pm) in grad_user.iter_mut().zip(&params.user) {
        for &u in &touched.users {
            let src = pm.col(u as usize).to_vec();
            let dst = gm.col_mut(u as usize);
            for (o, v) in dst.iter_mut().zip(src) {
                *o += two_lambda * v;
            }
        }
    }
    match params.item_embed_mode {
        ItemEmbedMode::Projected => {
            for (gm, pm) in grad_item.iter_mut().zip(&params.item) {
                gm.axpy(two_lambda, pm);
            }
        }
        ItemEmbedMode::Free => {
            for (gm, pm) in grad_item.iter_mut().zip(&params.item) {
                for &i in &touched.items {
                    let src = pm.col(i as usize).to_vec();
                    let dst = gm.col_mut(i as usize);
                    for (o, v) in dst.iter_mut().zip(src) {
                        *o += two_lambda * v;
                    }
                }
            }
        }
    }
    for (g, &w) in grad_logits.iter_mut().zip(&params.logits) {
        *g += two_lambda * w;
    }

    Ok((
        loss,
        GradientSet {
            user: grad_user,
            item: grad_item,
            logits: grad_logits,
            item_embed_mode: params.item_embed_mode,
        },
    ))
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn adam_update(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], lr: f64, t: u64) {
    let bc1 = 1.0 - ADAM_BETA1.powi(t as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(t as i32);
    for i in 0..p.len() {
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
        let mhat = m[i] / bc1;
        let vhat = v[i] / bc2;
        p[i] -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
    }
}

/// Standard bias-corrected Adam step (β1 = 0.9, β2 = 0.999, ε = 1e-8).
pub fn adam_step(params: &mut ModelParams, grads: &GradientSet, state: &mut AdamState, lr: f64) {
    state.t += 1;
    let t = state.t;
    for i in 0..params.user.len() {
        adam_update(
            params.user[i].data_mut(),
            grads.user[i].data(),
            state.m.user[i].data_mut(),
            state.v.user[i].data_mut(),
            lr,
            t,
        );
    }
    for i in 0..params.item.len() {
        adam_update(
            params.item[i].data_mut(),
            grads.item[i].data(),
            state.m.item[i].data_mut(),
            state.v.item[i].data_mut(),
            lr,
            t,
        );
    }
    adam_update(
        &mut params.logits,
        &grads.logits,
        &mut state.m.logits,
        &mut state.v.logits,
        lr,
        t,
    );
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub val_recall20: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
}

/// Train with shuffled mini-batches, per-epoch validation Recall@20, and
/// early stopping after `patience` epochs without improvement. Returns the
/// best-validation parameters.
pub fn train(
    split: &DatasetSplit,
    features: &[FeatureMatrix],
    graphs: &ItemItemGraphSet,
    bipartite: &NormalizedBipartite,
    h: &HyperParams,
) -> Result<(ModelParams, TrainingLog)> {
    let mut params = init_params(h, split.n_users(), features, h.seed);
    let mut state = AdamState::new(&params);
    let mut rng = ChaCha12Rng::seed_from_u64(h.seed.wrapping_add(1));
    let mut pairs: Vec<(u32, u32)> = split.train.pairs().collect();
    let mut log = TrainingLog::default();
    let mut best: Option<(f64, ModelParams, usize)> = None;

    for epoch in 0..h.max_epochs {
        let started = Instant::now();
        pairs.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in pairs.chunks(h.batch.max(1)) {
            let batch = sample_negatives(split, chunk, &mut rng)?;
            let (loss, grads) =
                batch_backward(&params, features, graphs, bipartite, h, &batch)?;
            adam_step(&mut params, &grads, &mut state, h.lr);
            epoch_loss += loss;
        }
        let val_recall20 = validation_recall20(&params, split, features, graphs, bipartite, h)?;
        let seconds = started.elapsed().as_secs_f64();
        log.epochs.push(EpochRecord {
            epoch,
            loss: epoch_loss,
            val_recall20,
            seconds,
        });
        let improved = match &best {
            Some((b, _, _)) => val_recall20 > *b,
            None => true,
        };
        if improved {
            best = Some((val_recall20, params.clone(), epoch));
        } else if let Some((_, _, best_epoch)) = &best {
            if epoch - best_epoch >= h.patience {
                break;
            }
        }
    }

    match best {
        Some((_, p, e)) => {
            log.best_epoch = Some(e);
            Ok((p, log))
        }
        None => Ok((params, log)),
    }
}

fn validation_recall20(
    params: &ModelParams,
    split: &DatasetSplit,
    features: &[FeatureMatrix],
    graphs: &ItemItemGraphSet,
    bipartite: &NormalizedBipartite,
    h: &HyperParams,
) -> Result<f64> {
    let mat = crate::inference::materialize(params, features, graphs, bipartite, h)?;
    let ranking = crate::inference::rank_topk(
        &mat,
        split,
        20,
        crate::inference::EvalSplit::Validation,
    )?;
    Ok(crate::metrics::evaluate(&ranking, &split.validation).recall20)
}
