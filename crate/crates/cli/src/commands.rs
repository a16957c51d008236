//! The five subcommands and their on-disk artifact layout.
//!
//! Everything a later command needs is written under the output directory:
//!
//! ```text
//! out/
//!   prepared/        id maps, split tables, bipartite + item graphs, features
//!   checkpoint/      trained parameter tables and the checkpoint manifest
//!   reports/         metric, ranking, diagnostic, and timing reports
//! ```
//!
//! Every report starts with a `# config_sha256 = …` line tracing it back to
//! the exact configuration that produced it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use fastrec_core::anatomy::{
    cross_modal_from_materialized, decompose_bpr, decompose_similarity, phase_comparison,
};
use fastrec_core::corpus::{
    kcore_filter, load_features, load_interactions, save_features, split_811, DatasetSplit,
    FeatureMatrix, IdMap, InteractionTable,
};
use fastrec_core::dense::Dense;
use fastrec_core::graphs::{
    build_modality_item_graph, build_normalized_bipartite, ItemItemGraph, ItemItemGraphSet,
    NormalizedBipartite,
};
use fastrec_core::inference::{materialize, popularity_rank, rank_topk, EvalSplit};
use fastrec_core::metrics::{
    evaluate, peak_rss_kib, sparsity_report, MetricReport, BUCKET_LABELS,
};
use fastrec_core::model::{init_params, sample_negatives, train, HyperParams, ModelParams};
use fastrec_core::sparse::Csr;
use fastrec_core::{GcnPhase, ItemGraphMode};

use crate::config::{canonical, CliError, CliResult, RunConfig};

const KCORE: usize = 5;

pub fn config_sha256(cfg: &RunConfig) -> String {
    sha256_hex(canonical(cfg).as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_sha256(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(sha256_hex(&bytes))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        category: crate::config::Category::Io,
        message: format!("{}: {}", path.display(), e),
    }
}

fn write_file(path: &Path, content: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, content).map_err(|e| io_err(path, e))
}

fn ensure_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

pub fn prepared_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("prepared")
}

pub fn checkpoint_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("checkpoint")
}

pub fn reports_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("reports")
}

// ---------------------------------------------------------------------------
// dense f64 parameter persistence

const PARAM_MAGIC: &[u8; 4] = b"MMPD";
const PARAM_VERSION: u32 = 1;

fn save_dense(path: &Path, m: &Dense) -> CliResult<()> {
    let mut buf = Vec::with_capacity(24 + m.data().len() * 8);
    buf.extend_from_slice(PARAM_MAGIC);
    buf.extend_from_slice(&PARAM_VERSION.to_le_bytes());
    buf.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    write_file(path, buf)
}

fn load_dense(path: &Path) -> CliResult<Dense> {
    let buf = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let fail = |what: &str| CliError {
        category: crate::config::Category::Data,
        message: format!("{}: {}", path.display(), what),
    };
    if buf.len() < 24 || &buf[0..4] != PARAM_MAGIC {
        return Err(fail("bad parameter file header"));
    }
    let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    if version != PARAM_VERSION {
        return Err(fail("unsupported parameter file version"));
    }
    let rows = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(buf[16..24].try_into().unwrap()) as usize;
    if buf.len() != 24 + rows * cols * 8 {
        return Err(fail("truncated parameter file"));
    }
    let mut m = Dense::zeros(rows, cols);
    for (n, chunk) in buf[24..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        m.set(n % rows, n / rows, v);
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// prepare

pub struct PreparedArtifacts {
    pub split: DatasetSplit,
    pub features: Vec<FeatureMatrix>,
    pub bipartite: NormalizedBipartite,
    pub graphs: ItemItemGraphSet,
}

pub fn cmd_prepare(cfg: &RunConfig) -> CliResult<()> {
    let dir = prepared_dir(cfg);
    ensure_dir(&dir)?;
    let h = &cfg.hyper;

    let raw = load_interactions(&cfg.interactions_path)?;
    let kept = kcore_filter(&raw, KCORE);
    if kept.is_empty() {
        return Err(CliError {
            category: crate::config::Category::Data,
            message: format!(
                "{}: no interactions survive {KCORE}-core filtering",
                cfg.interactions_path.display()
            ),
        });
    }
    let split = split_811(&kept, h.seed);

    let mut features = Vec::new();
    for m in &cfg.modalities {
        let f = load_features(&m.path, &split.items, &m.label).map_err(|e| {
            let ce = CliError::from(e);
            CliError {
                category: ce.category,
                message: format!("modality {}: {}", m.label, ce.message),
            }
        })?;
        features.push(f);
    }

    let bipartite = build_normalized_bipartite(&split.train);
    let graphs: Vec<ItemItemGraph> = features
        .iter()
        .map(|f| build_modality_item_graph(f, h.k))
        .collect();

    split.users.save(&dir.join("users.idmap"))?;
    split.items.save(&dir.join("items.idmap"))?;
    split
        .train
        .save(&dir.join("train.tsv"), &split.users, &split.items)?;
    split
        .validation
        .save(&dir.join("validation.tsv"), &split.users, &split.items)?;
    split
        .test
        .save(&dir.join("test.tsv"), &split.users, &split.items)?;
    bipartite.save(&dir.join("bipartite.mmsg"))?;
    for f in &features {
        let path = dir.join(format!("features.{}.mmfm", f.modality));
        save_features(&path, f.n_items(), f.width(), f.values())?;
        // sidecar: row r of the persisted file belongs to the item with
        // dense index r
        let mut index = String::new();
        for i in 0..split.n_items() as u32 {
            index.push_str(split.items.key(i));
            index.push('\n');
        }
        write_file(&dir.join(format!("features.{}.mmfm.index", f.modality)), index)?;
    }
    for g in &graphs {
        g.raw.save(&dir.join(format!("item_graph.{}.raw.mmsg", g.modality)))?;
        g.norm.save(&dir.join(format!("item_graph.{}.norm.mmsg", g.modality)))?;
    }

    let mut manifest = String::new();
    let _ = writeln!(manifest, "config_sha256\t{}", config_sha256(cfg));
    let _ = writeln!(manifest, "kcore\t{KCORE}");
    let _ = writeln!(manifest, "n_users\t{}", split.n_users());
    let _ = writeln!(manifest, "n_items\t{}", split.n_items());
    let _ = writeln!(manifest, "nnz_train\t{}", split.train.nnz());
    let _ = writeln!(manifest, "nnz_validation\t{}", split.validation.nnz());
    let _ = writeln!(manifest, "nnz_test\t{}", split.test.nnz());
    let _ = writeln!(
        manifest,
        "modalities\t{}",
        cfg.modalities
            .iter()
            .map(|m| m.label.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    for line in canonical(cfg).lines() {
        let (k, v) = line.split_once(" = ").unwrap();
        let _ = writeln!(manifest, "config.{k}\t{v}");
    }
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .map_err(|e| io_err(&dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.tsv")
        .collect();
    names.sort();
    for name in names {
        let _ = writeln!(manifest, "file\t{name}\t{}", file_sha256(&dir.join(&name))?);
    }
    write_file(&dir.join("manifest.tsv"), manifest)
}

pub fn load_prepared(cfg: &RunConfig) -> CliResult<PreparedArtifacts> {
    let dir = prepared_dir(cfg);
    let h = &cfg.hyper;
    let users = IdMap::load(&dir.join("users.idmap"))?;
    let items = IdMap::load(&dir.join("items.idmap"))?;
    let train = InteractionTable::load(&dir.join("train.tsv"), &users, &items)?;
    let validation = InteractionTable::load(&dir.join("validation.tsv"), &users, &items)?;
    let test = InteractionTable::load(&dir.join("test.tsv"), &users, &items)?;
    let bipartite =
        NormalizedBipartite::load(&dir.join("bipartite.mmsg"), users.len(), items.len())?;
    let mut features = Vec::new();
    let mut graphs = Vec::new();
    for m in &cfg.modalities {
        let path = dir.join(format!("features.{}.mmfm", m.label));
        features.push(load_features(&path, &items, &m.label)?);
        let raw = Csr::load(&dir.join(format!("item_graph.{}.raw.mmsg", m.label)))?;
        let norm = Csr::load(&dir.join(format!("item_graph.{}.norm.mmsg", m.label)))?;
        graphs.push(ItemItemGraph {
            modality: m.label.clone(),
            raw,
            norm,
            k: h.k,
        });
    }
    let split = DatasetSplit {
        users,
        items,
        train,
        validation,
        test,
        seed: h.seed,
    };
    Ok(PreparedArtifacts {
        split,
        features,
        bipartite,
        graphs: ItemItemGraphSet { graphs },
    })
}

// ---------------------------------------------------------------------------
// train

fn checkpoint_manifest(cfg: &RunConfig, split: &DatasetSplit) -> String {
    let h = &cfg.hyper;
    let mut out = String::new();
    let _ = writeln!(out, "config_sha256\t{}", config_sha256(cfg));
    let _ = writeln!(out, "n_users\t{}", split.n_users());
    let _ = writeln!(out, "n_items\t{}", split.n_items());
    let _ = writeln!(
        out,
        "modalities\t{}",
        cfg.modalities
            .iter()
            .map(|m| m.label.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(out, "d\t{}", h.d);
    let _ = writeln!(out, "k\t{}", h.k);
    let _ = writeln!(out, "item_hops\t{}", h.item_hops);
    let _ = writeln!(out, "gcn_layers\t{}", h.gcn_layers);
    let _ = writeln!(out, "gcn_phase\t{}", h.gcn_phase);
    let _ = writeln!(out, "item_graph_mode\t{}", h.item_graph_mode);
    let _ = writeln!(out, "item_embed_mode\t{}", h.item_embed_mode);
    let _ = writeln!(out, "include_layer0\t{}", h.include_layer0);
    let _ = writeln!(out, "seed\t{}", h.seed);
    out
}

pub fn cmd_train(cfg: &RunConfig) -> CliResult<()> {
    let art = load_prepared(cfg)?;
    let (params, log) = train(
        &art.split,
        &art.features,
        &art.graphs,
        &art.bipartite,
        &cfg.hyper,
    )?;

    let dir = checkpoint_dir(cfg);
    ensure_dir(&dir)?;
    for (m, table) in params.user.iter().enumerate() {
        save_dense(&dir.join(format!("user.{}.mmpd", cfg.modalities[m].label)), table)?;
    }
    for (m, table) in params.item.iter().enumerate() {
        save_dense(&dir.join(format!("item.{}.mmpd", cfg.modalities[m].label)), table)?;
    }
    let mut logits = String::new();
    for v in &params.logits {
        let _ = writeln!(logits, "{v:.17e}");
    }
    write_file(&dir.join("logits.tsv"), logits)?;
    write_file(&dir.join("checkpoint.tsv"), checkpoint_manifest(cfg, &art.split))?;

    let rdir = reports_dir(cfg);
    ensure_dir(&rdir)?;
    // wall-clock timing goes into its own file so the training log itself
    // stays byte-identical across reruns
    let mut tl = String::new();
    let _ = writeln!(tl, "# config_sha256 = {}", config_sha256(cfg));
    let _ = writeln!(tl, "epoch\tloss\tval_recall20");
    for e in &log.epochs {
        let _ = writeln!(tl, "{}\t{:.17e}\t{:.17e}", e.epoch, e.loss, e.val_recall20);
    }
    let _ = writeln!(
        tl,
        "best_epoch\t{}",
        log.best_epoch.map_or("none".to_string(), |b| b.to_string())
    );
    write_file(&rdir.join("training_log.tsv"), tl)?;

    let mut et = String::new();
    let _ = writeln!(et, "# config_sha256 = {}", config_sha256(cfg));
    let _ = writeln!(et, "epoch\tseconds");
    for e in &log.epochs {
        let _ = writeln!(et, "{}\t{:.6}", e.epoch, e.seconds);
    }
    let _ = writeln!(
        et,
        "peak_rss_kib\t{}",
        peak_rss_kib().map_or("n/a".to_string(), |v| v.to_string())
    );
    write_file(&rdir.join("epoch_timings.tsv"), et)
}

pub fn load_checkpoint(cfg: &RunConfig, split: &DatasetSplit) -> CliResult<ModelParams> {
    let dir = checkpoint_dir(cfg);
    let manifest_path = dir.join("checkpoint.tsv");
    let stored =
        std::fs::read_to_string(&manifest_path).map_err(|e| io_err(&manifest_path, e))?;
    let current = checkpoint_manifest(cfg, split);
    let parse = |text: &str| -> std::collections::BTreeMap<String, String> {
        text.lines()
            .filter_map(|l| l.split_once('\t'))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    };
    let stored_map = parse(&stored);
    let current_map = parse(&current);
    let mut diffs = Vec::new();
    for (k, v) in &current_map {
        // the checkpoint legitimately records the config it was trained
        // under; only structural keys must match
        if k == "config_sha256" || k == "seed" {
            continue;
        }
        match stored_map.get(k) {
            Some(s) if s == v => {}
            Some(s) => diffs.push(format!("{k} (checkpoint={s}, run={v})")),
            None => diffs.push(format!("{k} (missing from checkpoint)")),
        }
    }
    if !diffs.is_empty() {
        return Err(CliError::compat(format!(
            "checkpoint incompatible with run config: {}",
            diffs.join("; ")
        )));
    }

    let mut user = Vec::new();
    let mut item = Vec::new();
    for m in &cfg.modalities {
        user.push(load_dense(&dir.join(format!("user.{}.mmpd", m.label)))?);
        item.push(load_dense(&dir.join(format!("item.{}.mmpd", m.label)))?);
    }
    let logits_path = dir.join("logits.tsv");
    let logits_text =
        std::fs::read_to_string(&logits_path).map_err(|e| io_err(&logits_path, e))?;
    let logits: Vec<f64> = logits_text
        .lines()
        .map(|l| {
            l.parse().map_err(|e| CliError {
                category: crate::config::Category::Data,
                message: format!("{}: {}", logits_path.display(), e),
            })
        })
        .collect::<CliResult<_>>()?;
    Ok(ModelParams {
        user,
        item,
        logits,
        item_embed_mode: cfg.hyper.item_embed_mode,
    })
}

// ---------------------------------------------------------------------------
// evaluate

fn metric_lines(out: &mut String, prefix: &str, r: &MetricReport) {
    let _ = writeln!(out, "{prefix}recall10\t{:.17e}", r.recall10);
    let _ = writeln!(out, "{prefix}recall20\t{:.17e}", r.recall20);
    let _ = writeln!(out, "{prefix}ndcg10\t{:.17e}", r.ndcg10);
    let _ = writeln!(out, "{prefix}ndcg20\t{:.17e}", r.ndcg20);
    let _ = writeln!(out, "{prefix}n_users_evaluated\t{}", r.n_users_evaluated);
}

pub fn cmd_evaluate(cfg: &RunConfig) -> CliResult<()> {
    let art = load_prepared(cfg)?;
    let params = load_checkpoint(cfg, &art.split)?;
    let m = materialize(&params, &art.features, &art.graphs, &art.bipartite, &cfg.hyper)?;
    let ranking = rank_topk(&m, &art.split, 20, EvalSplit::Test)?;
    let report = evaluate(&ranking, &art.split.test);
    let buckets = sparsity_report(&ranking, &art.split.test, &art.split.train);

    let rdir = reports_dir(cfg);
    ensure_dir(&rdir)?;
    let sha = config_sha256(cfg);

    let mut metrics = String::new();
    let _ = writeln!(metrics, "# config_sha256 = {sha}");
    metric_lines(&mut metrics, "", &report);
    write_file(&rdir.join("metrics.tsv"), metrics)?;

    let mut sparsity = String::new();
    let _ = writeln!(sparsity, "# config_sha256 = {sha}");
    for (label, r) in BUCKET_LABELS.iter().zip(&buckets.reports) {
        metric_lines(&mut sparsity, &format!("{label}\t"), r);
    }
    write_file(&rdir.join("sparsity.tsv"), sparsity)?;

    let mut rankings = String::new();
    let _ = writeln!(rankings, "# config_sha256 = {sha}");
    for (u, items) in &ranking.per_user {
        for (i, s) in items {
            let _ = writeln!(
                rankings,
                "{}\t{}\t{:.17e}",
                art.split.users.key(*u),
                art.split.items.key(*i),
                s
            );
        }
    }
    write_file(&rdir.join("rankings.tsv"), rankings)
}

// ---------------------------------------------------------------------------
// investigate

pub fn cmd_investigate(cfg: &RunConfig) -> CliResult<()> {
    let art = load_prepared(cfg)?;
    let h = &cfg.hyper;
    // use the trained model when one exists; fall back to a fresh
    // initialization so diagnostics work on a merely prepared directory
    let params = if checkpoint_dir(cfg).join("checkpoint.tsv").exists() {
        load_checkpoint(cfg, &art.split)?
    } else {
        init_params(h, art.split.n_users(), &art.features, h.seed)
    };
    let m = materialize(&params, &art.features, &art.graphs, &art.bipartite, h)?;
    let nodes = Dense::hstack(&[&m.users, &m.items]);

    let rdir = reports_dir(cfg);
    ensure_dir(&rdir)?;
    let sha = config_sha256(cfg);

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(h.seed ^ 0x5eed);
    let positives: Vec<(u32, u32)> = (0..art.split.n_users() as u32)
        .flat_map(|u| art.split.train.row(u).iter().map(move |&i| (u, i)))
        .collect();
    use rand::seq::SliceRandom;
    let sample: Vec<(u32, u32)> = positives
        .choose_multiple(&mut rng, cfg.investigate_samples)
        .copied()
        .collect();
    let triplets = sample_negatives(&art.split, &sample, &mut rng)?;

    let mut dec = String::new();
    let _ = writeln!(dec, "# config_sha256 = {sha}");
    let _ = writeln!(
        dec,
        "user\tpos\tneg\tnode_node\tnode_with_neighbors\tneighbors_with_neighbors\tsim_total\tp1\tp2\tp3\tp4\tp5\tmargin\trecomposition_error"
    );
    for t in &triplets {
        let s = decompose_similarity(t.user, t.pos, &nodes, &art.bipartite)?;
        let b = decompose_bpr(t.user, t.pos, t.neg, &nodes, &art.bipartite)?;
        let err = (b.p1 + b.p2 + b.p3 + b.p4 - b.p5 - b.total_margin).abs();
        let _ = writeln!(
            dec,
            "{}\t{}\t{}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.3e}",
            art.split.users.key(t.user),
            art.split.items.key(t.pos),
            art.split.items.key(t.neg),
            s.node_node,
            s.node_with_neighbors,
            s.neighbors_with_neighbors,
            s.total,
            b.p1,
            b.p2,
            b.p3,
            b.p4,
            b.p5,
            b.total_margin,
            err
        );
    }
    write_file(&rdir.join("decompositions.tsv"), dec)?;

    let mut cm = String::new();
    let _ = writeln!(cm, "# config_sha256 = {sha}");
    if cfg.modalities.len() >= 2 {
        let r = cross_modal_from_materialized(&m.users, &m.items, h.d)?;
        let _ = writeln!(cm, "s\t{:.17e}", r.s);
        let _ = writeln!(cm, "min\t{:.17e}", r.min);
        let _ = writeln!(cm, "max\t{:.17e}", r.max);
        let _ = writeln!(cm, "mean\t{:.17e}", r.mean);
    } else {
        let _ = writeln!(cm, "s\tn/a\t# needs at least two modalities");
    }
    write_file(&rdir.join("cross_modal.tsv"), cm)?;

    let base = HyperParams {
        max_epochs: cfg.investigate_epochs,
        ..h.clone()
    };
    let comparison = phase_comparison(
        &art.split,
        &art.features,
        &art.graphs,
        &art.bipartite,
        &base,
        &[2, 3],
    )?;
    let mut pc = String::new();
    let _ = writeln!(pc, "# config_sha256 = {sha}");
    let _ = writeln!(
        pc,
        "gcn_phase\tlayers\trecall20\tndcg20\tseconds_per_epoch\tcross_modal_s"
    );
    for row in &comparison.rows {
        let _ = writeln!(
            pc,
            "{}\t{}\t{:.10e}\t{:.10e}\t{:.6}\t{:.10e}",
            row.gcn_phase, row.layers, row.recall20, row.ndcg20, row.seconds_per_epoch,
            row.cross_modal_s
        );
    }
    for layers in [2usize, 3] {
        let s_of = |phase: GcnPhase| {
            comparison
                .rows
                .iter()
                .find(|r| r.gcn_phase == phase && r.layers == layers)
                .map(|r| r.cross_modal_s)
        };
        if let (Some(st), Some(str_)) = (s_of(GcnPhase::Test), s_of(GcnPhase::Train)) {
            let _ = writeln!(pc, "alignment_l{layers}\ttest_ge_train={}", st >= str_);
        }
    }
    write_file(&rdir.join("phase_comparison.tsv"), pc)?;

    // popularity baseline for context next to the model metrics
    let pop = popularity_rank(&art.split, 20, EvalSplit::Test);
    let pop_report = evaluate(&pop, &art.split.test);
    let mut pb = String::new();
    let _ = writeln!(pb, "# config_sha256 = {sha}");
    metric_lines(&mut pb, "popularity_", &pop_report);
    write_file(&rdir.join("popularity_baseline.tsv"), pb)
}

// ---------------------------------------------------------------------------
// bench

pub const GRID_LAYERS: [usize; 4] = [1, 2, 3, 4];
pub const GRID_ITEM_HOPS: [usize; 3] = [1, 2, 3];
pub const GRID_K: [usize; 4] = [5, 10, 15, 20];

pub fn cmd_bench(cfg: &RunConfig) -> CliResult<()> {
    let art = load_prepared(cfg)?;
    let rdir = reports_dir(cfg);
    ensure_dir(&rdir)?;
    let mut out = String::new();
    let _ = writeln!(out, "# config_sha256 = {}", config_sha256(cfg));
    let _ = writeln!(
        out,
        "gcn_layers\titem_hops\tk\tepochs\tmean_seconds\ttotal_seconds\tpeak_rss_kib"
    );
    for k in GRID_K {
        // item graphs depend only on k; rebuild once per k value
        let graphs = ItemItemGraphSet {
            graphs: art
                .features
                .iter()
                .map(|f| build_modality_item_graph(f, k))
                .collect(),
        };
        for layers in GRID_LAYERS {
            for hops in GRID_ITEM_HOPS {
                let h = HyperParams {
                    gcn_layers: layers,
                    item_hops: hops,
                    k,
                    max_epochs: cfg.bench_epochs,
                    patience: usize::MAX,
                    ..cfg.hyper.clone()
                };
                let started = Instant::now();
                let (_, log) = train(&art.split, &art.features, &graphs, &art.bipartite, &h)?;
                let total = started.elapsed().as_secs_f64();
                let mean = if log.epochs.is_empty() {
                    0.0
                } else {
                    log.epochs.iter().map(|e| e.seconds).sum::<f64>() / log.epochs.len() as f64
                };
                let _ = writeln!(
                    out,
                    "{layers}\t{hops}\t{k}\t{}\t{mean:.6}\t{total:.6}\t{}",
                    log.epochs.len(),
                    peak_rss_kib().map_or("n/a".to_string(), |v| v.to_string())
                );
            }
        }
    }
    write_file(&rdir.join("bench.tsv"), out)
}

// keep the ablation-sensitive paths referenced from one place for tests
pub fn variant_of(cfg: &RunConfig) -> &'static str {
    match cfg.hyper.item_graph_mode {
        ItemGraphMode::Train => "default",
        ItemGraphMode::Test => "test-item",
        ItemGraphMode::Off => "without-item",
    }
}
