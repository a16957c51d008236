//! Flat "key = value" run configuration with presets and flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use fastrec_core::model::HyperParams;

/// Machine-parsable failure category, printed as the first error token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Config,
    Io,
    Data,
    Compat,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Usage => "usage",
            Category::Config => "config",
            Category::Io => "io",
            Category::Data => "data",
            Category::Compat => "compat",
        })
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.category, self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError {
            category: Category::Config,
            message: message.into(),
        }
    }

    pub fn compat(message: impl Into<String>) -> CliError {
        CliError {
            category: Category::Compat,
            message: message.into(),
        }
    }
}

impl From<fastrec_core::Error> for CliError {
    fn from(e: fastrec_core::Error) -> CliError {
        let category = match &e {
            fastrec_core::Error::Io { .. } => Category::Io,
            _ => Category::Data,
        };
        CliError {
            category,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq)]
pub struct ModalitySpec {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hyper: HyperParams,
    pub interactions_path: PathBuf,
    pub modalities: Vec<ModalitySpec>,
    pub output_dir: PathBuf,
    pub threads: usize,
    /// epochs trained per grid point by the bench command
    pub bench_epochs: usize,
    /// decomposition triplets sampled by the investigate command
    pub investigate_samples: usize,
    /// epochs per variant in the phase comparison
    pub investigate_epochs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hyper: HyperParams::default(),
            interactions_path: PathBuf::new(),
            modalities: Vec::new(),
            output_dir: PathBuf::from("run"),
            threads: 1,
            bench_epochs: 3,
            investigate_samples: 16,
            investigate_epochs: 5,
        }
    }
}

/// Flag overrides, applied after config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub variant: Option<String>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Per-dataset hop/neighbor presets.
fn apply_preset(h: &mut HyperParams, name: &str) -> CliResult<()> {
    match name {
        "baby" => {
            h.item_hops = 2;
            h.k = 10;
        }
        "sports" => {
            h.item_hops = 1;
            h.k = 10;
        }
        "clothing" => {
            h.item_hops = 1;
            h.k = 5;
        }
        _ => return Err(CliError::config(format!("unknown preset {name:?}"))),
    }
    Ok(())
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::config(format!("key {key:?}: {e}")))
}

/// Parse config text. Later occurrences of a key win; the preset is applied
/// before every explicit hyper-parameter key regardless of position.
pub fn parse(text: &str) -> CliResult<RunConfig> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected key = value", ln + 1)))?;
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }

    let mut cfg = RunConfig::default();
    if let Some((_, preset)) = entries.iter().find(|(k, _)| k == "preset") {
        apply_preset(&mut cfg.hyper, preset)?;
    }
    for (key, value) in &entries {
        let h = &mut cfg.hyper;
        match key.as_str() {
            "preset" => {}
            "interactions_path" => cfg.interactions_path = PathBuf::from(value),
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "threads" => cfg.threads = parse_as(key, value)?,
            "bench_epochs" => cfg.bench_epochs = parse_as(key, value)?,
            "investigate_samples" => cfg.investigate_samples = parse_as(key, value)?,
            "investigate_epochs" => cfg.investigate_epochs = parse_as(key, value)?,
            "d" => h.d = parse_as(key, value)?,
            "k" => h.k = parse_as(key, value)?,
            "item_hops" => h.item_hops = parse_as(key, value)?,
            "gcn_layers" => h.gcn_layers = parse_as(key, value)?,
            "lambda" => h.lambda = parse_as(key, value)?,
            "lr" => h.lr = parse_as(key, value)?,
            "batch" => h.batch = parse_as(key, value)?,
            "max_epochs" => h.max_epochs = parse_as(key, value)?,
            "patience" => h.patience = parse_as(key, value)?,
            "seed" => h.seed = parse_as(key, value)?,
            "gcn_phase" => {
                h.gcn_phase = value.parse().map_err(CliError::config)?;
            }
            "item_graph_mode" => {
                h.item_graph_mode = value.parse().map_err(CliError::config)?;
            }
            "item_embed_mode" => {
                h.item_embed_mode = value.parse().map_err(CliError::config)?;
            }
            "include_layer0" => h.include_layer0 = parse_as(key, value)?,
            _ => {
                if let Some(label) = key.strip_prefix("features.") {
                    if label.is_empty() {
                        return Err(CliError::config("empty modality label"));
                    }
                    let spec = ModalitySpec {
                        label: label.to_string(),
                        path: PathBuf::from(value),
                    };
                    match cfg.modalities.iter_mut().find(|m| m.label == label) {
                        Some(m) => *m = spec,
                        None => cfg.modalities.push(spec),
                    }
                } else {
                    return Err(CliError::config(format!("unknown key {key:?}")));
                }
            }
        }
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError {
        category: Category::Io,
        message: format!("{}: {}", path.display(), e),
    })?;
    parse(&text)
}

/// Variant presets used by the ablation runner.
pub fn apply_overrides(cfg: &mut RunConfig, o: &Overrides) -> CliResult<()> {
    if let Some(seed) = o.seed {
        cfg.hyper.seed = seed;
    }
    if let Some(variant) = &o.variant {
        match variant.as_str() {
            "default" => {}
            "without-item" => cfg.hyper.item_graph_mode = fastrec_core::ItemGraphMode::Off,
            "test-item" => cfg.hyper.item_graph_mode = fastrec_core::ItemGraphMode::Test,
            _ => return Err(CliError::config(format!("unknown variant {variant:?}"))),
        }
    }
    if let Some(threads) = o.threads {
        cfg.threads = threads;
    }
    if let Some(out) = &o.out {
        cfg.output_dir = out.clone();
    }
    Ok(())
}

/// Canonical sorted echo of every key; checksummed into manifests so
/// reports can be traced back to the exact configuration.
pub fn canonical(cfg: &RunConfig) -> String {
    let h = &cfg.hyper;
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    map.insert("interactions_path".into(), cfg.interactions_path.display().to_string());
    map.insert("output_dir".into(), cfg.output_dir.display().to_string());
    map.insert("threads".into(), cfg.threads.to_string());
    map.insert("bench_epochs".into(), cfg.bench_epochs.to_string());
    map.insert("investigate_samples".into(), cfg.investigate_samples.to_string());
    map.insert("investigate_epochs".into(), cfg.investigate_epochs.to_string());
    map.insert("d".into(), h.d.to_string());
    map.insert("k".into(), h.k.to_string());
    map.insert("item_hops".into(), h.item_hops.to_string());
    map.insert("gcn_layers".into(), h.gcn_layers.to_string());
    map.insert("lambda".into(), format!("{:e}", h.lambda));
    map.insert("lr".into(), format!("{:e}", h.lr));
    map.insert("batch".into(), h.batch.to_string());
    map.insert("max_epochs".into(), h.max_epochs.to_string());
    map.insert("patience".into(), h.patience.to_string());
    map.insert("seed".into(), h.seed.to_string());
    map.insert("gcn_phase".into(), h.gcn_phase.to_string());
    map.insert("item_graph_mode".into(), h.item_graph_mode.to_string());
    map.insert("item_embed_mode".into(), h.item_embed_mode.to_string());
    map.insert("include_layer0".into(), h.include_layer0.to_string());
    for m in &cfg.modalities {
        map.insert(format!("features.{}", m.label), m.path.display().to_string());
    }
    let mut out = String::new();
    for (k, v) in map {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}
