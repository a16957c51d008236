//! Interaction ingestion, k-core filtering, deterministic splits, and
//! per-modality feature loading.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::sparse::ByteReader;

const FEATURE_MAGIC: &[u8; 4] = b"MMFM";
const FEATURE_VERSION: u32 = 1;

/// A raw (user, item) pair as read from disk, before id remapping.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawInteraction {
    pub user_key: String,
    pub item_key: String,
}

/// Bijection between raw keys and dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct IdMap {
    forward: HashMap<String, u32>,
    backward: Vec<String>,
}

impl IdMap {
    pub fn new() -> Self {
        IdMap {
            forward: HashMap::new(),
            backward: Vec::new(),
        }
    }

    pub fn insert(&mut self, key: &str) -> u32 {
        if let Some(&i) = self.forward.get(key) {
            return i;
        }
        let i = self.backward.len() as u32;
        self.forward.insert(key.to_string(), i);
        self.backward.push(key.to_string());
        i
    }

    pub fn get(&self, key: &str) -> Option<u32> {
        self.forward.get(key).copied()
    }

    pub fn key(&self, index: u32) -> &str {
        &self.backward[index as usize]
    }

    pub fn len(&self) -> usize {
        self.backward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backward.is_empty()
    }

    /// Text persistence: one "dense_index<TAB>raw_key" per line.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (i, k) in self.backward.iter().enumerate() {
            out.push_str(&format!("{}\t{}\n", i, k));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<IdMap> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut map = IdMap::new();
        for (ln, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let mut cols = line.splitn(2, '\t');
            let _idx = cols.next();
            let key = cols.next().ok_or(Error::MalformedLine {
                path: path.to_path_buf(),
                line: ln + 1,
            })?;
            map.insert(key);
        }
        Ok(map)
    }
}

impl Default for IdMap {
    fn default() -> Self {
        Self::new()
    }
}

/// Row-compressed user → item incidence. Item indices per row are strictly
/// increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTable {
    n_users: usize,
    n_items: usize,
    indptr: Vec<usize>,
    items: Vec<u32>,
}

impl InteractionTable {
    pub fn from_pairs(n_users: usize, n_items: usize, pairs: &[(u32, u32)]) -> InteractionTable {
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n_users];
        for &(u, i) in pairs {
            rows[u as usize].push(i);
        }
        let mut indptr = Vec::with_capacity(n_users + 1);
        let mut items = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            items.extend_from_slice(&row);
            indptr.push(items.len());
        }
        InteractionTable {
            n_users,
            n_items,
            indptr,
            items,
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn nnz(&self) -> usize {
        self.items.len()
    }

    pub fn row(&self, u: u32) -> &[u32] {
        &self.items[self.indptr[u as usize]..self.indptr[u as usize + 1]]
    }

    pub fn contains(&self, u: u32, i: u32) -> bool {
        self.row(u).binary_search(&i).is_ok()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n_users as u32).flat_map(move |u| self.row(u).iter().map(move |&i| (u, i)))
    }

    /// Training interaction count per item.
    pub fn item_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n_items];
        for &i in &self.items {
            deg[i as usize] += 1;
        }
        deg
    }

    /// Text persistence in the interactions format, using raw keys.
    pub fn save(&self, path: &Path, users: &IdMap, items: &IdMap) -> Result<()> {
        let mut out = String::new();
        for (u, i) in self.pairs() {
            out.push_str(&format!("{}\t{}\n", users.key(u), items.key(i)));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Reload against fixed id maps (keys must already be mapped).
    pub fn load(path: &Path, users: &IdMap, items: &IdMap) -> Result<InteractionTable> {
        let raw = load_interactions(path)?;
        let pairs: Vec<(u32, u32)> = raw
            .iter()
            .map(|r| {
                let u = users.get(&r.user_key).ok_or_else(|| Error::UnknownKey {
                    path: path.to_path_buf(),
                    key: r.user_key.clone(),
                })?;
                let i = items.get(&r.item_key).ok_or_else(|| Error::UnknownKey {
                    path: path.to_path_buf(),
                    key: r.item_key.clone(),
                })?;
                Ok((u, i))
            })
            .collect::<Result<_>>()?;
        Ok(InteractionTable::from_pairs(users.len(), items.len(), &pairs))
    }
}

/// Train/validation/test tables over one shared pair of id maps.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub users: IdMap,
    pub items: IdMap,
    pub train: InteractionTable,
    pub validation: InteractionTable,
    pub test: InteractionTable,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }
}

/// Frozen per-modality item features, dense item order, row-major f32.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub modality: String,
    n_items: usize,
    width: usize,
    values: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(modality: &str, n_items: usize, width: usize, values: Vec<f32>) -> FeatureMatrix {
        assert_eq!(values.len(), n_items * width);
        FeatureMatrix {
            modality: modality.to_string(),
            n_items,
            width,
            values,
        }
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

/// Read the TAB-separated interaction file, dropping duplicate pairs while
/// keeping first-occurrence order. Extra columns past the second are ignored.
pub fn load_interactions(path: &Path) -> Result<Vec<RawInteraction>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut out = Vec::new();
    for (ln, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let user = cols.next().unwrap_or("");
        let item = cols.next().ok_or(Error::MalformedLine {
            path: path.to_path_buf(),
            line: ln + 1,
        })?;
        if user.is_empty() || item.is_empty() {
            return Err(Error::MalformedLine {
                path: path.to_path_buf(),
                line: ln + 1,
            });
        }
        if seen.insert((user.to_string(), item.to_string())) {
            out.push(RawInteraction {
                user_key: user.to_string(),
                item_key: item.to_string(),
            });
        }
    }
    Ok(out)
}

/// Iteratively peel users and items with fewer than `k` interactions until a
/// fixed point. Returns the surviving interactions in input order.
pub fn kcore_filter(interactions: &[RawInteraction], k: usize) -> Vec<RawInteraction> {
    assert!(k >= 1);
    let mut alive: Vec<bool> = vec![true; interactions.len()];
    loop {
        let mut user_deg: HashMap<&str, usize> = HashMap::new();
        let mut item_deg: HashMap<&str, usize> = HashMap::new();
        for (n, r) in interactions.iter().enumerate() {
            if alive[n] {
                *user_deg.entry(&r.user_key).or_insert(0) += 1;
                *item_deg.entry(&r.item_key).or_insert(0) += 1;
            }
        }
        let mut changed = false;
        for (n, r) in interactions.iter().enumerate() {
            if alive[n] && (user_deg[r.user_key.as_str()] < k || item_deg[r.item_key.as_str()] < k)
            {
                alive[n] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    interactions
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(r, _)| r.clone())
        .collect()
}

/// Per-user 8:1:1 split. Id maps are built in first-occurrence order; each
/// user's interactions are shuffled with a generator seeded from `seed`, then
/// ⌈0.8c⌉ go to train, ⌈remainder/2⌉ to validation, the rest to test.
pub fn split_811(interactions: &[RawInteraction], seed: u64) -> DatasetSplit {
    let mut users = IdMap::new();
    let mut items = IdMap::new();
    let mut per_user: Vec<Vec<u32>> = Vec::new();
    for r in interactions {
        let u = users.insert(&r.user_key) as usize;
        let i = items.insert(&r.item_key);
        if u == per_user.len() {
            per_user.push(Vec::new());
        }
        per_user[u].push(i);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for (u, list) in per_user.iter_mut().enumerate() {
        list.shuffle(&mut rng);
        let c = list.len();
        let mut n_train = (4 * c).div_ceil(5); // ⌈0.8c⌉
        if n_train == 0 && c > 0 {
            n_train = 1; // split repair: every user keeps a training interaction
        }
        let rest = c - n_train;
        let n_val = rest.div_ceil(2);
        for (pos, &i) in list.iter().enumerate() {
            let pair = (u as u32, i);
            if pos < n_train {
                train.push(pair);
            } else if pos < n_train + n_val {
                validation.push(pair);
            } else {
                test.push(pair);
            }
        }
    }
    let (nu, ni) = (users.len(), items.len());
    DatasetSplit {
        users,
        items,
        train: InteractionTable::from_pairs(nu, ni, &train),
        validation: InteractionTable::from_pairs(nu, ni, &validation),
        test: InteractionTable::from_pairs(nu, ni, &test),
        seed,
    }
}

/// Load an MMFM feature file and reorder rows into dense item index order.
///
/// A sidecar file at `<path>.index` (one raw item key per line, line r =
/// key of file row r) maps file rows to items; without it, file row r is
/// the item first occurring r-th in the interaction stream.
pub fn load_features(path: &Path, item_map: &IdMap, modality: &str) -> Result<FeatureMatrix> {
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;
    let mut rd = ByteReader::new(&buf, path);
    if rd.take(4)? != FEATURE_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: "MMFM",
        });
    }
    let version = rd.u32()?;
    if version != FEATURE_VERSION {
        return Err(Error::BadVersion {
            path: path.to_path_buf(),
            found: version,
        });
    }
    let rows = rd.u64()? as usize;
    let cols = rd.u64()? as usize;
    let mut raw = Vec::with_capacity(rows * cols);
    for n in 0..rows * cols {
        let v = f32::from_le_bytes(rd.take(4)?.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFinite {
                path: path.to_path_buf(),
                row: n / cols,
                col: n % cols,
            });
        }
        raw.push(v);
    }

    let index_path = {
        let mut s = path.as_os_str().to_owned();
        s.push(".index");
        std::path::PathBuf::from(s)
    };
    let n_items = item_map.len();
    // row_of[item] = source row in the file
    let row_of: Vec<usize> = if index_path.exists() {
        if rows < n_items {
            return Err(Error::RowCountMismatch {
                path: path.to_path_buf(),
                found: rows,
                expected: n_items,
            });
        }
        let content =
            std::fs::read_to_string(&index_path).map_err(|e| Error::io(&index_path, e))?;
        let mut row_of = vec![usize::MAX; n_items];
        for (r, key) in content.lines().enumerate() {
            if key.is_empty() {
                continue;
            }
            if let Some(i) = item_map.get(key) {
                row_of[i as usize] = r;
            }
        }
        if let Some(missing) = row_of.iter().position(|&r| r == usize::MAX) {
            return Err(Error::UnknownKey {
                path: index_path.clone(),
                key: item_map.key(missing as u32).to_string(),
            });
        }
        row_of
    } else {
        if rows != n_items {
            return Err(Error::RowCountMismatch {
                path: path.to_path_buf(),
                found: rows,
                expected: n_items,
            });
        }
        (0..n_items).collect()
    };

    let mut values = Vec::with_capacity(n_items * cols);
    for &r in &row_of {
        values.extend_from_slice(&raw[r * cols..(r + 1) * cols]);
    }
    Ok(FeatureMatrix::new(modality, n_items, cols, values))
}

/// Write a feature matrix in the MMFM binary format.
pub fn save_features(path: &Path, rows: usize, cols: usize, values: &[f32]) -> Result<()> {
    assert_eq!(values.len(), rows * cols);
    let mut buf = Vec::with_capacity(24 + values.len() * 4);
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(rows as u64).to_le_bytes());
    buf.extend_from_slice(&(cols as u64).to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}
