//! Ranking metrics, sparsity buckets, and epoch timing capture.

use std::collections::HashSet;

use crate::corpus::InteractionTable;
use crate::inference::RankingResult;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricReport {
    pub recall10: f64,
    pub recall20: f64,
    pub ndcg10: f64,
    pub ndcg20: f64,
    pub n_users_evaluated: usize,
}

/// Users bucketed by training-interaction count:
/// [0–5], (5–10], (10–15], (15–20], (20, ∞).
#[derive(Debug, Clone)]
pub struct SparsityBuckets {
    pub reports: [MetricReport; 5],
}

pub const BUCKET_LABELS: [&str; 5] = ["0-5", "5-10", "10-15", "15-20", ">20"];

pub fn bucket_of(train_count: usize) -> usize {
    match train_count {
        0..=5 => 0,
        6..=10 => 1,
        11..=15 => 2,
        16..=20 => 3,
        _ => 4,
    }
}

/// |top-K ∩ truth| / |truth|.
pub fn recall_at_k(ranked: &[u32], truth: &HashSet<u32>, k: usize) -> f64 {
    assert!(!truth.is_empty());
    let hits = ranked.iter().take(k).filter(|i| truth.contains(i)).count();
    hits as f64 / truth.len() as f64
}

/// Binary-relevance NDCG with log2(j+1) discount and |truth|-truncated ideal.
pub fn ndcg_at_k(ranked: &[u32], truth: &HashSet<u32>, k: usize) -> f64 {
    assert!(!truth.is_empty());
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, i)| truth.contains(i))
        .map(|(j, _)| 1.0 / ((j + 2) as f64).log2())
        .sum();
    let idcg: f64 = (0..k.min(truth.len()))
        .map(|j| 1.0 / ((j + 2) as f64).log2())
        .sum();
    dcg / idcg
}

/// Unweighted mean over users with non-empty truth.
pub fn evaluate(rankings: &RankingResult, truth: &InteractionTable) -> MetricReport {
    let mut sum = MetricReport::default();
    for (u, ranked) in &rankings.per_user {
        let t: HashSet<u32> = truth.row(*u).iter().copied().collect();
        if t.is_empty() {
            continue;
        }
        let ids: Vec<u32> = ranked.iter().map(|&(i, _)| i).collect();
        sum.recall10 += recall_at_k(&ids, &t, 10);
        sum.recall20 += recall_at_k(&ids, &t, 20);
        sum.ndcg10 += ndcg_at_k(&ids, &t, 10);
        sum.ndcg20 += ndcg_at_k(&ids, &t, 20);
        sum.n_users_evaluated += 1;
    }
    if sum.n_users_evaluated > 0 {
        let n = sum.n_users_evaluated as f64;
        sum.recall10 /= n;
        sum.recall20 /= n;
        sum.ndcg10 /= n;
        sum.ndcg20 /= n;
    }
    sum
}

/// Per-bucket evaluation, with each user assigned by training count.
pub fn sparsity_report(
    rankings: &RankingResult,
    truth: &InteractionTable,
    train: &InteractionTable,
) -> SparsityBuckets {
    let mut sums = [MetricReport::default(); 5];
    for (u, ranked) in &rankings.per_user {
        let t: HashSet<u32> = truth.row(*u).iter().copied().collect();
        if t.is_empty() {
            continue;
        }
        let b = bucket_of(train.row(*u).len());
        let ids: Vec<u32> = ranked.iter().map(|&(i, _)| i).collect();
        sums[b].recall10 += recall_at_k(&ids, &t, 10);
        sums[b].recall20 += recall_at_k(&ids, &t, 20);
        sums[b].ndcg10 += ndcg_at_k(&ids, &t, 10);
        sums[b].ndcg20 += ndcg_at_k(&ids, &t, 20);
        sums[b].n_users_evaluated += 1;
    }
    for r in &mut sums {
        if r.n_users_evaluated > 0 {
            let n = r.n_users_evaluated as f64;
            r.recall10 /= n;
            r.recall20 /= n;
            r.ndcg10 /= n;
            r.ndcg20 /= n;
        }
    }
    SparsityBuckets { reports: sums }
}

/// Per-epoch wall-clock capture; peak resident memory when the platform
/// exposes it.
#[derive(Debug, Clone, Default)]
pub struct EpochTiming {
    pub seconds: Vec<f64>,
    pub peak_rss_kib: Option<u64>,
}

impl EpochTiming {
    pub fn mean_seconds(&self) -> f64 {
        if self.seconds.is_empty() {
            0.0
        } else {
            self.seconds.iter().sum::<f64>() / self.seconds.len() as f64
        }
    }
}

/// VmHWM from /proc/self/status, when running on Linux.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            return rest.trim().trim_end_matches(" kB").trim().parse().ok();
        }
    }
    None
}
