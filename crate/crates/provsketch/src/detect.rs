//! Behavioral-profile learning and anomaly classification.
//!
//! Training sketches (benign activity) are clustered with classic
//! partitioning-around-medoids: greedy BUILD initialization, then repeated
//! best-improving single swaps until a local optimum. When the cluster
//! count is not given it is chosen by maximizing the mean silhouette
//! coefficient. Each cluster then gets a statistical radius — the mean plus
//! `d` population standard deviations of its members' distances to the
//! medoid — and a test sketch is anomalous exactly when it falls outside
//! every cluster's radius. A host is reported compromised when at least one
//! of its snapshots is anomalous; the first anomaly's metadata seeds the
//! authentication-graph traversal.
//!
//! All distances are sketch distances: one minus the fraction of matching
//! sketch slots.

use crate::sketch::{sketch_similarity, Sketch, SketchError, SketchStamp, SnapshotMeta};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("k must be at least 1")]
    KZero,
    #[error("k = {k} exceeds the number of training sketches ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("insufficient samples for silhouette: need at least 3, got {n}")]
    InsufficientSamples { n: usize },
    #[error(transparent)]
    Stamp(#[from] SketchError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Malformed { path: PathBuf, msg: String },
}

/// Dense symmetric distance matrix.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn from_sketches(sketches: &[Sketch]) -> Result<Self, SketchError> {
        for s in &sketches[1..] {
            sketches[0].stamp.check(&s.stamp)?;
        }
        let mut out = DistanceMatrix {
            n: sketches.len(),
            d: vec![0.0; sketches.len() * sketches.len()],
        };
        for i in 0..sketches.len() {
            for j in (i + 1)..sketches.len() {
                let v = 1.0 - sketch_similarity(&sketches[i], &sketches[j])?;
                out.d[i * out.n + j] = v;
                out.d[j * out.n + i] = v;
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PamResult {
    /// Medoid point indices, ascending.
    pub medoids: Vec<usize>,
    /// Per point: position (in `medoids`) of its cluster's medoid.
    pub assignment: Vec<usize>,
    /// Sum of point-to-assigned-medoid distances.
    pub cost: f64,
}

fn assignment_for(dist: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut assignment = vec![0usize; dist.len()];
    let mut cost = 0.0;
    for p in 0..dist.len() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c, &m) in medoids.iter().enumerate() {
            let d = dist.get(p, m);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        assignment[p] = best;
        cost += best_d;
    }
    (assignment, cost)
}

/// Classic PAM. BUILD picks medoids greedily by total-cost reduction, SWAP
/// applies the best strictly improving (medoid, candidate) exchange until
/// none exists. Fully deterministic: all ties resolve to the lower index.
pub fn pam_fit(dist: &DistanceMatrix, k: usize) -> Result<PamResult, DetectError> {
    let n = dist.len();
    if k == 0 {
        return Err(DetectError::KZero);
    }
    if k > n {
        return Err(DetectError::KTooLarge { k, n });
    }
    // BUILD: first medoid minimizes total distance; each further medoid is
    // the point whose addition lowers the assignment cost the most.
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; n];
    for _ in 0..k {
        let mut best_point = usize::MAX;
        let mut best_cost = f64::INFINITY;
        for cand in 0..n {
            if medoids.contains(&cand) {
                continue;
            }
            let cost: f64 = (0..n).map(|p| nearest[p].min(dist.get(p, cand))).sum();
            if cost < best_cost {
                best_cost = cost;
                best_point = cand;
            }
        }
        medoids.push(best_point);
        for p in 0..n {
            nearest[p] = nearest[p].min(dist.get(p, best_point));
        }
    }
    medoids.sort_unstable();
    let (_, mut cost) = assignment_for(dist, &medoids);

    // SWAP to a local optimum.
    loop {
        let mut best_swap: Option<(usize, usize, f64)> = None;
        for (mi, &_m) in medoids.iter().enumerate() {
            for cand in 0..n {
                if medoids.contains(&cand) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[mi] = cand;
                let (_, trial_cost) = assignment_for(dist, &trial);
                let better = match best_swap {
                    None => trial_cost < cost,
                    Some((_, _, c)) => trial_cost < c,
                };
                if better {
                    best_swap = Some((mi, cand, trial_cost));
                }
            }
        }
        match best_swap {
            Some((mi, cand, new_cost)) if new_cost < cost => {
                medoids[mi] = cand;
                medoids.sort_unstable();
                cost = new_cost;
            }
            _ => break,
        }
    }
    let (assignment, cost) = assignment_for(dist, &medoids);
    Ok(PamResult {
        medoids,
        assignment,
        cost,
    })
}

/// Mean silhouette coefficient for a clustering. Points in singleton
/// clusters score 0, as do points with `a = b = 0`.
pub fn silhouette(dist: &DistanceMatrix, assignment: &[usize], k: usize) -> f64 {
    let n = dist.len();
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        sizes[c] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = assignment[i];
        if sizes[own] <= 1 {
            continue; // s(i) = 0
        }
        // Mean distance to each cluster.
        let mut sums = vec![0.0f64; k];
        for j in 0..n {
            if j != i {
                sums[assignment[j]] += dist.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c != own && sizes[c] > 0 {
                b = b.min(sums[c] / sizes[c] as f64);
            }
        }
        // Every other cluster may be empty (possible when distances are
        // degenerate and assignment collapses onto one cluster): b is then
        // undefined and the point contributes s(i) = 0, matching the
        // all-identical degenerate rule.
        if !b.is_finite() {
            continue;
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectedK {
    pub k: usize,
    pub silhouette: f64,
    pub pam: PamResult,
}

/// Silhouette-maximizing cluster count over `k_range`; ties pick the
/// smaller k. Requires at least 3 samples; the range is clamped to
/// `[2, n-1]`.
pub fn select_k(
    dist: &DistanceMatrix,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<SelectedK, DetectError> {
    let n = dist.len();
    if n < 3 {
        return Err(DetectError::InsufficientSamples { n });
    }
    let lo = (*k_range.start()).max(2);
    let hi = (*k_range.end()).min(n - 1);
    let mut best: Option<SelectedK> = None;
    for k in lo..=hi {
        let pam = pam_fit(dist, k)?;
        let s = silhouette(dist, &pam.assignment, k);
        let improves = match &best {
            None => true,
            Some(b) => s > b.silhouette,
        };
        if improves {
            best = Some(SelectedK {
                k,
                silhouette: s,
                pam,
            });
        }
    }
    best.ok_or(DetectError::InsufficientSamples { n })
}

/// Population mean and standard deviation.
pub(crate) fn population_stats(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClusterInfo {
    /// Index of the medoid in the training set (for provenance).
    pub medoid_index: usize,
    pub medoid_meta: SnapshotMeta,
    /// Medoid sketch content; hashes stored as IEEE-754 bit patterns so the
    /// model file round-trips exactly.
    pub slots: Vec<u64>,
    pub hash_bits: Vec<u64>,
    pub size: usize,
    pub mean: f64,
    pub std: f64,
    pub threshold: f64,
    /// Singleton cluster: zero spread makes the threshold degenerate.
    pub brittle: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MedoidModel {
    pub version: u32,
    pub stamp: SketchStamp,
    pub threshold_sigma: f64,
    /// Mean silhouette of the chosen clustering; absent for k = 1 or k = n.
    pub silhouette: Option<f64>,
    /// Digest of the pipeline configuration that produced the model.
    pub config_hash: u64,
    pub clusters: Vec<ClusterInfo>,
}

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

/// Fit the per-cluster anomaly radii: threshold = μ + d·σ over members'
/// distances to their medoid (the medoid contributes its own zero).
fn fit_thresholds(
    sketches: &[Sketch],
    dist: &DistanceMatrix,
    pam: &PamResult,
    d: f64,
    silhouette: Option<f64>,
    config_hash: u64,
) -> MedoidModel {
    let mut clusters = Vec::with_capacity(pam.medoids.len());
    for (c, &m) in pam.medoids.iter().enumerate() {
        let member_dists: Vec<f64> = (0..sketches.len())
            .filter(|&p| pam.assignment[p] == c)
            .map(|p| dist.get(p, m))
            .collect();
        let (mean, std) = population_stats(&member_dists);
        let brittle = member_dists.len() == 1;
        clusters.push(ClusterInfo {
            medoid_index: m,
            medoid_meta: sketches[m].meta.clone(),
            slots: sketches[m].slots.clone(),
            hash_bits: sketches[m].hashes.iter().map(|x| x.to_bits()).collect(),
            size: member_dists.len(),
            mean,
            std,
            threshold: mean + d * std,
            brittle,
        });
    }
    MedoidModel {
        version: MODEL_VERSION,
        stamp: sketches[0].stamp,
        threshold_sigma: d,
        silhouette,
        config_hash,
        clusters,
    }
}

pub fn train(
    sketches: &[Sketch],
    k: KChoice,
    threshold_sigma: f64,
    config_hash: u64,
) -> Result<MedoidModel, DetectError> {
    if sketches.is_empty() {
        return Err(DetectError::EmptyTrainingSet);
    }
    let dist = DistanceMatrix::from_sketches(sketches)?;
    let (pam, sil) = match k {
        KChoice::Auto => {
            let sel = select_k(&dist, 2..=10)?;
            let s = sel.silhouette;
            (sel.pam, Some(s))
        }
        KChoice::Fixed(k) => {
            let pam = pam_fit(&dist, k)?;
            let sil = if k >= 2 && k < sketches.len() {
                Some(silhouette(&dist, &pam.assignment, k))
            } else {
                None
            };
            (pam, sil)
        }
    };
    Ok(fit_thresholds(
        sketches,
        &dist,
        &pam,
        threshold_sigma,
        sil,
        config_hash,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub partition: String,
    pub snapshot_id: u64,
    pub timestamp: i64,
    pub host: String,
    pub user: String,
    pub nearest_cluster: usize,
    pub distance: f64,
    pub threshold: f64,
    pub anomaly: bool,
}

fn slot_distance(a: &[u64], b: &[u64]) -> f64 {
    let matches = a.iter().zip(b).filter(|(x, y)| x == y).count();
    1.0 - matches as f64 / a.len() as f64
}

impl MedoidModel {
    /// Score one sketch: anomalous iff it lies beyond every cluster's
    /// threshold. The nearest cluster is reported either way.
    pub fn classify(&self, sk: &Sketch) -> Result<AnomalyReport, DetectError> {
        self.stamp.check(&sk.stamp)?;
        let mut nearest = 0usize;
        let mut nearest_d = f64::INFINITY;
        let mut inside_any = false;
        for (c, cluster) in self.clusters.iter().enumerate() {
            let d = slot_distance(&cluster.slots, &sk.slots);
            if d <= cluster.threshold {
                inside_any = true;
            }
            if d < nearest_d {
                nearest_d = d;
                nearest = c;
            }
        }
        Ok(AnomalyReport {
            partition: sk.meta.partition.clone(),
            snapshot_id: sk.meta.snapshot_id,
            timestamp: sk.meta.timestamp,
            host: sk.meta.host.clone(),
            user: sk.meta.user.clone(),
            nearest_cluster: nearest,
            distance: nearest_d,
            threshold: self.clusters[nearest].threshold,
            anomaly: !inside_any,
        })
    }

    pub fn medoid_sketch(&self, c: usize) -> Sketch {
        let info = &self.clusters[c];
        Sketch {
            stamp: self.stamp,
            slots: info.slots.clone(),
            hashes: info.hash_bits.iter().map(|&b| f64::from_bits(b)).collect(),
            meta: info.medoid_meta.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), DetectError> {
        let json = serde_json::to_string_pretty(self).expect("model serializes");
        fs::write(path, json).map_err(|e| DetectError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<MedoidModel, DetectError> {
        let text = fs::read_to_string(path).map_err(|e| DetectError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let model: MedoidModel =
            serde_json::from_str(&text).map_err(|e| DetectError::Malformed {
                path: path.to_path_buf(),
                msg: e.to_string(),
            })?;
        if model.version != MODEL_VERSION {
            return Err(DetectError::Malformed {
                path: path.to_path_buf(),
                msg: format!("unsupported model version {}", model.version),
            });
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HostVerdict {
    pub host: String,
    pub compromised: bool,
    pub snapshots: usize,
    pub anomalies: usize,
    /// (user, timestamp, snapshot_id) of the earliest anomaly — the seed
    /// for session-graph traversal.
    pub first_anomaly: Option<(String, i64, u64)>,
}

/// Aggregate per-snapshot reports into per-host verdicts: a host is
/// compromised when any snapshot is anomalous. Hosts are emitted in sorted
/// order; the first anomaly is the earliest by (timestamp, snapshot_id).
pub fn host_verdicts(reports: &[AnomalyReport]) -> Vec<HostVerdict> {
    let mut by_host: BTreeMap<&str, Vec<&AnomalyReport>> = BTreeMap::new();
    for r in reports {
        by_host.entry(&r.host).or_default().push(r);
    }
    by_host
        .into_iter()
        .map(|(host, mut rs)| {
            rs.sort_by_key(|r| (r.timestamp, r.snapshot_id));
            let anomalies = rs.iter().filter(|r| r.anomaly).count();
            let first = rs
                .iter()
                .find(|r| r.anomaly)
                .map(|r| (r.user.clone(), r.timestamp, r.snapshot_id));
            HostVerdict {
                host: host.to_string(),
                compromised: anomalies > 0,
                snapshots: rs.len(),
                anomalies,
                first_anomaly: first,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// Confusion-matrix metrics of host verdicts against a ground-truth set of
/// compromised hosts. Undefined ratios (0/0) are reported as 0.
pub fn evaluate(verdicts: &[HostVerdict], truth: &BTreeSet<String>) -> Metrics {
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for v in verdicts {
        match (v.compromised, truth.contains(&v.host)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Metrics {
        tp,
        fp,
        tn,
        fn_,
        precision,
        recall,
        accuracy: ratio(tp + tn, tp + fp + tn + fn_),
        f1,
    }
}

/// Ground-truth file: one `host[,window]` per line; `#` comments and blank
/// lines skipped. The optional window label is parsed and retained, but
/// evaluation is host-level.
pub fn parse_ground_truth(path: &Path) -> Result<BTreeMap<String, Option<String>>, DetectError> {
    let text = fs::read_to_string(path).map_err(|e| DetectError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let host = parts.next().unwrap().trim();
        if host.is_empty() {
            return Err(DetectError::Malformed {
                path: path.to_path_buf(),
                msg: format!("line {}: empty host", idx + 1),
            });
        }
        let window = parts.next().map(|w| w.trim().to_string());
        out.insert(host.to_string(), window);
    }
    Ok(out)
}

/// `partition,snapshot_id,timestamp,host,user,nearest_cluster,distance,threshold,verdict`
/// Host-level report: one line per host with the verdict and the snapshot
/// that decides it — for compromised hosts the first anomaly, for clean
/// hosts the closest call (largest distance − threshold margin). `windows`
/// maps ground-truth hosts to their optional evaluation window, echoed in
/// the `window` column.
pub fn host_report_csv(
    reports: &[AnomalyReport],
    windows: Option<&BTreeMap<String, Option<String>>>,
) -> String {
    let mut by_host: BTreeMap<&str, Vec<&AnomalyReport>> = BTreeMap::new();
    for r in reports {
        by_host.entry(&r.host).or_default().push(r);
    }
    let mut out =
        String::from("host,window,verdict,first_anomaly_ts,nearest_cluster,distance,threshold\n");
    for (host, mut rs) in by_host {
        rs.sort_by_key(|r| (r.timestamp, r.snapshot_id));
        let window = windows
            .and_then(|w| w.get(host))
            .and_then(|w| w.as_deref())
            .unwrap_or("");
        let pick = rs.iter().find(|r| r.anomaly).copied().unwrap_or_else(|| {
            // Clean host: report the snapshot closest to its threshold.
            rs.iter()
                .copied()
                .max_by(|a, b| {
                    (a.distance - a.threshold)
                        .partial_cmp(&(b.distance - b.threshold))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("host group is non-empty")
        });
        let (verdict, first_ts) = if pick.anomaly {
            ("compromised", pick.timestamp.to_string())
        } else {
            ("clean", String::new())
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            host, window, verdict, first_ts, pick.nearest_cluster, pick.distance, pick.threshold
        ));
    }
    out
}

pub fn reports_csv(reports: &[AnomalyReport]) -> String {
    let mut out = String::from(
        "partition,snapshot_id,timestamp,host,user,nearest_cluster,distance,threshold,verdict\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.partition,
            r.snapshot_id,
            r.timestamp,
            r.host,
            r.user,
            r.nearest_cluster,
            r.distance,
            r.threshold,
            if r.anomaly { "anomaly" } else { "normal" }
        ));
    }
    out
}
