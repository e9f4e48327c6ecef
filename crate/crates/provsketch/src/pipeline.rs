//! End-to-end orchestration: configuration, stages, artifacts.
//!
//! The pipeline chains ingest (raw logs → canonical events) → featurize
//! (per-partition provenance graphs → kernel histograms → sketches) →
//! train (benign behavioral profile) → detect (per-snapshot reports,
//! per-host verdicts, metrics) → trace (session-graph traversal seeded by
//! the first anomaly). Every stage's outputs are re-runnable on their own
//! and carry the configuration hash, so reruns with an unchanged config
//! produce byte-identical artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::authtrace::{temporal_traverse, TraceResult};
use crate::detect::{
    evaluate, host_report_csv, host_verdicts, parse_ground_truth, reports_csv, AnomalyReport,
    HostVerdict, KChoice, MedoidModel, Metrics,
};
use crate::hash::fnv1a;
use crate::ingest::{
    parse_jsonl, parse_sessions, parse_streamspot, write_events_jsonl, Event, ParsedEvents,
};
use crate::kernel::{KernelKind, KernelOptions, KernelState, LabelHistogram};
use crate::provgraph::ProvGraph;
use crate::sketch::{sketch_from_histogram, sketch_update, Sketch, SketchStamp, SnapshotMeta};
use crate::vocab::Vocab;

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Configuration or input-precondition problems; mapped to exit code 1.
    #[error("invalid configuration: {0}")]
    Validation(String),
    /// Mid-run failures; mapped to exit code 2. Partial outputs from
    /// earlier stages are retained.
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
}

fn stage_err(stage: &'static str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage {
        stage,
        message: e.to_string(),
    }
}

fn invalid(msg: impl Into<String>) -> PipelineError {
    PipelineError::Validation(msg.into())
}

// --------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Event source: a file or a directory of event files.
    pub events: PathBuf,
    /// `jsonl` (canonical/generic) or `streamspot` (6-column TSV).
    pub format: String,
    /// Skip malformed lines instead of failing.
    pub lenient: bool,
    /// Session log for the trace stage (JSONL).
    pub sessions: Option<PathBuf>,
    /// Compromised hosts, one `host[,window]` per line.
    pub ground_truth: Option<PathBuf>,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            events: PathBuf::new(),
            format: "jsonl".into(),
            lenient: false,
            sessions: None,
            ground_truth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    /// Partition events by `graph_id` (falling back to host) or by `host`.
    pub partition: String,
    /// `none` (one snapshot per partition), `<N>-events`, or `<N>-seconds`.
    pub snapshot_every: String,
    /// Treat version links as opaque (walks do not cross them).
    pub opaque_versions: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            partition: "graph_id".into(),
            snapshot_every: "none".into(),
            opaque_versions: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// `prov`, `wl`, or `unicorn`.
    pub kind: String,
    /// Neighborhood depth; signed so a negative value is a validation
    /// error rather than a parse error.
    pub h: i64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            kind: "prov".into(),
            h: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SketchConfig {
    /// Number of sketch slots K.
    pub size: i64,
    /// Global seed; all sketch randomness derives from it.
    pub seed: u64,
    /// `snapshot` (recompute from the histogram at each snapshot) or
    /// `stream` (incremental updates; bit-identical results).
    pub mode: String,
}

impl Default for SketchConfig {
    fn default() -> Self {
        SketchConfig {
            size: 2048,
            seed: 42,
            mode: "snapshot".into(),
        }
    }
}

/// `auto` (silhouette-selected) or a fixed cluster count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSetting {
    Fixed(i64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub k: KSetting,
    /// Threshold multiplier d in μ + d·σ.
    pub threshold_sigma: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            k: KSetting::Named("auto".into()),
            threshold_sigma: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    /// Explicit seed; when absent the earliest detected anomaly seeds the
    /// traversal.
    pub seed_host: Option<String>,
    pub seed_user: Option<String>,
    pub seed_time: Option<i64>,
    /// Restrict propagation to these users (seed user always allowed).
    pub users: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write debug/interchange CSVs (graph dumps, histogram dumps,
    /// sparse vectors).
    pub emit_csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            emit_csv: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    pub graph: GraphConfig,
    pub kernel: KernelConfig,
    pub sketch: SketchConfig,
    pub detect: DetectConfig,
    pub trace: Option<TraceConfig>,
    pub output: OutputConfig,
}

/// Snapshot cadence within one partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotPolicy {
    /// One snapshot when the partition's events are exhausted.
    PerPartition,
    /// A snapshot after every N events (and a final one if events remain).
    Events(u64),
    /// A snapshot whenever the event time crosses an N-second boundary
    /// from the partition's first timestamp, plus a final one.
    Seconds(u64),
}

/// How events map to partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionBy {
    /// `graph_id`, falling back to `host` when unset.
    GraphId,
    Host,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchMode {
    Snapshot,
    Stream,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// FNV-1a over the canonical TOML serialization; embedded in every
    /// artifact this configuration produces.
    pub fn config_hash(&self) -> u64 {
        let text = toml::to_string(self).expect("config serializes");
        fnv1a(text.as_bytes())
    }

    pub fn kernel_kind(&self) -> Result<KernelKind, PipelineError> {
        self.kernel
            .kind
            .parse()
            .map_err(|_| invalid(format!("kernel.kind must be prov|wl|unicorn, got `{}`", self.kernel.kind)))
    }

    pub fn h(&self) -> Result<usize, PipelineError> {
        if (0..=16).contains(&self.kernel.h) {
            Ok(self.kernel.h as usize)
        } else {
            Err(invalid(format!(
                "kernel.h must be in 0..=16, got {}",
                self.kernel.h
            )))
        }
    }

    pub fn sketch_size(&self) -> Result<u32, PipelineError> {
        if (1..=(1 << 24)).contains(&self.sketch.size) {
            Ok(self.sketch.size as u32)
        } else {
            Err(invalid(format!(
                "sketch.size must be in 1..=2^24, got {}",
                self.sketch.size
            )))
        }
    }

    pub fn sketch_mode(&self) -> Result<SketchMode, PipelineError> {
        match self.sketch.mode.as_str() {
            "snapshot" => Ok(SketchMode::Snapshot),
            "stream" => Ok(SketchMode::Stream),
            other => Err(invalid(format!(
                "sketch.mode must be snapshot|stream, got `{other}`"
            ))),
        }
    }

    pub fn partition_by(&self) -> Result<PartitionBy, PipelineError> {
        match self.graph.partition.as_str() {
            "graph_id" => Ok(PartitionBy::GraphId),
            "host" => Ok(PartitionBy::Host),
            other => Err(invalid(format!(
                "graph.partition must be graph_id|host, got `{other}`"
            ))),
        }
    }

    pub fn snapshot_policy(&self) -> Result<SnapshotPolicy, PipelineError> {
        let s = self.graph.snapshot_every.as_str();
        if s == "none" {
            return Ok(SnapshotPolicy::PerPartition);
        }
        let parse_n = |n: &str| -> Result<u64, PipelineError> {
            let v: u64 = n
                .parse()
                .map_err(|_| invalid(format!("bad snapshot_every count `{n}`")))?;
            if v == 0 {
                Err(invalid("snapshot_every count must be ≥ 1".to_string()))
            } else {
                Ok(v)
            }
        };
        if let Some(n) = s.strip_suffix("-events") {
            return Ok(SnapshotPolicy::Events(parse_n(n)?));
        }
        if let Some(n) = s.strip_suffix("-seconds") {
            return Ok(SnapshotPolicy::Seconds(parse_n(n)?));
        }
        Err(invalid(format!(
            "graph.snapshot_every must be none|<N>-events|<N>-seconds, got `{s}`"
        )))
    }

    pub fn kchoice(&self) -> Result<KChoice, PipelineError> {
        match &self.detect.k {
            KSetting::Named(s) if s == "auto" => Ok(KChoice::Auto),
            KSetting::Named(s) => Err(invalid(format!("detect.k must be `auto` or an integer, got `{s}`"))),
            KSetting::Fixed(n) if *n >= 1 => Ok(KChoice::Fixed(*n as usize)),
            KSetting::Fixed(n) => Err(invalid(format!("detect.k must be ≥ 1, got {n}"))),
        }
    }

    /// Full validation, run before any stage touches data.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.input.events.as_os_str().is_empty() {
            return Err(invalid("input.events is required"));
        }
        if !self.input.events.exists() {
            return Err(invalid(format!(
                "input.events does not exist: {}",
                self.input.events.display()
            )));
        }
        match self.input.format.as_str() {
            "jsonl" | "streamspot" => {}
            other => {
                return Err(invalid(format!(
                    "input.format must be jsonl|streamspot, got `{other}`"
                )))
            }
        }
        self.kernel_kind()?;
        self.h()?;
        self.sketch_size()?;
        self.sketch_mode()?;
        self.partition_by()?;
        self.snapshot_policy()?;
        self.kchoice()?;
        if !self.detect.threshold_sigma.is_finite() || self.detect.threshold_sigma < 0.0 {
            return Err(invalid(format!(
                "detect.threshold_sigma must be finite and ≥ 0, got {}",
                self.detect.threshold_sigma
            )));
        }
        if let Some(gt) = &self.input.ground_truth {
            if !gt.exists() {
                return Err(invalid(format!(
                    "input.ground_truth does not exist: {}",
                    gt.display()
                )));
            }
        }
        if self.trace.is_some() {
            match &self.input.sessions {
                None => {
                    return Err(invalid(
                        "trace stage configured but input.sessions is missing".to_string(),
                    ))
                }
                Some(p) if !p.exists() => {
                    return Err(invalid(format!(
                        "input.sessions does not exist: {}",
                        p.display()
                    )))
                }
                Some(_) => {}
            }
        }
        if self.output.dir.as_os_str().is_empty() {
            return Err(invalid("output.dir is required"));
        }
        Ok(())
    }
}

// --------------------------------------------------------------------------
// Stages

fn write_bytes(stage: &'static str, path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| stage_err(stage, e))?;
    }
    fs::write(path, bytes).map_err(|e| stage_err(stage, format!("{}: {e}", path.display())))
}

fn csv_header(what: &str, config: u64) -> String {
    format!("# provsketch {what} config={config:016x}\n")
}

/// Collect the event files under `path` (or `path` itself when a file),
/// sorted by name for a deterministic parse order.
fn event_files(path: &Path, format: &str) -> Result<Vec<PathBuf>, PipelineError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let ext = match format {
        "streamspot" => "tsv",
        _ => "jsonl",
    };
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| stage_err("ingest", format!("{}: {e}", path.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == ext))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(stage_err(
            "ingest",
            format!("no .{ext} files under {}", path.display()),
        ));
    }
    Ok(files)
}

/// Parse the configured inputs into one canonical, time-ordered event list
/// and the shared vocabulary; writes `events.jsonl` and `vocab.json`.
pub fn stage_ingest(cfg: &PipelineConfig) -> Result<(Vec<Event>, Vocab), PipelineError> {
    let started = std::time::Instant::now();
    let hash = cfg.config_hash();
    let mut vocab = Vocab::default();
    let mut events: Vec<Event> = Vec::new();
    let mut skipped = 0usize;
    for file in event_files(&cfg.input.events, &cfg.input.format)? {
        let ParsedEvents {
            events: mut batch,
            skipped: s,
        } = match cfg.input.format.as_str() {
            "streamspot" => parse_streamspot(&file, &mut vocab, cfg.input.lenient),
            _ => parse_jsonl(&file, &mut vocab, cfg.input.lenient),
        }
        .map_err(|e| stage_err("ingest", e))?;
        skipped += s;
        events.append(&mut batch);
    }
    // Restore a single global time order (parsers order within one file);
    // stable sort keeps file order for equal timestamps, then renumber.
    events.sort_by_key(|e| e.timestamp);
    for (i, e) in events.iter_mut().enumerate() {
        e.seq = i as u64;
    }
    let out = &cfg.output.dir;
    fs::create_dir_all(out).map_err(|e| stage_err("ingest", e))?;
    write_events_jsonl(
        &out.join("events.jsonl"),
        &events,
        &vocab,
        Some(&format!("provsketch events config={hash:016x}")),
    )
    .map_err(|e| stage_err("ingest", e))?;
    vocab
        .save_with_config(&out.join("vocab.json"), hash)
        .map_err(|e| stage_err("ingest", e))?;
    tracing::info!(
        events = events.len(),
        skipped,
        elapsed_ms = started.elapsed().as_millis() as u64,
        "ingest complete"
    );
    Ok((events, vocab))
}

/// Group events into partitions, preserving time order within each.
pub fn partition_events(
    cfg: &PipelineConfig,
    events: Vec<Event>,
) -> Result<BTreeMap<String, Vec<Event>>, PipelineError> {
    let by = cfg.partition_by()?;
    if events.is_empty() {
        // Empty inputs (or lenient parses that skipped every line) would
        // otherwise "succeed" while producing nothing downstream.
        return Err(PipelineError::Stage {
            stage: "partition",
            message: "no events parsed from input".into(),
        });
    }
    let mut map: BTreeMap<String, Vec<Event>> = BTreeMap::new();
    for e in events {
        let key = match by {
            PartitionBy::GraphId => e.partition_key().to_string(),
            PartitionBy::Host => e.host.clone(),
        };
        map.entry(key).or_default().push(e);
    }
    Ok(map)
}

/// Per-partition featurization result.
struct PartitionOutput {
    partition: String,
    sketches: Vec<Sketch>,
    /// (snapshot file stem, final histogram) per snapshot when CSV dumps
    /// are requested.
    histograms: Vec<(String, LabelHistogram)>,
    stats_line: String,
    dump: Option<String>,
}

fn featurize_partition(
    cfg: &PipelineConfig,
    partition: &str,
    events: &[Event],
    vocab_hash: u64,
    want_hists: bool,
    want_dump: bool,
    vocab: &Vocab,
) -> Result<PartitionOutput, PipelineError> {
    let kind = cfg.kernel_kind()?;
    let h = cfg.h()?;
    let size = cfg.sketch_size()?;
    let mode = cfg.sketch_mode()?;
    let policy = cfg.snapshot_policy()?;
    let hash = cfg.config_hash();
    let opts = KernelOptions {
        opaque_versions: cfg.graph.opaque_versions,
        ..KernelOptions::default()
    };
    let stamp = SketchStamp {
        k: size,
        seed: cfg.sketch.seed,
        kernel: kind,
        h: h as u32,
        vocab_hash,
    };
    let mut g = ProvGraph::default();
    let mut kernel = KernelState::with_options(kind, h, opts);
    let mut running = match mode {
        SketchMode::Stream => Some(sketch_from_histogram(
            &LabelHistogram::default(),
            stamp,
            SnapshotMeta::default(),
        )),
        SketchMode::Snapshot => None,
    };
    let mut sketches: Vec<Sketch> = Vec::new();
    let mut histograms: Vec<(String, LabelHistogram)> = Vec::new();
    let start_ts = events.first().map(|e| e.timestamp).unwrap_or(0);
    let mut window = 0u64; // next seconds-boundary index
    let mut last: Option<&Event> = None;

    let emit = |kernel: &KernelState,
                    running: &Option<Sketch>,
                    sketches: &mut Vec<Sketch>,
                    histograms: &mut Vec<(String, LabelHistogram)>,
                    last: &Event| {
        let meta = SnapshotMeta {
            partition: partition.to_string(),
            snapshot_id: sketches.len() as u64,
            timestamp: last.timestamp,
            host: last.host.clone(),
            user: last.user.clone(),
            config: hash,
        };
        let stem = format!("{partition}.s{:04}", meta.snapshot_id);
        let sk = match running {
            Some(r) => {
                let mut sk = r.clone();
                sk.meta = meta;
                sk
            }
            None => sketch_from_histogram(kernel.histogram(), stamp, meta),
        };
        sketches.push(sk);
        if want_hists {
            histograms.push((stem, kernel.histogram().clone()));
        }
    };

    for (i, e) in events.iter().enumerate() {
        if let SnapshotPolicy::Seconds(w) = policy {
            let w_ns = (w as i64) * 1_000_000_000;
            while let Some(prev) = last {
                if e.timestamp >= start_ts + ((window + 1) as i64) * w_ns {
                    emit(&kernel, &running, &mut sketches, &mut histograms, prev);
                    window += 1;
                } else {
                    break;
                }
            }
        }
        let (nodes, delta) = g.insert_events(std::slice::from_ref(e));
        let hd = kernel.update(&g, &nodes, &delta);
        if let Some(r) = running.as_mut() {
            *r = sketch_update(r, &hd, kernel.histogram());
        }
        last = Some(e);
        if let SnapshotPolicy::Events(n) = policy {
            if (i as u64 + 1) % n == 0 {
                emit(&kernel, &running, &mut sketches, &mut histograms, e);
            }
        }
    }
    // Final snapshot: whatever accumulated since the last boundary (always
    // at least one snapshot for a non-empty partition).
    if let Some(prev) = last {
        let already = matches!(policy, SnapshotPolicy::Events(n) if events.len() as u64 % n == 0);
        if !already || sketches.is_empty() {
            emit(&kernel, &running, &mut sketches, &mut histograms, prev);
        }
    }
    let stats = g.reduction_stats();
    let stats_line = format!(
        "{},{},{},{},{},{},{},{:.4},{}\n",
        partition,
        g.node_count(),
        g.edge_count(),
        stats.raw_events,
        stats.merged_events,
        stats.rejected_self_loops,
        format_args!("{:.4}", stats.versions_per_entity_mean),
        stats.edge_reduction_factor,
        sketches.len()
    );
    Ok(PartitionOutput {
        partition: partition.to_string(),
        sketches,
        histograms,
        stats_line,
        dump: want_dump.then(|| g.dump(vocab)),
    })
}

/// Build per-partition graphs, run the kernel incrementally, and emit one
/// sketch per snapshot. Writes sketch files, graph stats, and (optionally)
/// graph/histogram/sparse-vector dumps.
pub fn stage_featurize(
    cfg: &PipelineConfig,
    partitions: &BTreeMap<String, Vec<Event>>,
    vocab: &Vocab,
) -> Result<Vec<Sketch>, PipelineError> {
    let started = std::time::Instant::now();
    let hash = cfg.config_hash();
    let vocab_hash = vocab.digest();
    let emit_csv = cfg.output.emit_csv;
    let mut outputs: Vec<PartitionOutput> = partitions
        .par_iter()
        .map(|(partition, events)| {
            featurize_partition(cfg, partition, events, vocab_hash, emit_csv, emit_csv, vocab)
        })
        .collect::<Result<Vec<_>, _>>()?;
    outputs.sort_by(|a, b| a.partition.cmp(&b.partition));

    let out = &cfg.output.dir;
    let sketch_dir = out.join("sketches");
    fs::create_dir_all(&sketch_dir).map_err(|e| stage_err("featurize", e))?;
    let mut stats_csv = csv_header("graph stats", hash);
    stats_csv.push_str(
        "partition,nodes,edges,raw_events,merged_events,rejected_self_loops,versions_per_entity_mean,edge_reduction_factor,snapshots\n",
    );
    let mut all_sketches: Vec<Sketch> = Vec::new();
    let mut hist_rows: Vec<(String, LabelHistogram)> = Vec::new();
    for po in &mut outputs {
        stats_csv.push_str(&po.stats_line);
        for sk in &po.sketches {
            let path = sketch_dir.join(format!(
                "{}.s{:04}.sketch",
                po.partition, sk.meta.snapshot_id
            ));
            sk.save(&path).map_err(|e| stage_err("featurize", e))?;
        }
        if let Some(dump) = &po.dump {
            let mut text = csv_header("graph dump", hash);
            text.push_str(dump);
            write_bytes(
                "featurize",
                &out.join("graphs").join(format!("{}.txt", po.partition)),
                text.as_bytes(),
            )?;
        }
        all_sketches.append(&mut po.sketches);
        hist_rows.append(&mut po.histograms);
    }
    write_bytes("featurize", &out.join("graphs.csv"), stats_csv.as_bytes())?;
    if emit_csv {
        for (stem, hist) in &hist_rows {
            let mut text = csv_header("histogram", hash);
            text.push_str(&hist.dump_csv());
            write_bytes(
                "featurize",
                &out.join("histograms").join(format!("{stem}.csv")),
                text.as_bytes(),
            )?;
        }
        let hists: Vec<LabelHistogram> = hist_rows.iter().map(|(_, h)| h.clone()).collect();
        let sv = crate::sketch::sparse_vectorize(&hists);
        let mut text = csv_header("sparse vectors", hash);
        text.push_str("snapshot,");
        text.push_str(
            &sv.vocabulary
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        text.push('\n');
        for ((stem, _), vector) in hist_rows.iter().zip(&sv.vectors) {
            text.push_str(stem);
            for x in vector {
                text.push(',');
                text.push_str(&format!("{x}"));
            }
            text.push('\n');
        }
        write_bytes("featurize", &out.join("sparse.csv"), text.as_bytes())?;
    }
    tracing::info!(
        partitions = partitions.len(),
        sketches = all_sketches.len(),
        elapsed_ms = started.elapsed().as_millis() as u64,
        "featurize complete"
    );
    Ok(all_sketches)
}

/// Load ground truth when configured.
pub fn load_ground_truth(
    cfg: &PipelineConfig,
) -> Result<Option<BTreeMap<String, Option<String>>>, PipelineError> {
    match &cfg.input.ground_truth {
        None => Ok(None),
        Some(p) => parse_ground_truth(p)
            .map(Some)
            .map_err(|e| stage_err("detect", e)),
    }
}

/// Train the medoid model on the benign sketches (ground-truth hosts are
/// excluded — the training window must be benign) and write `model.json`.
pub fn stage_train(
    cfg: &PipelineConfig,
    sketches: &[Sketch],
    truth: Option<&BTreeMap<String, Option<String>>>,
) -> Result<MedoidModel, PipelineError> {
    let started = std::time::Instant::now();
    let hash = cfg.config_hash();
    let training: Vec<Sketch> = match truth {
        Some(t) => sketches
            .iter()
            .filter(|s| !t.contains_key(&s.meta.host) && !t.contains_key(&s.meta.partition))
            .cloned()
            .collect(),
        None => sketches.to_vec(),
    };
    let model = crate::detect::train(
        &training,
        cfg.kchoice()?,
        cfg.detect.threshold_sigma,
        hash,
    )
    .map_err(|e| stage_err("train", e))?;
    model
        .save(&cfg.output.dir.join("model.json"))
        .map_err(|e| stage_err("train", e))?;
    tracing::info!(
        training = training.len(),
        clusters = model.clusters.len(),
        elapsed_ms = started.elapsed().as_millis() as u64,
        "train complete"
    );
    Ok(model)
}

/// Classify every sketch, aggregate per-host verdicts, score against the
/// ground truth when present; writes `report.csv` (host-level) and
/// `report-snapshots.csv`.
pub fn stage_detect(
    cfg: &PipelineConfig,
    model: &MedoidModel,
    sketches: &[Sketch],
    truth: Option<&BTreeMap<String, Option<String>>>,
) -> Result<(Vec<AnomalyReport>, Vec<HostVerdict>, Option<Metrics>), PipelineError> {
    let started = std::time::Instant::now();
    let hash = cfg.config_hash();
    let mut reports = Vec::with_capacity(sketches.len());
    for sk in sketches {
        reports.push(model.classify(sk).map_err(|e| stage_err("detect", e))?);
    }
    let verdicts = host_verdicts(&reports);
    let metrics = truth.map(|t| {
        let hosts: BTreeSet<String> = t.keys().cloned().collect();
        evaluate(&verdicts, &hosts)
    });
    let mut host_csv = csv_header("host report", hash);
    if let Some(m) = &metrics {
        host_csv.push_str(&format!(
            "# tp={} fp={} tn={} fn={} precision={} recall={} accuracy={} f1={}\n",
            m.tp, m.fp, m.tn, m.fn_, m.precision, m.recall, m.accuracy, m.f1
        ));
    }
    host_csv.push_str(&host_report_csv(&reports, truth));
    write_bytes("detect", &cfg.output.dir.join("report.csv"), host_csv.as_bytes())?;
    let mut snap_csv = csv_header("snapshot report", hash);
    snap_csv.push_str(&reports_csv(&reports));
    write_bytes(
        "detect",
        &cfg.output.dir.join("report-snapshots.csv"),
        snap_csv.as_bytes(),
    )?;
    tracing::info!(
        snapshots = reports.len(),
        hosts = verdicts.len(),
        anomalies = reports.iter().filter(|r| r.anomaly).count(),
        elapsed_ms = started.elapsed().as_millis() as u64,
        "detect complete"
    );
    Ok((reports, verdicts, metrics))
}

/// Traverse the session graph from the configured seed, or from the
/// earliest detected anomaly when no explicit seed is given. Returns `None`
/// (with a log line) when tracing is enabled but no seed exists.
pub fn stage_trace(
    cfg: &PipelineConfig,
    verdicts: &[HostVerdict],
) -> Result<Option<TraceResult>, PipelineError> {
    let Some(tc) = &cfg.trace else {
        return Ok(None);
    };
    let sessions_path = cfg
        .input
        .sessions
        .as_ref()
        .ok_or_else(|| invalid("trace stage configured but input.sessions is missing"))?;
    let edges = parse_sessions(sessions_path, cfg.input.lenient)
        .map_err(|e| stage_err("trace", e))?;
    // Seed: explicit config, else the earliest first-anomaly across hosts.
    let seed = match (&tc.seed_host, tc.seed_time) {
        (Some(h), Some(t)) => Some((h.clone(), tc.seed_user.clone(), t)),
        _ => verdicts
            .iter()
            .filter_map(|v| {
                v.first_anomaly
                    .as_ref()
                    .map(|(user, ts, _)| (v.host.clone(), Some(user.clone()), *ts))
            })
            .min_by(|a, b| (a.2, &a.0).cmp(&(b.2, &b.0))),
    };
    let Some((seed_host, seed_user, seed_time)) = seed else {
        tracing::warn!("trace stage enabled but no anomaly and no explicit seed; skipping");
        return Ok(None);
    };
    let filter: Option<BTreeSet<String>> = tc
        .users
        .as_ref()
        .map(|u| u.iter().cloned().collect());
    let result = temporal_traverse(
        &edges,
        &seed_host,
        seed_user.as_deref(),
        seed_time,
        filter.as_ref(),
    );
    let hash = cfg.config_hash();
    let mut edges_csv = csv_header("trace edges", hash);
    edges_csv.push_str(&result.edges_csv());
    write_bytes("trace", &cfg.output.dir.join("trace-edges.csv"), edges_csv.as_bytes())?;
    let mut flagged_csv = csv_header("trace flagged", hash);
    flagged_csv.push_str(&result.flagged_csv());
    write_bytes(
        "trace",
        &cfg.output.dir.join("trace-flagged.csv"),
        flagged_csv.as_bytes(),
    )?;
    tracing::info!(
        hosts = result.hosts.len(),
        users = result.users.len(),
        seed_missing = result.seed_missing,
        "trace complete"
    );
    Ok(Some(result))
}

/// Everything a full run produced.
#[derive(Debug)]
pub struct PipelineOutcome {
    pub config_hash: u64,
    pub partitions: usize,
    pub sketches: usize,
    pub verdicts: Vec<HostVerdict>,
    pub metrics: Option<Metrics>,
    pub trace: Option<TraceResult>,
    pub model_path: PathBuf,
    pub report_path: PathBuf,
}

/// Validate, then run every configured stage in order.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    cfg.validate()?;
    let (events, vocab) = stage_ingest(cfg)?;
    let partitions = partition_events(cfg, events)?;
    let sketches = stage_featurize(cfg, &partitions, &vocab)?;
    let truth = load_ground_truth(cfg)?;
    let model = stage_train(cfg, &sketches, truth.as_ref())?;
    let (_reports, verdicts, metrics) = stage_detect(cfg, &model, &sketches, truth.as_ref())?;
    let trace = stage_trace(cfg, &verdicts)?;
    Ok(PipelineOutcome {
        config_hash: cfg.config_hash(),
        partitions: partitions.len(),
        sketches: sketches.len(),
        verdicts,
        metrics,
        trace,
        model_path: cfg.output.dir.join("model.json"),
        report_path: cfg.output.dir.join("report.csv"),
    })
}

// --------------------------------------------------------------------------
// Bench

/// One `bench` measurement row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub kernel: KernelKind,
    pub h: usize,
    /// Distinct live histogram bins after the full update.
    pub avg_histogram_size: f64,
    /// Distinct label ids ever observed (live + decremented away).
    pub vocab_size: usize,
    pub runtime_ns: u128,
}

/// Run every requested kernel × depth over the same random event stream
/// and measure the incremental-update runtime. Structure mirrors the
/// resource-comparison study: histogram footprint, label vocabulary,
/// and wall time per configuration.
pub fn bench_kernels(
    kernels: &[KernelKind],
    h_range: std::ops::RangeInclusive<usize>,
    events: &[Event],
) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &kind in kernels {
        for h in h_range.clone() {
            let mut g = ProvGraph::default();
            let mut kernel = KernelState::new(kind, h);
            let mut seen: BTreeSet<u64> = BTreeSet::new();
            let start = std::time::Instant::now();
            let (nodes, delta) = g.insert_events(events);
            let hd = kernel.update(&g, &nodes, &delta);
            let runtime_ns = start.elapsed().as_nanos();
            seen.extend(hd.keys().copied());
            rows.push(BenchRow {
                kernel: kind,
                h,
                avg_histogram_size: kernel.histogram().len() as f64,
                vocab_size: seen.len(),
                runtime_ns,
            });
        }
    }
    rows
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("kernel,h,avg_histogram_size,vocab_size,runtime_ns\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.kernel, r.h, r.avg_histogram_size, r.vocab_size, r.runtime_ns
        ));
    }
    out
}
