//! Command-line interface: thin argument parsing over the pipeline stages.
//!
//! Exit codes: 0 success, 1 validation error (bad flags/config/missing
//! inputs), 2 runtime failure (a stage failed mid-run).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::detect::{self, parse_ground_truth, MedoidModel};
use crate::ingest::parse_sessions;
use crate::kernel::KernelKind;
use crate::pipeline::{
    self, bench_csv, bench_kernels, run_pipeline, PipelineConfig, PipelineError, SnapshotPolicy,
};
use crate::provgraph::ProvGraph;
use crate::sketch::Sketch;
use crate::synth::{generate_corpus, manifest_summary, Scenario, SynthConfig};
use crate::vocab::Vocab;

#[derive(Debug, Parser)]
#[command(
    name = "provsketch",
    version,
    about = "Provenance-graph behavioral sketching and anomaly detection",
    propagate_version = true
)]
struct Cli {
    /// Load the full pipeline configuration from a TOML file; when given,
    /// it overrides the other flags of pipeline-shaped subcommands.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Global seed override for subcommands that take randomness.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse raw logs into canonical event JSONL (plus the vocabulary).
    Ingest(IngestArgs),
    /// Build versioned provenance graphs and emit dumps/statistics.
    Build(BuildArgs),
    /// Events → graphs → kernel histograms → sketches.
    Featurize(FeaturizeArgs),
    /// Fit the k-medoids model on benign sketches.
    Train(TrainArgs),
    /// Classify sketches against a trained model and report verdicts.
    Detect(DetectArgs),
    /// Temporal traversal of an authentication session graph.
    Trace(TraceArgs),
    /// Kernel resource benchmarks over a random event stream.
    Bench(BenchArgs),
    /// Generate the synthetic benign/attack corpus.
    Synth(SynthArgs),
    /// Run the full configured pipeline end-to-end.
    Run(RunArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Input format.
    #[arg(long, default_value = "jsonl", value_parser = ["jsonl", "streamspot"])]
    format: String,
    /// Event file or directory of event files.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Output directory (receives events.jsonl and vocab.json).
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Canonical event file or directory.
    #[arg(long, value_name = "PATH")]
    events: PathBuf,
    /// Partition events by graph_id (host fallback) or host.
    #[arg(long, default_value = "graph_id", value_parser = ["graph_id", "host"])]
    partition: String,
    /// Snapshot cadence: none, <N>-events, or <N>-seconds.
    #[arg(long, default_value = "none", value_name = "POLICY")]
    snapshot_every: String,
    /// Output directory (graph dumps and graphs.csv).
    #[arg(long, value_name = "DIR")]
    output: PathBuf,
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct FeaturizeArgs {
    /// Kernel: prov, wl, or unicorn.
    #[arg(long, default_value = "prov", value_parser = ["prov", "wl", "unicorn"])]
    kernel: String,
    /// Neighborhood depth.
    #[arg(long, default_value_t = 3)]
    h: i64,
    /// Canonical event file or directory.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Output directory (sketches, stats, optional CSV dumps).
    #[arg(long, value_name = "DIR")]
    output: PathBuf,
    /// Sketch slots K.
    #[arg(long, default_value_t = 2048)]
    sketch_size: i64,
    /// Sketch construction mode.
    #[arg(long, default_value = "snapshot", value_parser = ["snapshot", "stream"])]
    sketch_mode: String,
    #[arg(long, default_value = "graph_id", value_parser = ["graph_id", "host"])]
    partition: String,
    #[arg(long, default_value = "none", value_name = "POLICY")]
    snapshot_every: String,
    /// Treat version links as opaque (walks do not cross them).
    #[arg(long)]
    opaque_versions: bool,
    /// Also write histogram/sparse-vector/graph CSV dumps.
    #[arg(long, value_parser = ["csv", "none"], default_value = "none")]
    emit: String,
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Directory of .sketch files.
    #[arg(long, value_name = "DIR")]
    sketches: PathBuf,
    /// Cluster count: auto (silhouette) or an integer.
    #[arg(long, default_value = "auto")]
    k: String,
    /// Threshold multiplier d in μ + d·σ.
    #[arg(long, default_value_t = 2.0)]
    threshold_sigma: f64,
    /// Exclude sketches from these ground-truth hosts before training.
    #[arg(long, value_name = "PATH")]
    ground_truth: Option<PathBuf>,
    /// Model output path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Trained model file.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Directory of .sketch files to classify.
    #[arg(long, value_name = "DIR")]
    sketches: PathBuf,
    /// Compromised hosts for scoring, one host[,window] per line.
    #[arg(long, value_name = "PATH")]
    ground_truth: Option<PathBuf>,
    /// Host-level report CSV output path (per-snapshot rows are written
    /// next to it with a .snapshots.csv suffix).
    #[arg(long, value_name = "FILE")]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct TraceArgs {
    /// Session log (JSONL with user/src_host/dst_host/event/timestamp).
    #[arg(long, value_name = "PATH")]
    sessions: PathBuf,
    /// Seed host of the compromise.
    #[arg(long, value_name = "HOST")]
    seed_host: String,
    /// Seed user (optional; flagged alongside the host at t0).
    #[arg(long, value_name = "USER")]
    seed_user: Option<String>,
    /// Seed time t0 (nanoseconds since epoch).
    #[arg(long, value_name = "T", allow_hyphen_values = true)]
    seed_time: i64,
    /// Restrict propagation to these users (comma separated).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    users: Option<Vec<String>>,
    /// Output directory for trace-edges.csv / trace-flagged.csv.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Kernels to measure: all, or a comma list of prov,wl,unicorn.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    kernels: Vec<String>,
    /// Depth range, e.g. 0..5 (inclusive).
    #[arg(long, default_value = "0..5", value_name = "A..B")]
    h: String,
    /// Random event-stream size.
    #[arg(long, default_value_t = 20_000)]
    events: usize,
    /// Output format (csv only).
    #[arg(long, default_value = "csv", value_parser = ["csv"])]
    emit: String,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory for the corpus.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Runs per scenario (six scenarios total).
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Approximate events per run.
    #[arg(long, default_value_t = 1000)]
    approx_events: usize,
}

#[derive(Debug, Args)]
struct RunArgs {}

/// Internal error → exit-code mapping.
enum CliError {
    Validation(String),
    Runtime(String),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Validation(_) => CliError::Validation(e.to_string()),
            PipelineError::Stage { .. } => CliError::Runtime(e.to_string()),
        }
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parse args, dispatch, and map errors to the documented exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp
                | ClapErrorKind::DisplayVersion
                | ClapErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    init_tracing();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn init_tracing() {
    use tracing_subscriber::EnvFilter;
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// When `--config` is present it wins wholesale; otherwise use the config
/// synthesized from the subcommand's flags.
fn effective_config(
    flag_config: PipelineConfig,
    config_path: Option<&Path>,
) -> Result<PipelineConfig, CliError> {
    match config_path {
        Some(p) => Ok(PipelineConfig::load(p)?),
        None => Ok(flag_config),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config_path = cli.config.as_deref();
    let seed = cli.seed;
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a, config_path),
        Command::Build(a) => cmd_build(a, config_path),
        Command::Featurize(a) => cmd_featurize(a, config_path, seed),
        Command::Train(a) => cmd_train(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Bench(a) => cmd_bench(a, seed),
        Command::Synth(a) => cmd_synth(a, seed),
        Command::Run(_) => cmd_run(config_path),
    }
}

fn cmd_ingest(a: IngestArgs, config_path: Option<&Path>) -> Result<(), CliError> {
    let mut cfg = PipelineConfig::default();
    cfg.input.events = a.input;
    cfg.input.format = a.format;
    cfg.input.lenient = a.lenient;
    cfg.output.dir = a.output;
    let cfg = effective_config(cfg, config_path)?;
    cfg.validate()?;
    let (events, vocab) = pipeline::stage_ingest(&cfg)?;
    println!(
        "ingested {} events ({} entity types, {} event types) -> {}",
        events.len(),
        vocab.entity_count(),
        vocab.event_count(),
        cfg.output.dir.join("events.jsonl").display()
    );
    Ok(())
}

fn cmd_build(a: BuildArgs, config_path: Option<&Path>) -> Result<(), CliError> {
    let mut cfg = PipelineConfig::default();
    cfg.input.events = a.events;
    cfg.input.lenient = a.lenient;
    cfg.graph.partition = a.partition;
    cfg.graph.snapshot_every = a.snapshot_every;
    cfg.output.dir = a.output;
    let cfg = effective_config(cfg, config_path)?;
    cfg.validate()?;
    let hash = cfg.config_hash();
    let policy = cfg.snapshot_policy()?;
    let (events, vocab) = pipeline::stage_ingest(&cfg)?;
    let partitions = pipeline::partition_events(&cfg, events)?;
    let out = &cfg.output.dir;
    let mut stats = format!("# provsketch graph stats config={hash:016x}\n");
    stats.push_str(
        "partition,nodes,edges,raw_events,merged_events,rejected_self_loops,versions_per_entity_mean,edge_reduction_factor,snapshots\n",
    );
    std::fs::create_dir_all(out.join("graphs")).map_err(runtime)?;
    for (key, events) in &partitions {
        let mut g = ProvGraph::default();
        g.insert_events(events);
        let rs = g.reduction_stats();
        stats.push_str(&format!(
            "{},{},{},{},{},{},{:.4},{:.4},{}\n",
            key,
            g.node_count(),
            g.edge_count(),
            rs.raw_events,
            rs.merged_events,
            rs.rejected_self_loops,
            rs.versions_per_entity_mean,
            rs.edge_reduction_factor,
            count_snapshots(policy, events)
        ));
        let mut text = format!("# provsketch graph dump config={hash:016x}\n");
        text.push_str(&g.dump(&vocab));
        std::fs::write(out.join("graphs").join(format!("{key}.txt")), text).map_err(runtime)?;
    }
    std::fs::write(out.join("graphs.csv"), stats).map_err(runtime)?;
    println!(
        "built {} partition graphs -> {}",
        partitions.len(),
        out.join("graphs").display()
    );
    Ok(())
}

/// Snapshots the featurize stage would emit for this partition.
fn count_snapshots(policy: SnapshotPolicy, events: &[crate::ingest::Event]) -> usize {
    if events.is_empty() {
        return 0;
    }
    match policy {
        SnapshotPolicy::PerPartition => 1,
        SnapshotPolicy::Events(n) => {
            let full = events.len() / n as usize;
            let rem = events.len() % n as usize;
            full + usize::from(rem != 0 || full == 0)
        }
        SnapshotPolicy::Seconds(w) => {
            let w_ns = w as i64 * 1_000_000_000;
            let start = events[0].timestamp;
            let mut window = 0u64;
            let mut count = 0usize;
            for pair in events.windows(2) {
                let next = &pair[1];
                while next.timestamp >= start + (window as i64 + 1) * w_ns {
                    count += 1;
                    window += 1;
                }
            }
            count + 1 // final snapshot
        }
    }
}

fn cmd_featurize(
    a: FeaturizeArgs,
    config_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut cfg = PipelineConfig::default();
    cfg.input.events = a.input;
    cfg.input.lenient = a.lenient;
    cfg.kernel.kind = a.kernel;
    cfg.kernel.h = a.h;
    cfg.sketch.size = a.sketch_size;
    cfg.sketch.mode = a.sketch_mode;
    if let Some(s) = seed {
        cfg.sketch.seed = s;
    }
    cfg.graph.partition = a.partition;
    cfg.graph.snapshot_every = a.snapshot_every;
    cfg.graph.opaque_versions = a.opaque_versions;
    cfg.output.dir = a.output;
    cfg.output.emit_csv = a.emit == "csv";
    let cfg = effective_config(cfg, config_path)?;
    cfg.validate()?;
    let (events, vocab) = pipeline::stage_ingest(&cfg)?;
    let partitions = pipeline::partition_events(&cfg, events)?;
    let sketches = pipeline::stage_featurize(&cfg, &partitions, &vocab)?;
    println!(
        "featurized {} partitions into {} sketches -> {}",
        partitions.len(),
        sketches.len(),
        cfg.output.dir.join("sketches").display()
    );
    Ok(())
}

/// Load every .sketch file under `dir`, sorted by file name.
fn load_sketches(dir: &Path) -> Result<Vec<Sketch>, CliError> {
    if !dir.is_dir() {
        return Err(validation(format!("not a directory: {}", dir.display())));
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(runtime)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "sketch"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(validation(format!(
            "no .sketch files under {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| Sketch::load(p).map_err(runtime))
        .collect()
}

fn parse_k(k: &str) -> Result<detect::KChoice, CliError> {
    if k == "auto" {
        Ok(detect::KChoice::Auto)
    } else {
        k.parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(detect::KChoice::Fixed)
            .ok_or_else(|| validation(format!("--k must be auto or a positive integer, got `{k}`")))
    }
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let kchoice = parse_k(&a.k)?;
    if !(a.threshold_sigma.is_finite() && a.threshold_sigma >= 0.0) {
        return Err(validation("--threshold-sigma must be finite and ≥ 0"));
    }
    let mut sketches = load_sketches(&a.sketches)?;
    if let Some(gt) = &a.ground_truth {
        let truth = parse_ground_truth(gt).map_err(validation)?;
        sketches.retain(|s| !truth.contains_key(&s.meta.host) && !truth.contains_key(&s.meta.partition));
    }
    let config_hash = sketches.first().map(|s| s.meta.config).unwrap_or(0);
    let model = detect::train(&sketches, kchoice, a.threshold_sigma, config_hash)
        .map_err(runtime)?;
    model.save(&a.out).map_err(runtime)?;
    println!(
        "trained {} clusters on {} sketches (silhouette {}) -> {}",
        model.clusters.len(),
        sketches.len(),
        model
            .silhouette
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "n/a".into()),
        a.out.display()
    );
    Ok(())
}

fn cmd_detect(a: DetectArgs) -> Result<(), CliError> {
    let model = MedoidModel::load(&a.model).map_err(runtime)?;
    let sketches = load_sketches(&a.sketches)?;
    let truth = match &a.ground_truth {
        Some(p) => Some(parse_ground_truth(p).map_err(validation)?),
        None => None,
    };
    let mut reports = Vec::with_capacity(sketches.len());
    for sk in &sketches {
        reports.push(model.classify(sk).map_err(runtime)?);
    }
    let verdicts = detect::host_verdicts(&reports);
    let mut host_csv = format!("# provsketch host report config={:016x}\n", model.config_hash);
    if let Some(t) = &truth {
        let hosts: std::collections::BTreeSet<String> = t.keys().cloned().collect();
        let m = detect::evaluate(&verdicts, &hosts);
        host_csv.push_str(&format!(
            "# tp={} fp={} tn={} fn={} precision={} recall={} accuracy={} f1={}\n",
            m.tp, m.fp, m.tn, m.fn_, m.precision, m.recall, m.accuracy, m.f1
        ));
        println!(
            "precision={} recall={} accuracy={} f1={}",
            m.precision, m.recall, m.accuracy, m.f1
        );
    }
    host_csv.push_str(&detect::host_report_csv(&reports, truth.as_ref()));
    if let Some(parent) = a.report.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(runtime)?;
        }
    }
    std::fs::write(&a.report, host_csv).map_err(runtime)?;
    let snap_path = a.report.with_extension("snapshots.csv");
    let mut snap_csv = format!(
        "# provsketch snapshot report config={:016x}\n",
        model.config_hash
    );
    snap_csv.push_str(&detect::reports_csv(&reports));
    std::fs::write(&snap_path, snap_csv).map_err(runtime)?;
    println!(
        "classified {} sketches across {} hosts ({} anomalies) -> {}",
        reports.len(),
        verdicts.len(),
        reports.iter().filter(|r| r.anomaly).count(),
        a.report.display()
    );
    Ok(())
}

fn cmd_trace(a: TraceArgs) -> Result<(), CliError> {
    if !a.sessions.exists() {
        return Err(validation(format!(
            "sessions file does not exist: {}",
            a.sessions.display()
        )));
    }
    let edges = parse_sessions(&a.sessions, a.lenient).map_err(runtime)?;
    let filter: Option<std::collections::BTreeSet<String>> =
        a.users.map(|u| u.into_iter().collect());
    let result = crate::authtrace::temporal_traverse(
        &edges,
        &a.seed_host,
        a.seed_user.as_deref(),
        a.seed_time,
        filter.as_ref(),
    );
    std::fs::create_dir_all(&a.out).map_err(runtime)?;
    std::fs::write(a.out.join("trace-edges.csv"), result.edges_csv()).map_err(runtime)?;
    std::fs::write(a.out.join("trace-flagged.csv"), result.flagged_csv()).map_err(runtime)?;
    println!(
        "flagged {} hosts and {} users from seed ({}, {}) at t0={}{}",
        result.hosts.len(),
        result.users.len(),
        result.seed_host,
        result.seed_user.as_deref().unwrap_or("-"),
        result.seed_time,
        if result.seed_missing {
            " [seed host absent from log]"
        } else {
            ""
        }
    );
    Ok(())
}

fn parse_h_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, CliError> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| validation(format!("--h must look like A..B, got `{s}`")))?;
    let a: usize = a
        .parse()
        .map_err(|_| validation(format!("bad depth `{a}` in --h")))?;
    let b: usize = b
        .trim_start_matches('=')
        .parse()
        .map_err(|_| validation(format!("bad depth `{b}` in --h")))?;
    if a > b || b > 16 {
        return Err(validation(format!("--h range {a}..{b} is empty or too deep")));
    }
    Ok(a..=b)
}

fn cmd_bench(a: BenchArgs, seed: Option<u64>) -> Result<(), CliError> {
    let kinds: Vec<KernelKind> = if a.kernels.iter().any(|k| k == "all") {
        KernelKind::ALL.to_vec()
    } else {
        a.kernels
            .iter()
            .map(|k| k.parse().map_err(|_| validation(format!("unknown kernel `{k}`"))))
            .collect::<Result<_, _>>()?
    };
    let range = parse_h_range(&a.h)?;
    let mut vocab = Vocab::default();
    let events = crate::synth::bench_events(seed.unwrap_or(42), a.events, &mut vocab);
    let rows = bench_kernels(&kinds, range, &events);
    let csv = bench_csv(&rows);
    match &a.out {
        Some(p) => {
            std::fs::write(p, csv).map_err(runtime)?;
            println!("wrote {} bench rows -> {}", rows.len(), p.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs, seed: Option<u64>) -> Result<(), CliError> {
    if a.runs == 0 {
        return Err(validation("--runs must be ≥ 1"));
    }
    let cfg = SynthConfig {
        seed: seed.unwrap_or(42),
        runs_per_scenario: a.runs,
        approx_events: a.approx_events,
        out_dir: a.out.clone(),
    };
    let mut vocab = Vocab::default();
    let manifest = generate_corpus(&cfg, &mut vocab).map_err(runtime)?;
    let summary: BTreeMap<String, usize> = manifest_summary(&manifest);
    let parts: Vec<String> = Scenario::ALL
        .iter()
        .map(|s| format!("{}={}", s, summary.get(s.as_str()).copied().unwrap_or(0)))
        .collect();
    println!(
        "generated {} files ({} events total; {}) -> {}",
        manifest.files.len(),
        manifest.total_events,
        parts.join(" "),
        a.out.display()
    );
    Ok(())
}

fn cmd_run(config_path: Option<&Path>) -> Result<(), CliError> {
    let path = config_path
        .ok_or_else(|| validation("run requires --config PATH"))?;
    let cfg = PipelineConfig::load(path)?;
    let outcome = run_pipeline(&cfg)?;
    println!(
        "pipeline complete: {} partitions, {} sketches, {} hosts (config {:016x})",
        outcome.partitions,
        outcome.sketches,
        outcome.verdicts.len(),
        outcome.config_hash
    );
    if let Some(m) = &outcome.metrics {
        println!(
            "metrics: tp={} fp={} tn={} fn={} precision={} recall={} accuracy={} f1={}",
            m.tp, m.fp, m.tn, m.fn_, m.precision, m.recall, m.accuracy, m.f1
        );
    }
    if let Some(t) = &outcome.trace {
        println!(
            "trace: {} hosts, {} users flagged from ({}, {})",
            t.hosts.len(),
            t.users.len(),
            t.seed_host,
            t.seed_user.as_deref().unwrap_or("-")
        );
    }
    println!("report: {}", outcome.report_path.display());
    Ok(())
}
