//! Host-behavior fingerprinting over system provenance.
//!
//! The crate turns streams of audit events into versioned provenance graphs,
//! summarizes each graph (or rolling snapshot) into a fixed-size behavioral
//! sketch via graph-kernel label histograms and consistent weighted
//! sampling, clusters the sketches to flag anomalous hosts, and follows
//! authentication sessions forward in time from a flagged host to surface
//! lateral movement.
//!
//! Modules, in pipeline order:
//!
//! * [`ingest`] — event parsing (tab-separated and JSONL), canonical event
//!   form, session logs.
//! * [`vocab`] — string interning for entity and event types.
//! * [`provgraph`] — versioned provenance graph with duplicate-edge merging.
//! * [`kernel`] — label histograms: set-based walk kernel, WL subtree
//!   relabeling, and its temporal variant; incremental and batch.
//! * [`sketch`] — consistent weighted sampling of histograms into fixed-size
//!   sketches, min-max similarity.
//! * [`detect`] — k-medoids clustering, silhouette model selection,
//!   per-cluster anomaly thresholds, evaluation metrics.
//! * [`authtrace`] — temporal traversal of authentication graphs.
//! * [`synth`] — deterministic synthetic workload generator.
//! * [`pipeline`] — configuration, stage orchestration, file formats.
//! * [`cli`] — the `provsketch` command-line interface.

pub mod authtrace;
pub mod cli;
pub mod detect;
pub mod hash;
pub mod ingest;
pub mod kernel;
pub mod pipeline;
pub mod provgraph;
pub mod sketch;
pub mod synth;
pub mod vocab;
