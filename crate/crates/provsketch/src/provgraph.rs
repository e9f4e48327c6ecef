//! Versioned provenance graph construction.
//!
//! Nodes are (entity, version) pairs; edges point in the direction of
//! information flow and carry the event type plus first/last seen times.
//! Two rules keep the graph compact while preserving causality:
//!
//! * duplicate elimination: re-inserting a (src, action, dst) triplet whose
//!   target version has no outgoing data edges only bumps `last_seen`;
//! * versioning: an in-edge arriving at a node that already has outgoing
//!   data edges lands on a fresh version of that entity, connected to the
//!   prior version by a reserved version link.
//!
//! Versioning freezes a node's in-edge set the moment it gains an out-edge,
//! which is what makes incremental label propagation in the kernel module
//! exact: labels computed for a node can never be invalidated later.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::ingest::Event;
use crate::vocab::{EntityTypeId, EventTypeId, Vocab, VERSION_EVENT};

/// One node: a single version of an entity.
#[derive(Debug, Clone)]
pub struct Node {
    pub entity_id: String,
    pub version: u32,
    pub label: EntityTypeId,
}

/// One stored edge.
#[derive(Debug, Clone)]
pub struct ProvEdge {
    pub src: usize,
    pub dst: usize,
    pub label: EventTypeId,
    pub first_seen: i64,
    pub last_seen: i64,
    pub is_version_link: bool,
}

/// Edge handed to kernels after an insertion, in insertion order.
#[derive(Debug, Clone, Copy)]
pub struct DeltaEdge {
    pub edge: usize,
    pub src: usize,
    pub dst: usize,
    pub label: EventTypeId,
    pub is_version_link: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertKind {
    Inserted,
    Merged,
    RejectedSelfLoop,
}

/// What a single event did to the graph.
#[derive(Debug)]
pub struct InsertOutcome {
    pub kind: InsertKind,
    /// Indices of nodes created by this event, in creation order.
    pub new_nodes: Vec<usize>,
    /// Edges created by this event; a versioning insert contributes the
    /// version link first, then the data edge.
    pub delta: Vec<DeltaEdge>,
}

/// Counter snapshot emitted at analysis boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotMark {
    pub snapshot_id: u64,
    pub node_count: usize,
    pub edge_count: usize,
    /// Timestamp of the newest event folded in so far.
    pub timestamp: i64,
}

/// Compaction statistics for operator visibility.
#[derive(Debug, Clone, Copy)]
pub struct ReductionStats {
    pub raw_events: u64,
    pub merged_events: u64,
    pub rejected_self_loops: u64,
    pub versions_per_entity_mean: f64,
    /// raw events per stored data edge; 1.0 on an empty graph.
    pub edge_reduction_factor: f64,
}

#[derive(Debug, Default)]
pub struct ProvGraph {
    nodes: Vec<Node>,
    edges: Vec<ProvEdge>,
    /// Incoming edge indices per node, version links included.
    in_edges: Vec<Vec<usize>>,
    /// Whether the node has at least one outgoing data (non-version) edge.
    has_out: Vec<bool>,
    /// Previous version of the same entity, if any.
    prev_version: Vec<Option<usize>>,
    /// Entity id to its latest version's node index.
    latest: HashMap<String, usize>,
    /// (src, action, dst) to edge index, data edges only.
    edge_lookup: HashMap<(usize, u32, usize), usize>,
    raw_events: u64,
    merged_events: u64,
    rejected_self_loops: u64,
    snapshot_counter: u64,
    last_event_ts: i64,
}

impl ProvGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn data_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_version_link).count()
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn edge(&self, idx: usize) -> &ProvEdge {
        &self.edges[idx]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, &Node)> {
        self.nodes.iter().enumerate()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, &ProvEdge)> {
        self.edges.iter().enumerate()
    }

    /// Incoming edge indices of one node, version links included.
    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    pub fn prev_version(&self, node: usize) -> Option<usize> {
        self.prev_version[node]
    }

    /// Latest version of an entity, if the entity has been seen.
    pub fn latest_node(&self, entity_id: &str) -> Option<usize> {
        self.latest.get(entity_id).copied()
    }

    /// Data in-edges visible from `node` through backward traversal,
    /// including those inherited from earlier versions of the same entity.
    /// Version links are transparent: crossing one costs nothing.
    pub fn effective_in_edges(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = Some(node);
        while let Some(n) = cur {
            for &e in &self.in_edges[n] {
                if !self.edges[e].is_version_link {
                    out.push(e);
                }
            }
            cur = self.prev_version[n];
        }
        out
    }

    fn add_node(&mut self, entity_id: &str, version: u32, label: EntityTypeId) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(Node {
            entity_id: entity_id.to_string(),
            version,
            label,
        });
        self.in_edges.push(Vec::new());
        self.has_out.push(false);
        self.prev_version.push(None);
        self.latest.insert(entity_id.to_string(), idx);
        idx
    }

    fn add_edge(
        &mut self,
        src: usize,
        dst: usize,
        label: EventTypeId,
        ts: i64,
        is_version_link: bool,
    ) -> usize {
        let idx = self.edges.len();
        self.edges.push(ProvEdge {
            src,
            dst,
            label,
            first_seen: ts,
            last_seen: ts,
            is_version_link,
        });
        self.in_edges[dst].push(idx);
        idx
    }

    fn resolve_or_create(
        &mut self,
        entity_id: &str,
        label: EntityTypeId,
        new_nodes: &mut Vec<usize>,
    ) -> usize {
        if let Some(idx) = self.latest_node(entity_id) {
            return idx;
        }
        let idx = self.add_node(entity_id, 0, label);
        new_nodes.push(idx);
        idx
    }

    /// Fold one event into the graph.
    pub fn insert_event(&mut self, e: &Event) -> InsertOutcome {
        self.last_event_ts = self.last_event_ts.max(e.timestamp);
        if e.subject_id == e.object_id {
            self.rejected_self_loops += 1;
            tracing::warn!(entity = %e.subject_id, seq = e.seq, "self-loop event rejected");
            return InsertOutcome {
                kind: InsertKind::RejectedSelfLoop,
                new_nodes: Vec::new(),
                delta: Vec::new(),
            };
        }
        self.raw_events += 1;
        let mut new_nodes = Vec::new();
        let src = self.resolve_or_create(&e.subject_id, e.subject_type, &mut new_nodes);
        let dst_latest = self.resolve_or_create(&e.object_id, e.object_type, &mut new_nodes);

        if let Some(&eidx) = self.edge_lookup.get(&(src, e.action.0, dst_latest)) {
            if !self.has_out[dst_latest] {
                debug_assert!(new_nodes.is_empty());
                self.merged_events += 1;
                self.edges[eidx].last_seen = self.edges[eidx].last_seen.max(e.timestamp);
                return InsertOutcome {
                    kind: InsertKind::Merged,
                    new_nodes,
                    delta: Vec::new(),
                };
            }
        }

        let mut delta = Vec::new();
        let dst = if self.has_out[dst_latest] {
            // The target already produced output; a new in-edge would change
            // the provenance of everything downstream, so open a new version.
            let old = &self.nodes[dst_latest];
            let (entity_id, version, label) = (old.entity_id.clone(), old.version, old.label);
            let fresh = self.add_node(&entity_id, version + 1, label);
            self.prev_version[fresh] = Some(dst_latest);
            new_nodes.push(fresh);
            let link = self.add_edge(dst_latest, fresh, VERSION_EVENT, e.timestamp, true);
            delta.push(DeltaEdge {
                edge: link,
                src: dst_latest,
                dst: fresh,
                label: VERSION_EVENT,
                is_version_link: true,
            });
            fresh
        } else {
            dst_latest
        };

        let eidx = self.add_edge(src, dst, e.action, e.timestamp, false);
        self.has_out[src] = true;
        self.edge_lookup.insert((src, e.action.0, dst), eidx);
        delta.push(DeltaEdge {
            edge: eidx,
            src,
            dst,
            label: e.action,
            is_version_link: false,
        });
        InsertOutcome {
            kind: InsertKind::Inserted,
            new_nodes,
            delta,
        }
    }

    /// Fold a batch of events, concatenating the per-event deltas.
    pub fn insert_events(&mut self, events: &[Event]) -> (Vec<usize>, Vec<DeltaEdge>) {
        let mut nodes = Vec::new();
        let mut delta = Vec::new();
        for e in events {
            let out = self.insert_event(e);
            nodes.extend(out.new_nodes);
            delta.extend(out.delta);
        }
        (nodes, delta)
    }

    /// Mark an analysis boundary and return the counters at this point.
    pub fn snapshot(&mut self) -> SnapshotMark {
        self.snapshot_counter += 1;
        SnapshotMark {
            snapshot_id: self.snapshot_counter,
            node_count: self.nodes.len(),
            edge_count: self.edges.len(),
            timestamp: self.last_event_ts,
        }
    }

    pub fn reduction_stats(&self) -> ReductionStats {
        let entities = self.latest.len();
        let stored = self.data_edge_count();
        ReductionStats {
            raw_events: self.raw_events,
            merged_events: self.merged_events,
            rejected_self_loops: self.rejected_self_loops,
            versions_per_entity_mean: if entities == 0 {
                0.0
            } else {
                self.nodes.len() as f64 / entities as f64
            },
            edge_reduction_factor: if stored == 0 {
                1.0
            } else {
                self.raw_events as f64 / stored as f64
            },
        }
    }

    /// Human-readable edge dump, one edge per line in insertion order:
    /// `src_entity@v  EVENT  dst_entity@v  first_seen  last_seen`
    /// (tab-separated).
    pub fn dump(&self, vocab: &Vocab) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let s = &self.nodes[e.src];
            let d = &self.nodes[e.dst];
            writeln!(
                out,
                "{}@{}\t{}\t{}@{}\t{}\t{}",
                s.entity_id,
                s.version,
                vocab.event_name(e.label),
                d.entity_id,
                d.version,
                e.first_seen,
                e.last_seen
            )
            .expect("string write");
        }
        out
    }
}
