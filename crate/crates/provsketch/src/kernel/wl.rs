//! Weisfeiler-Lehman subtree relabeling over the versioned graph, in plain
//! and temporal (arrival-ordered) flavors.
//!
//! Depth-0 labels are the shared canonical entity-type ids, so every kernel
//! agrees on the h = 0 histogram. At depth d a node hashes its own depth
//! (d - 1) label together with `(edge label, source depth (d - 1) label)`
//! pairs over its effective in-edges: the plain variant sorts the pairs
//! (multiset semantics), the temporal variant keeps them ordered by first
//! arrival, so the same neighborhood reached in a different order refines to
//! a different label.
//!
//! A node with no effective in-edges is not counted at depths >= 1, mirroring
//! the walk kernel (no backward walks exist), but it still carries a
//! *stationary* label chain — the depth-d hash of an empty neighborhood —
//! so nodes downstream of it fold a well-defined value into their own labels.

use super::{
    depth0_label_id, fold_label_change, wl_label_hash, CollisionAudit, HistogramDelta,
    KernelOptions, LabelHistogram,
};
use crate::provgraph::{DeltaEdge, ProvGraph};
use crate::vocab::EntityTypeId;

use std::collections::{BTreeSet, HashMap};

#[derive(Debug)]
struct NodeState {
    entity: EntityTypeId,
    /// Current label per depth; stationary chain while uncounted.
    labels: Vec<u64>,
    /// Canonical id currently counted in the histogram, per depth.
    counted: Vec<Option<u64>>,
}

#[derive(Debug)]
pub struct WlKernel {
    h: usize,
    temporal: bool,
    opts: KernelOptions,
    states: Vec<NodeState>,
    hist: LabelHistogram,
    /// (entity type, depth) -> label of a node of that type with no in-edges.
    stationary: HashMap<(u32, usize), u64>,
    audit: Option<CollisionAudit>,
}

impl WlKernel {
    pub fn new(h: usize, temporal: bool, opts: KernelOptions) -> Self {
        WlKernel {
            h,
            temporal,
            opts,
            states: Vec::new(),
            hist: LabelHistogram::new(),
            stationary: HashMap::new(),
            audit: opts.collision_audit.then(CollisionAudit::default),
        }
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn is_temporal(&self) -> bool {
        self.temporal
    }

    pub fn histogram(&self) -> &LabelHistogram {
        &self.hist
    }

    pub fn node_label(&self, node: usize, depth: usize) -> Option<u64> {
        self.states.get(node)?.counted.get(depth).copied().flatten()
    }

    fn stationary_label(
        stationary: &mut HashMap<(u32, usize), u64>,
        entity: EntityTypeId,
        depth: usize,
    ) -> u64 {
        if depth == 0 {
            return depth0_label_id(entity);
        }
        if let Some(&id) = stationary.get(&(entity.0, depth)) {
            return id;
        }
        let prev = Self::stationary_label(stationary, entity, depth - 1);
        let (id, _) = wl_label_hash(prev, &[]);
        stationary.insert((entity.0, depth), id);
        id
    }

    fn effective_in_edges(&self, g: &ProvGraph, node: usize) -> Vec<usize> {
        if self.opts.opaque_versions {
            g.in_edges(node)
                .iter()
                .copied()
                .filter(|&e| !g.edge(e).is_version_link)
                .collect()
        } else {
            g.effective_in_edges(node)
        }
    }

    pub fn update(
        &mut self,
        g: &ProvGraph,
        new_nodes: &[usize],
        delta: &[DeltaEdge],
    ) -> HistogramDelta {
        let mut dmap = HistogramDelta::new();
        for &n in new_nodes {
            assert_eq!(
                n,
                self.states.len(),
                "kernel out of sync with graph: node {n} arrived but {} states exist",
                self.states.len()
            );
            let entity = g.node(n).label;
            let id0 = depth0_label_id(entity);
            let mut labels = vec![id0];
            for d in 1..=self.h {
                labels.push(Self::stationary_label(&mut self.stationary, entity, d));
            }
            let mut counted = vec![None; self.h + 1];
            counted[0] = Some(id0);
            self.states.push(NodeState {
                entity,
                labels,
                counted,
            });
            fold_label_change(&mut self.hist, &mut dmap, None, Some(id0), 0);
        }
        // Any node whose effective in-edge list changed must be recomputed:
        // targets of new data edges, plus fresh versions, which inherit their
        // predecessor's edges through the version link.
        let mut touched: BTreeSet<usize> = BTreeSet::new();
        for de in delta {
            assert!(
                de.src < self.states.len() && de.dst < self.states.len(),
                "delta edge {} references a node without a depth-0 label",
                de.edge
            );
            if de.is_version_link {
                if !self.opts.opaque_versions {
                    touched.insert(de.dst);
                }
            } else {
                touched.insert(de.dst);
            }
        }
        for d in 1..=self.h {
            for &v in &touched {
                let eff = self.effective_in_edges(g, v);
                let new_id = if eff.is_empty() {
                    let entity = self.states[v].entity;
                    let label = Self::stationary_label(&mut self.stationary, entity, d);
                    self.states[v].labels[d] = label;
                    None
                } else {
                    let mut pairs: Vec<(u32, u64, i64, usize)> = eff
                        .iter()
                        .map(|&e| {
                            let edge = g.edge(e);
                            (
                                edge.label.0,
                                self.states[edge.src].labels[d - 1],
                                edge.first_seen,
                                e,
                            )
                        })
                        .collect();
                    if self.temporal {
                        pairs.sort_by_key(|p| (p.2, p.3));
                    } else {
                        pairs.sort_by_key(|p| (p.0, p.1));
                    }
                    let flat: Vec<(u32, u64)> = pairs.iter().map(|p| (p.0, p.1)).collect();
                    let (id, bytes) = wl_label_hash(self.states[v].labels[d - 1], &flat);
                    if let Some(audit) = &mut self.audit {
                        audit.check(id, &bytes);
                    }
                    self.states[v].labels[d] = id;
                    Some(id)
                };
                let old = self.states[v].counted[d];
                fold_label_change(&mut self.hist, &mut dmap, old, new_id, d);
                self.states[v].counted[d] = new_id;
            }
        }
        dmap
    }
}
