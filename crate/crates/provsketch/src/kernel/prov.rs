//! Incremental set-based backward-walk kernel.
//!
//! Per node and depth `d` we maintain `d + 1` label sets: slot 0 holds the
//! edge labels adjacent to the node over all backward walks of exactly `d`
//! hops, slot `s` the labels `s` steps further back, and slot `d` the
//! terminal entity types. The histogram counts one canonical label per
//! (node, depth) with a non-empty walk set; depth 0 is counted for every
//! node.
//!
//! Updates run level-major over the delta: depth `d` reads only depth
//! `d - 1` state, which the previous iteration finalized. Version links are
//! applied at the end of each level, ordered by target creation, copying the
//! source version's same-depth sets into the new version (walks cross
//! version links without spending a hop). Per level and node the histogram
//! is folded once: one decrement of the stale label, one increment of the
//! new one, regardless of how many delta edges hit the node.

use super::{
    depth0_label_id, fold_label_change, prov_canonical_id, serialize_prov_label, CollisionAudit,
    HistogramDelta, KernelOptions, LabelHistogram, ProvLabel,
};
use crate::provgraph::{DeltaEdge, ProvGraph};
use crate::vocab::EntityTypeId;

use std::collections::BTreeSet;

fn insert_sorted(set: &mut Vec<u32>, value: u32) {
    if let Err(pos) = set.binary_search(&value) {
        set.insert(pos, value);
    }
}

fn union_sorted(dst: &mut Vec<u32>, src: &[u32]) {
    for &value in src {
        insert_sorted(dst, value);
    }
}

#[derive(Debug)]
struct NodeState {
    /// layers[d][s]: sorted label ids at depth d, slot s.
    layers: Vec<Vec<Vec<u32>>>,
    /// Canonical id currently counted in the histogram, per depth.
    counted: Vec<Option<u64>>,
}

impl NodeState {
    fn new(h: usize, entity: EntityTypeId) -> Self {
        let mut layers: Vec<Vec<Vec<u32>>> = (0..=h).map(|d| vec![Vec::new(); d + 1]).collect();
        layers[0][0] = vec![entity.0];
        NodeState {
            layers,
            counted: vec![None; h + 1],
        }
    }
}

#[derive(Debug)]
pub struct ProvKernel {
    h: usize,
    opts: KernelOptions,
    states: Vec<NodeState>,
    hist: LabelHistogram,
    audit: Option<CollisionAudit>,
}

impl ProvKernel {
    pub fn new(h: usize, opts: KernelOptions) -> Self {
        ProvKernel {
            h,
            opts,
            states: Vec::new(),
            hist: LabelHistogram::new(),
            audit: opts.collision_audit.then(CollisionAudit::default),
        }
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn histogram(&self) -> &LabelHistogram {
        &self.hist
    }

    pub fn node_label(&self, node: usize, depth: usize) -> Option<u64> {
        self.states.get(node)?.counted.get(depth).copied().flatten()
    }

    pub fn prov_label(&self, node: usize, depth: usize) -> Option<ProvLabel> {
        let state = self.states.get(node)?;
        state.counted.get(depth).copied().flatten()?;
        Some(ProvLabel {
            depth,
            layers: state.layers[depth].clone(),
        })
    }

    /// Split borrow: shared source state, mutable destination state.
    fn src_dst(&mut self, src: usize, dst: usize) -> (&NodeState, &mut NodeState) {
        assert_ne!(src, dst, "kernel edge with identical endpoints");
        if src < dst {
            let (left, right) = self.states.split_at_mut(dst);
            (&left[src], &mut right[0])
        } else {
            let (left, right) = self.states.split_at_mut(src);
            (&right[0], &mut left[dst])
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
            let mut state = NodeState::new(self.h, entity);
            let id = depth0_label_id(entity);
            if let Some(audit) = &mut self.audit {
                audit.check(id, &serialize_prov_label(0, &state.layers[0]));
            }
            state.counted[0] = Some(id);
            self.states.push(state);
            fold_label_change(&mut self.hist, &mut dmap, None, Some(id), 0);
        }
        for de in delta {
            assert!(
                de.src < self.states.len() && de.dst < self.states.len(),
                "delta edge {} references a node without a depth-0 label",
                de.edge
            );
        }

        for d in 1..=self.h {
            let mut touched: BTreeSet<usize> = BTreeSet::new();
            for de in delta.iter().filter(|de| !de.is_version_link) {
                let (src_state, dst_state) = self.src_dst(de.src, de.dst);
                // No backward walks of length d-1 from the source means this
                // edge extends nothing at depth d.
                if src_state.layers[d - 1][0].is_empty() {
                    continue;
                }
                touched.insert(de.dst);
                insert_sorted(&mut dst_state.layers[d][0], de.label.0);
                for s in 1..=d {
                    union_sorted(&mut dst_state.layers[d][s], &src_state.layers[d - 1][s - 1]);
                }
            }
            if !self.opts.opaque_versions {
                // New versions inherit the prior version's same-depth sets.
                // Sorted by target so chains (v0 -> v1 -> v2) cascade in
                // creation order no matter how the delta was ordered.
                let mut links: Vec<&DeltaEdge> =
                    delta.iter().filter(|de| de.is_version_link).collect();
                links.sort_by_key(|de| de.dst);
                for de in links {
                    if self.states[de.src].layers[d][0].is_empty() {
                        continue;
                    }
                    touched.insert(de.dst);
                    let (src_state, dst_state) = self.src_dst(de.src, de.dst);
                    for s in 0..=d {
                        union_sorted(&mut dst_state.layers[d][s], &src_state.layers[d][s]);
                    }
                }
            }
            for &v in &touched {
                let state = &self.states[v];
                let new_id = if state.layers[d][0].is_empty() {
                    None
                } else {
                    let id = prov_canonical_id(d, &state.layers[d]);
                    if let Some(audit) = &mut self.audit {
                        let bytes = serialize_prov_label(d, &self.states[v].layers[d]);
                        audit.check(id, &bytes);
                    }
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
