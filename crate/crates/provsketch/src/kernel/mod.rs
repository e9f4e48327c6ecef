//! Graph kernels: streaming label histograms over provenance graphs.
//!
//! Three kernels share one interface. All of them summarize a graph as a
//! histogram over canonical 64-bit label ids, maintained incrementally as
//! edge batches arrive:
//!
//! * [`KernelKind::Prov`]: set-based backward-walk labels. A node's label at
//!   depth `d` is the tuple of label sets seen along all backward walks of
//!   exactly `d` hops, grouped by distance, with the edge label nearest the
//!   node in the outermost layer and terminal entity types innermost.
//! * [`KernelKind::WlSubtree`]: Weisfeiler-Lehman relabeling extended with
//!   edge labels; neighbor multisets are sorted.
//! * [`KernelKind::Unicorn`]: same relabeling but neighbor pairs are ordered
//!   by edge arrival time instead of sorted, so it is order-sensitive.
//!
//! Node versioning in the graph module guarantees a node's in-edge set is
//! frozen once the node has an out-edge, which makes these incremental
//! updates exact: batched updates equal a one-shot recomputation bin for
//! bin (see `recompute` for the independent oracles).

mod prov;
mod recompute;
mod wl;

pub use prov::ProvKernel;
pub use recompute::{kernel_recompute_full, prov_recompute_full, wl_recompute_full};
pub use wl::WlKernel;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hash::Fnv1a;
use crate::provgraph::{DeltaEdge, ProvGraph};
use crate::vocab::{EntityTypeId, Vocab};

/// Which kernel to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Prov,
    #[serde(rename = "wl")]
    WlSubtree,
    Unicorn,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Prov, KernelKind::WlSubtree, KernelKind::Unicorn];

    pub fn as_str(&self) -> &'static str {
        match self {
            KernelKind::Prov => "prov",
            KernelKind::WlSubtree => "wl",
            KernelKind::Unicorn => "unicorn",
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            KernelKind::Prov => 0,
            KernelKind::WlSubtree => 1,
            KernelKind::Unicorn => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<KernelKind> {
        match code {
            0 => Some(KernelKind::Prov),
            1 => Some(KernelKind::WlSubtree),
            2 => Some(KernelKind::Unicorn),
            _ => None,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prov" => Ok(KernelKind::Prov),
            "wl" => Ok(KernelKind::WlSubtree),
            "unicorn" => Ok(KernelKind::Unicorn),
            other => Err(format!("unknown kernel {other:?} (expected prov, wl, or unicorn)")),
        }
    }
}

/// Tuning knobs shared by all kernels.
#[derive(Debug, Clone, Copy)]
pub struct KernelOptions {
    /// When set, version links are walls instead of being transparent: a new
    /// entity version starts with empty provenance.
    pub opaque_versions: bool,
    /// Retain full label serializations and abort on a 64-bit hash
    /// collision. Test instrumentation; off in production paths.
    pub collision_audit: bool,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            opaque_versions: false,
            collision_audit: false,
        }
    }
}

/// Signed histogram change produced by one kernel update, keyed by canonical
/// label id. Feeds streaming sketch maintenance.
pub type HistogramDelta = BTreeMap<u64, i64>;

/// Histogram over canonical label ids. Bins hold strictly positive counts;
/// a bin decremented to zero is removed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelHistogram {
    bins: BTreeMap<u64, u64>,
    depth_of: HashMap<u64, u8>,
    total: u64,
}

impl LabelHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn increment(&mut self, id: u64, depth: usize) {
        *self.bins.entry(id).or_insert(0) += 1;
        self.depth_of.entry(id).or_insert(depth as u8);
        self.total += 1;
    }

    pub fn decrement(&mut self, id: u64) {
        let count = self
            .bins
            .get_mut(&id)
            .unwrap_or_else(|| panic!("decrement of absent histogram bin {id}"));
        *count -= 1;
        self.total -= 1;
        if *count == 0 {
            self.bins.remove(&id);
            self.depth_of.remove(&id);
        }
    }

    pub fn get(&self, id: u64) -> u64 {
        self.bins.get(&id).copied().unwrap_or(0)
    }

    pub fn depth(&self, id: u64) -> Option<usize> {
        self.depth_of.get(&id).map(|&d| d as usize)
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Bins in ascending canonical-id order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.bins.iter().map(|(&id, &c)| (id, c))
    }

    /// Number of distinct bins at each depth 0..=h.
    pub fn distinct_per_depth(&self, h: usize) -> Vec<usize> {
        let mut counts = vec![0usize; h + 1];
        for id in self.bins.keys() {
            if let Some(&d) = self.depth_of.get(id) {
                if (d as usize) <= h {
                    counts[d as usize] += 1;
                }
            }
        }
        counts
    }

    /// Total count at one depth.
    pub fn total_at_depth(&self, depth: usize) -> u64 {
        self.bins
            .iter()
            .filter(|(id, _)| self.depth_of.get(*id).map(|&d| d as usize) == Some(depth))
            .map(|(_, &c)| c)
            .sum()
    }

    /// CSV dump: `canonical_id,depth,count`, ascending by canonical id.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("canonical_id,depth,count\n");
        for (&id, &count) in &self.bins {
            let depth = self.depth_of.get(&id).copied().unwrap_or(0);
            out.push_str(&format!("{id},{depth},{count}\n"));
        }
        out
    }
}

/// One set-based provenance label in readable layer form. `layers[0]` holds
/// the edge labels adjacent to the node, deeper slots hold labels further
/// back along the walks, and `layers[depth]` holds terminal entity types.
/// Members are interned-id sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvLabel {
    pub depth: usize,
    pub layers: Vec<Vec<u32>>,
}

impl ProvLabel {
    pub fn canonical_id(&self) -> u64 {
        prov_canonical_id(self.depth, &self.layers)
    }

    /// Layer contents as name sets, for display and fixture assertions.
    /// Slot 0 through depth-1 are event names, the last slot entity names.
    pub fn layer_names(&self, vocab: &Vocab) -> Vec<std::collections::BTreeSet<String>> {
        self.layers
            .iter()
            .enumerate()
            .map(|(slot, ids)| {
                ids.iter()
                    .map(|&id| {
                        if slot == self.depth {
                            vocab.entity_name(EntityTypeId(id)).to_string()
                        } else {
                            vocab.event_name(crate::vocab::EventTypeId(id)).to_string()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn render(&self, vocab: &Vocab) -> String {
        let parts: Vec<String> = self
            .layer_names(vocab)
            .iter()
            .map(|set| {
                let names: Vec<&str> = set.iter().map(String::as_str).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect();
        format!("({})", parts.join(","))
    }
}

/// Canonical serialization of a layered label, hashed to 64 bits.
pub(crate) fn serialize_prov_label(depth: usize, layers: &[Vec<u32>]) -> Vec<u8> {
    debug_assert_eq!(layers.len(), depth + 1);
    let mut bytes = Vec::with_capacity(8 + layers.iter().map(|l| 4 + 4 * l.len()).sum::<usize>());
    bytes.push(b'P');
    bytes.push(depth as u8);
    for layer in layers {
        bytes.extend_from_slice(&(layer.len() as u32).to_le_bytes());
        for &id in layer {
            bytes.extend_from_slice(&id.to_le_bytes());
        }
    }
    bytes
}

pub(crate) fn prov_canonical_id(depth: usize, layers: &[Vec<u32>]) -> u64 {
    let mut h = Fnv1a::new();
    h.write(&serialize_prov_label(depth, layers));
    h.finish()
}

/// Depth-0 label shared by every kernel: the singleton entity-type set.
pub(crate) fn depth0_label_id(entity: EntityTypeId) -> u64 {
    prov_canonical_id(0, &[vec![entity.0]])
}

/// Relabeling hash shared by the subtree kernels: the node's own previous
/// label followed by its neighbor (edge label, neighbor label) pairs in the
/// order the caller fixed. No kernel tag on purpose: a single in-edge yields
/// the same label under sorted and temporal ordering.
pub(crate) fn wl_label_hash(own_prev: u64, pairs: &[(u32, u64)]) -> (u64, Vec<u8>) {
    let mut bytes = Vec::with_capacity(14 + 12 * pairs.len());
    bytes.push(b'W');
    bytes.extend_from_slice(&own_prev.to_le_bytes());
    bytes.extend_from_slice(&(pairs.len() as u32).to_le_bytes());
    for &(edge, neighbor) in pairs {
        bytes.extend_from_slice(&edge.to_le_bytes());
        bytes.extend_from_slice(&neighbor.to_le_bytes());
    }
    let mut h = Fnv1a::new();
    h.write(&bytes);
    (h.finish(), bytes)
}

/// Guards against silent 64-bit collisions when enabled: keeps every
/// serialization seen and aborts if two distinct ones share an id.
#[derive(Debug, Default)]
pub(crate) struct CollisionAudit {
    seen: HashMap<u64, Vec<u8>>,
}

impl CollisionAudit {
    pub fn check(&mut self, id: u64, bytes: &[u8]) {
        match self.seen.get(&id) {
            None => {
                self.seen.insert(id, bytes.to_vec());
            }
            Some(prev) => {
                assert_eq!(
                    prev.as_slice(),
                    bytes,
                    "canonical label hash collision on id {id}"
                );
            }
        }
    }
}

/// Folds one node-level label change into a histogram and its delta map.
pub(crate) fn fold_label_change(
    hist: &mut LabelHistogram,
    delta: &mut HistogramDelta,
    old: Option<u64>,
    new: Option<u64>,
    depth: usize,
) {
    if old == new {
        return;
    }
    if let Some(o) = old {
        hist.decrement(o);
        let slot = delta.entry(o).or_insert(0);
        *slot -= 1;
        if *slot == 0 {
            delta.remove(&o);
        }
    }
    if let Some(n) = new {
        hist.increment(n, depth);
        let slot = delta.entry(n).or_insert(0);
        *slot += 1;
        if *slot == 0 {
            delta.remove(&n);
        }
    }
}

/// A kernel instance bound to one graph's node index space.
#[derive(Debug)]
pub enum KernelState {
    Prov(ProvKernel),
    Wl(WlKernel),
}

impl KernelState {
    pub fn new(kind: KernelKind, h: usize) -> Self {
        Self::with_options(kind, h, KernelOptions::default())
    }

    pub fn with_options(kind: KernelKind, h: usize, opts: KernelOptions) -> Self {
        match kind {
            KernelKind::Prov => KernelState::Prov(ProvKernel::new(h, opts)),
            KernelKind::WlSubtree => KernelState::Wl(WlKernel::new(h, false, opts)),
            KernelKind::Unicorn => KernelState::Wl(WlKernel::new(h, true, opts)),
        }
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            KernelState::Prov(_) => KernelKind::Prov,
            KernelState::Wl(k) => {
                if k.is_temporal() {
                    KernelKind::Unicorn
                } else {
                    KernelKind::WlSubtree
                }
            }
        }
    }

    pub fn h(&self) -> usize {
        match self {
            KernelState::Prov(k) => k.h(),
            KernelState::Wl(k) => k.h(),
        }
    }

    /// Fold a graph delta into the histogram. `new_nodes` and `delta` must
    /// come from the same insertion run against `g`, in order.
    pub fn update(
        &mut self,
        g: &ProvGraph,
        new_nodes: &[usize],
        delta: &[DeltaEdge],
    ) -> HistogramDelta {
        match self {
            KernelState::Prov(k) => k.update(g, new_nodes, delta),
            KernelState::Wl(k) => k.update(g, new_nodes, delta),
        }
    }

    pub fn histogram(&self) -> &LabelHistogram {
        match self {
            KernelState::Prov(k) => k.histogram(),
            KernelState::Wl(k) => k.histogram(),
        }
    }

    /// The node's counted label at one depth; `None` when the node
    /// contributes nothing at that depth.
    pub fn node_label(&self, node: usize, depth: usize) -> Option<u64> {
        match self {
            KernelState::Prov(k) => k.node_label(node, depth),
            KernelState::Wl(k) => k.node_label(node, depth),
        }
    }

    /// Readable layer form of a node's set-based label. `None` for the
    /// subtree kernels or when the label is empty.
    pub fn prov_label(&self, node: usize, depth: usize) -> Option<ProvLabel> {
        match self {
            KernelState::Prov(k) => k.prov_label(node, depth),
            KernelState::Wl(_) => None,
        }
    }

    pub fn distinct_label_counts(&self) -> Vec<usize> {
        self.histogram().distinct_per_depth(self.h())
    }
}
