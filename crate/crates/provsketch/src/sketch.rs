//! Consistent weighted sampling of label histograms into fixed-size
//! sketches, plus the normalized min-max similarity they estimate.
//!
//! Each sketch slot `k` runs an independent weighted sample over the
//! histogram: every label `l` with weight `w` gets a hash
//!
//! ```text
//! t = floor(ln w / γ + β)          γ, c ~ Gamma(2,1),  β ~ Uniform[0,1)
//! y = exp(γ (t − β))               all keyed on (seed, label, slot)
//! a = c / (y · e^γ)
//! ```
//!
//! and the slot keeps the label minimizing `a`. The quantization step `t`
//! is what gives the scheme its guarantee: the probability that two
//! histograms pick the same label in a slot equals their normalized min-max
//! similarity, so the fraction of matching slots is an unbiased estimator
//! with binomial error `sqrt(s(1-s)/K)`. Dropping the floor (reading the
//! update equations literally as `y = exp(ln w − γβ)`) collapses the draw
//! to exponential clocks over raw weights, which samples proportionally to
//! weight and measurably violates the collision law the tests pin down, so
//! the floored form is implemented.
//!
//! Parameters are regenerated from the keyed counter generator on demand;
//! no per-label parameter tables are stored, keeping a sketch at O(K)
//! memory.

use crate::hash::SplitMix64;
use crate::kernel::{HistogramDelta, KernelKind, LabelHistogram};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

/// Slot content of a sketch built from an empty histogram.
pub const EMPTY_SLOT: u64 = u64::MAX;

const SKETCH_MAGIC: &[u8; 4] = b"PVSK";
const SKETCH_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SketchError {
    #[error("sketches disagree on {field}: {left} vs {right}")]
    StampMismatch {
        field: &'static str,
        left: String,
        right: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a sketch file (bad magic)")]
    BadMagic { path: std::path::PathBuf },
    #[error("{path}: unsupported sketch file version {found}")]
    BadVersion {
        path: std::path::PathBuf,
        found: u32,
    },
    #[error("{path}: truncated sketch file")]
    Truncated { path: std::path::PathBuf },
}

/// Per-(label, slot) sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwsParams {
    pub gamma: f64,
    pub beta: f64,
    pub c: f64,
}

/// Deterministic parameter draw for (seed, label, slot): γ and c are each
/// the sum of two unit exponentials (Gamma(2,1)), β is uniform in [0,1).
pub fn cws_params(seed: u64, label: u64, k: u32) -> CwsParams {
    let mut rng = SplitMix64::keyed(seed, label, k as u64);
    let gamma = -rng.next_f64_open().ln() - rng.next_f64_open().ln();
    let c = -rng.next_f64_open().ln() - rng.next_f64_open().ln();
    let beta = rng.next_f64();
    CwsParams {
        // Zero only if two 53-bit uniforms both hit 1.0; guard the division.
        gamma: gamma.max(f64::MIN_POSITIVE),
        beta,
        c: c.max(f64::MIN_POSITIVE),
    }
}

/// The consistent-sample hash `a` for one label with weight `weight > 0`.
pub fn cws_hash(weight: f64, p: &CwsParams) -> f64 {
    assert!(
        weight > 0.0 && weight.is_finite(),
        "cws_hash requires a positive finite weight, got {weight}"
    );
    let t = (weight.ln() / p.gamma + p.beta).floor();
    let y = (p.gamma * (t - p.beta)).exp();
    p.c / (y * p.gamma.exp())
}

/// Identification of the featurization that produced a sketch. Two sketches
/// are comparable only when every field matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchStamp {
    pub k: u32,
    pub seed: u64,
    pub kernel: KernelKind,
    pub h: u32,
    /// Digest of the interned type vocabulary; canonical ids are only
    /// meaningful relative to one vocabulary.
    pub vocab_hash: u64,
}

impl SketchStamp {
    /// Field-by-field comparability check; the error names the first field
    /// that disagrees.
    pub fn check(&self, other: &SketchStamp) -> Result<(), SketchError> {
        let mismatch = |field, l: String, r: String| SketchError::StampMismatch {
            field,
            left: l,
            right: r,
        };
        if self.k != other.k {
            return Err(mismatch("k", self.k.to_string(), other.k.to_string()));
        }
        if self.seed != other.seed {
            return Err(mismatch("seed", self.seed.to_string(), other.seed.to_string()));
        }
        if self.kernel != other.kernel {
            return Err(mismatch(
                "kernel",
                self.kernel.as_str().to_string(),
                other.kernel.as_str().to_string(),
            ));
        }
        if self.h != other.h {
            return Err(mismatch("h", self.h.to_string(), other.h.to_string()));
        }
        if self.vocab_hash != other.vocab_hash {
            return Err(mismatch(
                "vocab_hash",
                format!("{:016x}", self.vocab_hash),
                format!("{:016x}", other.vocab_hash),
            ));
        }
        Ok(())
    }
}

/// Where a sketch came from: one snapshot of one partition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub partition: String,
    pub snapshot_id: u64,
    pub timestamp: i64,
    pub host: String,
    pub user: String,
    /// Hash of the pipeline configuration that produced this sketch
    /// (0 when built outside a pipeline run); provenance only, never
    /// part of compatibility checks.
    pub config: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sketch {
    pub stamp: SketchStamp,
    /// S[k]: canonical label id occupying slot k (`EMPTY_SLOT` if none).
    pub slots: Vec<u64>,
    /// A[k]: the minimum hash value realized in slot k.
    pub hashes: Vec<f64>,
    pub meta: SnapshotMeta,
}

/// `(a, label)` beats the incumbent lexicographically: smaller hash wins,
/// equal hashes fall back to the smaller canonical id so the argmin is a
/// total order.
fn challenge(slots: &mut [u64], hashes: &mut [f64], k: usize, label: u64, a: f64) {
    if a < hashes[k] || (a == hashes[k] && label < slots[k]) {
        hashes[k] = a;
        slots[k] = label;
    }
}

pub fn sketch_from_histogram(
    hist: &LabelHistogram,
    stamp: SketchStamp,
    meta: SnapshotMeta,
) -> Sketch {
    assert!(stamp.k >= 1, "sketch size must be at least 1");
    let kk = stamp.k as usize;
    let mut slots = vec![EMPTY_SLOT; kk];
    let mut hashes = vec![f64::INFINITY; kk];
    for (label, count) in hist.iter() {
        for k in 0..kk {
            let p = cws_params(stamp.seed, label, k as u32);
            let a = cws_hash(count as f64, &p);
            challenge(&mut slots, &mut hashes, k, label, a);
        }
    }
    Sketch {
        stamp,
        slots,
        hashes,
        meta,
    }
}

/// Fold a histogram delta into an existing sketch. `hist` must already
/// reflect the delta. Pure increments only ever lower a label's hash, so
/// they are folded in O(K) by re-challenging every slot. A decrement or
/// removal of a label that currently occupies slots invalidates exactly
/// those slots, which are then re-derived by a full scan. The result is
/// bit-identical to `sketch_from_histogram` on `hist`.
pub fn sketch_update(sk: &Sketch, delta: &HistogramDelta, hist: &LabelHistogram) -> Sketch {
    let mut out = sk.clone();
    if delta.is_empty() {
        return out;
    }
    let kk = out.stamp.k as usize;
    let mut rescan = vec![false; kk];
    let mut any_rescan = false;
    for (&label, &change) in delta {
        if change > 0 {
            assert!(
                hist.get(label) > 0,
                "delta increments label {label} absent from the histogram"
            );
        }
        if change < 0 {
            // The label's hash weakly increased: slots it holds must be
            // re-decided against the whole histogram; slots it lost long
            // ago are unaffected (its hash cannot shrink by shrinking w).
            for k in 0..kk {
                if out.slots[k] == label {
                    rescan[k] = true;
                    any_rescan = true;
                }
            }
        }
    }
    if any_rescan {
        for k in 0..kk {
            if !rescan[k] {
                continue;
            }
            out.slots[k] = EMPTY_SLOT;
            out.hashes[k] = f64::INFINITY;
            for (label, count) in hist.iter() {
                let p = cws_params(out.stamp.seed, label, k as u32);
                let a = cws_hash(count as f64, &p);
                challenge(&mut out.slots, &mut out.hashes, k, label, a);
            }
        }
    }
    // Fast path: surviving changed labels re-challenge at their new weight.
    // Labels also covered by a rescan are re-challenged with the very same
    // value the rescan used, so the double visit is idempotent.
    for (&label, _) in delta {
        let now = hist.get(label);
        if now == 0 {
            continue;
        }
        for k in 0..kk {
            let p = cws_params(out.stamp.seed, label, k as u32);
            let a = cws_hash(now as f64, &p);
            challenge(&mut out.slots, &mut out.hashes, k, label, a);
        }
    }
    out
}

/// Fraction of slots on which the two sketches agree; estimates the
/// normalized min-max similarity of the underlying histograms.
pub fn sketch_similarity(a: &Sketch, b: &Sketch) -> Result<f64, SketchError> {
    a.stamp.check(&b.stamp)?;
    let matches = a
        .slots
        .iter()
        .zip(&b.slots)
        .filter(|(x, y)| x == y)
        .count();
    Ok(matches as f64 / a.stamp.k as f64)
}

pub fn sketch_distance(a: &Sketch, b: &Sketch) -> Result<f64, SketchError> {
    Ok(1.0 - sketch_similarity(a, b)?)
}

/// Normalized min-max similarity of two histograms (Σ min / Σ max over the
/// union of supports). Two empty histograms are identically empty: 1.0.
pub fn nmm_similarity(a: &LabelHistogram, b: &LabelHistogram) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let mut min_sum = 0u64;
    let mut max_sum = 0u64;
    let mut ai = a.iter().peekable();
    let mut bi = b.iter().peekable();
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (Some((la, ca)), Some((lb, cb))) => {
                if la == lb {
                    min_sum += ca.min(cb);
                    max_sum += ca.max(cb);
                    ai.next();
                    bi.next();
                } else if la < lb {
                    max_sum += ca;
                    ai.next();
                } else {
                    max_sum += cb;
                    bi.next();
                }
            }
            (Some((_, ca)), None) => {
                max_sum += ca;
                ai.next();
            }
            (None, Some((_, cb))) => {
                max_sum += cb;
                bi.next();
            }
            (None, None) => break,
        }
    }
    min_sum as f64 / max_sum as f64
}

/// Normalized min-max similarity of two equal-dimension vectors.
pub fn nmm_similarity_vec(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "vectors must share a vocabulary");
    let mut min_sum = 0.0;
    let mut max_sum = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        debug_assert!(x >= 0.0 && y >= 0.0);
        min_sum += x.min(y);
        max_sum += x.max(y);
    }
    if max_sum == 0.0 {
        return 1.0;
    }
    min_sum / max_sum
}

/// Static featurization: vectors over the shared vocabulary Σ (union of all
/// bins, ascending canonical id), entry j = count of label Σ[j].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVectors {
    pub vocabulary: Vec<u64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn sparse_vectorize(hists: &[LabelHistogram]) -> SparseVectors {
    let mut vocabulary: Vec<u64> = Vec::new();
    {
        let mut seen = std::collections::BTreeSet::new();
        for h in hists {
            for (label, _) in h.iter() {
                seen.insert(label);
            }
        }
        vocabulary.extend(seen);
    }
    let index: BTreeMap<u64, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i))
        .collect();
    let vectors = hists
        .iter()
        .map(|h| {
            let mut v = vec![0.0; vocabulary.len()];
            for (label, count) in h.iter() {
                v[index[&label]] = count as f64;
            }
            v
        })
        .collect();
    SparseVectors {
        vocabulary,
        vectors,
    }
}

impl SparseVectors {
    /// CSV with a header row of canonical ids; one row per input histogram.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.vocabulary.iter().map(|l| l.to_string()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for v in &self.vectors {
            let row: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

impl Sketch {
    /// `slot,label_id,hash` rows for external tools.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,label_id,hash\n");
        for (k, (&label, &hash)) in self.slots.iter().zip(&self.hashes).enumerate() {
            out.push_str(&format!("{k},{label},{hash:e}\n"));
        }
        out
    }

    /// Binary serialization: magic, version, stamp, slot/hash records, then
    /// the snapshot metadata block.
    pub fn save(&self, path: &Path) -> Result<(), SketchError> {
        let mut buf: Vec<u8> = Vec::with_capacity(64 + self.slots.len() * 16);
        buf.extend_from_slice(SKETCH_MAGIC);
        buf.extend_from_slice(&SKETCH_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.stamp.k.to_le_bytes());
        buf.extend_from_slice(&self.stamp.seed.to_le_bytes());
        buf.push(self.stamp.kernel.code());
        buf.extend_from_slice(&self.stamp.h.to_le_bytes());
        buf.extend_from_slice(&self.stamp.vocab_hash.to_le_bytes());
        for (&slot, &hash) in self.slots.iter().zip(&self.hashes) {
            buf.extend_from_slice(&slot.to_le_bytes());
            buf.extend_from_slice(&hash.to_bits().to_le_bytes());
        }
        write_str(&mut buf, &self.meta.partition);
        buf.extend_from_slice(&self.meta.snapshot_id.to_le_bytes());
        buf.extend_from_slice(&self.meta.timestamp.to_le_bytes());
        write_str(&mut buf, &self.meta.host);
        write_str(&mut buf, &self.meta.user);
        buf.extend_from_slice(&self.meta.config.to_le_bytes());
        let mut f = fs::File::create(path).map_err(|e| SketchError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        f.write_all(&buf).map_err(|e| SketchError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Sketch, SketchError> {
        let bytes = fs::read(path).map_err(|e| SketchError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut r = Reader {
            bytes: &bytes,
            pos: 0,
            path,
        };
        let magic = r.take(4)?;
        if magic != SKETCH_MAGIC {
            return Err(SketchError::BadMagic {
                path: path.to_path_buf(),
            });
        }
        let version = r.u32()?;
        if version != SKETCH_VERSION {
            return Err(SketchError::BadVersion {
                path: path.to_path_buf(),
                found: version,
            });
        }
        let k = r.u32()?;
        let seed = r.u64()?;
        let code = r.take(1)?[0];
        let kernel = KernelKind::from_code(code).ok_or(SketchError::Truncated {
            path: path.to_path_buf(),
        })?;
        let h = r.u32()?;
        let vocab_hash = r.u64()?;
        let mut slots = Vec::with_capacity(k as usize);
        let mut hashes = Vec::with_capacity(k as usize);
        for _ in 0..k {
            slots.push(r.u64()?);
            hashes.push(f64::from_bits(r.u64()?));
        }
        let partition = r.string()?;
        let snapshot_id = r.u64()?;
        let timestamp = r.u64()? as i64;
        let host = r.string()?;
        let user = r.string()?;
        let config = r.u64()?;
        Ok(Sketch {
            stamp: SketchStamp {
                k,
                seed,
                kernel,
                h,
                vocab_hash,
            },
            slots,
            hashes,
            meta: SnapshotMeta {
                partition,
                snapshot_id,
                timestamp,
                host,
                user,
                config,
            },
        })
    }
}

fn write_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SketchError> {
        if self.pos + n > self.bytes.len() {
            return Err(SketchError::Truncated {
                path: self.path.to_path_buf(),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, SketchError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, SketchError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, SketchError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| SketchError::Truncated {
            path: self.path.to_path_buf(),
        })
    }
}
