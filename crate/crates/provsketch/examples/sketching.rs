//! Fixed-size behavioral sketches via consistent weighted sampling.
//!
//! A kernel histogram grows with the graph, so comparing hosts pairwise
//! would cost memory and time proportional to behavior size. A sketch
//! compresses the histogram into K (slot, hash) pairs such that for two
//! histograms the probability a slot agrees equals their normalized
//! min-max similarity: `sim(A,B) = Σ_l min(A_l,B_l) / Σ_l max(A_l,B_l)`.
//! Matching slots therefore estimate similarity without ever touching the
//! raw histograms again.
//!
//! This example:
//! 1. builds sketches for two synthetic behaviors plus a perturbed copy,
//! 2. compares estimated vs exact similarity at several sketch sizes,
//! 3. maintains a sketch incrementally while the stream continues and
//!    checks it stays bit-identical to a from-scratch rebuild,
//! 4. round-trips a sketch through its binary file format.
//!
//! Run with: `cargo run --example sketching`

use provsketch::ingest::Event;
use provsketch::kernel::{KernelKind, KernelState, LabelHistogram};
use provsketch::provgraph::ProvGraph;
use provsketch::sketch::{
    nmm_similarity, sketch_from_histogram, sketch_similarity, sketch_update, Sketch, SketchStamp,
    SnapshotMeta,
};
use provsketch::synth::generate_run;
use provsketch::synth::Scenario;
use provsketch::vocab::Vocab;

fn histogram_of(events: &[Event], h: usize) -> LabelHistogram {
    let mut g = ProvGraph::new();
    let mut k = KernelState::new(KernelKind::Prov, h);
    for e in events {
        let out = g.insert_event(e);
        k.update(&g, &out.new_nodes, &out.delta);
    }
    k.histogram().clone()
}

fn main() {
    let mut vocab = Vocab::new();
    let h = 3;
    // Three runs from the synthetic corpus: two different benign programs
    // and a jittered re-run of the first one.
    let mail_a = histogram_of(&generate_run(Scenario::Gmail, 0, 1, 600, &mut vocab), h);
    let mail_b = histogram_of(&generate_run(Scenario::Gmail, 1, 1, 600, &mut vocab), h);
    let video = histogram_of(&generate_run(Scenario::Youtube, 0, 1, 600, &mut vocab), h);

    let exact_same = nmm_similarity(&mail_a, &mail_b);
    let exact_diff = nmm_similarity(&mail_a, &video);
    println!("exact histogram similarity:");
    println!("  mail vs mail (re-run):  {exact_same:.4}");
    println!("  mail vs video:          {exact_diff:.4}\n");

    println!("sketch estimates by size (estimate ± expected sampling std):");
    for k in [64u32, 256, 1024, 4096] {
        let stamp = SketchStamp {
            k,
            seed: 42,
            kernel: KernelKind::Prov,
            h: h as u32,
            vocab_hash: vocab.digest(),
        };
        let meta = SnapshotMeta::default();
        let sa = sketch_from_histogram(&mail_a, stamp, meta.clone());
        let sb = sketch_from_histogram(&mail_b, stamp, meta.clone());
        let sv = sketch_from_histogram(&video, stamp, meta);
        let est_same = sketch_similarity(&sa, &sb).unwrap();
        let est_diff = sketch_similarity(&sa, &sv).unwrap();
        // Slot agreement is a Binomial(K, sim) sample.
        let sd = |s: f64| (s * (1.0 - s) / k as f64).sqrt();
        println!(
            "  K={k:>4}: mail/mail {est_same:.4} (±{:.4})   mail/video {est_diff:.4} (±{:.4})",
            sd(exact_same),
            sd(exact_diff)
        );
    }

    // --- Incremental maintenance ---------------------------------------
    // Rebuild the mail behavior event by event, updating the sketch from
    // each histogram delta; it must equal the from-scratch sketch exactly.
    let events = generate_run(Scenario::Gmail, 0, 1, 600, &mut vocab);
    let stamp = SketchStamp {
        k: 512,
        seed: 42,
        kernel: KernelKind::Prov,
        h: h as u32,
        vocab_hash: vocab.digest(),
    };
    let mut g = ProvGraph::new();
    let mut kern = KernelState::new(KernelKind::Prov, h);
    let mut running = sketch_from_histogram(&LabelHistogram::new(), stamp, SnapshotMeta::default());
    for e in &events {
        let out = g.insert_event(e);
        let delta = kern.update(&g, &out.new_nodes, &out.delta);
        running = sketch_update(&running, &delta, kern.histogram());
    }
    let scratch = sketch_from_histogram(kern.histogram(), stamp, SnapshotMeta::default());
    assert_eq!(running.slots, scratch.slots);
    assert_eq!(running.hashes, scratch.hashes);
    println!("\nincremental sketch after {} events == from-scratch rebuild (bit-exact)", events.len());

    // --- Persistence -----------------------------------------------------
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mail.sketch");
    running.meta = SnapshotMeta {
        partition: "gmail-00".into(),
        snapshot_id: 0,
        timestamp: events.last().unwrap().timestamp,
        host: "gmail-00".into(),
        user: "user-gmail".into(),
        config: 0,
    };
    running.save(&path).unwrap();
    let loaded = Sketch::load(&path).unwrap();
    assert_eq!(loaded, running);
    println!(
        "round-tripped {} ({} bytes): stamp k={} kernel={} h={} seed={}",
        path.file_name().unwrap().to_string_lossy(),
        std::fs::metadata(&path).unwrap().len(),
        loaded.stamp.k,
        loaded.stamp.kernel.as_str(),
        loaded.stamp.h,
        loaded.stamp.seed,
    );

    // Sketches with different stamps refuse to compare.
    let other_stamp = SketchStamp { seed: 43, ..stamp };
    let foreign = sketch_from_histogram(&mail_b, other_stamp, SnapshotMeta::default());
    let err = sketch_similarity(&running, &foreign).unwrap_err();
    println!("stamp mismatch is an error, not a wrong number: {err}");
}
