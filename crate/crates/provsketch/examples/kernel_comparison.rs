//! Compare the discriminative power of the three graph kernels.
//!
//! Three event streams produce graphs whose `p1` node has *set-identical*
//! depth-1 neighborhoods:
//!
//! * G1 — `f1 READ p1`, then `m1 LOAD p1`
//! * G2 — the same two edges in the opposite order
//! * G3 — G1 plus a second file read (`f2 READ p1`)
//!
//! The kernels tell them apart differently:
//!
//! * `prov` (set-based walk labels) sees the same label sets everywhere,
//!   so all three graphs look identical — maximal noise robustness.
//! * `wl` (Weisfeiler–Lehman subtrees over sorted neighbor multisets)
//!   separates G3, whose multiset gained a second READ, but not the pure
//!   reordering in G2.
//! * `unicorn` (WL over arrival-ordered neighbor lists) separates all
//!   three, at the cost of sensitivity to benign scheduling jitter.
//!
//! Run with: `cargo run --example kernel_comparison`

use provsketch::ingest::Event;
use provsketch::kernel::{KernelKind, KernelState, LabelHistogram};
use provsketch::provgraph::ProvGraph;
use provsketch::sketch::nmm_similarity;
use provsketch::vocab::Vocab;

fn ev(
    vocab: &mut Vocab,
    seq: u64,
    subject: (&str, &str),
    action: &str,
    object: (&str, &str),
) -> Event {
    Event {
        seq,
        timestamp: seq as i64,
        subject_id: subject.0.into(),
        subject_type: vocab.intern_entity(subject.1),
        action: vocab.intern_event(action),
        object_id: object.0.into(),
        object_type: vocab.intern_entity(object.1),
        host: String::new(),
        user: String::new(),
        graph_id: String::new(),
    }
}

/// Final histogram plus the label `p1` carries at depth 1.
fn featurize(kind: KernelKind, h: usize, events: &[Event]) -> (LabelHistogram, u64) {
    let mut g = ProvGraph::new();
    let mut k = KernelState::new(kind, h);
    for e in events {
        let out = g.insert_event(e);
        k.update(&g, &out.new_nodes, &out.delta);
    }
    let p1 = g.latest_node("p1").expect("p1 exists");
    let label = k.node_label(p1, 1).expect("p1 has depth-1 walks");
    (k.histogram().clone(), label)
}

fn main() {
    let mut vocab = Vocab::new();
    let g1 = vec![
        ev(&mut vocab, 1, ("f1", "FILE"), "READ", ("p1", "PROCESS")),
        ev(&mut vocab, 2, ("m1", "MODULE"), "LOAD", ("p1", "PROCESS")),
    ];
    let g2 = vec![
        ev(&mut vocab, 1, ("m1", "MODULE"), "LOAD", ("p1", "PROCESS")),
        ev(&mut vocab, 2, ("f1", "FILE"), "READ", ("p1", "PROCESS")),
    ];
    let g3 = vec![
        ev(&mut vocab, 1, ("f1", "FILE"), "READ", ("p1", "PROCESS")),
        ev(&mut vocab, 2, ("m1", "MODULE"), "LOAD", ("p1", "PROCESS")),
        ev(&mut vocab, 3, ("f2", "FILE"), "READ", ("p1", "PROCESS")),
    ];
    let streams = [("G1", &g1), ("G2", &g2), ("G3", &g3)];

    let h = 1;
    println!("depth-1 label of p1 (the node whose neighborhood varies):\n");
    let mut all: Vec<(KernelKind, Vec<LabelHistogram>, Vec<u64>)> = Vec::new();
    for kind in KernelKind::ALL {
        let (hists, labels): (Vec<LabelHistogram>, Vec<u64>) = streams
            .iter()
            .map(|(_, evs)| featurize(kind, h, evs))
            .unzip();
        let short: Vec<String> = labels.iter().map(|l| format!("{:08x}", l >> 32)).collect();
        println!(
            "  {:<8} G1={} G2={} G3={}   (G1==G2: {}, G1==G3: {})",
            kind.as_str(),
            short[0],
            short[1],
            short[2],
            labels[0] == labels[1],
            labels[0] == labels[2],
        );
        all.push((kind, hists, labels));
    }
    let prov_labels = &all[0].2;
    assert!(prov_labels.iter().all(|l| l == &prov_labels[0]));
    let wl_labels = &all[1].2;
    assert_eq!(wl_labels[0], wl_labels[1]);
    assert_ne!(wl_labels[0], wl_labels[2]);
    let uni_labels = &all[2].2;
    assert!(uni_labels[0] != uni_labels[1] && uni_labels[0] != uni_labels[2] && uni_labels[1] != uni_labels[2]);
    println!("\n  prov    cannot tell any of them apart: same sets, whatever the");
    println!("          multiplicity or order");
    println!("  wl      separates only G3 (the neighbor *multiset* changed)");
    println!("  unicorn separates all three (arrival order matters)\n");

    // Detection compares whole-graph histograms, where G3's extra file
    // node also leaves a depth-0 trace, so even prov sees G3 as merely
    // similar rather than identical.
    println!("whole-histogram similarity (normalized min-max, 1 = identical):\n");
    for (kind, hists, _) in &all {
        println!("{:<8} {:>8} {:>8} {:>8}", kind.as_str(), "G1", "G2", "G3");
        for (i, (name, _)) in streams.iter().enumerate() {
            let row: Vec<String> = (0..streams.len())
                .map(|j| format!("{:>8.4}", nmm_similarity(&hists[i], &hists[j])))
                .collect();
            println!("{name:<8} {}", row.join(" "));
        }
        println!();
    }

    println!("summary: prov ⊑ wl ⊑ unicorn in discriminative power; pick the");
    println!("leftmost kernel whose blindness you can afford, because every");
    println!("distinction it makes is a distinction noise can also make.");
}
