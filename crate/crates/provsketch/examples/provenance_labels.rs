//! Inspect the set-based provenance labels the `prov` kernel assigns.
//!
//! For every node and every depth `d ≤ h` the kernel computes a label
//! describing the *set union* of all length-`d` provenance walks ending at
//! that node: a tuple of layers alternating event-type sets and, at the
//! innermost position, the entity-type set of the walk origins. Because
//! layers are sets, the label is insensitive to how many walks carry a
//! relation and to their interleaving — two behaviors that differ only in
//! repetition count produce the same label, while a new *kind* of
//! influence changes it.
//!
//! The stream below is a small process tree touching a registry key:
//!
//! ```text
//! process1 --CREATE--> process2
//! file1    --READ----> process2
//! process2 --EDIT----> registry1
//! ```
//!
//! The depth-2 label of `registry1` works out to
//! `({EDIT},{CREATE,READ},{FILE,PROCESS})`: reached by an EDIT, which was
//! in turn influenced by a CREATE and a READ, originating from a PROCESS
//! and a FILE.
//!
//! Run with: `cargo run --example provenance_labels`

use provsketch::ingest::Event;
use provsketch::kernel::{KernelKind, KernelState};
use provsketch::provgraph::ProvGraph;
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

fn main() {
    let mut vocab = Vocab::new();
    let events = vec![
        ev(&mut vocab, 1, ("process1", "PROCESS"), "CREATE", ("process2", "PROCESS")),
        ev(&mut vocab, 2, ("file1", "FILE"), "READ", ("process2", "PROCESS")),
        ev(&mut vocab, 3, ("process2", "PROCESS"), "EDIT", ("registry1", "REGISTRY")),
    ];

    let h = 2;
    let mut g = ProvGraph::new();
    let mut kernel = KernelState::new(KernelKind::Prov, h);
    for e in &events {
        let out = g.insert_event(e);
        kernel.update(&g, &out.new_nodes, &out.delta);
    }

    println!("per-node labels at every depth (y = set-based walk label):\n");
    for (idx, node) in g.nodes() {
        println!(
            "node {idx}: {}@v{} [{}]",
            node.entity_id,
            node.version,
            vocab.entity_name(node.label)
        );
        for d in 0..=h {
            match kernel.prov_label(idx, d) {
                Some(label) => println!("  y_{d} = {}", label.render(&vocab)),
                // No walk of length d ends here (origin nodes at d >= 1).
                None => println!("  y_{d} = (no depth-{d} walks end here)"),
            }
        }
    }

    println!("\nhistogram (canonical label id -> count):");
    for (id, count) in kernel.histogram().iter() {
        println!("  {id:016x} x{count}");
    }
    println!(
        "distinct labels per depth 0..={h}: {:?}",
        kernel.distinct_label_counts()
    );

    // Multiplicity insensitivity: a second READ from another FILE node
    // leaves registry1's label unchanged (the layer is already {CREATE,
    // READ} / {FILE, PROCESS})...
    let reg = g.latest_node("registry1").unwrap();
    let before = kernel.prov_label(reg, 2).unwrap().render(&vocab);
    let extra = ev(&mut vocab, 4, ("file2", "FILE"), "READ", ("process2", "PROCESS"));
    let out = g.insert_event(&extra);
    kernel.update(&g, &out.new_nodes, &out.delta);
    // (process2 gained a version; registry1's label set is unchanged)
    let reg = g.latest_node("registry1").unwrap();
    let after = kernel.prov_label(reg, 2).unwrap().render(&vocab);
    println!("\nregistry1 y_2 before extra READ: {before}");
    println!("registry1 y_2 after  extra READ: {after}");
    assert_eq!(before, after, "set semantics ignore multiplicity");

    // ...while a brand-new relation kind does not.
    let novel = ev(&mut vocab, 5, ("sock1", "SOCKET"), "RECV", ("process2", "PROCESS"));
    let out = g.insert_event(&novel);
    kernel.update(&g, &out.new_nodes, &out.delta);
    let p2 = g.latest_node("process2").unwrap();
    println!(
        "process2 y_1 after novel RECV:   {}",
        kernel.prov_label(p2, 1).unwrap().render(&vocab)
    );
}
