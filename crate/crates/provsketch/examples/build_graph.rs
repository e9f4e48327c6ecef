//! Build a versioned provenance graph from an event stream.
//!
//! The graph applies two reduction rules as events arrive:
//!
//! * **Duplicate elimination** — a repeated `(subject, action, object)`
//!   edge is merged into the existing one (its time range widens) as long
//!   as the destination has not yet influenced anything else, so no
//!   provenance is lost.
//! * **Node versioning** — when an entity that already has outgoing edges
//!   receives a new incoming edge, the entity is split into a fresh
//!   version connected by a version link. This keeps the graph acyclic
//!   and makes every node's history immutable once it has been read,
//!   which is what allows incremental feature extraction downstream.
//!
//! Run with: `cargo run --example build_graph`

use provsketch::ingest::Event;
use provsketch::provgraph::ProvGraph;
use provsketch::vocab::Vocab;

fn ev(
    vocab: &mut Vocab,
    seq: u64,
    ts: i64,
    subject: (&str, &str),
    action: &str,
    object: (&str, &str),
) -> Event {
    Event {
        seq,
        timestamp: ts,
        subject_id: subject.0.into(),
        subject_type: vocab.intern_entity(subject.1),
        action: vocab.intern_event(action),
        object_id: object.0.into(),
        object_type: vocab.intern_entity(object.1),
        host: "demo-host".into(),
        user: "demo".into(),
        graph_id: String::new(),
    }
}

fn main() {
    let mut vocab = Vocab::new();
    let events = vec![
        // A process edits a registry key...
        ev(&mut vocab, 1, 100, ("proc-1", "PROCESS"), "EDIT", ("reg-1", "REGISTRY")),
        // ...the same edit again: merged, not duplicated.
        ev(&mut vocab, 2, 150, ("proc-1", "PROCESS"), "EDIT", ("reg-1", "REGISTRY")),
        // The registry key is read back, so it now has an out-edge...
        ev(&mut vocab, 3, 200, ("reg-1", "REGISTRY"), "READ", ("proc-2", "PROCESS")),
        // ...and a later write to it must create version 1 of reg-1.
        ev(&mut vocab, 4, 300, ("proc-2", "PROCESS"), "CREATE", ("reg-1", "REGISTRY")),
        // Self-influence is meaningless and gets rejected.
        ev(&mut vocab, 5, 400, ("proc-2", "PROCESS"), "SPAWN", ("proc-2", "PROCESS")),
    ];

    let mut g = ProvGraph::new();
    for e in &events {
        let before_nodes = g.node_count();
        let outcome = g.insert_event(e);
        println!(
            "seq {}: {:?} (+{} node(s), +{} edge(s))",
            e.seq,
            outcome.kind,
            g.node_count() - before_nodes,
            outcome.delta.len(),
        );
    }

    println!("\ngraph dump (entity@version  EVENT  entity@version  [first_seen last_seen]):");
    for line in g.dump(&vocab).lines() {
        println!("  {line}");
    }

    let stats = g.reduction_stats();
    println!("\nreduction stats:");
    println!("  raw events:              {}", stats.raw_events);
    println!("  merged duplicates:       {}", stats.merged_events);
    println!("  rejected self-loops:     {}", stats.rejected_self_loops);
    println!("  mean versions/entity:    {:.3}", stats.versions_per_entity_mean);
    println!("  edge reduction factor:   {:.3}", stats.edge_reduction_factor);

    // The latest version of reg-1 is version 1, linked back to version 0.
    let latest = g.latest_node("reg-1").expect("reg-1 exists");
    println!(
        "\nlatest reg-1 node: index {} version {} (previous version: {:?})",
        latest,
        g.node(latest).version,
        g.prev_version(latest)
    );
}
