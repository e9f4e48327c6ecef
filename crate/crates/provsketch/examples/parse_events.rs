//! Parse raw audit logs into canonical events.
//!
//! Two input formats are supported:
//!
//! * JSONL — one JSON object per line with `subject_id`, `subject_type`,
//!   `action`, `object_id`, `object_type` and optional `seq`, `timestamp`,
//!   `host`, `user`, `graph_id` fields.
//! * StreamSpot-style TSV — six tab-separated columns:
//!   `src_id  src_type  dst_id  dst_type  action  graph_id`.
//!
//! Entity and event type names are interned into a shared [`Vocab`] so the
//! rest of the system works on small integer ids. Lenient mode skips
//! malformed lines (and counts them) instead of failing.
//!
//! Run with: `cargo run --example parse_events`

use provsketch::ingest::{parse_jsonl, parse_streamspot, write_events_jsonl};
use provsketch::vocab::Vocab;

fn main() {
    let dir = tempfile::tempdir().expect("tempdir");

    // --- JSONL ---------------------------------------------------------
    let jsonl = dir.path().join("audit.jsonl");
    std::fs::write(
        &jsonl,
        concat!(
            "# comments and blank lines are ignored\n",
            "{\"timestamp\":1000,\"subject_id\":\"bash-41\",\"subject_type\":\"PROCESS\",",
            "\"action\":\"READ\",\"object_id\":\"/etc/passwd\",\"object_type\":\"FILE\",",
            "\"host\":\"web-1\",\"user\":\"alice\"}\n",
            "\n",
            "{\"timestamp\":2000,\"subject_id\":\"bash-41\",\"subject_type\":\"PROCESS\",",
            "\"action\":\"CONNECT\",\"object_id\":\"10.0.0.7:443\",\"object_type\":\"SOCKET\",",
            "\"host\":\"web-1\",\"user\":\"alice\"}\n",
            "not json at all\n",
        ),
    )
    .expect("write jsonl");

    let mut vocab = Vocab::new();
    let parsed = parse_jsonl(&jsonl, &mut vocab, /* lenient = */ true).expect("parse jsonl");
    println!(
        "JSONL: parsed {} events, skipped {} malformed line(s)",
        parsed.events.len(),
        parsed.skipped
    );
    for e in &parsed.events {
        println!(
            "  seq={} t={} {}[{}] --{}--> {}[{}] host={} user={}",
            e.seq,
            e.timestamp,
            e.subject_id,
            vocab.entity_name(e.subject_type),
            vocab.event_name(e.action),
            e.object_id,
            vocab.entity_name(e.object_type),
            e.host,
            e.user,
        );
    }

    // Strict mode refuses the same file, pointing at the offending line.
    let err = parse_jsonl(&jsonl, &mut Vocab::new(), false).unwrap_err();
    println!("strict mode error: {err}");

    // --- StreamSpot TSV --------------------------------------------------
    let tsv = dir.path().join("edges.tsv");
    std::fs::write(
        &tsv,
        "a\tPROCESS\tb\tFILE\tWRITE\tgraph-0\nb\tFILE\tc\tSOCKET\tSEND\tgraph-0\n",
    )
    .expect("write tsv");
    let parsed = parse_streamspot(&tsv, &mut vocab, false).expect("parse tsv");
    println!(
        "\nTSV: parsed {} events into graph `{}`",
        parsed.events.len(),
        parsed.events[0].graph_id
    );

    // --- Canonical serialization ----------------------------------------
    // Everything round-trips through one canonical JSONL representation,
    // here tagged with a provenance header line.
    let out = dir.path().join("events.jsonl");
    write_events_jsonl(&out, &parsed.events, &vocab, Some("canonical demo"))
        .expect("write canonical");
    let text = std::fs::read_to_string(&out).expect("read back");
    println!("\ncanonical events.jsonl:\n{text}");

    println!(
        "vocabulary: {} entity types, {} event types, digest {:016x}",
        vocab.entity_count(),
        vocab.event_count(),
        vocab.digest()
    );
}
