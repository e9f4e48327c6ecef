//! Trace lateral movement through an authentication session graph.
//!
//! Once detection pins a compromise to a host at time t0, the question
//! becomes: where could the attacker have gone *from there, after then*?
//! The traversal alternates host → user → host over LOGIN/RDP session
//! edges, forward in time only:
//!
//! * a user is flagged the first time they appear on either end of a
//!   session touching a flagged host at or after its flag time (their
//!   credentials must be considered exposed from that moment), and
//! * a flagged user flags the destination of every later login.
//!
//! Edges before t0 never propagate — history that predates the compromise
//! is innocent. The result is a deliberate over-approximation: it bounds
//! the blast radius for an incident responder, it does not prove misuse.
//!
//! The log below hides one pre-incident edge and one unrelated island:
//!
//! ```text
//! t=100  carol:   ws-3 -> db-1      (before t0: stays clean)
//! t=210  mallory: ws-3 -> build-7   (first hop off the seed)
//! t=320  mallory: build-7 -> ci-2   (second hop, over RDP)
//! t=400  dave:    ci-2 -> vault-9   (tainted on ci-2, carries it onward)
//! t=500  erin:    lab-1 -> lab-2    (never reachable from the seed)
//! t=600  carol:   db-1 -> ws-3      (carol's credentials now exposed)
//! t=700  carol:   db-1 -> backup-4  (...so this login is suspect too)
//! ```
//!
//! Run with: `cargo run --example trace_sessions`

use provsketch::authtrace::{temporal_traverse, SessionEdge, SessionEventKind};

fn edge(user: &str, src: &str, dst: &str, kind: SessionEventKind, t: i64) -> SessionEdge {
    SessionEdge {
        user: user.into(),
        src_host: src.into(),
        dst_host: dst.into(),
        kind,
        timestamp: t,
    }
}

fn main() {
    use SessionEventKind::{Login, Rdp};
    let log = vec![
        edge("carol", "ws-3", "db-1", Login, 100),
        edge("mallory", "ws-3", "build-7", Login, 210),
        edge("mallory", "build-7", "ci-2", Rdp, 320),
        edge("dave", "ci-2", "vault-9", Login, 400),
        edge("erin", "lab-1", "lab-2", Login, 500),
        edge("carol", "db-1", "ws-3", Login, 600),
        edge("carol", "db-1", "backup-4", Login, 700),
    ];

    // Detection said: ws-3 went bad at t0 = 200.
    let result = temporal_traverse(&log, "ws-3", None, 200, None);

    println!(
        "seed: host {} at t0={} (user: {})",
        result.seed_host,
        result.seed_time,
        result.seed_user.as_deref().unwrap_or("unknown")
    );

    println!("\nflagged hosts (first plausible reach time):");
    for (host, t) in &result.hosts {
        println!("  {host:<10} t={t}");
    }
    println!("flagged users:");
    for (user, t) in &result.users {
        println!("  {user:<10} t={t}");
    }

    println!("\nmovement graph (the edge that first flagged each entity):");
    print!("{}", result.edges_csv());

    // What the traversal promises:
    assert_eq!(result.hosts["build-7"], 210, "mallory's first hop");
    assert_eq!(result.hosts["ci-2"], 320, "second hop over RDP");
    assert_eq!(
        result.hosts["vault-9"], 400,
        "dave was tainted on ci-2 after it was flagged"
    );
    assert!(
        !result.hosts.contains_key("db-1"),
        "carol's pre-t0 hop must not flag db-1"
    );
    assert_eq!(
        result.users["carol"], 600,
        "carol touched flagged ws-3 after t0, so her credentials count as exposed"
    );
    assert_eq!(
        result.hosts["backup-4"], 700,
        "carol's post-exposure login is suspect even though db-1 itself is clean"
    );
    assert!(
        !result.hosts.contains_key("lab-1") && !result.hosts.contains_key("lab-2"),
        "the unrelated island stays clean"
    );
    println!("\nall containment expectations hold");

    // Restricting propagation to the known-bad account shrinks the
    // blast-radius estimate to what that account alone could reach.
    let only_mallory: std::collections::BTreeSet<String> = ["mallory".to_string()].into();
    let narrow = temporal_traverse(&log, "ws-3", None, 200, Some(&only_mallory));
    println!(
        "restricted to user mallory: {} hosts flagged (vs {} unrestricted)",
        narrow.hosts.len(),
        result.hosts.len()
    );
    assert!(!narrow.hosts.contains_key("backup-4"));
    assert!(!narrow.hosts.contains_key("vault-9"));

    // A missing seed is reported, not silently empty.
    let missing = temporal_traverse(&log, "no-such-host", None, 0, None);
    println!(
        "unknown seed host: seed_missing={} ({} hosts flagged)",
        missing.seed_missing,
        missing.hosts.len()
    );
}
