//! Temporal traversal of the user-host authentication graph.
//!
//! Session logs give a coarse bipartite interaction graph: users on one
//! side, hosts on the other, edges stamped with login/logout/remote-desktop
//! events. Starting from the metadata of a detected anomaly (host, user,
//! first anomalous timestamp), the traversal alternates
//!
//! * host flagged at `t` → every user with a LOGIN/RDP edge into or out of
//!   that host at time `>= t` is flagged at the edge time, and
//! * user flagged at `t` → every host that user logs into (LOGIN/RDP) at
//!   time `>= t` is flagged at the edge time,
//!
//! to a monotone fixpoint, keeping the earliest reach time per entity.
//! LOGOUT edges never propagate: without session-interval semantics a
//! logout proves presence but transfers nothing; they are kept in the
//! parsed stream for reporting. Timestamps along every traversal path are
//! non-decreasing and bounded below by the seed time, so the result is a
//! forward-in-time over-approximation of credential-borne movement.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

/// One authentication event from a session log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionEdge {
    pub user: String,
    /// Originating host; empty means a local (console) session.
    pub src_host: String,
    pub dst_host: String,
    pub kind: SessionEventKind,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SessionEventKind {
    Login,
    Logout,
    Rdp,
}

impl SessionEventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SessionEventKind::Login => "LOGIN",
            SessionEventKind::Logout => "LOGOUT",
            SessionEventKind::Rdp => "RDP",
        }
    }

    fn propagates(&self) -> bool {
        !matches!(self, SessionEventKind::Logout)
    }
}

impl fmt::Display for SessionEventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One step of the movement graph: the session edge that first flagged an
/// entity, oriented from the already-flagged side to the newly flagged one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEdge {
    pub src_entity: String,
    pub dst_entity: String,
    pub kind: SessionEventKind,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceResult {
    pub seed_host: String,
    pub seed_user: Option<String>,
    pub seed_time: i64,
    /// Flagged hosts with their first-reach timestamps (seed included).
    pub hosts: BTreeMap<String, i64>,
    /// Flagged users with their first-reach timestamps (seed included).
    pub users: BTreeMap<String, i64>,
    /// One flagging edge per non-seed flagged entity, by final reach time.
    pub edges: Vec<TraceEdge>,
    /// Seed host never appeared in the session graph; result is empty.
    pub seed_missing: bool,
}

impl TraceResult {
    /// `src_entity,dst_entity,kind,timestamp` rows of the movement graph.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("src_entity,dst_entity,kind,timestamp\n");
        for e in &self.edges {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.src_entity, e.dst_entity, e.kind, e.timestamp
            ));
        }
        out
    }

    /// `entity,kind,first_reach` rows for every flagged host and user.
    pub fn flagged_csv(&self) -> String {
        let mut out = String::from("entity,kind,first_reach\n");
        for (h, t) in &self.hosts {
            out.push_str(&format!("{h},host,{t}\n"));
        }
        for (u, t) in &self.users {
            out.push_str(&format!("{u},user,{t}\n"));
        }
        out
    }
}

/// Alternating bipartite closure from the anomaly seed, restricted to
/// non-decreasing timestamps. `user_filter`, when present, limits which
/// users may propagate (the seed user is always allowed). The output is
/// independent of the input edge order.
pub fn temporal_traverse(
    edges: &[SessionEdge],
    seed_host: &str,
    seed_user: Option<&str>,
    t0: i64,
    user_filter: Option<&BTreeSet<String>>,
) -> TraceResult {
    let mut result = TraceResult {
        seed_host: seed_host.to_string(),
        seed_user: seed_user.map(str::to_string),
        seed_time: t0,
        hosts: BTreeMap::new(),
        users: BTreeMap::new(),
        edges: Vec::new(),
        seed_missing: false,
    };
    let present = edges
        .iter()
        .any(|e| e.src_host == seed_host || e.dst_host == seed_host);
    if !present {
        tracing::warn!(
            seed_host,
            "seed host absent from the session graph; returning an empty trace"
        );
        result.seed_missing = true;
        return result;
    }
    let user_allowed = |u: &str| {
        user_filter.map_or(true, |f| f.contains(u)) || seed_user == Some(u)
    };

    // Deterministic scan order regardless of caller ordering.
    let mut sorted: Vec<&SessionEdge> = edges.iter().collect();
    sorted.sort_by(|a, b| {
        (a.timestamp, &a.user, &a.src_host, &a.dst_host, a.kind)
            .cmp(&(b.timestamp, &b.user, &b.src_host, &b.dst_host, b.kind))
    });

    result.hosts.insert(seed_host.to_string(), t0);
    if let Some(u) = seed_user {
        result.users.insert(u.to_string(), t0);
    }
    // Flagging edge per entity; later improvements overwrite, so each entity
    // ends up with the edge that realized its final first-reach time.
    let mut via: BTreeMap<(bool, String), TraceEdge> = BTreeMap::new();

    loop {
        let mut changed = false;
        for e in &sorted {
            if !e.kind.propagates() {
                continue;
            }
            // host -> user: the user stood on both endpoints of the session.
            for side in [e.src_host.as_str(), e.dst_host.as_str()] {
                if side.is_empty() {
                    continue;
                }
                let reach = match result.hosts.get(side) {
                    Some(&t) if e.timestamp >= t => e.timestamp,
                    _ => continue,
                };
                if !user_allowed(&e.user) {
                    continue;
                }
                let slot = result.users.entry(e.user.clone()).or_insert(i64::MAX);
                if reach < *slot {
                    *slot = reach;
                    via.insert(
                        (false, e.user.clone()),
                        TraceEdge {
                            src_entity: side.to_string(),
                            dst_entity: e.user.clone(),
                            kind: e.kind,
                            timestamp: e.timestamp,
                        },
                    );
                    changed = true;
                }
            }
            // user -> destination host.
            if let Some(&t) = result.users.get(&e.user) {
                if e.timestamp >= t {
                    let slot = result.hosts.entry(e.dst_host.clone()).or_insert(i64::MAX);
                    if e.timestamp < *slot {
                        *slot = e.timestamp;
                        via.insert(
                            (true, e.dst_host.clone()),
                            TraceEdge {
                                src_entity: e.user.clone(),
                                dst_entity: e.dst_host.clone(),
                                kind: e.kind,
                                timestamp: e.timestamp,
                            },
                        );
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut flagging: Vec<TraceEdge> = via.into_values().collect();
    flagging.sort_by(|a, b| {
        (a.timestamp, &a.src_entity, &a.dst_entity)
            .cmp(&(b.timestamp, &b.src_entity, &b.dst_entity))
    });
    result.edges = flagging;
    result
}

/// Convenience view over an edge slice for seeding traversals.
pub fn hosts_in_log<'a>(edges: &'a [SessionEdge]) -> BTreeSet<&'a str> {
    let mut out = BTreeSet::new();
    for e in edges {
        if !e.src_host.is_empty() {
            out.insert(e.src_host.as_str());
        }
        out.insert(e.dst_host.as_str());
    }
    out
}
