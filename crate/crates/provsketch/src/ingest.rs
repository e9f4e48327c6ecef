//! Audit-event ingestion.
//!
//! Three wire formats come in, one canonical format goes out:
//!
//! * tab-separated graph edges (`src_id  src_type  dst_id  dst_type
//!   edge_type  graph_id`), timestampless, one graph per `graph_id`;
//! * line-delimited JSON audit events with mandatory
//!   `subject_id/subject_type/action/object_id/object_type` keys;
//! * line-delimited JSON authentication session events (LOGIN/LOGOUT/RDP).
//!
//! The canonical internal format is line-delimited JSON with every field
//! explicit, so serializing a parsed stream and re-parsing it reproduces the
//! stream field-for-field, and files can be concatenated and replayed.
//! Events always point in the direction of information flow: the subject is
//! the flow source (a read is emitted as `file -> process`).
//!
//! Lines starting with `#` are comments (output files carry their config
//! hash in one) and are skipped by every parser.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::authtrace::{SessionEdge, SessionEventKind};
use crate::vocab::{EntityTypeId, EventTypeId, Vocab};

/// One audit event, typed against a [`Vocab`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// Position in the ingest run; strictly increasing within a stream.
    pub seq: u64,
    /// Nanoseconds since epoch; 0 for timestampless datasets.
    pub timestamp: i64,
    pub subject_id: String,
    pub subject_type: EntityTypeId,
    pub action: EventTypeId,
    pub object_id: String,
    pub object_type: EntityTypeId,
    /// Empty when the source carries no host attribution.
    pub host: String,
    /// Empty when the source carries no user attribution.
    pub user: String,
    /// Empty when the dataset is not pre-partitioned into graphs.
    pub graph_id: String,
}

impl Event {
    /// Partition key for graph construction: explicit graph id when the
    /// dataset provides one, host otherwise.
    pub fn partition_key(&self) -> &str {
        if !self.graph_id.is_empty() {
            &self.graph_id
        } else {
            &self.host
        }
    }
}

/// Parse result plus the count of lines skipped under lenient mode.
#[derive(Debug)]
pub struct ParsedEvents {
    pub events: Vec<Event>,
    pub skipped: usize,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Malformed {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: missing key {key}")]
    MissingKey {
        path: PathBuf,
        line: usize,
        key: &'static str,
    },
    #[error("{path}:{line}: unknown session event {kind}")]
    UnknownSessionEvent {
        path: PathBuf,
        line: usize,
        kind: String,
    },
}

fn io_err(path: &Path, source: io::Error) -> IngestError {
    IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, IngestError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        lines.push(line.map_err(|e| io_err(path, e))?);
    }
    Ok(lines)
}

fn skippable(line: &str) -> bool {
    line.trim().is_empty() || line.starts_with('#')
}

/// Parse a tab-separated edge file. Each data line becomes one event with
/// timestamp 0 and `seq` equal to its 1-based line number. Malformed lines
/// abort with the offending line number unless `lenient` is set, in which
/// case they are skipped and counted.
pub fn parse_streamspot(
    path: &Path,
    vocab: &mut Vocab,
    lenient: bool,
) -> Result<ParsedEvents, IngestError> {
    let lines = read_lines(path)?;
    let mut events = Vec::new();
    let mut skipped = 0usize;
    for (idx, line) in lines.iter().enumerate() {
        let lineno = idx + 1;
        if skippable(line) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 || fields.iter().any(|f| f.is_empty()) {
            if lenient {
                skipped += 1;
                continue;
            }
            return Err(IngestError::Malformed {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("expected 6 tab-separated fields, got {}", fields.len()),
            });
        }
        events.push(Event {
            seq: lineno as u64,
            timestamp: 0,
            subject_id: fields[0].to_string(),
            subject_type: vocab.intern_entity(fields[1]),
            action: vocab.intern_event(fields[4]),
            object_id: fields[2].to_string(),
            object_type: vocab.intern_entity(fields[3]),
            host: String::new(),
            user: String::new(),
            graph_id: fields[5].to_string(),
        });
    }
    Ok(ParsedEvents { events, skipped })
}

/// Raw shape of one canonical / generic JSON event line.
#[derive(Debug, Serialize, Deserialize)]
struct JsonEvent {
    #[serde(skip_serializing_if = "Option::is_none")]
    seq: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<i64>,
    subject_id: Option<String>,
    subject_type: Option<String>,
    action: Option<String>,
    object_id: Option<String>,
    object_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    host: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    user: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    graph_id: Option<String>,
}

/// Parse line-delimited JSON audit events.
///
/// Mandatory keys: `subject_id`, `subject_type`, `action`, `object_id`,
/// `object_type`. Optional: `timestamp` (default 0), `host`, `user`,
/// `graph_id` (default empty), `seq`. Events are emitted ordered by
/// (timestamp, line number); when `seq` is absent it is assigned from the
/// emission position, 1-based.
pub fn parse_jsonl(
    path: &Path,
    vocab: &mut Vocab,
    lenient: bool,
) -> Result<ParsedEvents, IngestError> {
    let lines = read_lines(path)?;
    let mut skipped = 0usize;
    // (timestamp, line number, parsed) so ordering is by arrival time with
    // the file order breaking ties.
    let mut staged: Vec<(i64, usize, JsonEvent)> = Vec::new();
    for (idx, line) in lines.iter().enumerate() {
        let lineno = idx + 1;
        if skippable(line) {
            continue;
        }
        let raw: JsonEvent = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                if lenient {
                    skipped += 1;
                    continue;
                }
                return Err(IngestError::Malformed {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: e.to_string(),
                });
            }
        };
        let missing: Option<&'static str> = if raw.subject_id.is_none() {
            Some("subject_id")
        } else if raw.subject_type.is_none() {
            Some("subject_type")
        } else if raw.action.is_none() {
            Some("action")
        } else if raw.object_id.is_none() {
            Some("object_id")
        } else if raw.object_type.is_none() {
            Some("object_type")
        } else {
            None
        };
        if let Some(key) = missing {
            if lenient {
                skipped += 1;
                continue;
            }
            return Err(IngestError::MissingKey {
                path: path.to_path_buf(),
                line: lineno,
                key,
            });
        }
        staged.push((raw.timestamp.unwrap_or(0), lineno, raw));
    }
    staged.sort_by_key(|(ts, line, _)| (*ts, *line));
    let mut events = Vec::with_capacity(staged.len());
    for (pos, (ts, _, raw)) in staged.into_iter().enumerate() {
        events.push(Event {
            seq: raw.seq.unwrap_or(pos as u64 + 1),
            timestamp: ts,
            subject_id: raw.subject_id.unwrap(),
            subject_type: vocab.intern_entity(&raw.subject_type.unwrap()),
            action: vocab.intern_event(&raw.action.unwrap()),
            object_id: raw.object_id.unwrap(),
            object_type: vocab.intern_entity(&raw.object_type.unwrap()),
            host: raw.host.unwrap_or_default(),
            user: raw.user.unwrap_or_default(),
            graph_id: raw.graph_id.unwrap_or_default(),
        });
    }
    Ok(ParsedEvents { events, skipped })
}

/// Serialize events to the canonical line-delimited JSON format with every
/// field explicit. `header` is written first as a `#` comment when present.
pub fn write_events_jsonl(
    path: &Path,
    events: &[Event],
    vocab: &Vocab,
    header: Option<&str>,
) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = |text: String| -> Result<(), IngestError> {
        writeln!(w, "{}", text).map_err(|e| io_err(path, e))
    };
    if let Some(h) = header {
        emit(format!("# {}", h))?;
    }
    for e in events {
        let raw = JsonEvent {
            seq: Some(e.seq),
            timestamp: Some(e.timestamp),
            subject_id: Some(e.subject_id.clone()),
            subject_type: Some(vocab.entity_name(e.subject_type).to_string()),
            action: Some(vocab.event_name(e.action).to_string()),
            object_id: Some(e.object_id.clone()),
            object_type: Some(vocab.entity_name(e.object_type).to_string()),
            host: Some(e.host.clone()),
            user: Some(e.user.clone()),
            graph_id: Some(e.graph_id.clone()),
        };
        emit(serde_json::to_string(&raw).expect("event serializes"))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonSession {
    user: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    src_host: Option<String>,
    dst_host: Option<String>,
    event: Option<String>,
    timestamp: Option<i64>,
}

/// Parse line-delimited JSON session events into edges ordered by
/// timestamp. An empty `src_host` means a local (console) session.
pub fn parse_sessions(path: &Path, lenient: bool) -> Result<Vec<SessionEdge>, IngestError> {
    let lines = read_lines(path)?;
    let mut staged: Vec<(i64, usize, SessionEdge)> = Vec::new();
    for (idx, line) in lines.iter().enumerate() {
        let lineno = idx + 1;
        if skippable(line) {
            continue;
        }
        let raw: JsonSession = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                if lenient {
                    continue;
                }
                return Err(IngestError::Malformed {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: e.to_string(),
                });
            }
        };
        let missing: Option<&'static str> = if raw.user.is_none() {
            Some("user")
        } else if raw.dst_host.is_none() {
            Some("dst_host")
        } else if raw.event.is_none() {
            Some("event")
        } else if raw.timestamp.is_none() {
            Some("timestamp")
        } else {
            None
        };
        if let Some(key) = missing {
            if lenient {
                continue;
            }
            return Err(IngestError::MissingKey {
                path: path.to_path_buf(),
                line: lineno,
                key,
            });
        }
        let kind_name = raw.event.unwrap();
        let kind = match kind_name.as_str() {
            "LOGIN" => SessionEventKind::Login,
            "LOGOUT" => SessionEventKind::Logout,
            "RDP" => SessionEventKind::Rdp,
            _ => {
                if lenient {
                    continue;
                }
                return Err(IngestError::UnknownSessionEvent {
                    path: path.to_path_buf(),
                    line: lineno,
                    kind: kind_name,
                });
            }
        };
        let ts = raw.timestamp.unwrap();
        staged.push((
            ts,
            lineno,
            SessionEdge {
                user: raw.user.unwrap(),
                src_host: raw.src_host.unwrap_or_default(),
                dst_host: raw.dst_host.unwrap(),
                kind,
                timestamp: ts,
            },
        ));
    }
    staged.sort_by_key(|(ts, line, _)| (*ts, *line));
    Ok(staged.into_iter().map(|(_, _, e)| e).collect())
}
