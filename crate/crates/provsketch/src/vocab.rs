//! Interning of entity-type and event-type names.
//!
//! Histograms, labels, and sketches all key on small integer ids instead of
//! strings. Ids are assigned in order of first appearance, so parsing the
//! same input twice yields the same mapping, and a persisted vocabulary
//! file carries the mapping across featurize/train/detect runs.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::hash::Fnv1a;

/// Interned entity-type id (PROCESS, FILE, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityTypeId(pub u32);

/// Interned event-type id (READ, WRITE, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventTypeId(pub u32);

/// Reserved event type used for version links between node generations.
/// Registered at id 0 under a name that cannot collide with audit data.
pub const VERSION_EVENT: EventTypeId = EventTypeId(0);

const VERSION_EVENT_NAME: &str = "__VERSION__";

/// Two injective name-to-id tables, one per label space. The spaces are
/// independent: an entity id and an event id may share a numeric value.
#[derive(Debug, Clone)]
pub struct Vocab {
    entity_names: Vec<String>,
    entity_ids: HashMap<String, EntityTypeId>,
    event_names: Vec<String>,
    event_ids: HashMap<String, EventTypeId>,
}

impl Vocab {
    pub fn new() -> Self {
        let mut v = Vocab {
            entity_names: Vec::new(),
            entity_ids: HashMap::new(),
            event_names: Vec::new(),
            event_ids: HashMap::new(),
        };
        let id = v.intern_event(VERSION_EVENT_NAME);
        debug_assert_eq!(id, VERSION_EVENT);
        v
    }

    pub fn intern_entity(&mut self, name: &str) -> EntityTypeId {
        if let Some(&id) = self.entity_ids.get(name) {
            return id;
        }
        let id = EntityTypeId(self.entity_names.len() as u32);
        self.entity_names.push(name.to_string());
        self.entity_ids.insert(name.to_string(), id);
        id
    }

    pub fn intern_event(&mut self, name: &str) -> EventTypeId {
        if let Some(&id) = self.event_ids.get(name) {
            return id;
        }
        let id = EventTypeId(self.event_names.len() as u32);
        self.event_names.push(name.to_string());
        self.event_ids.insert(name.to_string(), id);
        id
    }

    pub fn entity_name(&self, id: EntityTypeId) -> &str {
        &self.entity_names[id.0 as usize]
    }

    pub fn event_name(&self, id: EventTypeId) -> &str {
        &self.event_names[id.0 as usize]
    }

    pub fn lookup_entity(&self, name: &str) -> Option<EntityTypeId> {
        self.entity_ids.get(name).copied()
    }

    pub fn lookup_event(&self, name: &str) -> Option<EventTypeId> {
        self.event_ids.get(name).copied()
    }

    pub fn entity_count(&self) -> usize {
        self.entity_names.len()
    }

    pub fn event_count(&self) -> usize {
        self.event_names.len()
    }

    /// Stable digest of the full mapping; stamped into sketches and models
    /// so that artifacts produced under different vocabularies refuse to mix.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        for n in &self.entity_names {
            h.write(n.as_bytes());
            h.write(&[0xff]);
        }
        h.write(&[0xfe]);
        for n in &self.event_names {
            h.write(n.as_bytes());
            h.write(&[0xff]);
        }
        h.finish()
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        self.save_with_config(path, 0)
    }

    /// Like `save`, embedding the producing pipeline's config hash.
    pub fn save_with_config(&self, path: &Path, config: u64) -> io::Result<()> {
        let file = VocabFile {
            config,
            entities: self.entity_names.clone(),
            events: self.event_names.clone(),
        };
        let text = serde_json::to_string_pretty(&file).expect("vocab serializes");
        fs::write(path, text)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: VocabFile = serde_json::from_str(&text)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        if file.events.first().map(String::as_str) != Some(VERSION_EVENT_NAME) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "vocabulary file missing reserved version event at id 0",
            ));
        }
        let mut v = Vocab::new();
        for n in &file.entities {
            v.intern_entity(n);
        }
        for n in &file.events {
            v.intern_event(n);
        }
        if v.entity_names != file.entities || v.event_names != file.events {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "vocabulary file contains duplicate names",
            ));
        }
        Ok(v)
    }
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    /// Pipeline config hash when written by a pipeline run; 0 otherwise.
    #[serde(default)]
    config: u64,
    entities: Vec<String>,
    events: Vec<String>,
}
