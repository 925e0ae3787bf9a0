//! Bounded per-node local store with deterministic eviction and per-peer
//! sync state, the holding area for store-and-forward delivery.
//!
//! Entries are evicted least-recently-accessed first, ties broken by oldest
//! creation time, then smallest entry id. The sum of stored payload sizes
//! never exceeds the configured capacity. Entry ids are assigned in
//! insertion order and double as the store-and-forward sequence numbers
//! tracked by [`SyncState`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::SimTime;

pub const DEFAULT_CAPACITY_BYTES: u64 = 1024 * 1024;

/// Store entry identifier; assigned sequentially starting at 1, never reused.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct EntryId(pub u64);

impl std::fmt::Display for EntryId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("entry of {size} bytes exceeds store capacity {capacity}")]
    EntryTooLarge { size: u64, capacity: u64 },
    #[error("entry {0} not found")]
    NotFound(EntryId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreEntry {
    pub entry_id: EntryId,
    pub payload: Vec<u8>,
    pub created_at: SimTime,
    pub last_access: SimTime,
    /// Originating node or prosumer id.
    pub origin: u64,
}

impl StoreEntry {
    pub fn size(&self) -> u64 {
        self.payload.len() as u64
    }
}

/// Per-peer highest contiguous acknowledged sequence. Never decreases.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncState {
    acked: BTreeMap<u64, u64>,
}

impl SyncState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn acked(&self, peer: u64) -> u64 {
        self.acked.get(&peer).copied().unwrap_or(0)
    }

    /// Advances the acknowledged sequence for `peer`; lower values are ignored.
    pub fn ack(&mut self, peer: u64, seq: u64) {
        let entry = self.acked.entry(peer).or_insert(0);
        if seq > *entry {
            *entry = seq;
        }
    }
}

/// Capacity-bounded store with LRU eviction.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: u64,
    entries: BTreeMap<EntryId, StoreEntry>,
    total: u64,
    next_id: u64,
    evictions: u64,
    /// Optional time-to-live; entries older than this are dropped on `put`.
    /// Defaults to none (entries live until evicted by capacity).
    ttl_ms: Option<u64>,
}

impl ContentStore {
    pub fn new(capacity: u64) -> Self {
        ContentStore {
            capacity,
            entries: BTreeMap::new(),
            total: 0,
            next_id: 1,
            evictions: 0,
            ttl_ms: None,
        }
    }

    pub fn with_ttl(capacity: u64, ttl_ms: u64) -> Self {
        let mut s = Self::new(capacity);
        s.ttl_ms = Some(ttl_ms);
        s
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn total_bytes(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of entries evicted by capacity pressure so far.
    pub fn evictions(&self) -> u64 {
        self.evictions
    }

    pub fn contains(&self, id: EntryId) -> bool {
        self.entries.contains_key(&id)
    }

    /// Inserts a payload and returns the new entry id plus the ids evicted to
    /// make room, in eviction order.
    pub fn put(
        &mut self,
        payload: Vec<u8>,
        origin: u64,
        now: SimTime,
    ) -> Result<(EntryId, Vec<EntryId>), StoreError> {
        let size = payload.len() as u64;
        if size > self.capacity {
            return Err(StoreError::EntryTooLarge {
                size,
                capacity: self.capacity,
            });
        }
        if let Some(ttl) = self.ttl_ms {
            let expired: Vec<EntryId> = self
                .entries
                .values()
                .filter(|e| now.since(e.created_at) > ttl)
                .map(|e| e.entry_id)
                .collect();
            for id in expired {
                self.remove(id);
            }
        }
        let id = EntryId(self.next_id);
        self.next_id += 1;
        self.entries.insert(
            id,
            StoreEntry {
                entry_id: id,
                payload,
                created_at: now,
                last_access: now,
                origin,
            },
        );
        self.total += size;
        let mut evicted = Vec::new();
        while self.total > self.capacity {
            let victim = self
                .entries
                .values()
                .map(|e| (e.last_access, e.created_at, e.entry_id))
                .min()
                .expect("store over capacity implies it is non-empty")
                .2;
            self.remove(victim);
            self.evictions += 1;
            evicted.push(victim);
        }
        Ok((id, evicted))
    }

    /// Returns the payload and marks the entry as most recently accessed.
    pub fn get(&mut self, id: EntryId, now: SimTime) -> Result<&[u8], StoreError> {
        let entry = self.entries.get_mut(&id).ok_or(StoreError::NotFound(id))?;
        entry.last_access = now;
        Ok(&entry.payload)
    }

    /// Reads the payload without touching recency.
    pub fn peek(&self, id: EntryId) -> Result<&StoreEntry, StoreError> {
        self.entries.get(&id).ok_or(StoreError::NotFound(id))
    }

    pub fn remove(&mut self, id: EntryId) -> Option<StoreEntry> {
        let entry = self.entries.remove(&id)?;
        self.total -= entry.size();
        Some(entry)
    }

    /// Entries not yet acknowledged by `peer`, ordered by sequence ascending.
    pub fn pending_for(&self, peer: u64, sync: &SyncState) -> Vec<&StoreEntry> {
        let acked = sync.acked(peer);
        self.entries
            .range(EntryId(acked + 1)..)
            .map(|(_, e)| e)
            .collect()
    }

    /// All entries in sequence order, for debugging dumps.
    pub fn entries(&self) -> impl Iterator<Item = &StoreEntry> {
        self.entries.values()
    }
}
