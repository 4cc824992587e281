//! In-memory register store.
//!
//! Readers take an `Arc` snapshot and never block on writers for longer
//! than a pointer swap. Writers are serialized through one mutex; each
//! successful mutation builds a complete, scored snapshot and bumps the
//! revision, so no reader ever observes a half-applied change.

use std::sync::{Arc, Mutex, RwLock};

use riskreg::{score_register, Appetite, BandThresholds, Control, RiskEntry, RiskError, RiskRegister};

#[derive(Debug, Clone)]
pub struct StoreState {
    pub revision: u64,
    /// Always scored and in (risk desc, id asc) order.
    pub register: RiskRegister,
    pub appetite: Appetite,
    pub bands: BandThresholds,
    pub catalog: Arc<Vec<Control>>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("revision conflict: expected {expected}, current is {current}")]
    Conflict { expected: u64, current: u64 },
    #[error("unknown entry id {0}")]
    NotFound(u32),
    #[error("entry id {0} already exists")]
    Duplicate(u32),
    #[error(transparent)]
    Domain(#[from] RiskError),
}

#[derive(Debug)]
pub struct RegisterStore {
    current: RwLock<Arc<StoreState>>,
    writer: Mutex<()>,
}

impl RegisterStore {
    pub fn new(
        register: RiskRegister,
        appetite: Appetite,
        bands: BandThresholds,
        catalog: Vec<Control>,
    ) -> Result<Self, RiskError> {
        let mut register = score_register(register)?;
        register.appetite = appetite.value;
        let state = StoreState {
            revision: 1,
            register,
            appetite,
            bands,
            catalog: Arc::new(catalog),
        };
        Ok(RegisterStore {
            current: RwLock::new(Arc::new(state)),
            writer: Mutex::new(()),
        })
    }

    pub fn empty() -> Self {
        Self::new(
            RiskRegister::default(),
            Appetite::default(),
            BandThresholds::default(),
            Vec::new(),
        )
        .expect("empty register scores")
    }

    pub fn snapshot(&self) -> Arc<StoreState> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn revision(&self) -> u64 {
        self.snapshot().revision
    }

    fn mutate<F>(&self, expected: u64, change: F) -> Result<Arc<StoreState>, StoreError>
    where
        F: FnOnce(&StoreState) -> Result<StoreState, StoreError>,
    {
        let _writer = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let current = self.snapshot();
        if current.revision != expected {
            return Err(StoreError::Conflict {
                expected,
                current: current.revision,
            });
        }
        let mut next = change(&current)?;
        next.revision = current.revision + 1;
        next.register.appetite = next.appetite.value;
        next.register = score_register(next.register)?;
        let next = Arc::new(next);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = next.clone();
        Ok(next)
    }

    /// Inserts or replaces the entry with `entry.id`.
    pub fn upsert(&self, expected: u64, entry: RiskEntry) -> Result<Arc<StoreState>, StoreError> {
        entry.recomputed_risk()?;
        self.mutate(expected, |state| {
            let mut next = state.clone();
            match next.register.entries.iter_mut().find(|e| e.id == entry.id) {
                Some(slot) => *slot = entry,
                None => next.register.entries.push(entry),
            }
            Ok(next)
        })
    }

    /// Adds a new entry; fails if the id is taken.
    pub fn insert(&self, expected: u64, entry: RiskEntry) -> Result<Arc<StoreState>, StoreError> {
        entry.recomputed_risk()?;
        self.mutate(expected, |state| {
            if state.register.get(entry.id).is_some() {
                return Err(StoreError::Duplicate(entry.id));
            }
            let mut next = state.clone();
            next.register.entries.push(entry);
            Ok(next)
        })
    }

    pub fn delete(&self, expected: u64, id: u32) -> Result<Arc<StoreState>, StoreError> {
        self.mutate(expected, |state| {
            let mut next = state.clone();
            let before = next.register.len();
            next.register.entries.retain(|e| e.id != id);
            if next.register.len() == before {
                return Err(StoreError::NotFound(id));
            }
            Ok(next)
        })
    }

    pub fn set_appetite(&self, expected: u64, appetite: Appetite) -> Result<Arc<StoreState>, StoreError> {
        self.mutate(expected, |state| {
            let mut next = state.clone();
            next.appetite = appetite;
            Ok(next)
        })
    }
}
