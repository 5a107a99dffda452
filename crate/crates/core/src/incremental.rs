//! Trigger-style maintenance: the DFR stays correct as events arrive one at
//! a time, including out-of-order arrivals.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::Bound::{Excluded, Unbounded};

use thiserror::Error;

use crate::event_model::{Dfr, DfrDelta, Event};

#[derive(Debug, Error)]
pub enum IncrementalError {
    #[error("event id {0} already inserted")]
    DuplicateEventId(u64),
}

/// Per-case event sequences keyed by (timestamp, event_id) plus the
/// continuously maintained relation. `current` equals the batch DFR over
/// all inserted events at every point in time.
#[derive(Debug, Default)]
pub struct DfrMaintainer {
    cases: HashMap<String, BTreeMap<(i64, u64), String>>,
    seen_ids: HashSet<u64>,
    current: Dfr,
    event_count: u64,
}

impl DfrMaintainer {
    pub fn new() -> Self {
        DfrMaintainer::default()
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    /// Copy of the maintained relation; later inserts do not affect it.
    pub fn snapshot(&self) -> Dfr {
        self.current.clone()
    }

    /// Inserts one event and returns the signed per-pair change.
    ///
    /// The event joins (or creates) the timestamp block at its position in
    /// its case. Pairs that spanned the old adjacency between neighbor
    /// blocks are subtracted, pairs for the new adjacencies added.
    pub fn insert_event(&mut self, event: &Event) -> Result<DfrDelta, IncrementalError> {
        if self.seen_ids.contains(&event.event_id) {
            return Err(IncrementalError::DuplicateEventId(event.event_id));
        }
        let case = self.cases.entry(event.case_id.clone()).or_default();
        let t = event.timestamp;

        let block_at = |case: &BTreeMap<(i64, u64), String>, ts: i64| -> Vec<String> {
            case.range((ts, 0)..=(ts, u64::MAX))
                .map(|(_, a)| a.clone())
                .collect()
        };

        // own block (may be empty), then its neighbor blocks
        let own = block_at(case, t);
        let pred = case
            .range((Unbounded, Excluded((t, 0u64))))
            .next_back()
            .map(|((ts, _), _)| *ts)
            .map(|ts| block_at(case, ts))
            .unwrap_or_default();
        let succ = case
            .range((Excluded((t, u64::MAX)), Unbounded))
            .next()
            .map(|((ts, _), _)| *ts)
            .map(|ts| block_at(case, ts))
            .unwrap_or_default();

        let mut delta = DfrDelta::new();
        let mut bump = |a: &str, b: &str, d: i64| {
            *delta.entry((a.to_string(), b.to_string())).or_insert(0) += d;
        };
        if own.is_empty() {
            // new block splits the old pred-succ adjacency
            for p in &pred {
                for s in &succ {
                    bump(p, s, -1);
                }
            }
        }
        for p in &pred {
            bump(p, &event.activity, 1);
        }
        for s in &succ {
            bump(&event.activity, s, 1);
        }
        delta.retain(|_, d| *d != 0);

        self.current.apply_delta(&delta);
        case.insert((t, event.event_id), event.activity.clone());
        self.seen_ids.insert(event.event_id);
        self.event_count += 1;
        Ok(delta)
    }
}
