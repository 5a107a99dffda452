//! Core domain types: events, traces, logs, and the directly-follows relation.

use std::collections::{BTreeMap, BTreeSet};

/// A single recorded event. Timestamps are integer epoch microseconds;
/// equality of timestamps is exact integer equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// Engine-assigned, unique within a store, monotonically increasing.
    pub event_id: u64,
    pub case_id: String,
    pub activity: String,
    /// Epoch microseconds.
    pub timestamp: i64,
}

/// All events of one case. Events may carry tied timestamps; `sort_trace`
/// orders by (timestamp, event_id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn new(case_id: impl Into<String>) -> Self {
        Trace {
            case_id: case_id.into(),
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// A collection of traces keyed by case id, with an optional collection
/// window `[t_start, t_end]` (inclusive, epoch microseconds).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    traces: BTreeMap<String, Trace>,
    pub window: Option<(i64, i64)>,
}

impl EventLog {
    pub fn new() -> Self {
        EventLog::default()
    }

    /// Appends an event to its case's trace, creating the trace on first use.
    pub fn push_event(&mut self, event: Event) {
        self.traces
            .entry(event.case_id.clone())
            .or_insert_with(|| Trace::new(event.case_id.clone()))
            .events
            .push(event);
    }

    pub fn insert_trace(&mut self, trace: Trace) {
        self.traces.insert(trace.case_id.clone(), trace);
    }

    pub fn traces(&self) -> impl Iterator<Item = &Trace> {
        self.traces.values()
    }

    pub fn trace(&self, case_id: &str) -> Option<&Trace> {
        self.traces.get(case_id)
    }

    pub fn case_count(&self) -> usize {
        self.traces.len()
    }

    pub fn event_count(&self) -> usize {
        self.traces.values().map(|t| t.events.len()).sum()
    }

    /// All distinct activity labels occurring in the log.
    pub fn activities(&self) -> BTreeSet<String> {
        self.traces
            .values()
            .flat_map(|t| t.events.iter().map(|e| e.activity.clone()))
            .collect()
    }

    /// Min and max timestamp over all events, if any.
    pub fn time_span(&self) -> Option<(i64, i64)> {
        let mut span: Option<(i64, i64)> = None;
        for t in self.traces.values() {
            for e in &t.events {
                span = Some(match span {
                    None => (e.timestamp, e.timestamp),
                    Some((lo, hi)) => (lo.min(e.timestamp), hi.max(e.timestamp)),
                });
            }
        }
        span
    }

    /// Events of every trace as (case, activity, timestamp) rows, trace by
    /// trace in case-id order, file order within a trace.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &str, i64)> {
        self.traces.values().flat_map(|t| {
            t.events
                .iter()
                .map(|e| (e.case_id.as_str(), e.activity.as_str(), e.timestamp))
        })
    }
}

/// The directly-follows relation: (antecedent, consequent) -> frequency.
/// Only non-zero entries are stored; all stored frequencies are positive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dfr {
    counts: BTreeMap<(String, String), u64>,
}

/// Signed per-pair change produced by incremental maintenance.
pub type DfrDelta = BTreeMap<(String, String), i64>;

impl Dfr {
    pub fn new() -> Self {
        Dfr::default()
    }

    pub fn add(&mut self, antecedent: &str, consequent: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self
            .counts
            .entry((antecedent.to_string(), consequent.to_string()))
            .or_insert(0) += n;
    }

    pub fn get(&self, antecedent: &str, consequent: &str) -> u64 {
        self.counts
            .get(&(antecedent.to_string(), consequent.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of stored (non-zero) pairs.
    pub fn pair_count(&self) -> usize {
        self.counts.len()
    }

    /// Sum of all frequencies.
    pub fn total_mass(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &u64)> {
        self.counts.iter()
    }

    /// Applies a signed delta in place. Entries that reach zero are removed.
    ///
    /// Panics if a frequency would go negative; deltas come from the
    /// maintainer and never underflow on consistent state.
    pub fn apply_delta(&mut self, delta: &DfrDelta) {
        for ((a, b), d) in delta {
            let cur = self.get(a, b) as i64;
            let next = cur + d;
            assert!(next >= 0, "delta drives ({a}, {b}) below zero");
            let key = (a.clone(), b.clone());
            if next == 0 {
                self.counts.remove(&key);
            } else {
                self.counts.insert(key, next as u64);
            }
        }
    }
}

/// Pointwise sum of two relations. DFRs of logs with disjoint case sets add.
pub fn merge_dfr(a: &Dfr, b: &Dfr) -> Dfr {
    let mut out = a.clone();
    for ((p, s), n) in &b.counts {
        *out.counts.entry((p.clone(), s.clone())).or_insert(0) += n;
    }
    out
}

/// Consuming variant used as a fold combiner.
pub fn merge_dfr_into(mut acc: Dfr, other: Dfr) -> Dfr {
    for ((p, s), n) in other.counts {
        *acc.counts.entry((p, s)).or_insert(0) += n;
    }
    acc
}

/// Rows sorted lexicographically by (antecedent, consequent), one row per
/// non-zero pair.
pub fn dfr_to_rows(d: &Dfr) -> Vec<(String, String, u64)> {
    d.counts
        .iter()
        .map(|((p, s), n)| (p.clone(), s.clone(), *n))
        .collect()
}
