//! Embedded event-log query engine with a native directly-follows operator.
//!
//! The engine loads event data (case, activity, timestamp) from CSV, computes
//! the directly-follows relation with a block-based single-pass operator, and
//! exposes baselines, incremental maintenance, a small SQL frontend, DFG
//! export, and a benchmark harness around it.

pub mod baselines;
pub mod bench;
pub mod dfg;
pub mod dfr;
pub mod event_model;
pub mod ingestion;
pub mod incremental;
pub mod query;
#[doc(hidden)]
pub mod testutil;

pub use event_model::{Dfr, Event, EventLog, Trace};
