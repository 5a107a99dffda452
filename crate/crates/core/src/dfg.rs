//! Directly-follows graph: the DFR as a weighted graph plus start/end
//! activity frequencies, with DOT and JSON serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dfr::{directly_follows, sort_trace};
use crate::event_model::{dfr_to_rows, Dfr, EventLog};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dfg {
    pub activities: std::collections::BTreeSet<String>,
    pub edges: Dfr,
    pub start_counts: BTreeMap<String, u64>,
    pub end_counts: BTreeMap<String, u64>,
}

/// Builds the graph: edges from the directly-follows relation, start and end
/// counts from each trace's first and last timestamp block, activities from
/// every label in the log (including isolated ones).
pub fn build_dfg(log: &EventLog) -> Dfg {
    let mut dfg = Dfg {
        activities: log.activities(),
        edges: directly_follows(log),
        ..Dfg::default()
    };
    for trace in log.traces() {
        let sorted = sort_trace(trace);
        let events = &sorted.events;
        if events.is_empty() {
            continue;
        }
        let first_ts = events[0].timestamp;
        for e in events.iter().take_while(|e| e.timestamp == first_ts) {
            *dfg.start_counts.entry(e.activity.clone()).or_insert(0) += 1;
        }
        let last_ts = events[events.len() - 1].timestamp;
        for e in events.iter().rev().take_while(|e| e.timestamp == last_ts) {
            *dfg.end_counts.entry(e.activity.clone()).or_insert(0) += 1;
        }
    }
    dfg
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT digraph: one node per activity, one labeled edge per DFR pair, and
/// synthetic source/sink nodes wired per start/end counts. Output is sorted
/// and deterministic.
pub fn to_dot(dfg: &Dfg) -> String {
    let mut out = String::from("digraph dfg {\n");
    out.push_str("  __source [shape=circle, label=\"\"];\n");
    out.push_str("  __sink [shape=doublecircle, label=\"\"];\n");
    for (i, activity) in dfg.activities.iter().enumerate() {
        writeln!(
            out,
            "  n{i} [shape=box, label=\"{}\"];",
            dot_escape(activity)
        )
        .unwrap();
    }
    let ids: BTreeMap<&str, usize> = dfg
        .activities
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    for (activity, count) in &dfg.start_counts {
        writeln!(out, "  __source -> n{} [label=\"{count}\"];", ids[activity.as_str()]).unwrap();
    }
    for ((from, to), freq) in dfg.edges.iter() {
        writeln!(
            out,
            "  n{} -> n{} [label=\"{freq}\"];",
            ids[from.as_str()],
            ids[to.as_str()]
        )
        .unwrap();
    }
    for (activity, count) in &dfg.end_counts {
        writeln!(out, "  n{} -> __sink [label=\"{count}\"];", ids[activity.as_str()]).unwrap();
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct JsonEdge {
    from: String,
    to: String,
    freq: u64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct JsonDfg {
    activities: Vec<String>,
    edges: Vec<JsonEdge>,
    starts: BTreeMap<String, u64>,
    ends: BTreeMap<String, u64>,
}

/// Canonical JSON form: keys and arrays sorted, so equal graphs serialize
/// byte-identically.
pub fn to_json(dfg: &Dfg) -> String {
    let doc = JsonDfg {
        activities: dfg.activities.iter().cloned().collect(),
        edges: dfr_to_rows(&dfg.edges)
            .into_iter()
            .map(|(from, to, freq)| JsonEdge { from, to, freq })
            .collect(),
        starts: dfg.start_counts.clone(),
        ends: dfg.end_counts.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("dfg serialization cannot fail")
}

/// Reads the canonical JSON form back.
pub fn from_json(text: &str) -> Result<Dfg, serde_json::Error> {
    let doc: JsonDfg = serde_json::from_str(text)?;
    let mut edges = Dfr::new();
    for e in &doc.edges {
        edges.add(&e.from, &e.to, e.freq);
    }
    Ok(Dfg {
        activities: doc.activities.into_iter().collect(),
        edges,
        start_counts: doc.starts,
        end_counts: doc.ends,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{ev, random_log, table1a};

    /// Minimal DOT well-formedness check used by tests: header, balanced
    /// braces, and every statement line ending in `;`.
    pub fn dot_is_well_formed(text: &str) -> bool {
        let text = text.trim();
        if !text.starts_with("digraph") || !text.ends_with('}') {
            return false;
        }
        let open = text.matches('{').count();
        let close = text.matches('}').count();
        if open != close {
            return false;
        }
        text.lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty() && !l.trim().ends_with('}'))
            .all(|l| l.trim().ends_with(';'))
    }

    #[test]
    fn table1a_dfg() {
        let dfg = build_dfg(&table1a());
        assert_eq!(dfg.edges.pair_count(), 5);
        assert_eq!(dfg.start_counts.len(), 1);
        assert_eq!(dfg.start_counts["Send request"], 2);
        assert_eq!(dfg.end_counts["Accept"], 1);
        assert_eq!(dfg.end_counts["Reject"], 1);
        assert_eq!(dfg.activities.len(), 5);
    }

    #[test]
    fn empty_log_empty_dfg() {
        let dfg = build_dfg(&EventLog::new());
        assert!(dfg.edges.is_empty());
        assert!(dfg.activities.is_empty());
        assert!(dot_is_well_formed(&to_dot(&dfg)));
    }

    #[test]
    fn single_block_trace_has_no_edges_but_boundary_counts() {
        let mut log = EventLog::new();
        log.push_event(ev(0, "c", "A", 1));
        log.push_event(ev(1, "c", "B", 1));
        let dfg = build_dfg(&log);
        assert!(dfg.edges.is_empty());
        assert_eq!(dfg.start_counts["A"], 1);
        assert_eq!(dfg.start_counts["B"], 1);
        assert_eq!(dfg.end_counts["A"], 1);
        assert_eq!(dfg.end_counts["B"], 1);
    }

    #[test]
    fn strictly_ordered_boundary_sums_equal_trace_count() {
        for seed in 0..10 {
            let log = crate::ingestion::synth_base_log(seed, 20, 5, 6);
            let dfg = build_dfg(&log);
            let traces = log.case_count() as u64;
            assert_eq!(dfg.start_counts.values().sum::<u64>(), traces);
            assert_eq!(dfg.end_counts.values().sum::<u64>(), traces);
        }
    }

    #[test]
    fn dot_output_is_well_formed_and_has_all_edges() {
        let dfg = build_dfg(&table1a());
        let dot = to_dot(&dfg);
        assert!(dot_is_well_formed(&dot));
        assert_eq!(dot.matches("-> n").count(), 5 + 1); // 5 edges + 1 start wire
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        for seed in 0..10 {
            let dfg = build_dfg(&random_log(seed, 5, 30));
            let json = to_json(&dfg);
            let back = from_json(&json).unwrap();
            assert_eq!(back, dfg);
            assert_eq!(to_json(&back), json);
        }
    }
}
