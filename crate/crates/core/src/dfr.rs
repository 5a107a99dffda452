//! The native directly-follows operator, plus the brute-force oracle used
//! as ground truth in tests.
//!
//! The operator sorts each trace, then walks adjacent timestamp blocks and
//! counts every (antecedent, consequent) event combination between them.
//! Events sharing a timestamp never pair with each other.

use crate::event_model::{merge_dfr_into, Dfr, EventLog, Trace};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Orders events by (timestamp, event_id). Stable and idempotent; the
/// tie-break keeps runs reproducible but the operator's output does not
/// depend on it.
pub fn sort_trace(trace: &Trace) -> Trace {
    let mut sorted = trace.clone();
    sorted
        .events
        .sort_by_key(|e| (e.timestamp, e.event_id));
    sorted
}

/// Per-trace directly-follows counts. Accepts unsorted input.
pub fn directly_follows_trace(trace: &Trace) -> Dfr {
    let sorted = sort_trace(trace);
    let events = &sorted.events;
    let n = events.len();
    let mut dfr = Dfr::new();
    if n < 2 {
        return dfr;
    }

    // Antecedent block [sa, ea] and consequent block [sc, ec]: maximal runs
    // of equal timestamps; every cross pair between adjacent blocks counts.
    let mut sa = 0usize;
    let mut ea = 0usize;
    let a_time = events[sa].timestamp;
    while ea + 1 < n && a_time == events[ea + 1].timestamp {
        ea += 1;
    }
    let mut sc = ea + 1;
    let mut ec = sc;
    while ec < n {
        let c_time = events[sc].timestamp;
        while ec + 1 < n && c_time == events[ec + 1].timestamp {
            ec += 1;
        }
        for i in sa..=ea {
            for j in sc..=ec {
                dfr.add(&events[i].activity, &events[j].activity, 1);
            }
        }
        sa = sc;
        ea = ec;
        sc = ea + 1;
        ec = sc;
    }
    dfr
}

/// Directly-follows relation of the whole log: the per-trace results summed
/// over all cases. With the `parallel` feature traces are processed on a
/// rayon pool; output is identical to sequential execution.
#[cfg(feature = "parallel")]
pub fn directly_follows(log: &EventLog) -> Dfr {
    log.traces()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|t| directly_follows_trace(t))
        .reduce(Dfr::new, merge_dfr_into)
}

#[cfg(not(feature = "parallel"))]
pub fn directly_follows(log: &EventLog) -> Dfr {
    directly_follows_sequential(log)
}

/// Single-threaded reference path, always available.
pub fn directly_follows_sequential(log: &EventLog) -> Dfr {
    log.traces()
        .map(directly_follows_trace)
        .fold(Dfr::new(), merge_dfr_into)
}

/// Literal triple-quantified oracle: for each ordered event pair (x, y) with
/// time(x) < time(y) and no event of the trace strictly between their
/// timestamps, count (act(x), act(y)). O(n^3) per trace; test oracle only,
/// never the production path.
pub fn brute_force_dfr(log: &EventLog) -> Dfr {
    let mut dfr = Dfr::new();
    for trace in log.traces() {
        let events = &trace.events;
        for x in events {
            for y in events {
                if x.timestamp >= y.timestamp {
                    continue;
                }
                let blocked = events
                    .iter()
                    .any(|z| x.timestamp < z.timestamp && z.timestamp < y.timestamp);
                if !blocked {
                    dfr.add(&x.activity, &y.activity, 1);
                }
            }
        }
    }
    dfr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::Event;
    use crate::testutil::{ev, table1a, table1b_rows as table1b};

    fn trace(case: &str, events: Vec<Event>) -> Trace {
        Trace {
            case_id: case.to_string(),
            events,
        }
    }

    #[test]
    fn sort_trace_is_idempotent_and_breaks_ties_by_id() {
        let t = trace(
            "c",
            vec![ev(2, "c", "B", 5), ev(1, "c", "A", 5), ev(0, "c", "C", 1)],
        );
        let s = sort_trace(&t);
        let ids: Vec<u64> = s.events.iter().map(|e| e.event_id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        assert_eq!(sort_trace(&s), s);
    }

    #[test]
    fn single_event_trace_is_empty() {
        let t = trace("c", vec![ev(0, "c", "A", 1)]);
        assert!(directly_follows_trace(&t).is_empty());
    }

    #[test]
    fn all_same_timestamp_is_empty() {
        let t = trace(
            "c",
            vec![ev(0, "c", "A", 1), ev(1, "c", "B", 1), ev(2, "c", "C", 1)],
        );
        assert!(directly_follows_trace(&t).is_empty());
    }

    #[test]
    fn table1a_case1_pairs() {
        let log = table1a();
        let d = directly_follows_trace(log.trace("1").unwrap());
        assert_eq!(d.get("Send request", "Check application"), 1);
        assert_eq!(d.get("Send request", "Check document"), 1);
        assert_eq!(d.get("Check application", "Accept"), 1);
        assert_eq!(d.get("Check document", "Accept"), 1);
        // tied events never pair with each other
        assert_eq!(d.get("Check application", "Check document"), 0);
        assert_eq!(d.get("Check document", "Check application"), 0);
        assert_eq!(d.total_mass(), 4);
    }

    #[test]
    fn table1a_log_equals_table1b() {
        let rows = crate::event_model::dfr_to_rows(&directly_follows(&table1a()));
        assert_eq!(rows, table1b());
    }

    #[test]
    fn oracle_on_table1a_equals_table1b() {
        let rows = crate::event_model::dfr_to_rows(&brute_force_dfr(&table1a()));
        assert_eq!(rows, table1b());
    }

    #[test]
    fn oracle_chain() {
        let mut log = EventLog::new();
        for (i, act) in ["A", "B", "C"].iter().enumerate() {
            log.push_event(ev(i as u64, "c", act, i as i64));
        }
        let d = brute_force_dfr(&log);
        assert_eq!(d.get("A", "B"), 1);
        assert_eq!(d.get("B", "C"), 1);
        assert_eq!(d.total_mass(), 2);
    }

    #[test]
    fn oracle_skips_tied_pairs() {
        let mut log = EventLog::new();
        log.push_event(ev(0, "c", "A", 1));
        log.push_event(ev(1, "c", "B", 1));
        log.push_event(ev(2, "c", "C", 2));
        let d = brute_force_dfr(&log);
        assert_eq!(d.get("A", "C"), 1);
        assert_eq!(d.get("B", "C"), 1);
        assert_eq!(d.get("A", "B"), 0);
        assert_eq!(d.total_mass(), 2);
    }

    #[test]
    fn empty_log_is_empty() {
        assert!(directly_follows(&EventLog::new()).is_empty());
    }

    #[test]
    fn repeated_labels_in_adjacent_blocks_count_combinations() {
        // two "A"s at t=1, one "B" at t=2 -> (A,B):2
        let t = trace(
            "c",
            vec![ev(0, "c", "A", 1), ev(1, "c", "A", 1), ev(2, "c", "B", 2)],
        );
        let d = directly_follows_trace(&t);
        assert_eq!(d.get("A", "B"), 2);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let log = table1a();
        assert_eq!(directly_follows(&log), directly_follows_sequential(&log));
    }
}
