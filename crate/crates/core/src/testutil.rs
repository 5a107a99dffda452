//! Shared fixtures for unit tests.

use crate::event_model::{Event, EventLog};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn ev(id: u64, case: &str, act: &str, ts: i64) -> Event {
    Event {
        event_id: id,
        case_id: case.to_string(),
        activity: act.to_string(),
        timestamp: ts,
    }
}

pub const DAY_MICROS: i64 = 86_400_000_000;

/// Midnight UTC of 2017-10-`d`, epoch microseconds.
pub fn oct2017(d: i64) -> i64 {
    // 2017-10-01T00:00:00Z
    1_506_816_000_000_000 + (d - 1) * DAY_MICROS
}

/// The running example: two cases, seven events, one timestamp tie.
pub fn table1a() -> EventLog {
    let mut log = EventLog::new();
    for (id, case, act, d) in [
        (0u64, "1", "Send request", 1),
        (1, "1", "Check application", 2),
        (2, "1", "Check document", 2),
        (3, "1", "Accept", 5),
        (4, "2", "Send request", 3),
        (5, "2", "Check application", 7),
        (6, "2", "Reject", 10),
    ] {
        log.push_event(ev(id, case, act, oct2017(d)));
    }
    log
}

pub fn table1b_rows() -> Vec<(String, String, u64)> {
    [
        ("Check application", "Accept", 1u64),
        ("Check application", "Reject", 1),
        ("Check document", "Accept", 1),
        ("Send request", "Check application", 2),
        ("Send request", "Check document", 1),
    ]
    .iter()
    .map(|(a, b, n)| (a.to_string(), b.to_string(), *n))
    .collect()
}

/// Small random log with frequent timestamp collisions.
pub fn random_log(seed: u64, max_activities: usize, max_events: usize) -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = EventLog::new();
    let n_events = rng.gen_range(0..=max_events);
    let n_cases = rng.gen_range(1..=4);
    let mut ts_by_case = vec![0i64; n_cases];
    for id in 0..n_events as u64 {
        let c = rng.gen_range(0..n_cases);
        // ~30-40% chance of repeating the case's current timestamp
        if !rng.gen_bool(0.35) || ts_by_case[c] == 0 {
            ts_by_case[c] += rng.gen_range(1..5);
        }
        let act = format!("a{}", rng.gen_range(0..max_activities));
        log.push_event(ev(id, &format!("c{c}"), &act, ts_by_case[c]));
    }
    log
}
