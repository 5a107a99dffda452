//! CSV loading, the collection-window filter, and synthetic log generation.

use std::fmt;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, TimeZone, Utc};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::event_model::{Event, EventLog, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeFormat {
    /// Integer epoch microseconds.
    EpochMicros,
    /// ISO-8601 in UTC; bare dates are taken as midnight.
    Iso8601Utc,
}

impl fmt::Display for TimeFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFormat::EpochMicros => write!(f, "epoch"),
            TimeFormat::Iso8601Utc => write!(f, "iso8601"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvConfig {
    pub case_column: String,
    pub activity_column: String,
    pub time_column: String,
    pub time_format: TimeFormat,
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvConfig {
    fn default() -> Self {
        CsvConfig {
            case_column: "case".to_string(),
            activity_column: "activity".to_string(),
            time_column: "time".to_string(),
            time_format: TimeFormat::EpochMicros,
            delimiter: b',',
            has_header: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("{0}")]
    Argument(String),
}

/// Parses a timestamp string per the configured format, into epoch micros.
pub fn parse_timestamp(text: &str, format: TimeFormat) -> Result<i64, String> {
    let text = text.trim();
    match format {
        TimeFormat::EpochMicros => text
            .parse::<i64>()
            .map_err(|_| format!("expected integer epoch microseconds, got {text:?}")),
        TimeFormat::Iso8601Utc => parse_iso8601_utc(text),
    }
}

fn parse_iso8601_utc(text: &str) -> Result<i64, String> {
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(text) {
        return Ok(dt.with_timezone(&Utc).timestamp_micros());
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S") {
        return Ok(Utc.from_utc_datetime(&dt).timestamp_micros());
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(text, "%Y-%m-%d %H:%M:%S") {
        return Ok(Utc.from_utc_datetime(&dt).timestamp_micros());
    }
    for fmt in ["%Y-%m-%d", "%Y/%m/%d"] {
        if let Ok(d) = NaiveDate::parse_from_str(text, fmt) {
            let dt = d.and_hms_opt(0, 0, 0).unwrap();
            return Ok(Utc.from_utc_datetime(&dt).timestamp_micros());
        }
    }
    Err(format!("unparseable ISO-8601 timestamp {text:?}"))
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

/// Loads an event log from CSV. One event per data row, event ids assigned
/// in file order; events grouped into traces by case id; no sorting.
pub fn read_csv(path: &Path, cfg: &CsvConfig) -> Result<EventLog, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter)
        .has_headers(cfg.has_header)
        .flexible(false)
        .from_reader(file);

    let (case_idx, act_idx, time_idx) = if cfg.has_header {
        let headers = reader.headers()?.clone();
        (
            column_index(&headers, &cfg.case_column)?,
            column_index(&headers, &cfg.activity_column)?,
            column_index(&headers, &cfg.time_column)?,
        )
    } else {
        // Without a header row the configured column names are 0-based indices.
        let idx = |name: &str| {
            name.parse::<usize>()
                .map_err(|_| IngestError::MissingColumn(name.to_string()))
        };
        (
            idx(&cfg.case_column)?,
            idx(&cfg.activity_column)?,
            idx(&cfg.time_column)?,
        )
    };

    let mut log = EventLog::new();
    for (event_id, result) in reader.records().enumerate() {
        let record = result?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(0);
        let field = |i: usize| {
            record.get(i).ok_or(IngestError::Row {
                line,
                message: format!("missing field at index {i}"),
            })
        };
        let case_id = field(case_idx)?.trim().to_string();
        let activity = field(act_idx)?.trim().to_string();
        if case_id.is_empty() {
            return Err(IngestError::Row {
                line,
                message: "empty case id".to_string(),
            });
        }
        if activity.is_empty() {
            return Err(IngestError::Row {
                line,
                message: "empty activity".to_string(),
            });
        }
        let timestamp = parse_timestamp(field(time_idx)?, cfg.time_format)
            .map_err(|message| IngestError::Row { line, message })?;
        log.push_event(Event {
            event_id: event_id as u64,
            case_id,
            activity,
            timestamp,
        });
    }
    Ok(log)
}

/// Writes a log as CSV with header `case,activity,time`, timestamps as epoch
/// microseconds, traces in case-id order and file order within a trace.
pub fn write_csv(log: &EventLog, path: &Path) -> Result<(), IngestError> {
    let file = std::fs::File::create(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(["case", "activity", "time"])?;
    for (case, activity, ts) in log.rows() {
        writer.write_record([case, activity, &ts.to_string()])?;
    }
    writer.flush().map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(())
}

/// Keeps exactly the events with `t_start <= timestamp <= t_end`; traces
/// that become empty are dropped and the window field is set.
pub fn filter_window(log: &EventLog, t_start: i64, t_end: i64) -> Result<EventLog, IngestError> {
    if t_start >= t_end {
        return Err(IngestError::Argument(format!(
            "window start {t_start} must be before end {t_end}"
        )));
    }
    let mut out = EventLog::new();
    for trace in log.traces() {
        let kept: Vec<Event> = trace
            .events
            .iter()
            .filter(|e| t_start <= e.timestamp && e.timestamp <= t_end)
            .cloned()
            .collect();
        if !kept.is_empty() {
            out.insert_trace(Trace {
                case_id: trace.case_id.clone(),
                events: kept,
            });
        }
    }
    out.window = Some((t_start, t_end));
    Ok(out)
}

/// FNV-1a, 64-bit. Fixed so relabel partitions are stable across runs and
/// platforms.
pub fn stable_hash(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Extends the activity alphabet: activity `a` in case `c` becomes
/// `a#(stable_hash(c) mod k)`. Event and case counts and timestamps are
/// unchanged.
pub fn gen_relabel(log: &EventLog, k: u64) -> EventLog {
    assert!(k >= 1, "k must be positive");
    let mut out = EventLog::new();
    for trace in log.traces() {
        let part = stable_hash(&trace.case_id) % k;
        let events = trace
            .events
            .iter()
            .map(|e| Event {
                event_id: e.event_id,
                case_id: e.case_id.clone(),
                activity: format!("{}#{}", e.activity, part),
                timestamp: e.timestamp,
            })
            .collect();
        out.insert_trace(Trace {
            case_id: trace.case_id.clone(),
            events,
        });
    }
    out.window = log.window;
    out
}

/// Extends the event count: each trace becomes k concatenated copies of
/// itself, copy i time-shifted by i * (span + 1) with span taken over the
/// whole log, so copies are strictly time-separated.
pub fn gen_merge_cases(log: &EventLog, k: u64) -> EventLog {
    assert!(k >= 1, "k must be positive");
    let span = match log.time_span() {
        Some((lo, hi)) => hi - lo,
        None => return log.clone(),
    };
    let shift_unit = span + 1;
    let mut out = EventLog::new();
    let mut event_id = 0u64;
    for trace in log.traces() {
        let mut events = Vec::with_capacity(trace.events.len() * k as usize);
        for copy in 0..k as i64 {
            for e in &trace.events {
                events.push(Event {
                    event_id,
                    case_id: e.case_id.clone(),
                    activity: e.activity.clone(),
                    timestamp: e.timestamp + copy * shift_unit,
                });
                event_id += 1;
            }
        }
        out.insert_trace(Trace {
            case_id: trace.case_id.clone(),
            events,
        });
    }
    out
}

/// Deterministic synthetic base log: each case is a uniform random walk over
/// `n_activities` labels, length geometric around `mean_len`, strictly
/// increasing timestamps within a case.
pub fn synth_base_log(
    seed: u64,
    n_cases: u64,
    n_activities: u64,
    mean_len: u64,
) -> EventLog {
    assert!(n_activities >= 1 && mean_len >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = EventLog::new();
    let mut event_id = 0u64;
    let stop_p = 1.0 / mean_len as f64;
    for c in 0..n_cases {
        let case_id = format!("c{c}");
        let mut len = 1u64;
        while !rng.gen_bool(stop_p) && len < mean_len * 20 {
            len += 1;
        }
        let mut ts = rng.gen_range(0..1_000_000i64);
        let mut trace = Trace::new(case_id.clone());
        for _ in 0..len {
            let act = format!("act{}", rng.gen_range(0..n_activities));
            trace.events.push(Event {
                event_id,
                case_id: case_id.clone(),
                activity: act,
                timestamp: ts,
            });
            event_id += 1;
            ts += rng.gen_range(1..1_000i64);
        }
        log.insert_trace(trace);
    }
    log
}
