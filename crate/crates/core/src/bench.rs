//! Desk-scale benchmark harness: times the abstraction / retrieval / graph
//! phases for each approach over synthetic logs and fits log-log slopes.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::baselines::{nested_join_dfr, nested_join_dfr_indexed, sorted_stream_dfr, FlatTable};
use crate::dfg::build_dfg;
use crate::dfr::directly_follows;
use crate::event_model::{dfr_to_rows, Dfr, EventLog};
use crate::ingestion::{gen_merge_cases, gen_relabel, read_csv, synth_base_log, write_csv, CsvConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Approach {
    Native,
    Nested,
    NestedIndexed,
    SortedStream,
    Traditional,
}

impl Approach {
    pub const ALL: [Approach; 5] = [
        Approach::Native,
        Approach::Nested,
        Approach::NestedIndexed,
        Approach::SortedStream,
        Approach::Traditional,
    ];

    pub fn parse(text: &str) -> Option<Approach> {
        match text.trim() {
            "native" => Some(Approach::Native),
            "nested" => Some(Approach::Nested),
            "nested_indexed" | "nested-indexed" => Some(Approach::NestedIndexed),
            "sorted_stream" | "sorted-stream" => Some(Approach::SortedStream),
            "traditional" => Some(Approach::Traditional),
            _ => None,
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Approach::Native => "native",
            Approach::Nested => "nested",
            Approach::NestedIndexed => "nested_indexed",
            Approach::SortedStream => "sorted_stream",
            Approach::Traditional => "traditional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingAxis {
    /// Scale event count by merging copies of each case; points are target
    /// event counts.
    EventsViaMerge,
    /// Scale the activity alphabet by relabeling; points are partition
    /// counts k.
    ActivitiesViaRelabel,
}

impl fmt::Display for ScalingAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingAxis::EventsViaMerge => "events_via_merge",
            ScalingAxis::ActivitiesViaRelabel => "activities_via_relabel",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub approaches: Vec<Approach>,
    pub axis: ScalingAxis,
    pub scale_points: Vec<u64>,
    pub seed: u64,
    pub repetitions: u32,
    pub base_cases: u64,
    pub base_activities: u64,
    pub base_mean_len: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            approaches: vec![Approach::Native],
            axis: ScalingAxis::EventsViaMerge,
            scale_points: vec![],
            seed: 42,
            repetitions: 3,
            base_cases: 1,
            base_activities: 30,
            base_mean_len: 100,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Argument(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses the plain-text config format: `key = value` lines, `#` comments.
///
/// Keys: `approaches` (comma list), `axis`, `points` (comma list of
/// integers), `seed`, `repetitions`, `base_cases`, `base_activities`,
/// `base_mean_len`.
pub fn parse_config(text: &str) -> Result<BenchConfig, BenchError> {
    let mut cfg = BenchConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| BenchError::Config {
            line: idx + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".to_string()))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "approaches" => {
                let mut approaches = Vec::new();
                for part in value.split(',') {
                    approaches.push(
                        Approach::parse(part)
                            .ok_or_else(|| err(format!("unknown approach {part:?}")))?,
                    );
                }
                cfg.approaches = approaches;
            }
            "axis" => {
                cfg.axis = match value {
                    "events_via_merge" => ScalingAxis::EventsViaMerge,
                    "activities_via_relabel" => ScalingAxis::ActivitiesViaRelabel,
                    other => return Err(err(format!("unknown axis {other:?}"))),
                };
            }
            "points" => {
                let mut points = Vec::new();
                for part in value.split(',') {
                    points.push(
                        part.trim()
                            .replace('_', "")
                            .parse::<u64>()
                            .map_err(|_| err(format!("bad point {part:?}")))?,
                    );
                }
                cfg.scale_points = points;
            }
            "seed" => cfg.seed = value.parse().map_err(|_| err("bad seed".into()))?,
            "repetitions" => {
                cfg.repetitions = value.parse().map_err(|_| err("bad repetitions".into()))?
            }
            "base_cases" => {
                cfg.base_cases = value.parse().map_err(|_| err("bad base_cases".into()))?
            }
            "base_activities" => {
                cfg.base_activities =
                    value.parse().map_err(|_| err("bad base_activities".into()))?
            }
            "base_mean_len" => {
                cfg.base_mean_len =
                    value.parse().map_err(|_| err("bad base_mean_len".into()))?
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    if cfg.scale_points.is_empty() {
        return Err(BenchError::Argument("no scale points configured".into()));
    }
    if !cfg.scale_points.windows(2).all(|w| w[0] < w[1]) {
        return Err(BenchError::Argument(
            "scale points must be strictly increasing".into(),
        ));
    }
    if cfg.repetitions < 1 {
        return Err(BenchError::Argument("repetitions must be >= 1".into()));
    }
    Ok(cfg)
}

/// One measured (approach, scale point) cell.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub approach: Approach,
    pub axis: ScalingAxis,
    pub size: u64,
    pub events: u64,
    pub activities: u64,
    pub abstraction_s: f64,
    pub retrieval_rows: u64,
    pub retrieval_s: f64,
    pub dfg_s: f64,
    pub export_s: f64,
    pub conversion_s: f64,
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<PointReport>,
    pub slopes: BTreeMap<Approach, SlopeFit>,
}

pub const REPORT_HEADER: &str = "approach,axis,size,events,activities,abstraction_s,retrieval_rows,retrieval_s,dfg_s,export_s,conversion_s,failed";

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{}\n",
                r.approach,
                r.axis,
                r.size,
                r.events,
                r.activities,
                r.abstraction_s,
                r.retrieval_rows,
                r.retrieval_s,
                r.dfg_s,
                r.export_s,
                r.conversion_s,
                r.failed
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (approach, fit) in &self.slopes {
            out.push_str(&format!(
                "{approach}: log-log slope {:.3} (residual {:.4})\n",
                fit.slope, fit.residual
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    /// Root mean squared residual of the log-log fit.
    pub residual: f64,
}

/// Least-squares slope of log(time) vs log(size).
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit, BenchError> {
    if points.len() < 4 {
        return Err(BenchError::Argument(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(BenchError::Argument(
            "sizes and times must be positive".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(BenchError::Argument("degenerate sizes".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mse: f64 = logs
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n;
    Ok(SlopeFit {
        slope,
        residual: mse.sqrt(),
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

/// Times `f` with one discarded warm-up run and `reps` measured runs,
/// returning (median seconds, last result).
fn timed<T>(reps: u32, mut f: impl FnMut() -> T) -> (f64, T) {
    let _ = f(); // warm-up
    let mut times = Vec::with_capacity(reps as usize);
    let mut last = None;
    for _ in 0..reps {
        let start = Instant::now();
        last = Some(f());
        times.push(start.elapsed().as_secs_f64());
    }
    (median(times), last.unwrap())
}

fn scaled_log(cfg: &BenchConfig, base: &EventLog, point: u64) -> EventLog {
    match cfg.axis {
        ScalingAxis::EventsViaMerge => {
            let base_events = base.event_count().max(1) as u64;
            let k = (point as f64 / base_events as f64).round().max(1.0) as u64;
            gen_merge_cases(base, k)
        }
        ScalingAxis::ActivitiesViaRelabel => gen_relabel(base, point),
    }
}

fn measure_point(
    cfg: &BenchConfig,
    approach: Approach,
    point: u64,
    log: &EventLog,
) -> Result<PointReport, BenchError> {
    let reps = cfg.repetitions;
    let events = log.event_count() as u64;
    let activities = log.activities().len() as u64;
    let mut report = PointReport {
        approach,
        axis: cfg.axis,
        size: point,
        events,
        activities,
        abstraction_s: 0.0,
        retrieval_rows: 0,
        retrieval_s: 0.0,
        dfg_s: 0.0,
        export_s: 0.0,
        conversion_s: 0.0,
        failed: false,
    };

    let dfr: Dfr = match approach {
        Approach::Native => {
            let (t, dfr) = timed(reps, || directly_follows(log));
            report.abstraction_s = t;
            dfr
        }
        Approach::Nested => {
            let table = FlatTable::from_log(log);
            let (t, dfr) = timed(reps, || nested_join_dfr(&table));
            report.abstraction_s = t;
            dfr
        }
        Approach::NestedIndexed => {
            let mut table = FlatTable::from_log(log);
            table.build_index();
            let (t, dfr) = timed(reps, || {
                nested_join_dfr_indexed(&table).expect("index was built")
            });
            report.abstraction_s = t;
            dfr
        }
        Approach::SortedStream => {
            let table = FlatTable::from_log(log);
            let (t, (dfr, transferred)) = timed(reps, || sorted_stream_dfr(&table));
            report.abstraction_s = t;
            report.retrieval_rows = transferred;
            dfr
        }
        Approach::Traditional => {
            // the pipeline detour: export to CSV, re-read, then compute
            let dir = tempfile::tempdir()?;
            let path = dir.path().join("export.csv");
            let (export_s, _) = timed(reps, || {
                write_csv(log, &path).expect("export to temp dir")
            });
            let (conversion_s, reread) = timed(reps, || {
                read_csv(&path, &CsvConfig::default()).expect("re-read exported csv")
            });
            report.export_s = export_s;
            report.conversion_s = conversion_s;
            let (t, dfr) = timed(reps, || directly_follows(&reread));
            report.abstraction_s = t;
            dfr
        }
    };

    // retrieval: materializing the result rows the tool consumes
    let (retrieval_s, rows) = timed(reps, || dfr_to_rows(&dfr));
    report.retrieval_s = retrieval_s;
    if approach != Approach::SortedStream {
        report.retrieval_rows = rows.len() as u64;
    }

    let (dfg_s, _) = timed(reps, || build_dfg(log));
    report.dfg_s = dfg_s;
    Ok(report)
}

/// Runs the configured matrix: one point at a time, approaches in declared
/// order. A point that panics (for example on allocation failure) is marked
/// failed and the run continues.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let base = synth_base_log(cfg.seed, cfg.base_cases, cfg.base_activities, cfg.base_mean_len);
    let mut rows = Vec::new();
    for &point in &cfg.scale_points {
        let log = scaled_log(cfg, &base, point);
        for &approach in &cfg.approaches {
            let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                measure_point(cfg, approach, point, &log)
            }));
            match result {
                Ok(Ok(report)) => rows.push(report),
                _ => rows.push(PointReport {
                    approach,
                    axis: cfg.axis,
                    size: point,
                    events: log.event_count() as u64,
                    activities: log.activities().len() as u64,
                    abstraction_s: 0.0,
                    retrieval_rows: 0,
                    retrieval_s: 0.0,
                    dfg_s: 0.0,
                    export_s: 0.0,
                    conversion_s: 0.0,
                    failed: true,
                }),
            }
        }
    }

    let mut slopes = BTreeMap::new();
    for &approach in &cfg.approaches {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.approach == approach && !r.failed && r.abstraction_s > 0.0)
            .map(|r| (r.events as f64, r.abstraction_s))
            .collect();
        if let Ok(fit) = fit_slope(&points) {
            slopes.insert(approach, fit);
        }
    }
    Ok(BenchReport { rows, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config() {
        let cfg = parse_config(
            "# comment\napproaches = native, nested-indexed\naxis = events_via_merge\npoints = 1_000, 2000\nseed = 7\nrepetitions = 1\n",
        )
        .unwrap();
        assert_eq!(cfg.approaches, vec![Approach::Native, Approach::NestedIndexed]);
        assert_eq!(cfg.scale_points, vec![1000, 2000]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.repetitions, 1);
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(parse_config("points = 5, 3").is_err());
        assert!(parse_config("nonsense\npoints = 1, 2").is_err());
        assert!(parse_config("approaches = warp\npoints = 1, 2").is_err());
        assert!(parse_config("").is_err());
    }

    #[test]
    fn slope_of_linear_data_is_one() {
        let points: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64 * 100.0, i as f64 * 0.5)).collect();
        let fit = fit_slope(&points).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.01, "slope {}", fit.slope);
    }

    #[test]
    fn slope_of_cubic_data_is_three() {
        let points: Vec<(f64, f64)> = (1..=6)
            .map(|i| {
                let n = i as f64 * 100.0;
                (n, 1e-9 * n * n * n)
            })
            .collect();
        let fit = fit_slope(&points).unwrap();
        assert!((fit.slope - 3.0).abs() < 0.01, "slope {}", fit.slope);
    }

    #[test]
    fn slope_rejects_bad_points() {
        assert!(fit_slope(&[(1.0, 1.0)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn smoke_run_native() {
        let cfg = BenchConfig {
            approaches: vec![Approach::Native],
            scale_points: vec![500, 1000],
            repetitions: 1,
            base_mean_len: 50,
            ..BenchConfig::default()
        };
        let report = run_bench(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| !r.failed));
        assert!(report.rows.iter().all(|r| r.abstraction_s > 0.0));
        let csv = report.to_csv();
        assert!(csv.starts_with(REPORT_HEADER));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn sorted_stream_transfers_every_event() {
        let cfg = BenchConfig {
            approaches: vec![Approach::SortedStream],
            scale_points: vec![400, 800],
            repetitions: 1,
            base_cases: 4,
            base_mean_len: 20,
            ..BenchConfig::default()
        };
        let report = run_bench(&cfg).unwrap();
        for r in &report.rows {
            assert_eq!(r.retrieval_rows, r.events);
        }
    }

    #[test]
    fn traditional_reports_positive_overhead() {
        let cfg = BenchConfig {
            approaches: vec![Approach::Traditional],
            scale_points: vec![1000],
            repetitions: 1,
            base_mean_len: 50,
            ..BenchConfig::default()
        };
        let report = run_bench(&cfg).unwrap();
        let r = &report.rows[0];
        assert!(r.export_s > 0.0);
        assert!(r.conversion_s > 0.0);
    }
}
