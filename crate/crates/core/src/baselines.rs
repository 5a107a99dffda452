//! The three non-native approaches of the comparison: a naive nested scan,
//! an index-assisted nested scan, and a sort-then-stream pipeline.

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::thread;

use thiserror::Error;

use crate::event_model::{Dfr, EventLog};

/// An unordered (case, activity, timestamp) row table, optionally carrying a
/// per-case index of row positions sorted by (timestamp, row order).
#[derive(Debug, Clone)]
pub struct FlatTable {
    pub rows: Vec<(String, String, i64)>,
    index: Option<BTreeMap<String, Vec<usize>>>,
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("per-case sorted index required but not built")]
    IndexMissing,
}

impl FlatTable {
    pub fn from_rows(rows: Vec<(String, String, i64)>) -> Self {
        FlatTable { rows, index: None }
    }

    pub fn from_log(log: &EventLog) -> Self {
        let rows = log
            .rows()
            .map(|(c, a, t)| (c.to_string(), a.to_string(), t))
            .collect();
        FlatTable { rows, index: None }
    }

    /// Builds the per-case index: row positions sorted by (timestamp, row
    /// order). Models adding indices on the case and timestamp columns.
    pub fn build_index(&mut self) {
        let mut index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, (case, _, _)) in self.rows.iter().enumerate() {
            index.entry(case.clone()).or_default().push(i);
        }
        for positions in index.values_mut() {
            positions.sort_by_key(|&i| (self.rows[i].2, i));
        }
        self.index = Some(index);
    }

    pub fn has_index(&self) -> bool {
        self.index.is_some()
    }

    fn rows_by_case(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut by_case: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, (case, _, _)) in self.rows.iter().enumerate() {
            by_case.entry(case).or_default().push(i);
        }
        by_case
    }
}

/// The literal nested scan: for each row x, for each later-in-time row y of
/// the same case, a third full scan checks that no row z of that case falls
/// strictly between them.
///
/// Contract: this models the nested self-join a declarative query would run
/// and MUST stay cubic in trace length. Do not add early exits, indexes, or
/// block skipping here; the indexed variant below is the optimized one.
pub fn nested_join_dfr(table: &FlatTable) -> Dfr {
    let mut dfr = Dfr::new();
    for indices in table.rows_by_case().values() {
        for &xi in indices {
            let (_, ref ax, tx) = table.rows[xi];
            for &yi in indices {
                let (_, ref ay, ty) = table.rows[yi];
                if ty <= tx {
                    continue;
                }
                let mut blocked = false;
                for &zi in indices {
                    let tz = table.rows[zi].2;
                    blocked |= tx < tz && tz < ty;
                }
                if !blocked {
                    dfr.add(ax, ay, 1);
                }
            }
        }
    }
    dfr
}

/// Index-assisted nested scan: for each row, binary search over the per-case
/// sorted index finds the successor timestamp block, O(m log m) per case.
pub fn nested_join_dfr_indexed(table: &FlatTable) -> Result<Dfr, BaselineError> {
    let index = table.index.as_ref().ok_or(BaselineError::IndexMissing)?;
    let mut dfr = Dfr::new();
    for sorted in index.values() {
        for &xi in sorted {
            let (_, ref ax, tx) = table.rows[xi];
            // first position with timestamp strictly after tx
            let start = sorted.partition_point(|&i| table.rows[i].2 <= tx);
            if start == sorted.len() {
                continue;
            }
            let succ_ts = table.rows[sorted[start]].2;
            let end = sorted.partition_point(|&i| table.rows[i].2 <= succ_ts);
            for &yi in &sorted[start..end] {
                dfr.add(ax, &table.rows[yi].1, 1);
            }
        }
    }
    Ok(dfr)
}

/// Sort-then-stream: stage 1 sorts rows by (case, timestamp, row order);
/// stage 2 pushes every sorted row across a bounded channel and the consumer
/// computes the block-based DFR. Models a SQL interface that transfers each
/// event to the analysis tool.
pub fn sorted_stream_dfr(table: &FlatTable) -> (Dfr, u64) {
    let mut order: Vec<usize> = (0..table.rows.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = &table.rows[a];
        let rb = &table.rows[b];
        (ra.0.as_str(), ra.2, a).cmp(&(rb.0.as_str(), rb.2, b))
    });
    let sorted: Vec<(String, String, i64)> =
        order.iter().map(|&i| table.rows[i].clone()).collect();

    let (tx, rx) = mpsc::sync_channel::<(String, String, i64)>(1024);
    let producer = thread::spawn(move || {
        for row in sorted {
            if tx.send(row).is_err() {
                break;
            }
        }
    });

    let mut dfr = Dfr::new();
    let mut transferred = 0u64;
    let mut current_case: Option<String> = None;
    let mut prev_block: Vec<String> = Vec::new();
    let mut cur_block: Vec<String> = Vec::new();
    let mut cur_ts = 0i64;
    for (case, activity, ts) in rx {
        transferred += 1;
        let same_case = current_case.as_deref() == Some(case.as_str());
        if !same_case {
            current_case = Some(case);
            prev_block.clear();
            cur_block.clear();
            cur_ts = ts;
        } else if ts != cur_ts {
            prev_block = std::mem::take(&mut cur_block);
            cur_ts = ts;
        }
        for antecedent in &prev_block {
            dfr.add(antecedent, &activity, 1);
        }
        cur_block.push(activity);
    }
    producer.join().expect("producer thread panicked");
    (dfr, transferred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfr::{brute_force_dfr, directly_follows};
    use crate::event_model::dfr_to_rows;
    use crate::testutil::{random_log, table1a, table1b_rows};

    #[test]
    fn nested_matches_table1b() {
        let t = FlatTable::from_log(&table1a());
        assert_eq!(dfr_to_rows(&nested_join_dfr(&t)), table1b_rows());
    }

    #[test]
    fn nested_empty_table() {
        let t = FlatTable::from_rows(vec![]);
        assert!(nested_join_dfr(&t).is_empty());
    }

    #[test]
    fn indexed_matches_table1b() {
        let mut t = FlatTable::from_log(&table1a());
        t.build_index();
        assert_eq!(
            dfr_to_rows(&nested_join_dfr_indexed(&t).unwrap()),
            table1b_rows()
        );
    }

    #[test]
    fn indexed_without_index_is_an_error() {
        let t = FlatTable::from_log(&table1a());
        assert!(matches!(
            nested_join_dfr_indexed(&t),
            Err(BaselineError::IndexMissing)
        ));
    }

    #[test]
    fn indexed_strict_chain_mass() {
        let rows: Vec<_> = (0..1000)
            .map(|i| ("c".to_string(), format!("a{}", i % 7), i as i64))
            .collect();
        let mut t = FlatTable::from_rows(rows);
        t.build_index();
        let d = nested_join_dfr_indexed(&t).unwrap();
        assert_eq!(d.total_mass(), 999);
    }

    #[test]
    fn sorted_stream_matches_table1b_and_transfers_all() {
        let t = FlatTable::from_log(&table1a());
        let (d, transferred) = sorted_stream_dfr(&t);
        assert_eq!(dfr_to_rows(&d), table1b_rows());
        assert_eq!(transferred, 7);
    }

    #[test]
    fn sorted_stream_empty() {
        let (d, transferred) = sorted_stream_dfr(&FlatTable::from_rows(vec![]));
        assert!(d.is_empty());
        assert_eq!(transferred, 0);
    }

    #[test]
    fn all_baselines_agree_with_oracle_on_random_logs() {
        for seed in 0..50 {
            let log = random_log(seed, 6, 30);
            let expected = brute_force_dfr(&log);
            let mut t = FlatTable::from_log(&log);
            assert_eq!(nested_join_dfr(&t), expected, "nested, seed {seed}");
            t.build_index();
            assert_eq!(
                nested_join_dfr_indexed(&t).unwrap(),
                expected,
                "indexed, seed {seed}"
            );
            let (d, transferred) = sorted_stream_dfr(&t);
            assert_eq!(d, expected, "stream, seed {seed}");
            assert_eq!(transferred as usize, log.event_count());
            assert_eq!(directly_follows(&log), expected, "native, seed {seed}");
        }
    }
}
