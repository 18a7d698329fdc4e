//! TREC run files: `qid Q0 docno rank score tag`.

use std::collections::BTreeMap;

use gsr_core::{RankedList, RunSet};

use crate::error::{FormatError, Result};

/// Parses a run file. Lists are ordered by the rank column; scores must not
/// increase down a list.
pub fn parse_run(text: &str) -> Result<RunSet> {
    let mut rows: BTreeMap<String, Vec<(u64, String, f64, usize)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: String| FormatError::BadLine { line: line_no, message: m };
        if f.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", f.len())));
        }
        let rank: u64 = f[3].parse().map_err(|_| bad(format!("rank {:?} is not an integer", f[3])))?;
        let score: f64 = f[4].parse().map_err(|_| bad(format!("score {:?} is not a number", f[4])))?;
        if !score.is_finite() {
            return Err(bad("score is not finite".into()));
        }
        rows.entry(f[0].to_string())
            .or_default()
            .push((rank, f[2].to_string(), score, line_no));
    }
    let mut run = RunSet::new();
    for (qid, mut r) in rows {
        r.sort_by_key(|x| x.0);
        let first_line = r.first().map_or(0, |x| x.3);
        let list = RankedList::from_ordered(qid.as_str(), r.into_iter().map(|(_, d, s, _)| (d, s)).collect())
            .map_err(|e| FormatError::BadLine {
                line: first_line,
                message: format!("query {qid}: {e}"),
            })?;
        run.insert(list);
    }
    Ok(run)
}

pub fn write_run(run: &RunSet, tag: &str) -> String {
    let mut out = String::new();
    for list in run.iter() {
        for item in list.items() {
            out.push_str(&format!(
                "{} Q0 {} {} {} {}\n",
                list.query_id, item.doc_id, item.rank, item.score, tag
            ));
        }
    }
    out
}
