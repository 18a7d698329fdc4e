//! Ranked-list genderedness and the GSR slope.
//!
//! For each query we place a point `(g(q), g_q(L))` and GSR is the slope of
//! the least-squares line through those points, computed with population
//! moments. A positive slope means female-leaning queries get female-leaning
//! result language and male-leaning queries get male-leaning language.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::collection::{Qrels, RankedList, RunSet};
use crate::engines::perfect_engine;
use crate::error::{Error, Result};
use crate::geometry::WordGenderedness;
use crate::text::{document_genderedness, query_genderedness, BagOfWords};

/// Rank discount `1 / log2(rank + 1)` for a 1-based rank.
pub fn rank_weight(rank: usize) -> f64 {
    1.0 / libm::log2(rank as f64 + 1.0)
}

/// `g_q(L)` from per-document genderedness listed by 1-based rank.
/// Undefined documents are skipped and the normalizer is recomputed over the
/// rest; remaining documents keep their original rank discount.
pub fn list_genderedness<I>(ranked: I) -> Option<f64>
where
    I: IntoIterator<Item = (usize, Option<f64>)>,
{
    let (num, den) = ranked
        .into_iter()
        .filter_map(|(rank, g)| g.map(|g| (rank_weight(rank), g)))
        .fold((0.0, 0.0), |(n, d), (w, g)| (n + w * g, d + w));
    (den > 0.0).then(|| num / den)
}

/// Scores a ranked list against bag-of-words documents.
pub fn ranked_list_genderedness<G: WordGenderedness + ?Sized>(
    list: &RankedList,
    query: &BagOfWords,
    docs: &BTreeMap<String, BagOfWords>,
    scorer: &G,
) -> Option<f64> {
    list_genderedness(list.items().iter().map(|item| {
        let g = docs
            .get(&item.doc_id)
            .and_then(|d| document_genderedness(d, query, scorer));
        (item.rank, g)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsrPoint {
    pub query_id: String,
    /// `g(q)`
    pub gq: f64,
    /// `g_q(L)`
    pub gl: f64,
    pub k_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsrResult {
    pub points: Vec<GsrPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub mu_q: f64,
    pub sigma2_q: f64,
    pub mu_ql: f64,
    pub n: usize,
    pub relative_pct: Option<f64>,
}

/// Fits the GSR slope with population (1/N) moments.
pub fn gsr_slope(points: Vec<GsrPoint>) -> Result<GsrResult> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n });
    }
    let nf = n as f64;
    let mu_q = points.iter().map(|p| p.gq).sum::<f64>() / nf;
    let mu_ql = points.iter().map(|p| p.gl).sum::<f64>() / nf;
    let sigma2_q = points.iter().map(|p| (p.gq - mu_q) * (p.gq - mu_q)).sum::<f64>() / nf;
    if !(sigma2_q > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let cov = points
        .iter()
        .map(|p| (p.gq - mu_q) * (p.gl - mu_ql))
        .sum::<f64>()
        / nf;
    let slope = cov / sigma2_q;
    Ok(GsrResult {
        points,
        slope,
        intercept: mu_ql - slope * mu_q,
        mu_q,
        sigma2_q,
        mu_ql,
        n,
        relative_pct: None,
    })
}

/// Percentage deviation from the reference slope.
pub fn relative_gsr(system: &GsrResult, perfect: &GsrResult) -> Result<f64> {
    if perfect.slope == 0.0 {
        return Err(Error::ZeroReferenceSlope);
    }
    Ok(100.0 * (system.slope - perfect.slope) / perfect.slope)
}

/// How many documents of each list are scored.
#[derive(Debug, Clone, Copy)]
pub enum Cutoff<'a> {
    Full,
    Fixed(usize),
    /// Number of judged-relevant documents for the query.
    RelevantCount(&'a Qrels),
}

impl Cutoff<'_> {
    pub fn k_for(&self, query_id: &str, len: usize) -> usize {
        match self {
            Cutoff::Full => len,
            Cutoff::Fixed(k) => *k,
            Cutoff::RelevantCount(q) => q.relevant_count(query_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DropReason {
    NoRankedList,
    EmptyAfterCutoff,
    QueryUndefined,
    ListUndefined,
    NoRelevantDocuments,
}

impl DropReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DropReason::NoRankedList => "no ranked list",
            DropReason::EmptyAfterCutoff => "empty list after cutoff",
            DropReason::QueryUndefined => "query genderedness undefined",
            DropReason::ListUndefined => "list genderedness undefined",
            DropReason::NoRelevantDocuments => "no relevant documents",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedQuery {
    pub query_id: String,
    pub reason: DropReason,
}

/// Points for a run plus every query that could not contribute one.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub points: Vec<GsrPoint>,
    pub dropped: Vec<DroppedQuery>,
}

/// Computes `(g(q), g_q(L))` for every query, in query order.
pub fn measure_run<G: WordGenderedness + ?Sized>(
    run: &RunSet,
    queries: &[(String, BagOfWords)],
    docs: &BTreeMap<String, BagOfWords>,
    scorer: &G,
    cutoff: Cutoff<'_>,
) -> Measurement {
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    let mut drop = |query_id: &str, reason| {
        dropped.push(DroppedQuery {
            query_id: query_id.into(),
            reason,
        })
    };
    for (qid, bag) in queries {
        let Some(list) = run.get(qid) else {
            drop(qid, DropReason::NoRankedList);
            continue;
        };
        let list = list.truncate_to_k(cutoff.k_for(qid, list.len()));
        if list.is_empty() {
            drop(qid, DropReason::EmptyAfterCutoff);
            continue;
        }
        let Some(gq) = query_genderedness(bag, scorer) else {
            drop(qid, DropReason::QueryUndefined);
            continue;
        };
        let Some(gl) = ranked_list_genderedness(&list, bag, docs, scorer) else {
            drop(qid, DropReason::ListUndefined);
            continue;
        };
        points.push(GsrPoint {
            query_id: qid.clone(),
            gq,
            gl,
            k_used: list.len(),
        });
    }
    Measurement { points, dropped }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub system: GsrResult,
    pub perfect: GsrResult,
    pub system_dropped: Vec<DroppedQuery>,
    pub perfect_dropped: Vec<DroppedQuery>,
}

/// Audits a run against the perfect engine: each list is cut to the number of
/// relevant documents for its query before scoring.
pub fn audit<G: WordGenderedness + ?Sized>(
    run: &RunSet,
    queries: &[(String, BagOfWords)],
    docs: &BTreeMap<String, BagOfWords>,
    qrels: &Qrels,
    scorer: &G,
) -> Result<AuditReport> {
    let mut perfect_run = RunSet::new();
    let mut perfect_missing = Vec::new();
    for (qid, _) in queries {
        match perfect_engine(qrels, qid) {
            Ok(list) => {
                perfect_run.insert(list);
            }
            Err(_) => perfect_missing.push(qid.clone()),
        }
    }
    let cutoff = Cutoff::RelevantCount(qrels);
    let sys = measure_run(run, queries, docs, scorer, cutoff);
    let mut perf = measure_run(&perfect_run, queries, docs, scorer, cutoff);
    for d in &mut perf.dropped {
        if perfect_missing.contains(&d.query_id) {
            d.reason = DropReason::NoRelevantDocuments;
        }
    }
    let mut system_dropped = sys.dropped;
    for d in &mut system_dropped {
        if d.reason == DropReason::EmptyAfterCutoff && perfect_missing.contains(&d.query_id) {
            d.reason = DropReason::NoRelevantDocuments;
        }
    }
    let perfect = gsr_slope(perf.points)?;
    let mut system = gsr_slope(sys.points)?;
    system.relative_pct = relative_gsr(&system, &perfect).ok();
    Ok(AuditReport {
        system,
        perfect,
        system_dropped,
        perfect_dropped: perf.dropped,
    })
}

/// One query's scored list, used for the stereotypical/counter-stereotypical
/// decomposition of the slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredList {
    pub gq: f64,
    /// `(rank, g_q(d))` for scored documents.
    pub docs: Vec<(usize, f64)>,
}

/// Slope split into the contributions of stereotypical documents (same sign
/// as the query) and counter-stereotypical ones. `stereotypical +
/// counter_stereotypical` equals the directly fitted slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeDecomposition {
    pub stereotypical: f64,
    pub counter_stereotypical: f64,
}

/// A document is stereotypical for a query when their genderedness share a
/// sign.
pub fn is_stereotypical(gq: f64, gd: f64) -> bool {
    gq.signum() == gd.signum() && gq != 0.0 && gd != 0.0
}

pub fn decompose_slope(lists: &[ScoredList]) -> Result<SlopeDecomposition> {
    let n = lists.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n });
    }
    let gls: Vec<f64> = lists
        .iter()
        .map(|l| list_genderedness(l.docs.iter().map(|&(r, g)| (r, Some(g)))))
        .collect::<Option<_>>()
        .ok_or(Error::TooFewPoints { needed: 1, found: 0 })?;
    let nf = n as f64;
    let mu_q = lists.iter().map(|l| l.gq).sum::<f64>() / nf;
    let mu_ql = gls.iter().sum::<f64>() / nf;
    let sigma2 = lists.iter().map(|l| (l.gq - mu_q) * (l.gq - mu_q)).sum::<f64>() / nf;
    if !(sigma2 > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let mut s = 0.0;
    let mut cs = 0.0;
    for l in lists {
        let w_total: f64 = l.docs.iter().map(|&(r, _)| rank_weight(r)).sum();
        for &(r, gd) in &l.docs {
            let term = (l.gq - mu_q) * (gd - mu_ql) * rank_weight(r) / w_total;
            if is_stereotypical(l.gq, gd) {
                s += term;
            } else {
                cs += term;
            }
        }
    }
    Ok(SlopeDecomposition {
        stereotypical: s / (sigma2 * nf),
        counter_stereotypical: cs / (sigma2 * nf),
    })
}
