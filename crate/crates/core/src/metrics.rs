//! IR effectiveness metrics and Kendall tau distance between top-k lists.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::collection::{Qrels, RankedList};
use crate::error::{Error, Result};

fn judged<'a>(qrels: &'a Qrels, query_id: &str) -> Result<&'a BTreeMap<alloc::string::String, u32>> {
    qrels
        .judged(query_id)
        .ok_or_else(|| Error::UnjudgedQuery(query_id.into()))
}

/// Binary-relevance average precision over the whole list.
pub fn average_precision(list: &RankedList, qrels: &Qrels, query_id: &str) -> Result<f64> {
    let j = judged(qrels, query_id)?;
    let total = j.values().filter(|&&g| g > 0).count();
    if total == 0 {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, item) in list.items().iter().enumerate() {
        if j.get(&item.doc_id).copied().unwrap_or(0) > 0 {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / total as f64)
}

pub fn precision_at(list: &RankedList, qrels: &Qrels, query_id: &str, k: usize) -> Result<f64> {
    let j = judged(qrels, query_id)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive"));
    }
    let hits = list
        .items()
        .iter()
        .take(k)
        .filter(|i| j.get(&i.doc_id).copied().unwrap_or(0) > 0)
        .count();
    Ok(hits as f64 / k as f64)
}

/// nDCG@k with linear gain and `log2(rank + 1)` discount; the ideal ordering
/// is taken over all judged documents.
pub fn ndcg_at(list: &RankedList, qrels: &Qrels, query_id: &str, k: usize) -> Result<f64> {
    let j = judged(qrels, query_id)?;
    let discount = |rank: usize| libm::log2(rank as f64 + 1.0);
    let dcg: f64 = list
        .items()
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, it)| f64::from(j.get(&it.doc_id).copied().unwrap_or(0)) / discount(i + 1))
        .sum();
    let mut grades: Vec<u32> = j.values().copied().filter(|&g| g > 0).collect();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    let ideal: f64 = grades
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| f64::from(g) / discount(i + 1))
        .sum();
    if ideal == 0.0 {
        return Err(Error::ZeroIdealDcg(query_id.into()));
    }
    Ok(dcg / ideal)
}

/// Kendall tau distance between the top-k prefixes of two lists.
///
/// Pairs are taken over the union of both prefixes. A document missing from a
/// list sits below everything that list contains. A pair missing from one list
/// entirely is a tie there and costs 0.5.
pub fn kendall_tau_distance(a: &RankedList, b: &RankedList, k: usize) -> f64 {
    let pos = |l: &RankedList| -> BTreeMap<alloc::string::String, usize> {
        l.items()
            .iter()
            .take(k)
            .enumerate()
            .map(|(i, it)| (it.doc_id.clone(), i))
            .collect()
    };
    let pa = pos(a);
    let pb = pos(b);
    let mut union: Vec<&str> = pa.keys().map(|s| s.as_str()).collect();
    union.extend(pb.keys().map(|s| s.as_str()).filter(|d| !pa.contains_key(*d)));

    // Order of a pair within one list: Some(true) if i before j, None if tied.
    fn order(p: &BTreeMap<alloc::string::String, usize>, i: &str, j: &str) -> Option<bool> {
        match (p.get(i), p.get(j)) {
            (Some(x), Some(y)) => Some(x < y),
            (Some(_), None) => Some(true),
            (None, Some(_)) => Some(false),
            (None, None) => None,
        }
    }

    let mut distance = 0.0;
    for x in 0..union.len() {
        for y in (x + 1)..union.len() {
            let (i, j) = (union[x], union[y]);
            match (order(&pa, i, j), order(&pb, i, j)) {
                (Some(u), Some(v)) => {
                    if u != v {
                        distance += 1.0;
                    }
                }
                _ => distance += 0.5,
            }
        }
    }
    distance
}
