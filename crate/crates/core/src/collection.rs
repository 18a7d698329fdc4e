//! Topics, documents, relevance judgments and ranked lists.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: String,
    pub title: String,
}

impl Topic {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// Graded relevance judgments, at most one per (query, document).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: u32) -> Result<()> {
        let per_query = self.judgments.entry(query_id.into()).or_default();
        if per_query.contains_key(doc_id) {
            return Err(Error::DuplicateJudgment(query_id.into(), doc_id.into()));
        }
        per_query.insert(doc_id.into(), grade);
        Ok(())
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<u32> {
        self.judgments.get(query_id)?.get(doc_id).copied()
    }

    pub fn judged(&self, query_id: &str) -> Option<&BTreeMap<String, u32>> {
        self.judgments.get(query_id)
    }

    /// Number of documents with a positive grade.
    pub fn relevant_count(&self, query_id: &str) -> usize {
        self.judged(query_id)
            .map(|j| j.values().filter(|&&g| g > 0).count())
            .unwrap_or(0)
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedItem {
    pub doc_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

/// Per-query result list: ranks consecutive from 1, scores non-increasing,
/// document ids unique.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query_id: String,
    items: Vec<RankedItem>,
}

impl RankedList {
    pub fn empty(query_id: impl Into<String>) -> Self {
        Self {
            query_id: query_id.into(),
            items: Vec::new(),
        }
    }

    /// Sorts by score descending, ties by ascending document id.
    pub fn from_scores(query_id: impl Into<String>, mut scored: Vec<(String, f64)>) -> Self {
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_sorted(query_id, scored)
    }

    /// Keeps the given order. Used for run files and simulated systems where
    /// the order is the ground truth; rejects duplicate ids and increasing
    /// scores.
    pub fn from_ordered(query_id: impl Into<String>, ordered: Vec<(String, f64)>) -> Result<Self> {
        let query_id = query_id.into();
        let mut seen = BTreeSet::new();
        for (doc, _) in &ordered {
            if !seen.insert(doc.as_str()) {
                return Err(Error::DuplicateDocument(doc.clone()));
            }
        }
        if ordered.windows(2).any(|w| w[1].1 > w[0].1) {
            return Err(Error::InvalidParameter("ranked list scores must be non-increasing"));
        }
        Ok(Self::from_sorted(query_id, ordered))
    }

    fn from_sorted(query_id: impl Into<String>, sorted: Vec<(String, f64)>) -> Self {
        Self {
            query_id: query_id.into(),
            items: sorted
                .into_iter()
                .enumerate()
                .map(|(i, (doc_id, score))| RankedItem {
                    doc_id,
                    score,
                    rank: i + 1,
                })
                .collect(),
        }
    }

    pub fn items(&self) -> &[RankedItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.doc_id.as_str())
    }

    /// First `min(k, len)` items, ranks unchanged.
    pub fn truncate_to_k(&self, k: usize) -> Self {
        Self {
            query_id: self.query_id.clone(),
            items: self.items.iter().take(k).cloned().collect(),
        }
    }
}

/// Ranked lists keyed by query id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSet {
    lists: BTreeMap<String, RankedList>,
}

impl RunSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, list: RankedList) -> Option<RankedList> {
        self.lists.insert(list.query_id.clone(), list)
    }

    pub fn get(&self, query_id: &str) -> Option<&RankedList> {
        self.lists.get(query_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RankedList> {
        self.lists.values()
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

impl FromIterator<RankedList> for RunSet {
    fn from_iter<T: IntoIterator<Item = RankedList>>(iter: T) -> Self {
        let mut run = RunSet::new();
        for list in iter {
            run.insert(list);
        }
        run
    }
}
