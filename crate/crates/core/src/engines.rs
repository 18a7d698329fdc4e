//! Retrieval models under audit, plus the perfect and random reference
//! systems.
//!
//! Lexical models score from an [`InvertedIndex`]; the embedding models rank by
//! cosine between averaged word vectors. Every engine breaks score ties by
//! ascending document id.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collection::{Qrels, RankedList};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::text::BagOfWords;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone)]
pub struct InvertedIndex {
    doc_ids: Vec<String>,
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    collection_term_counts: BTreeMap<String, u64>,
    total_tokens: u64,
    tfidf_norms: Vec<f64>,
}

impl InvertedIndex {
    /// Builds the index over already tokenized documents.
    pub fn build<'a, I>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a BagOfWords)>,
    {
        let mut doc_ids = Vec::new();
        let mut seen = BTreeSet::new();
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::new();
        let mut collection_term_counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut total_tokens = 0u64;

        for (id, bag) in docs {
            if !seen.insert(id) {
                return Err(Error::DuplicateDocument(id.into()));
            }
            let doc = doc_ids.len() as u32;
            doc_ids.push(String::from(id));
            let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
            for t in bag.iter() {
                *counts.entry(t).or_default() += 1;
            }
            for (term, tf) in counts {
                postings.entry(term.into()).or_default().push(Posting { doc, tf });
                *collection_term_counts.entry(term.into()).or_default() += u64::from(tf);
            }
            doc_lengths.push(bag.len() as u32);
            total_tokens += bag.len() as u64;
        }
        if doc_ids.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        let mut index = Self {
            doc_ids,
            postings,
            doc_lengths,
            collection_term_counts,
            total_tokens,
            tfidf_norms: Vec::new(),
        };
        let mut sq = vec![0.0; index.doc_count()];
        for (term, list) in &index.postings {
            let idf = index.tfidf_idf(term);
            for p in list {
                let w = f64::from(p.tf) * idf;
                sq[p.doc as usize] += w * w;
            }
        }
        index.tfidf_norms = sq.into_iter().map(libm::sqrt).collect();
        Ok(index)
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_id(&self, doc: u32) -> &str {
        &self.doc_ids[doc as usize]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_length(&self, doc: u32) -> u32 {
        self.doc_lengths[doc as usize]
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.total_tokens as f64 / self.doc_count() as f64
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn collection_count(&self, term: &str) -> u64 {
        self.collection_term_counts.get(term).copied().unwrap_or(0)
    }

    fn tfidf_idf(&self, term: &str) -> f64 {
        let df = self.document_frequency(term);
        if df == 0 {
            0.0
        } else {
            libm::log(self.doc_count() as f64 / df as f64)
        }
    }

    fn query_counts(q: &BagOfWords) -> BTreeMap<&str, u32> {
        let mut counts = BTreeMap::new();
        for t in q.iter() {
            *counts.entry(t).or_default() += 1;
        }
        counts
    }

    fn ranked(&self, query_id: &str, scores: BTreeMap<u32, f64>) -> RankedList {
        RankedList::from_scores(
            query_id,
            scores
                .into_iter()
                .map(|(d, s)| (self.doc_ids[d as usize].clone(), s))
                .collect(),
        )
    }

    /// Cosine between tf·idf vectors, `idf = ln(N/df)`. Zero scores are
    /// omitted.
    pub fn score_tfidf(&self, query_id: &str, q: &BagOfWords) -> RankedList {
        let mut scores: BTreeMap<u32, f64> = BTreeMap::new();
        let mut q_sq = 0.0;
        for (term, qtf) in Self::query_counts(q) {
            let idf = self.tfidf_idf(term);
            let wq = f64::from(qtf) * idf;
            q_sq += wq * wq;
            if wq == 0.0 {
                continue;
            }
            for p in self.postings(term) {
                *scores.entry(p.doc).or_default() += wq * f64::from(p.tf) * idf;
            }
        }
        let q_norm = libm::sqrt(q_sq);
        if q_norm == 0.0 {
            return RankedList::empty(query_id);
        }
        let scores = scores
            .into_iter()
            .filter_map(|(d, dotp)| {
                let dn = self.tfidf_norms[d as usize];
                let s = dotp / (q_norm * dn);
                (dn > 0.0 && s > 0.0).then_some((d, s))
            })
            .collect();
        self.ranked(query_id, scores)
    }

    /// Okapi BM25 with `idf = ln((N − df + 0.5)/(df + 0.5) + 1)`; repeated
    /// query terms count once per occurrence.
    pub fn score_bm25(&self, query_id: &str, q: &BagOfWords, params: Bm25Params) -> Result<RankedList> {
        params.validate()?;
        let n = self.doc_count() as f64;
        let avgdl = self.avg_doc_length();
        let mut scores: BTreeMap<u32, f64> = BTreeMap::new();
        for (term, qtf) in Self::query_counts(q) {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let df = list.len() as f64;
            let idf = libm::log((n - df + 0.5) / (df + 0.5) + 1.0);
            for p in list {
                let tf = f64::from(p.tf);
                let dl = f64::from(self.doc_length(p.doc));
                let norm = if avgdl > 0.0 {
                    1.0 - params.b + params.b * dl / avgdl
                } else {
                    1.0
                };
                let s = idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
                *scores.entry(p.doc).or_default() += f64::from(qtf) * s;
            }
        }
        Ok(self.ranked(query_id, scores))
    }

    /// Query likelihood with Dirichlet smoothing. Documents that contain no
    /// query term are omitted; query terms unseen in the collection are
    /// skipped.
    pub fn score_qlm(&self, query_id: &str, q: &BagOfWords, mu: f64) -> Result<RankedList> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter("mu must be positive"));
        }
        let counts = Self::query_counts(q);
        let mut candidates: BTreeSet<u32> = BTreeSet::new();
        let mut terms = Vec::new();
        for (term, qtf) in &counts {
            let cf = self.collection_count(term);
            if cf == 0 {
                continue;
            }
            let p_c = cf as f64 / self.total_tokens as f64;
            let tf_by_doc: BTreeMap<u32, u32> =
                self.postings(term).iter().map(|p| (p.doc, p.tf)).collect();
            candidates.extend(tf_by_doc.keys().copied());
            terms.push((*qtf, p_c, tf_by_doc));
        }
        let scores = candidates
            .into_iter()
            .map(|d| {
                let dl = f64::from(self.doc_length(d));
                let s: f64 = terms
                    .iter()
                    .map(|(qtf, p_c, tfs)| {
                        let tf = f64::from(tfs.get(&d).copied().unwrap_or(0));
                        f64::from(*qtf) * libm::log((tf + mu * p_c) / (dl + mu))
                    })
                    .sum();
                (d, s)
            })
            .collect();
        Ok(self.ranked(query_id, scores))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    fn validate(&self) -> Result<()> {
        if !(self.k1 >= 0.0) || !self.k1.is_finite() {
            return Err(Error::InvalidParameter("k1 must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParameter("b must lie in [0, 1]"));
        }
        Ok(())
    }
}

pub const DEFAULT_QLM_MU: f64 = 1000.0;

/// Term weighting used when averaging word vectors.
#[derive(Debug, Clone)]
pub enum TermWeighting {
    /// Plain mean.
    Uniform,
    /// Self-information `−ln(cf(t)/|C|)`; terms unseen in the collection get
    /// the largest observed weight.
    SelfInformation {
        weights: BTreeMap<String, f64>,
        unseen: f64,
    },
}

impl TermWeighting {
    pub fn self_information(index: &InvertedIndex) -> Self {
        let total = index.total_tokens() as f64;
        let weights: BTreeMap<String, f64> = index
            .collection_term_counts
            .iter()
            .map(|(t, &cf)| (t.clone(), -libm::log(cf as f64 / total)))
            .collect();
        let unseen = weights.values().copied().fold(0.0, f64::max);
        Self::SelfInformation { weights, unseen }
    }

    fn weight(&self, term: &str) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::SelfInformation { weights, unseen } => weights.get(term).copied().unwrap_or(*unseen),
        }
    }
}

/// Ranks documents by cosine between (weighted) mean word vectors. Document
/// representations are computed once at construction.
#[derive(Debug, Clone)]
pub struct EmbeddingRanker<'s> {
    store: &'s EmbeddingStore,
    weighting: TermWeighting,
    doc_ids: Vec<String>,
    doc_vectors: Vec<Option<Vec<f64>>>,
}

impl<'s> EmbeddingRanker<'s> {
    pub fn new<'a, I>(store: &'s EmbeddingStore, weighting: TermWeighting, docs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a BagOfWords)>,
    {
        let mut ranker = Self {
            store,
            weighting,
            doc_ids: Vec::new(),
            doc_vectors: Vec::new(),
        };
        for (id, bag) in docs {
            let v = ranker.represent(bag).map(|mut v| {
                let n = norm(&v);
                v.iter_mut().for_each(|x| *x /= n);
                v
            });
            ranker.doc_ids.push(id.into());
            ranker.doc_vectors.push(v);
        }
        ranker
    }

    /// Weighted mean of the resolvable token vectors; `None` when nothing
    /// resolves or the mean is the zero vector.
    pub fn represent(&self, bag: &BagOfWords) -> Option<Vec<f64>> {
        let mut acc = vec![0.0; self.store.dim()];
        let mut total = 0.0;
        for t in bag.iter() {
            if let Some(hit) = self.store.lookup(t) {
                let w = self.weighting.weight(t);
                acc.iter_mut()
                    .zip(hit.vector)
                    .for_each(|(a, &x)| *a += w * f64::from(x));
                total += w;
            }
        }
        if total <= 0.0 {
            return None;
        }
        acc.iter_mut().for_each(|a| *a /= total);
        (norm(&acc) > 0.0).then_some(acc)
    }

    pub fn score(&self, query_id: &str, q: &BagOfWords) -> Result<RankedList> {
        let qv = self.represent(q).ok_or(Error::QueryNotEmbeddable)?;
        let qn = norm(&qv);
        let scored = self
            .doc_ids
            .iter()
            .zip(&self.doc_vectors)
            .filter_map(|(id, v)| {
                v.as_ref()
                    .map(|v| (id.clone(), (dot(&qv, v) / qn).clamp(-1.0, 1.0)))
            })
            .collect();
        Ok(RankedList::from_scores(query_id, scored))
    }
}

/// All judged-relevant documents, best grade first, ties by ascending id.
pub fn perfect_engine(qrels: &Qrels, query_id: &str) -> Result<RankedList> {
    let judged = qrels
        .judged(query_id)
        .ok_or_else(|| Error::UnjudgedQuery(query_id.into()))?;
    let relevant: Vec<(String, f64)> = judged
        .iter()
        .filter(|(_, &g)| g > 0)
        .map(|(d, &g)| (d.clone(), f64::from(g)))
        .collect();
    if relevant.is_empty() {
        return Err(Error::NoRelevantDocuments(query_id.into()));
    }
    Ok(RankedList::from_scores(query_id, relevant))
}

/// `k` documents drawn uniformly without replacement, in draw order.
pub fn random_engine(query_id: &str, doc_ids: &[String], k: usize, seed: u64) -> Result<RankedList> {
    if k > doc_ids.len() {
        return Err(Error::SampleTooLarge {
            k,
            available: doc_ids.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, doc_ids.len(), k);
    let ordered = picks
        .iter()
        .enumerate()
        .map(|(i, d)| (doc_ids[d].clone(), (k - i) as f64))
        .collect();
    RankedList::from_ordered(query_id, ordered)
}
