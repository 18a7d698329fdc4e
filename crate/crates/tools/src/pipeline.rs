//! Audit pipeline over a TREC-style collection: tokenize, retrieve, measure.

use std::collections::{BTreeMap, BTreeSet};

use gsr_core::engines::{
    random_engine, Bm25Params, EmbeddingRanker, InvertedIndex, TermWeighting, DEFAULT_QLM_MU,
};
use gsr_core::geometry::genderedness;
use gsr_core::metrics::{average_precision, kendall_tau_distance, ndcg_at, precision_at};
use gsr_core::text::{query_genderedness, tokenize};
use gsr_core::{
    BagOfWords, Document, EmbeddingStore, Error, GenderDirection, Qrels, RankedList, RunSet, StopList,
    Topic,
};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EngineKind {
    Tfidf,
    Bm25,
    Qlm,
    EmbAdd,
    EmbSi,
    Perfect,
    Random,
    Runfile,
}

impl EngineKind {
    pub fn uses_embeddings(self) -> bool {
        matches!(self, EngineKind::EmbAdd | EngineKind::EmbSi)
    }
}

/// A tokenized collection.
pub struct Corpus {
    pub topics: Vec<Topic>,
    pub queries: Vec<(String, BagOfWords)>,
    pub doc_ids: Vec<String>,
    pub docs: BTreeMap<String, BagOfWords>,
    pub qrels: Qrels,
}

impl Corpus {
    pub fn new(topics: Vec<Topic>, documents: &[Document], qrels: Qrels, stops: &StopList) -> Self {
        let queries = topics
            .iter()
            .map(|t| (t.id.clone(), tokenize(&t.title, stops)))
            .collect();
        let bags: Vec<(String, BagOfWords)> = documents
            .par_iter()
            .map(|d| (d.id.clone(), tokenize(&d.text, stops)))
            .collect();
        let doc_ids = bags.iter().map(|(id, _)| id.clone()).collect();
        Self {
            topics,
            queries,
            doc_ids,
            docs: bags.into_iter().collect(),
            qrels,
        }
    }

    /// Every distinct token of queries and documents.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        let mut v: BTreeSet<&str> = self.docs.values().flat_map(|b| b.iter()).collect();
        v.extend(self.queries.iter().flat_map(|(_, b)| b.iter()));
        v
    }

    pub fn index(&self) -> gsr_core::Result<InvertedIndex> {
        InvertedIndex::build(self.doc_ids.iter().map(|id| (id.as_str(), &self.docs[id])))
    }
}

/// Genderedness of every vocabulary word, computed in parallel.
pub fn genderedness_table(
    store: &EmbeddingStore,
    direction: &GenderDirection,
    vocabulary: &BTreeSet<&str>,
) -> BTreeMap<String, f64> {
    let words: Vec<&str> = vocabulary.iter().copied().collect();
    words
        .par_iter()
        .filter_map(|w| genderedness(store, direction, w).map(|g| (w.to_string(), g)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub struct RetrievalOptions {
    pub depth: usize,
    pub seed: u64,
    pub bm25: Bm25Params,
    pub mu: f64,
}

impl Default for RetrievalOptions {
    fn default() -> Self {
        Self {
            depth: 1000,
            seed: 42,
            bm25: Bm25Params::default(),
            mu: DEFAULT_QLM_MU,
        }
    }
}

/// Runs an engine over every query. `store` is needed by the embedding
/// engines; `run` supplies the lists for `Runfile`. Queries an engine cannot
/// answer are left out of the run and logged.
pub fn retrieve(
    kind: EngineKind,
    corpus: &Corpus,
    store: Option<&EmbeddingStore>,
    run: Option<&RunSet>,
    options: &RetrievalOptions,
) -> anyhow::Result<RunSet> {
    let depth = options.depth;
    let lists: Vec<Option<RankedList>> = match kind {
        EngineKind::Runfile => {
            let run = run.ok_or_else(|| anyhow::anyhow!("the runfile engine needs --run"))?;
            corpus
                .queries
                .iter()
                .map(|(q, _)| run.get(q).map(|l| l.truncate_to_k(depth)))
                .collect()
        }
        EngineKind::Perfect => corpus
            .queries
            .iter()
            .map(|(q, _)| gsr_core::engines::perfect_engine(&corpus.qrels, q).ok())
            .collect(),
        EngineKind::Random => {
            let k = depth.min(corpus.doc_ids.len());
            corpus
                .queries
                .par_iter()
                .enumerate()
                .map(|(i, (q, _))| random_engine(q, &corpus.doc_ids, k, options.seed.wrapping_add(i as u64)).ok())
                .collect()
        }
        EngineKind::Tfidf | EngineKind::Bm25 | EngineKind::Qlm => {
            let index = corpus.index()?;
            corpus
                .queries
                .par_iter()
                .map(|(q, bag)| {
                    let list = match kind {
                        EngineKind::Tfidf => Ok(index.score_tfidf(q, bag)),
                        EngineKind::Bm25 => index.score_bm25(q, bag, options.bm25),
                        _ => index.score_qlm(q, bag, options.mu),
                    };
                    list.ok().map(|l| l.truncate_to_k(depth))
                })
                .collect()
        }
        EngineKind::EmbAdd | EngineKind::EmbSi => {
            let store = store.ok_or_else(|| anyhow::anyhow!("embedding engines need embeddings"))?;
            let weighting = if kind == EngineKind::EmbSi {
                TermWeighting::self_information(&corpus.index()?)
            } else {
                TermWeighting::Uniform
            };
            let ranker = EmbeddingRanker::new(
                store,
                weighting,
                corpus.doc_ids.iter().map(|id| (id.as_str(), &corpus.docs[id])),
            );
            corpus
                .queries
                .par_iter()
                .map(|(q, bag)| match ranker.score(q, bag) {
                    Ok(l) => Some(l.truncate_to_k(depth)),
                    Err(Error::QueryNotEmbeddable) => {
                        log::warn!("query {q}: no token has a vector, skipped");
                        None
                    }
                    Err(e) => {
                        log::warn!("query {q}: {e}");
                        None
                    }
                })
                .collect()
        }
    };
    Ok(lists.into_iter().flatten().collect())
}

pub const METRIC_NAMES: [&str; 3] = ["AP", "P@10", "nDCG@100"];

/// AP, P@10 and nDCG@100 for every judged query that has at least one
/// relevant document.
pub fn effectiveness(run: &RunSet, corpus: &Corpus) -> Vec<(String, Vec<f64>)> {
    corpus
        .queries
        .iter()
        .filter(|(q, _)| corpus.qrels.relevant_count(q) > 0)
        .map(|(q, _)| {
            let empty = RankedList::empty(q.as_str());
            let list = run.get(q).unwrap_or(&empty);
            let vals = vec![
                average_precision(list, &corpus.qrels, q).unwrap_or(0.0),
                precision_at(list, &corpus.qrels, q, 10).unwrap_or(0.0),
                ndcg_at(list, &corpus.qrels, q, 100).unwrap_or(0.0),
            ];
            (q.clone(), vals)
        })
        .collect()
}

/// Per-query Kendall tau distance between two runs over the top `k`, with
/// `|g(q)|` for correlating rank disruption with query genderedness.
pub fn kendall_rows(
    before: &RunSet,
    after: &RunSet,
    corpus: &Corpus,
    scorer: &BTreeMap<String, f64>,
    k: usize,
) -> Vec<(String, f64, f64)> {
    corpus
        .queries
        .iter()
        .filter_map(|(q, bag)| {
            let (a, b) = (before.get(q)?, after.get(q)?);
            let g = query_genderedness(bag, scorer)?;
            Some((q.clone(), g.abs(), kendall_tau_distance(a, b, k)))
        })
        .collect()
}
