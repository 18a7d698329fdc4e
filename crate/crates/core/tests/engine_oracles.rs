//! Each engine against a dense, from-scratch recomputation over a small
//! vocabulary-by-document count matrix.

use std::collections::BTreeMap;

use gsr_core::engines::{Bm25Params, EmbeddingRanker, InvertedIndex, TermWeighting, DEFAULT_QLM_MU};
use gsr_core::text::{tokenize, BagOfWords, StopList};
use gsr_core::{EmbeddingStore, RankedList};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DOCS: [(&str, &str); 5] = [
    ("d1", "the nurse helped the patient and the nurse smiled"),
    ("d2", "a plumber fixed the pipe"),
    ("d3", "nurse plumber nurse plumber doctor"),
    ("d4", "the doctor examined the patient carefully"),
    ("d5", "pipe pipe pipe water water"),
];

struct Dense {
    ids: Vec<String>,
    vocab: Vec<String>,
    /// counts[doc][term]
    counts: Vec<Vec<f64>>,
}

impl Dense {
    fn new(docs: &[(String, BagOfWords)]) -> Self {
        let mut vocab: Vec<String> = docs.iter().flat_map(|(_, b)| b.tokens().to_vec()).collect();
        vocab.sort();
        vocab.dedup();
        let counts = docs
            .iter()
            .map(|(_, b)| {
                vocab
                    .iter()
                    .map(|t| b.iter().filter(|x| x == t).count() as f64)
                    .collect()
            })
            .collect();
        Self {
            ids: docs.iter().map(|(id, _)| id.clone()).collect(),
            vocab,
            counts,
        }
    }

    fn n(&self) -> f64 {
        self.ids.len() as f64
    }

    fn df(&self, t: usize) -> f64 {
        self.counts.iter().filter(|row| row[t] > 0.0).count() as f64
    }

    fn qvec(&self, q: &BagOfWords) -> Vec<f64> {
        self.vocab
            .iter()
            .map(|t| q.iter().filter(|x| x == t).count() as f64)
            .collect()
    }

    fn tfidf(&self, q: &BagOfWords) -> BTreeMap<String, f64> {
        let idf: Vec<f64> = (0..self.vocab.len())
            .map(|t| (self.n() / self.df(t)).ln())
            .collect();
        let qv: Vec<f64> = self.qvec(q).iter().zip(&idf).map(|(a, b)| a * b).collect();
        let qn = qv.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut out = BTreeMap::new();
        for (i, row) in self.counts.iter().enumerate() {
            let dv: Vec<f64> = row.iter().zip(&idf).map(|(a, b)| a * b).collect();
            let dn = dv.iter().map(|x| x * x).sum::<f64>().sqrt();
            let s = qv.iter().zip(&dv).map(|(a, b)| a * b).sum::<f64>() / (qn * dn);
            if s > 0.0 {
                out.insert(self.ids[i].clone(), s);
            }
        }
        out
    }

    fn bm25(&self, q: &BagOfWords, k1: f64, b: f64) -> BTreeMap<String, f64> {
        let lens: Vec<f64> = self.counts.iter().map(|r| r.iter().sum()).collect();
        let avg = lens.iter().sum::<f64>() / self.n();
        let mut out = BTreeMap::new();
        for (i, row) in self.counts.iter().enumerate() {
            let mut s = 0.0;
            let mut any = false;
            for qt in q.iter() {
                let Some(t) = self.vocab.iter().position(|v| v == qt) else { continue };
                let df = self.df(t);
                let idf = ((self.n() - df + 0.5) / (df + 0.5) + 1.0).ln();
                let tf = row[t];
                if tf > 0.0 {
                    any = true;
                }
                s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * lens[i] / avg));
            }
            if any {
                out.insert(self.ids[i].clone(), s);
            }
        }
        out
    }

    fn qlm(&self, q: &BagOfWords, mu: f64) -> BTreeMap<String, f64> {
        let total: f64 = self.counts.iter().flatten().sum();
        let mut out = BTreeMap::new();
        for (i, row) in self.counts.iter().enumerate() {
            let dl: f64 = row.iter().sum();
            let mut s = 0.0;
            let mut any = false;
            for qt in q.iter() {
                let Some(t) = self.vocab.iter().position(|v| v == qt) else { continue };
                let cf: f64 = self.counts.iter().map(|r| r[t]).sum();
                if row[t] > 0.0 {
                    any = true;
                }
                s += ((row[t] + mu * cf / total) / (dl + mu)).ln();
            }
            if any {
                out.insert(self.ids[i].clone(), s);
            }
        }
        out
    }
}

fn bags(stops: &StopList) -> Vec<(String, BagOfWords)> {
    DOCS.iter()
        .map(|(id, t)| (id.to_string(), tokenize(t, stops)))
        .collect()
}

fn index(b: &[(String, BagOfWords)]) -> InvertedIndex {
    InvertedIndex::build(b.iter().map(|(id, bag)| (id.as_str(), bag))).unwrap()
}

fn as_map(l: &RankedList) -> BTreeMap<String, f64> {
    l.items().iter().map(|i| (i.doc_id.clone(), i.score)).collect()
}

fn assert_close(got: &BTreeMap<String, f64>, want: &BTreeMap<String, f64>) {
    assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
    for (k, v) in want {
        assert!((got[k] - v).abs() < 1e-12, "{k}: {} vs {v}", got[k]);
    }
}

fn queries() -> Vec<BagOfWords> {
    ["nurse", "plumber pipe", "nurse nurse patient", "doctor water unknownterm", "pipe"]
        .iter()
        .map(|q| tokenize(q, &StopList::default()))
        .collect()
}

#[test]
fn lexical_engines_match_dense_recomputation() {
    let b = bags(&StopList::default());
    let idx = index(&b);
    let dense = Dense::new(&b);
    for q in queries() {
        assert_close(&as_map(&idx.score_tfidf("q", &q)), &dense.tfidf(&q));
        let bm = idx.score_bm25("q", &q, Bm25Params::default()).unwrap();
        assert_close(&as_map(&bm), &dense.bm25(&q, 1.2, 0.75));
        let ql = idx.score_qlm("q", &q, DEFAULT_QLM_MU).unwrap();
        assert_close(&as_map(&ql), &dense.qlm(&q, 1000.0));
    }
}

#[test]
fn rankings_are_sorted_with_id_tiebreak() {
    let b = bags(&StopList::default());
    let idx = index(&b);
    for q in queries() {
        let l = idx.score_bm25("q", &q, Bm25Params::default()).unwrap();
        for w in l.items().windows(2) {
            assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].doc_id < w[1].doc_id));
        }
        let ranks: Vec<usize> = l.items().iter().map(|i| i.rank).collect();
        assert_eq!(ranks, (1..=l.len()).collect::<Vec<_>>());
    }
}

fn toy_store() -> EmbeddingStore {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut s = EmbeddingStore::new(4, "toy").unwrap();
    for w in ["nurse", "patient", "plumber", "pipe", "doctor", "water", "helped", "smiled", "fixed"] {
        let v: Vec<f32> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        s.insert(w, &v).unwrap();
    }
    s
}

fn mean_vec(store: &EmbeddingStore, bag: &BagOfWords, w: &dyn Fn(&str) -> f64) -> Option<Vec<f64>> {
    let mut acc = vec![0.0; store.dim()];
    let mut tot = 0.0;
    for t in bag.iter() {
        if let Some(h) = store.lookup(t) {
            let wt = w(t);
            for (a, x) in acc.iter_mut().zip(h.vector) {
                *a += wt * f64::from(*x);
            }
            tot += wt;
        }
    }
    (tot > 0.0).then(|| acc.iter().map(|a| a / tot).collect())
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    d / (na * nb)
}

#[test]
fn embedding_engines_match_dense_recomputation() {
    let store = toy_store();
    let b = bags(&StopList::default());
    let idx = index(&b);
    let total: f64 = b.iter().map(|(_, x)| x.len() as f64).sum();
    let cf = |t: &str| b.iter().map(|(_, x)| x.iter().filter(|y| *y == t).count()).sum::<usize>() as f64;
    let max_si = b
        .iter()
        .flat_map(|(_, x)| x.iter())
        .map(|t| -(cf(t) / total).ln())
        .fold(0.0, f64::max);
    let si = |t: &str| {
        let c = cf(t);
        if c > 0.0 {
            -(c / total).ln()
        } else {
            max_si
        }
    };
    let uniform = |_: &str| 1.0;

    let add = EmbeddingRanker::new(&store, TermWeighting::Uniform, b.iter().map(|(i, x)| (i.as_str(), x)));
    let siw = EmbeddingRanker::new(
        &store,
        TermWeighting::self_information(&idx),
        b.iter().map(|(i, x)| (i.as_str(), x)),
    );
    for q in queries() {
        for (ranker, w) in [(&add, &uniform as &dyn Fn(&str) -> f64), (&siw, &si as &dyn Fn(&str) -> f64)] {
            let got = as_map(&ranker.score("q", &q).unwrap());
            let qv = mean_vec(&store, &q, w).unwrap();
            let want: BTreeMap<String, f64> = b
                .iter()
                .filter_map(|(id, d)| mean_vec(&store, d, w).map(|dv| (id.clone(), cos(&qv, &dv))))
                .collect();
            assert_close(&got, &want);
        }
    }
}

#[test]
fn self_information_cancels_for_single_term_queries() {
    // With one query type the query weight divides out, so both embedding
    // engines agree on the query side.
    let store = toy_store();
    let b = bags(&StopList::default());
    let idx = index(&b);
    let si = EmbeddingRanker::new(&store, TermWeighting::self_information(&idx), std::iter::empty());
    let add = EmbeddingRanker::new(&store, TermWeighting::Uniform, std::iter::empty());
    let q = tokenize("nurse nurse", &StopList::default());
    let a = si.represent(&q).unwrap();
    let c = add.represent(&q).unwrap();
    for (x, y) in a.iter().zip(&c) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn uniform_frequencies_reduce_si_to_add() {
    let store = toy_store();
    let docs: Vec<(String, BagOfWords)> = [("a", "nurse patient"), ("b", "plumber pipe"), ("c", "doctor water")]
        .iter()
        .map(|(i, t)| (i.to_string(), tokenize(t, &StopList::empty())))
        .collect();
    let idx = index(&docs);
    let it = || docs.iter().map(|(i, x)| (i.as_str(), x));
    let si = EmbeddingRanker::new(&store, TermWeighting::self_information(&idx), it());
    let add = EmbeddingRanker::new(&store, TermWeighting::Uniform, it());
    let q = tokenize("nurse pipe water", &StopList::empty());
    assert_close(&as_map(&si.score("q", &q).unwrap()), &as_map(&add.score("q", &q).unwrap()));
}

#[test]
fn index_statistics_match_recount_on_fifty_documents() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"];
    let docs: Vec<(String, BagOfWords)> = (0..50)
        .map(|i| {
            let len = rng.gen_range(0..12);
            let toks: Vec<&str> = (0..len).map(|_| words[rng.gen_range(0..words.len())]).collect();
            (format!("doc{i:02}"), BagOfWords::from_tokens(toks))
        })
        .collect();
    let idx = index(&docs);
    assert_eq!(idx.doc_count(), 50);
    let total: usize = docs.iter().map(|(_, b)| b.len()).sum();
    assert_eq!(idx.total_tokens(), total as u64);
    assert!((idx.avg_doc_length() - total as f64 / 50.0).abs() < 1e-12);
    for w in words {
        let df = docs.iter().filter(|(_, b)| b.iter().any(|t| t == w)).count();
        let cf: usize = docs.iter().map(|(_, b)| b.iter().filter(|t| *t == w).count()).sum();
        assert_eq!(idx.document_frequency(w), df, "{w}");
        assert_eq!(idx.collection_count(w), cf as u64, "{w}");
        for p in idx.postings(w) {
            let (_, bag) = &docs[p.doc as usize];
            assert_eq!(p.tf as usize, bag.iter().filter(|t| *t == w).count());
        }
    }
    assert!(InvertedIndex::build([("x", &docs[0].1), ("x", &docs[1].1)]).is_err());
}
