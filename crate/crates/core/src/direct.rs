//! Direct stereotype analysis: documents classified by explicit mentions of
//! gendered people, and the per-query male/female representation gap of a
//! system compared with the perfect engine.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use alloc::collections::BTreeMap;

use crate::collection::RunSet;
use crate::data;
use crate::error::{Error, Result};
use crate::geometry::WordGenderedness;
use crate::gsr::Cutoff;
use crate::text::{query_genderedness, BagOfWords};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityLexicons {
    male: BTreeSet<String>,
    female: BTreeSet<String>,
}

impl EntityLexicons {
    pub fn new<I, J, S, T>(male: I, female: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let male: BTreeSet<String> = male.into_iter().map(|s| s.as_ref().to_lowercase()).collect();
        let female: BTreeSet<String> =
            female.into_iter().map(|s| s.as_ref().to_lowercase()).collect();
        if male.is_empty() || female.is_empty() {
            return Err(Error::InvalidParameter("entity lexicons must be non-empty"));
        }
        if !male.is_disjoint(&female) {
            return Err(Error::InvalidParameter("entity lexicons must be disjoint"));
        }
        Ok(Self { male, female })
    }

    /// Adds names (e.g. from a names corpus). Names present in both lists are
    /// ambiguous and are dropped from both.
    pub fn with_names<I, J, S, T>(mut self, male: I, female: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let m: BTreeSet<String> = male.into_iter().map(|s| s.as_ref().to_lowercase()).collect();
        let f: BTreeSet<String> = female.into_iter().map(|s| s.as_ref().to_lowercase()).collect();
        for name in m.difference(&f) {
            if !self.female.contains(name) {
                self.male.insert(name.clone());
            }
        }
        for name in f.difference(&m) {
            if !self.male.contains(name) {
                self.female.insert(name.clone());
            }
        }
        self
    }

    pub fn swapped(&self) -> Self {
        Self {
            male: self.female.clone(),
            female: self.male.clone(),
        }
    }

    pub fn male(&self) -> &BTreeSet<String> {
        &self.male
    }

    pub fn female(&self) -> &BTreeSet<String> {
        &self.female
    }
}

impl Default for EntityLexicons {
    fn default() -> Self {
        Self::new(
            data::word_lines(data::MALE_ENTITIES),
            data::word_lines(data::FEMALE_ENTITIES),
        )
        .expect("bundled lexicons are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Intrinsic {
    Male,
    Female,
    Neutral,
}

/// Strict majority of male versus female mentions; ties are neutral.
pub fn intrinsic_genderedness(doc: &BagOfWords, lex: &EntityLexicons) -> Intrinsic {
    let (mut m, mut f) = (0usize, 0usize);
    for t in doc.iter() {
        if lex.male.contains(t) {
            m += 1;
        } else if lex.female.contains(t) {
            f += 1;
        }
    }
    match m.cmp(&f) {
        core::cmp::Ordering::Greater => Intrinsic::Male,
        core::cmp::Ordering::Less => Intrinsic::Female,
        core::cmp::Ordering::Equal => Intrinsic::Neutral,
    }
}

/// Counts of intrinsically (male, female) documents.
pub fn count_intrinsic<'a, I>(docs: I, lex: &EntityLexicons) -> (usize, usize)
where
    I: IntoIterator<Item = &'a BagOfWords>,
{
    docs.into_iter()
        .fold((0, 0), |(m, f), d| match intrinsic_genderedness(d, lex) {
            Intrinsic::Male => (m + 1, f),
            Intrinsic::Female => (m, f + 1),
            Intrinsic::Neutral => (m, f),
        })
}

pub const DEFAULT_GAP_EPSILON: f64 = 0.5;

/// Smoothed representation gap `(m + ε) / (f + ε)`.
pub fn gap(m: usize, f: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("gap smoothing must be positive"));
    }
    Ok((m as f64 + epsilon) / (f as f64 + epsilon))
}

/// Unsmoothed `m / f`, undefined when `f = 0`.
pub fn raw_gap(m: usize, f: usize) -> Option<f64> {
    (f > 0).then(|| m as f64 / f as f64)
}

/// Per-query intrinsic counts for a system and for the perfect engine.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryGapInput {
    pub query_id: String,
    pub gq: f64,
    pub system: (usize, usize),
    pub perfect: (usize, usize),
}

/// Per-query intrinsic counts for a system run and a reference run, each
/// list cut by `cutoff`. Both runs must cover exactly the same queries.
/// Queries whose genderedness is undefined cannot be binned; their ids are
/// returned separately.
///
/// `queries` carry the bags used for `g(q)`; `entity_docs` are tokenized
/// without stop words so that pronouns count.
pub fn gap_inputs<G: WordGenderedness + ?Sized>(
    system: &RunSet,
    reference: &RunSet,
    queries: &[(String, BagOfWords)],
    entity_docs: &BTreeMap<String, BagOfWords>,
    lex: &EntityLexicons,
    scorer: &G,
    cutoff: Cutoff<'_>,
) -> Result<(Vec<QueryGapInput>, Vec<String>)> {
    let a: BTreeSet<&str> = system.query_ids().collect();
    let b: BTreeSet<&str> = reference.query_ids().collect();
    if let Some(q) = a.symmetric_difference(&b).next() {
        return Err(Error::QueryMismatch(String::from(*q)));
    }
    let mut inputs = Vec::new();
    let mut undefined = Vec::new();
    for (qid, bag) in queries {
        let (Some(sys), Some(perf)) = (system.get(qid), reference.get(qid)) else {
            continue;
        };
        let Some(gq) = query_genderedness(bag, scorer) else {
            undefined.push(qid.clone());
            continue;
        };
        let count = |list: &crate::collection::RankedList| {
            let cut = list.truncate_to_k(cutoff.k_for(qid, list.len()));
            count_intrinsic(cut.doc_ids().filter_map(|d| entity_docs.get(d)), lex)
        };
        inputs.push(QueryGapInput {
            query_id: qid.clone(),
            gq,
            system: count(sys),
            perfect: count(perf),
        });
    }
    Ok((inputs, undefined))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRecord {
    pub query_id: String,
    pub gq: f64,
    pub m: usize,
    pub f: usize,
    pub gap: f64,
    /// Unsmoothed Δgap when both raw ratios are defined.
    pub raw_delta: Option<f64>,
    /// Sign of the smoothed Δgap: +1 favors male documents.
    pub delta_gap_sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinRow {
    /// `None` is unbounded.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n_queries: usize,
    /// Percentages; `None` for an empty bin.
    pub pct_male: Option<f64>,
    pub pct_female: Option<f64>,
    pub pct_neutral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaGapTable {
    pub records: Vec<GapRecord>,
    pub bins: Vec<BinRow>,
}

pub const DEFAULT_BIN_EDGES: [f64; 5] = [-0.1, -0.05, 0.0, 0.05, 0.1];

/// Bins queries by `g(q)` over intervals `(lo, hi]` delimited by `edges`
/// (with unbounded outer bins) and reports, per bin, the share of queries
/// where the system over-represents male, female, or neither.
pub fn delta_gap_analysis(inputs: &[QueryGapInput], edges: &[f64], epsilon: f64) -> Result<DeltaGapTable> {
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("bin edges must be strictly increasing"));
    }
    let mut records = Vec::with_capacity(inputs.len());
    for q in inputs {
        let sys = gap(q.system.0, q.system.1, epsilon)?;
        let perf = gap(q.perfect.0, q.perfect.1, epsilon)?;
        let delta = sys - perf;
        let tol = 1e-12 * (sys.abs() + perf.abs());
        let sign = if delta > tol {
            1
        } else if delta < -tol {
            -1
        } else {
            0
        };
        let raw_delta = match (raw_gap(q.system.0, q.system.1), raw_gap(q.perfect.0, q.perfect.1)) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        records.push(GapRecord {
            query_id: q.query_id.clone(),
            gq: q.gq,
            m: q.system.0,
            f: q.system.1,
            gap: sys,
            raw_delta,
            delta_gap_sign: sign,
        });
    }

    let mut bounds: Vec<(Option<f64>, Option<f64>)> = Vec::with_capacity(edges.len() + 1);
    let mut lo = None;
    for &e in edges {
        bounds.push((lo, Some(e)));
        lo = Some(e);
    }
    bounds.push((lo, None));

    let bins = bounds
        .into_iter()
        .map(|(lo, hi)| {
            let inside: Vec<&GapRecord> = records
                .iter()
                .filter(|r| lo.is_none_or(|l| r.gq > l) && hi.is_none_or(|h| r.gq <= h))
                .collect();
            let n = inside.len();
            let pct = |s: i8| {
                (n > 0).then(|| 100.0 * inside.iter().filter(|r| r.delta_gap_sign == s).count() as f64 / n as f64)
            };
            BinRow {
                lo,
                hi,
                n_queries: n,
                pct_male: pct(1),
                pct_female: pct(-1),
                pct_neutral: pct(0),
            }
        })
        .collect();
    Ok(DeltaGapTable { records, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn bag(t: &[&str]) -> BagOfWords {
        BagOfWords::from_tokens(t.iter().copied())
    }

    #[test]
    fn classification() {
        let lex = EntityLexicons::default();
        assert_eq!(intrinsic_genderedness(&bag(&["he", "he", "she"]), &lex), Intrinsic::Male);
        assert_eq!(intrinsic_genderedness(&bag(&["nurse", "plumber"]), &lex), Intrinsic::Neutral);
        assert_eq!(intrinsic_genderedness(&bag(&["aunt"]), &lex), Intrinsic::Female);
        assert_eq!(intrinsic_genderedness(&bag(&["pregnancy"]), &lex), Intrinsic::Neutral);
        assert_eq!(intrinsic_genderedness(&bag(&["he", "she"]), &lex), Intrinsic::Neutral);
    }

    #[test]
    fn swapping_lexicons_swaps_labels() {
        let lex = EntityLexicons::default();
        let sw = lex.swapped();
        for d in [bag(&["he", "man", "she"]), bag(&["wife"]), bag(&["tree"])] {
            let a = intrinsic_genderedness(&d, &lex);
            let b = intrinsic_genderedness(&d, &sw);
            let flipped = match a {
                Intrinsic::Male => Intrinsic::Female,
                Intrinsic::Female => Intrinsic::Male,
                Intrinsic::Neutral => Intrinsic::Neutral,
            };
            assert_eq!(b, flipped);
        }
    }

    #[test]
    fn lexicon_validation_and_names() {
        assert!(EntityLexicons::new(["a"], ["a"]).is_err());
        assert!(EntityLexicons::new(Vec::<&str>::new(), ["a"]).is_err());
        let lex = EntityLexicons::default().with_names(["John", "Kim"], ["Mary", "Kim"]);
        assert!(lex.male().contains("john"));
        assert!(lex.female().contains("mary"));
        assert!(!lex.male().contains("kim") && !lex.female().contains("kim"));
    }

    #[test]
    fn gap_arithmetic() {
        assert_eq!(gap(3, 0, 0.5).unwrap(), 7.0);
        assert_eq!(raw_gap(4, 2), Some(2.0));
        assert_eq!(raw_gap(4, 0), None);
        assert!(gap(1, 1, 0.0).is_err());
        // Converges to the raw ratio as epsilon shrinks.
        let mut prev = f64::INFINITY;
        for eps in [0.5, 0.05, 0.005, 0.0005] {
            let err = (gap(5, 3, eps).unwrap() - 5.0 / 3.0).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    fn input(id: &str, gq: f64, sys: (usize, usize), perf: (usize, usize)) -> QueryGapInput {
        QueryGapInput {
            query_id: id.to_string(),
            gq,
            system: sys,
            perfect: perf,
        }
    }

    #[test]
    fn identical_runs_are_neutral() {
        let inputs = vec![
            input("1", -0.07, (2, 1), (2, 1)),
            input("2", 0.02, (0, 0), (0, 0)),
            input("3", 0.2, (1, 4), (1, 4)),
        ];
        let t = delta_gap_analysis(&inputs, &DEFAULT_BIN_EDGES, 0.5).unwrap();
        for b in &t.bins {
            if b.n_queries > 0 {
                assert_eq!(b.pct_neutral, Some(100.0));
            } else {
                assert_eq!(b.pct_neutral, None);
            }
        }
        assert_eq!(t.bins.len(), 6);
        assert_eq!(t.bins[0].n_queries, 0);
        assert_eq!(t.bins[0].pct_male, None);
    }

    #[test]
    fn four_query_recount() {
        // g(q) bins with edges [0]: (-inf, 0], (0, inf)
        let inputs = vec![
            input("a", -0.3, (3, 1), (1, 1)), // sys 3.5/1.5 > 1.5/1.5 -> male
            input("b", -0.1, (1, 1), (1, 1)), // neutral
            input("c", 0.0, (0, 2), (1, 1)),  // 0.5/2.5 < 1 -> female; 0 lies in (-inf, 0]
            input("d", 0.4, (0, 3), (2, 2)),  // female
        ];
        let t = delta_gap_analysis(&inputs, &[0.0], 0.5).unwrap();
        let signs: Vec<i8> = t.records.iter().map(|r| r.delta_gap_sign).collect();
        assert_eq!(signs, vec![1, 0, -1, -1]);
        let b0 = &t.bins[0];
        assert_eq!(b0.n_queries, 3);
        let third = 100.0 / 3.0;
        assert!((b0.pct_male.unwrap() - third).abs() < 1e-12);
        assert!((b0.pct_female.unwrap() - third).abs() < 1e-12);
        assert!((b0.pct_neutral.unwrap() - third).abs() < 1e-12);
        let b1 = &t.bins[1];
        assert_eq!((b1.n_queries, b1.pct_female), (1, Some(100.0)));
        for b in &t.bins {
            let s = b.pct_male.unwrap() + b.pct_female.unwrap() + b.pct_neutral.unwrap();
            assert!((s - 100.0).abs() < 1e-9);
        }
        assert_eq!(t.records[0].raw_delta, Some(2.0));
    }
}
