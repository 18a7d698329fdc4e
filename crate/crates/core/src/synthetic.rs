//! Toy and synthetic collections built from gender-skewed occupations, the
//! simulated stereotypical / neutral / counter-stereotypical engines, and the
//! sampling experiment relating GSR to the share of stereotypical documents.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collection::{Document, RankedList, RunSet, Topic};
use crate::data;
use crate::error::{Error, Result};
use crate::geometry::WordGenderedness;
use crate::gsr::{
    decompose_slope, gsr_slope, is_stereotypical, measure_run, Cutoff, GsrPoint, GsrResult,
    ScoredList,
};
use crate::stats::{pearson, Correlation};
use crate::text::{document_genderedness, query_genderedness, tokenize, BagOfWords, StopList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Polarity {
    Male,
    Female,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub name: String,
    pub pct_female: f64,
    pub pct_male: f64,
}

/// Female- and male-dominated occupations.
#[derive(Debug, Clone, PartialEq)]
pub struct JobTable {
    female: Vec<Job>,
    male: Vec<Job>,
}

impl JobTable {
    pub fn new(female: Vec<Job>, male: Vec<Job>) -> Result<Self> {
        if female.is_empty() || male.is_empty() {
            return Err(Error::InvalidParameter("job table needs both groups"));
        }
        let mut seen = BTreeSet::new();
        for j in female.iter().chain(&male) {
            if j.name.is_empty() || j.name.chars().any(|c| !c.is_alphanumeric()) {
                return Err(Error::InvalidParameter("job names must be single words"));
            }
            if !seen.insert(j.name.to_lowercase()) {
                return Err(Error::DuplicateToken(j.name.clone()));
            }
            let ok = (0.0..=100.0).contains(&j.pct_female)
                && (0.0..=100.0).contains(&j.pct_male)
                && (j.pct_female + j.pct_male - 100.0).abs() < 1e-6;
            if !ok {
                return Err(Error::InvalidParameter("job shares must sum to 100"));
            }
        }
        Ok(Self { female, male })
    }

    pub fn female(&self) -> &[Job] {
        &self.female
    }

    pub fn male(&self) -> &[Job] {
        &self.male
    }

    /// Male jobs first, then female jobs, each in table order.
    pub fn iter(&self) -> impl Iterator<Item = (&Job, Polarity)> {
        self.male
            .iter()
            .map(|j| (j, Polarity::Male))
            .chain(self.female.iter().map(|j| (j, Polarity::Female)))
    }

    pub fn polarity(&self, name: &str) -> Option<Polarity> {
        self.iter().find(|(j, _)| j.name == name).map(|(_, p)| p)
    }

    pub fn len(&self) -> usize {
        self.female.len() + self.male.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for JobTable {
    fn default() -> Self {
        let conv = |rows: &[(&str, f64, f64)]| {
            rows.iter()
                .map(|&(n, f, m)| Job {
                    name: n.to_string(),
                    pct_female: f,
                    pct_male: m,
                })
                .collect()
        };
        Self::new(conv(&data::FEMALE_JOBS), conv(&data::MALE_JOBS)).expect("bundled jobs are valid")
    }
}

/// Agentic (male-associated) and communal (female-associated) adjectives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitTable {
    agency: Vec<String>,
    communion: Vec<String>,
}

impl TraitTable {
    pub fn new(agency: Vec<String>, communion: Vec<String>) -> Result<Self> {
        if agency.is_empty() || communion.is_empty() {
            return Err(Error::InvalidParameter("trait table needs both groups"));
        }
        let mut seen = BTreeSet::new();
        for a in agency.iter().chain(&communion) {
            if !seen.insert(a.to_lowercase()) {
                return Err(Error::DuplicateToken(a.clone()));
            }
        }
        Ok(Self { agency, communion })
    }

    pub fn agency(&self) -> &[String] {
        &self.agency
    }

    pub fn communion(&self) -> &[String] {
        &self.communion
    }

    fn for_polarity(&self, p: Polarity) -> &[String] {
        match p {
            Polarity::Male => &self.agency,
            Polarity::Female => &self.communion,
        }
    }
}

impl Default for TraitTable {
    fn default() -> Self {
        Self::new(
            data::AGENCY.iter().map(|s| s.to_string()).collect(),
            data::COMMUNION.iter().map(|s| s.to_string()).collect(),
        )
        .expect("bundled traits are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SimEngineKind {
    Stereotypical,
    Neutral,
    CounterStereotypical,
}

impl SimEngineKind {
    pub const ALL: [SimEngineKind; 3] = [
        SimEngineKind::Stereotypical,
        SimEngineKind::Neutral,
        SimEngineKind::CounterStereotypical,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SimEngineKind::Stereotypical => "S",
            SimEngineKind::Neutral => "N",
            SimEngineKind::CounterStereotypical => "CS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Toy,
    Synthetic,
}

/// A generated collection: one topic per job and templated documents.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCollection {
    pub shape: Shape,
    pub topics: Vec<Topic>,
    pub documents: Vec<Document>,
}

impl SimCollection {
    /// Tokenized queries and documents, ready for scoring.
    pub fn bags(&self, stops: &StopList) -> (Vec<(String, BagOfWords)>, BTreeMap<String, BagOfWords>) {
        let queries = self
            .topics
            .iter()
            .map(|t| (t.id.clone(), tokenize(&t.title, stops)))
            .collect();
        let docs = self
            .documents
            .iter()
            .map(|d| (d.id.clone(), tokenize(&d.text, stops)))
            .collect();
        (queries, docs)
    }
}

pub const PERSONS: [(&str, Polarity); 2] = [("man", Polarity::Male), ("woman", Polarity::Female)];

fn person_for(p: Polarity) -> &'static str {
    match p {
        Polarity::Male => "man",
        Polarity::Female => "woman",
    }
}

fn opposite(p: Polarity) -> Polarity {
    match p {
        Polarity::Male => Polarity::Female,
        Polarity::Female => Polarity::Male,
    }
}

/// 20 one-word queries and a "The <person> is a <job>" document per person.
pub fn build_toy_collection(jobs: &JobTable) -> SimCollection {
    let mut topics = Vec::with_capacity(jobs.len());
    let mut documents = Vec::with_capacity(jobs.len() * 2);
    for (job, _) in jobs.iter() {
        topics.push(Topic::new(job.name.clone(), job.name.clone()));
        for (person, _) in PERSONS {
            documents.push(Document::new(
                format!("{}_{}", job.name, person),
                format!("The {} is a {}", person, job.name),
            ));
        }
    }
    SimCollection {
        shape: Shape::Toy,
        topics,
        documents,
    }
}

/// One "The <job> is <adjective>" document per job and adjective.
pub fn build_synthetic_collection(jobs: &JobTable, traits: &TraitTable) -> SimCollection {
    let mut topics = Vec::with_capacity(jobs.len());
    let mut documents = Vec::new();
    for (job, _) in jobs.iter() {
        topics.push(Topic::new(job.name.clone(), job.name.clone()));
        for adj in traits.agency.iter().chain(&traits.communion) {
            documents.push(Document::new(
                format!("{}_{}", job.name, adj),
                format!("The {} is {}", job.name, adj),
            ));
        }
    }
    SimCollection {
        shape: Shape::Synthetic,
        topics,
        documents,
    }
}

fn ranked(query_id: &str, ids: Vec<String>) -> RankedList {
    let n = ids.len();
    let scored = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id, (n - i) as f64))
        .collect();
    RankedList::from_ordered(query_id, scored).expect("generated ids are unique")
}

/// Runs a simulated engine over a generated collection.
pub fn simulate_engine(
    kind: SimEngineKind,
    collection: &SimCollection,
    jobs: &JobTable,
    traits: &TraitTable,
) -> Result<RunSet> {
    let ids: BTreeSet<&str> = collection.documents.iter().map(|d| d.id.as_str()).collect();
    let mut run = RunSet::new();
    for topic in &collection.topics {
        let polarity = jobs
            .polarity(&topic.id)
            .ok_or_else(|| Error::QueryMismatch(topic.id.clone()))?;
        let same = polarity;
        let other = opposite(polarity);
        let list: Vec<String> = match collection.shape {
            Shape::Toy => {
                let doc = |p: Polarity| format!("{}_{}", topic.id, person_for(p));
                match kind {
                    SimEngineKind::Stereotypical => alloc::vec![doc(same)],
                    SimEngineKind::CounterStereotypical => alloc::vec![doc(other)],
                    SimEngineKind::Neutral => alloc::vec![doc(Polarity::Male), doc(Polarity::Female)],
                }
            }
            Shape::Synthetic => {
                let group = |p: Polarity| {
                    traits
                        .for_polarity(p)
                        .iter()
                        .map(|a| format!("{}_{}", topic.id, a))
                        .collect::<Vec<_>>()
                };
                match kind {
                    SimEngineKind::Stereotypical => group(same),
                    SimEngineKind::CounterStereotypical => group(other),
                    SimEngineKind::Neutral => {
                        let mut all = group(Polarity::Male);
                        all.extend(group(Polarity::Female));
                        all
                    }
                }
            }
        };
        if let Some(missing) = list.iter().find(|id| !ids.contains(id.as_str())) {
            return Err(Error::QueryMismatch(missing.clone()));
        }
        run.insert(ranked(&topic.id, list));
    }
    Ok(run)
}

/// Slopes of the S, N and CS engines, in that order.
pub fn run_simulation<G: WordGenderedness + ?Sized>(
    collection: &SimCollection,
    jobs: &JobTable,
    traits: &TraitTable,
    scorer: &G,
    stops: &StopList,
) -> Result<[GsrResult; 3]> {
    let (queries, docs) = collection.bags(stops);
    let mut out = Vec::with_capacity(3);
    for kind in SimEngineKind::ALL {
        let run = simulate_engine(kind, collection, jobs, traits)?;
        let m = measure_run(&run, &queries, &docs, scorer, Cutoff::Full);
        out.push(gsr_slope(m.points)?);
    }
    let cs = out.pop().expect("three results");
    let n = out.pop().expect("three results");
    let s = out.pop().expect("three results");
    Ok([s, n, cs])
}

pub fn run_toy_gsr<G: WordGenderedness + ?Sized>(scorer: &G, stops: &StopList) -> Result<[GsrResult; 3]> {
    let jobs = JobTable::default();
    let traits = TraitTable::default();
    run_simulation(&build_toy_collection(&jobs), &jobs, &traits, scorer, stops)
}

pub fn run_synthetic_gsr<G: WordGenderedness + ?Sized>(
    scorer: &G,
    stops: &StopList,
) -> Result<[GsrResult; 3]> {
    let jobs = JobTable::default();
    let traits = TraitTable::default();
    run_simulation(&build_synthetic_collection(&jobs, &traits), &jobs, &traits, scorer, stops)
}

/// One of the four non-empty answers to a toy query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyAnswer {
    SOnly,
    CsOnly,
    SThenCs,
    CsThenS,
}

impl ToyAnswer {
    pub const ALL: [ToyAnswer; 4] = [
        ToyAnswer::SOnly,
        ToyAnswer::CsOnly,
        ToyAnswer::SThenCs,
        ToyAnswer::CsThenS,
    ];
}

/// Precomputed genderedness of a toy query and its two documents.
#[derive(Debug, Clone, PartialEq)]
struct ToyQuery {
    id: String,
    gq: f64,
    g_same: f64,
    g_other: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParitySample {
    pub gsr: f64,
    pub pct_stereotypical: f64,
    /// `|slope - (stereotypical + counter-stereotypical terms)|`
    pub decomposition_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityOutcome {
    pub samples: Vec<ParitySample>,
    pub correlation: Correlation,
    pub max_decomposition_error: f64,
}

/// Sets up the toy collection for sampling; queries whose genderedness or
/// documents cannot be scored are an error since every answer must be
/// measurable.
pub struct ParityLab {
    queries: Vec<ToyQuery>,
}

impl ParityLab {
    pub fn new<G: WordGenderedness + ?Sized>(scorer: &G, stops: &StopList) -> Result<Self> {
        let jobs = JobTable::default();
        Self::with_jobs(&jobs, scorer, stops)
    }

    pub fn with_jobs<G: WordGenderedness + ?Sized>(
        jobs: &JobTable,
        scorer: &G,
        stops: &StopList,
    ) -> Result<Self> {
        let coll = build_toy_collection(jobs);
        let (queries, docs) = coll.bags(stops);
        let mut out = Vec::with_capacity(queries.len());
        for (qid, bag) in &queries {
            let polarity = jobs.polarity(qid).ok_or_else(|| Error::QueryMismatch(qid.clone()))?;
            let gq = query_genderedness(bag, scorer).ok_or(Error::QueryNotEmbeddable)?;
            let g_of = |p: Polarity| {
                let id = format!("{}_{}", qid, person_for(p));
                docs.get(&id)
                    .and_then(|d| document_genderedness(d, bag, scorer))
                    .ok_or(Error::QueryMismatch(id))
            };
            out.push(ToyQuery {
                id: qid.clone(),
                gq,
                g_same: g_of(polarity)?,
                g_other: g_of(opposite(polarity))?,
            });
        }
        Ok(Self { queries: out })
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    /// Scores one solution: one answer per query, in query order.
    pub fn evaluate(&self, answers: &[ToyAnswer]) -> Result<ParitySample> {
        if answers.len() != self.queries.len() {
            return Err(Error::LengthMismatch(answers.len(), self.queries.len()));
        }
        let mut lists = Vec::with_capacity(answers.len());
        let mut points = Vec::with_capacity(answers.len());
        let (mut stereo, mut total) = (0usize, 0usize);
        for (q, a) in self.queries.iter().zip(answers) {
            let docs: Vec<(usize, f64)> = match a {
                ToyAnswer::SOnly => alloc::vec![(1, q.g_same)],
                ToyAnswer::CsOnly => alloc::vec![(1, q.g_other)],
                ToyAnswer::SThenCs => alloc::vec![(1, q.g_same), (2, q.g_other)],
                ToyAnswer::CsThenS => alloc::vec![(1, q.g_other), (2, q.g_same)],
            };
            total += docs.len();
            stereo += docs.iter().filter(|&&(_, g)| is_stereotypical(q.gq, g)).count();
            let gl = crate::gsr::list_genderedness(docs.iter().map(|&(r, g)| (r, Some(g))))
                .expect("non-empty answer");
            points.push(GsrPoint {
                query_id: q.id.clone(),
                gq: q.gq,
                gl,
                k_used: docs.len(),
            });
            lists.push(ScoredList { gq: q.gq, docs });
        }
        let fit = gsr_slope(points)?;
        let dec = decompose_slope(&lists)?;
        Ok(ParitySample {
            gsr: fit.slope,
            pct_stereotypical: 100.0 * stereo as f64 / total as f64,
            decomposition_error: (fit.slope - dec.stereotypical - dec.counter_stereotypical).abs(),
        })
    }

    /// Draws the `index`-th solution of a seeded sequence. Each index has its
    /// own stream, so samples can be produced in any order or in parallel.
    pub fn sample_answers(&self, seed: u64, index: u64) -> Vec<ToyAnswer> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        (0..self.queries.len())
            .map(|_| ToyAnswer::ALL[rng.gen_range(0..4)])
            .collect()
    }

    pub fn sample(&self, seed: u64, index: u64) -> Result<ParitySample> {
        self.evaluate(&self.sample_answers(seed, index))
    }
}

pub const MIN_PARITY_SAMPLES: usize = 100;
pub const DEFAULT_PARITY_SAMPLES: usize = 10_000;

/// Summarizes sampled solutions: Pearson r between GSR and the stereotypical
/// share, and the largest decomposition residual.
pub fn summarize_parity(samples: Vec<ParitySample>) -> Result<ParityOutcome> {
    let x: Vec<f64> = samples.iter().map(|s| s.gsr).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.pct_stereotypical).collect();
    let correlation = pearson(&x, &y)?;
    let max_decomposition_error = samples
        .iter()
        .map(|s| s.decomposition_error)
        .fold(0.0, f64::max);
    Ok(ParityOutcome {
        samples,
        correlation,
        max_decomposition_error,
    })
}

pub fn parity_experiment<G: WordGenderedness + ?Sized>(
    scorer: &G,
    stops: &StopList,
    n_samples: usize,
    seed: u64,
) -> Result<ParityOutcome> {
    if n_samples < MIN_PARITY_SAMPLES {
        return Err(Error::InvalidParameter("at least 100 parity samples are required"));
    }
    let lab = ParityLab::new(scorer, stops)?;
    let samples = (0..n_samples as u64)
        .map(|i| lab.sample(seed, i))
        .collect::<Result<Vec<_>>>()?;
    summarize_parity(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Word scores with a male-leaning query side and signed person words.
    fn scorer(shift: f64) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        let jobs = JobTable::default();
        for (i, (j, p)) in jobs.iter().enumerate() {
            let base = 0.01 * (i as f64 + 1.0);
            let g = match p {
                Polarity::Male => -base,
                Polarity::Female => base,
            };
            m.insert(j.name.clone(), g + shift);
        }
        m.insert("man".into(), -0.2 + shift);
        m.insert("woman".into(), 0.25 + shift);
        for (i, a) in data::AGENCY.iter().enumerate() {
            m.insert(a.to_string(), -0.05 + 0.003 * i as f64);
        }
        for (i, a) in data::COMMUNION.iter().enumerate() {
            m.insert(a.to_string(), 0.04 - 0.002 * i as f64);
        }
        m
    }

    #[test]
    fn toy_collection_shape() {
        let jobs = JobTable::default();
        let c = build_toy_collection(&jobs);
        assert_eq!(c.topics.len(), 20);
        assert_eq!(c.documents.len(), 40);
        let plumber: Vec<_> = c.documents.iter().filter(|d| d.text.ends_with(" plumber")).collect();
        assert_eq!(plumber.len(), 2);
        assert!(c
            .documents
            .iter()
            .any(|d| d.id == "nurse_woman" && d.text == "The woman is a nurse"));
        assert_eq!(c, build_toy_collection(&jobs));
    }

    #[test]
    fn synthetic_collection_shape() {
        let jobs = JobTable::default();
        let traits = TraitTable::default();
        let c = build_synthetic_collection(&jobs, &traits);
        assert_eq!(c.documents.len(), 540);
        assert!(c.documents.iter().any(|d| d.text == "The plumber is hardworking"));
        let (_, docs) = c.bags(&StopList::default());
        for t in &c.topics {
            let n = docs.values().filter(|b| b.iter().any(|w| w == t.id)).count();
            assert_eq!(n, 27);
        }
    }

    #[test]
    fn engines_follow_definitions() {
        let jobs = JobTable::default();
        let traits = TraitTable::default();
        let toy = build_toy_collection(&jobs);
        let s = simulate_engine(SimEngineKind::Stereotypical, &toy, &jobs, &traits).unwrap();
        let ids: Vec<&str> = s.get("plumber").unwrap().doc_ids().collect();
        assert_eq!(ids, vec!["plumber_man"]);
        let n = simulate_engine(SimEngineKind::Neutral, &toy, &jobs, &traits).unwrap();
        for l in n.iter() {
            assert_eq!(l.len(), 2);
            assert!(l.items()[0].doc_id.ends_with("_man"));
        }
        let syn = build_synthetic_collection(&jobs, &traits);
        let cs = simulate_engine(SimEngineKind::CounterStereotypical, &syn, &jobs, &traits).unwrap();
        let nurse: Vec<&str> = cs.get("nurse").unwrap().doc_ids().collect();
        let want: Vec<String> = data::AGENCY.iter().map(|a| format!("nurse_{a}")).collect();
        assert_eq!(nurse, want.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(simulate_engine(SimEngineKind::Neutral, &syn, &JobTable::new(
            vec![Job { name: "x".into(), pct_female: 50.0, pct_male: 50.0 }],
            vec![Job { name: "y".into(), pct_female: 50.0, pct_male: 50.0 }],
        ).unwrap(), &traits)
        .is_err());
    }

    #[test]
    fn neutral_slope_is_zero_and_s_cs_antisymmetric() {
        for shift in [0.0, 0.03, -0.07] {
            let sc = scorer(shift);
            for res in [
                run_toy_gsr(&sc, &StopList::default()).unwrap(),
                run_synthetic_gsr(&sc, &StopList::default()).unwrap(),
            ] {
                let [s, n, cs] = res;
                assert!(n.slope.abs() < 1e-12, "{}", n.slope);
                assert!((s.slope + cs.slope).abs() < 1e-9);
                assert!(s.slope > 0.0);
            }
        }
    }

    #[test]
    fn parity_boundaries() {
        let sc = scorer(0.0);
        let lab = ParityLab::new(&sc, &StopList::default()).unwrap();
        let all_s = lab.evaluate(&[ToyAnswer::SOnly; 20]).unwrap();
        let toy_s = run_toy_gsr(&sc, &StopList::default()).unwrap()[0].slope;
        assert_eq!(all_s.pct_stereotypical, 100.0);
        assert!((all_s.gsr - toy_s).abs() < 1e-12);
        let both = lab.evaluate(&[ToyAnswer::SThenCs; 20]).unwrap();
        assert_eq!(both.pct_stereotypical, 50.0);
        assert!(lab.evaluate(&[ToyAnswer::SOnly; 3]).is_err());
    }

    #[test]
    fn parity_sampling_is_seeded_and_consistent() {
        let sc = scorer(0.0);
        let a = parity_experiment(&sc, &StopList::default(), 300, 7).unwrap();
        let b = parity_experiment(&sc, &StopList::default(), 300, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.max_decomposition_error < 1e-9);
        assert!(a.correlation.r > 0.5);
        let lab = ParityLab::new(&sc, &StopList::default()).unwrap();
        assert_eq!(lab.sample(7, 42).unwrap(), a.samples[42]);
        assert!(parity_experiment(&sc, &StopList::default(), 99, 7).is_err());
    }
}
