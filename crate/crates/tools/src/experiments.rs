//! Word-list validation of the genderedness score and the parallel driver
//! for the parity sampling experiment.

use gsr_core::data;
use gsr_core::stats::{permutation_test_one_tailed, PermutationMode, PermutationOutcome};
use gsr_core::synthetic::{summarize_parity, JobTable, ParityLab, ParityOutcome, TraitTable};
use gsr_core::WordGenderedness;
use rayon::prelude::*;

/// Two word lists, one stereotypically female and one male.
#[derive(Debug, Clone, PartialEq)]
pub struct Dichotomy {
    pub name: String,
    pub female_label: String,
    pub male_label: String,
    pub female: Vec<String>,
    pub male: Vec<String>,
}

impl Dichotomy {
    pub fn new(name: &str, female_label: &str, male_label: &str, female: &[&str], male: &[&str]) -> Self {
        Self {
            name: name.into(),
            female_label: female_label.into(),
            male_label: male_label.into(),
            female: female.iter().map(|s| s.to_string()).collect(),
            male: male.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            name: format!("{} (swapped)", self.name),
            female_label: self.male_label.clone(),
            male_label: self.female_label.clone(),
            female: self.male.clone(),
            male: self.female.clone(),
        }
    }
}

/// The four bundled dichotomies; jobs and traits may be overridden.
pub fn default_dichotomies(jobs: &JobTable, traits: &TraitTable) -> Vec<Dichotomy> {
    let names = |v: &[gsr_core::synthetic::Job]| v.iter().map(|j| j.name.clone()).collect::<Vec<_>>();
    vec![
        Dichotomy {
            name: "agency/communion".into(),
            female_label: "communion".into(),
            male_label: "agency".into(),
            female: traits.communion().to_vec(),
            male: traits.agency().to_vec(),
        },
        Dichotomy::new("science/arts", "arts", "science", &data::ARTS, &data::SCIENCE),
        Dichotomy::new("career/family", "family", "career", &data::FAMILY, &data::CAREER),
        Dichotomy {
            name: "jobs".into(),
            female_label: "jobs_f".into(),
            male_label: "jobs_m".into(),
            female: names(jobs.female()),
            male: names(jobs.male()),
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyResult {
    pub dichotomy: Dichotomy,
    pub female_scores: Vec<(String, f64)>,
    pub male_scores: Vec<(String, f64)>,
    pub missing: Vec<String>,
    pub female_mean: f64,
    pub male_mean: f64,
    /// Tests whether the female list has the higher mean genderedness.
    pub outcome: PermutationOutcome,
}

fn score_all<G: WordGenderedness + ?Sized>(words: &[String], scorer: &G, missing: &mut Vec<String>) -> Vec<(String, f64)> {
    words
        .iter()
        .filter_map(|w| match scorer.word(w) {
            Some(g) => Some((w.clone(), g)),
            None => {
                missing.push(w.clone());
                None
            }
        })
        .collect()
}

fn mean(v: &[(String, f64)]) -> f64 {
    v.iter().map(|x| x.1).sum::<f64>() / v.len() as f64
}

pub fn validate<G: WordGenderedness + Sync + ?Sized>(
    scorer: &G,
    dichotomies: &[Dichotomy],
    trials: usize,
    seed: u64,
) -> gsr_core::Result<Vec<DichotomyResult>> {
    dichotomies
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let mut missing = Vec::new();
            let female_scores = score_all(&d.female, scorer, &mut missing);
            let male_scores = score_all(&d.male, scorer, &mut missing);
            let a: Vec<f64> = female_scores.iter().map(|x| x.1).collect();
            let b: Vec<f64> = male_scores.iter().map(|x| x.1).collect();
            let outcome = permutation_test_one_tailed(
                &a,
                &b,
                PermutationMode::Auto {
                    trials,
                    seed: seed.wrapping_add(i as u64),
                },
            )?;
            Ok(DichotomyResult {
                dichotomy: d.clone(),
                female_mean: mean(&female_scores),
                male_mean: mean(&male_scores),
                female_scores,
                male_scores,
                missing,
                outcome,
            })
        })
        .collect()
}

/// Draws `n_samples` seeded solutions in parallel; the result does not
/// depend on the number of threads.
pub fn parity_parallel(lab: &ParityLab, n_samples: usize, seed: u64) -> gsr_core::Result<ParityOutcome> {
    if n_samples < gsr_core::synthetic::MIN_PARITY_SAMPLES {
        return Err(gsr_core::Error::InvalidParameter("at least 100 parity samples are required"));
    }
    let samples = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| lab.sample(seed, i))
        .collect::<gsr_core::Result<Vec<_>>>()?;
    summarize_parity(samples)
}
