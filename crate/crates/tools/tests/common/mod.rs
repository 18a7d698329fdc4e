//! Fixtures shared by the integration tests: a small embedding store with a
//! planted gender axis, and a TREC-style collection written to disk.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gsr_core::data;
use gsr_core::synthetic::{JobTable, TraitTable};
use gsr_core::EmbeddingStore;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DIM: usize = 12;

/// Words without a planted gender component.
pub const NEUTRAL: [&str; 24] = [
    "table", "water", "city", "river", "report", "market", "price", "school", "health", "care", "machine",
    "bridge", "power", "office", "home", "music", "garden", "clinic", "project", "design", "budget", "road",
    "tools", "works",
];

fn female_words(jobs: &JobTable, traits: &TraitTable) -> Vec<String> {
    let mut v: Vec<String> = jobs.female().iter().map(|j| j.name.clone()).collect();
    v.extend(traits.communion().iter().cloned());
    v.extend(data::ARTS.iter().chain(&data::FAMILY).map(|s| s.to_string()));
    v
}

fn male_words(jobs: &JobTable, traits: &TraitTable) -> Vec<String> {
    let mut v: Vec<String> = jobs.male().iter().map(|j| j.name.clone()).collect();
    v.extend(traits.agency().iter().cloned());
    v.extend(data::SCIENCE.iter().chain(&data::CAREER).map(|s| s.to_string()));
    v
}

/// Axis 0 carries gender: definitional words sit at about ±1, stereotyped
/// words at about ±`strength`, the rest only get noise there.
pub fn fixture_store_with(seed: u64, strength: f64) -> EmbeddingStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = JobTable::default();
    let traits = TraitTable::default();
    let mut store = EmbeddingStore::new(DIM, "fixture").unwrap();
    let mut seen = BTreeSet::new();
    let mut add = |store: &mut EmbeddingStore, rng: &mut ChaCha8Rng, w: &str, g: f64| {
        if !seen.insert(w.to_string()) {
            return;
        }
        let mut v: Vec<f32> = (0..DIM).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        v[0] = (g + rng.gen_range(-0.05..0.05)) as f32;
        store.insert(w.as_bytes(), &v).unwrap();
    };
    for (f, m) in data::DEFINITIONAL_PAIRS {
        let s = rng.gen_range(0.8..1.2);
        add(&mut store, &mut rng, f, s);
        add(&mut store, &mut rng, m, -s);
    }
    for w in female_words(&jobs, &traits) {
        let g = strength * rng.gen_range(0.5..1.5);
        add(&mut store, &mut rng, &w, g);
    }
    for w in male_words(&jobs, &traits) {
        let g = strength * rng.gen_range(0.5..1.5);
        add(&mut store, &mut rng, &w, -g);
    }
    for w in NEUTRAL {
        add(&mut store, &mut rng, w, 0.0);
    }
    store
}

pub fn fixture_store(seed: u64) -> EmbeddingStore {
    fixture_store_with(seed, 0.4)
}

pub struct CollectionPaths {
    pub dir: PathBuf,
    pub embeddings: PathBuf,
    pub topics: PathBuf,
    pub qrels: PathBuf,
    pub docs: PathBuf,
}

const TOPICS: [(&str, &str); 8] = [
    ("301", "nurse care"),
    ("302", "engineer machine"),
    ("303", "family home"),
    ("304", "career office"),
    ("305", "dance music"),
    ("306", "physics project"),
    ("307", "river bridge"),
    ("308", "secretary budget"),
];

/// Three documents per topic: two relevant (grades 2 and 1), one judged
/// non-relevant, plus a few unjudged fillers.
fn documents() -> Vec<(String, String)> {
    let people = ["she", "he", "the woman", "the man", "her mother", "his father"];
    let mut docs = Vec::new();
    for (i, (id, title)) in TOPICS.iter().enumerate() {
        let words: Vec<&str> = title.split(' ').collect();
        let p = |k: usize| people[(i + k) % people.len()];
        docs.push((format!("D{id}-1"), format!("{} {} {} and {} report", p(0), words[0], words[1], words[0])));
        docs.push((format!("D{id}-2"), format!("{} works with {} at the {}", p(1), words[1], NEUTRAL[i])));
        docs.push((format!("D{id}-3"), format!("{} {} {}", p(2), words[0], NEUTRAL[i + 8])));
    }
    for k in 0..6 {
        docs.push((format!("F{k}"), format!("{} {} {}", NEUTRAL[k], NEUTRAL[k + 10], NEUTRAL[k + 16])));
    }
    docs
}

pub fn write_collection(dir: &Path, seed: u64) -> CollectionPaths {
    let embeddings = dir.join("vectors.txt");
    let f = std::fs::File::create(&embeddings).unwrap();
    gsr_tools::embedding_io::write_text(&fixture_store(seed), f).unwrap();

    let topics = dir.join("topics.txt");
    let mut t = String::new();
    for (id, title) in TOPICS {
        t.push_str(&format!("<top>\n<num> Number: {id}\n<title> {title}\n\n<desc> Description:\nignored\n</top>\n\n"));
    }
    std::fs::write(&topics, t).unwrap();

    let docs = dir.join("docs.trec");
    let mut d = String::new();
    for (id, text) in documents() {
        d.push_str(&format!("<DOC>\n<DOCNO> {id} </DOCNO>\n<TEXT>\n{text}\n</TEXT>\n</DOC>\n"));
    }
    std::fs::write(&docs, d).unwrap();

    let qrels = dir.join("qrels.txt");
    let mut q = String::new();
    for (id, _) in TOPICS {
        q.push_str(&format!("{id} 0 D{id}-1 2\n{id} 0 D{id}-2 1\n{id} 0 D{id}-3 0\n"));
    }
    std::fs::write(&qrels, q).unwrap();

    CollectionPaths {
        dir: dir.to_path_buf(),
        embeddings,
        topics,
        qrels,
        docs,
    }
}

pub fn gsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsr"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run gsr")
}

pub fn gsr_ok(args: &[&str]) -> String {
    let out = gsr(args);
    assert!(
        out.status.success(),
        "gsr {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
