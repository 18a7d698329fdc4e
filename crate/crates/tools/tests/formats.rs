use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression;
use gsr_core::{Document, EmbeddingStore, Qrels, RankedList, RunSet, Topic};
use gsr_tools::collection_io::{parse_jsonl_docs, parse_qrels, parse_topics, write_jsonl, write_qrels, write_topics};
use gsr_tools::embedding_io::{self, read_binary, read_text, write_binary, write_text, EmbeddingFormat, LoadOptions};
use gsr_tools::runfile::{parse_run, write_run};
use gsr_tools::{FormatError, Warnings};
use proptest::prelude::*;

fn bits(store: &EmbeddingStore) -> Vec<(Vec<u8>, Vec<u32>)> {
    store
        .iter()
        .map(|(t, v)| (t.to_vec(), v.iter().map(|x| x.to_bits()).collect()))
        .collect()
}

fn binary_bytes(store: &EmbeddingStore) -> Vec<u8> {
    let mut out = Vec::new();
    write_binary(store, &mut out).unwrap();
    out
}

fn text_bytes(store: &EmbeddingStore) -> Vec<u8> {
    let mut out = Vec::new();
    write_text(store, &mut out).unwrap();
    out
}

fn five_word_store() -> EmbeddingStore {
    let mut s = EmbeddingStore::new(4, "fixture").unwrap();
    let words = ["she", "he", "nurse", "Paris", "caf\u{e9}"];
    for (i, w) in words.iter().enumerate() {
        let v: Vec<f32> = (0..4).map(|j| (i * 4 + j) as f32 * 0.125 - 1.0).collect();
        s.insert(w.as_bytes(), &v).unwrap();
    }
    s
}

/// Hand-assembled bytes of the word2vec binary layout.
fn hand_binary(store: &EmbeddingStore) -> Vec<u8> {
    let mut b = format!("{} {}\n", store.len(), store.dim()).into_bytes();
    for (t, v) in store.iter() {
        b.extend_from_slice(t);
        b.push(b' ');
        for x in v {
            b.extend_from_slice(&x.to_le_bytes());
        }
        b.push(b'\n');
    }
    b
}

#[test]
fn binary_matches_hand_layout_and_reloads() {
    let s = five_word_store();
    let bytes = binary_bytes(&s);
    assert_eq!(bytes, hand_binary(&s));
    let back = read_binary(&bytes[..], LoadOptions::default()).unwrap();
    assert_eq!(bits(&back), bits(&s));
    assert_eq!(binary_bytes(&back), bytes);
}

#[test]
fn binary_without_trailing_newlines() {
    let s = five_word_store();
    let mut b = format!("{} {}\n", s.len(), s.dim()).into_bytes();
    for (t, v) in s.iter() {
        b.extend_from_slice(t);
        b.push(b' ');
        for x in v {
            b.extend_from_slice(&x.to_le_bytes());
        }
    }
    let back = read_binary(&b[..], LoadOptions::default()).unwrap();
    assert_eq!(bits(&back), bits(&s));
}

#[test]
fn binary_keeps_non_utf8_tokens() {
    let mut s = EmbeddingStore::new(2, "x").unwrap();
    s.insert(&b"ab\xffcd"[..], &[1.0, 2.0]).unwrap();
    s.insert(&b"ok"[..], &[0.5, -0.5]).unwrap();
    let back = read_binary(&binary_bytes(&s)[..], LoadOptions::default()).unwrap();
    assert_eq!(bits(&back), bits(&s));
    assert!(back.get_bytes(b"ab\xffcd").is_some());
}

#[test]
fn truncated_and_bad_headers() {
    let bytes = binary_bytes(&five_word_store());
    let cut = &bytes[..bytes.len() - 10];
    assert!(matches!(
        read_binary(cut, LoadOptions::default()),
        Err(FormatError::Truncated { expected: 5, found: 4 })
    ));
    assert!(matches!(
        read_binary(&b"five 4\n"[..], LoadOptions::default()),
        Err(FormatError::BadHeader(_))
    ));
    let text = "3 2\na 1 2\nb 3 4\n";
    assert!(matches!(
        read_text(text.as_bytes(), LoadOptions::default()),
        Err(FormatError::Truncated { expected: 3, found: 2 })
    ));
    assert!(matches!(
        read_text("a 1 2\nb 3\n".as_bytes(), LoadOptions::default()),
        Err(FormatError::RaggedLine { line: 2, .. })
    ));
}

#[test]
fn limit_reads_a_prefix() {
    let s = five_word_store();
    let opts = LoadOptions { limit: Some(2) };
    let b = read_binary(&binary_bytes(&s)[..], opts).unwrap();
    let t = read_text(&text_bytes(&s)[..], opts).unwrap();
    assert_eq!(b.len(), 2);
    assert_eq!(bits(&b), bits(&t));
}

#[test]
fn text_round_trip_is_byte_stable() {
    let s = five_word_store();
    let bytes = text_bytes(&s);
    let back = read_text(&bytes[..], LoadOptions::default()).unwrap();
    assert_eq!(bits(&back), bits(&s));
    assert_eq!(text_bytes(&back), bytes);
}

#[test]
fn gzip_files_load_like_plain_ones() {
    let dir = tempfile::tempdir().unwrap();
    let s = five_word_store();
    let plain = dir.path().join("v.bin");
    embedding_io::save_binary(&s, &plain).unwrap();
    let gz = dir.path().join("v.bin.gz");
    let mut enc = GzEncoder::new(std::fs::File::create(&gz).unwrap(), Compression::default());
    enc.write_all(&binary_bytes(&s)).unwrap();
    enc.finish().unwrap();
    assert_eq!(EmbeddingFormat::guess(&gz), EmbeddingFormat::Binary);
    let a = embedding_io::load_binary(&plain).unwrap();
    let b = embedding_io::load(&gz, EmbeddingFormat::Binary, LoadOptions::default()).unwrap();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(b.source_tag(), gz.display().to_string());
}

#[test]
fn empty_store_is_not_written() {
    let s = EmbeddingStore::new(3, "x").unwrap();
    assert!(matches!(write_binary(&s, Vec::new()), Err(FormatError::EmptyStore)));
}

#[test]
fn collection_files_round_trip() {
    let topics = vec![Topic::new("321", "Women in Parliaments"), Topic::new("7", "a & b < c")];
    assert_eq!(parse_topics(&write_topics(&topics)).unwrap(), topics);

    let mut q = Qrels::new();
    q.insert("301", "FBIS3-1", 1).unwrap();
    q.insert("301", "FBIS3-2", 0).unwrap();
    q.insert("302", "LA-9", 2).unwrap();
    let mut w = Warnings::default();
    let text = write_qrels(&q);
    assert_eq!(parse_qrels(&text, &mut w).unwrap(), q);
    assert!(w.is_empty());

    let mut run = RunSet::new();
    run.insert(RankedList::from_ordered("1", vec![("d1".into(), 2.5), ("d2".into(), 2.5), ("d3".into(), -1.0)]).unwrap());
    let text = write_run(&run, "sys");
    assert_eq!(write_run(&parse_run(&text).unwrap(), "sys"), text);
}

/// Qrels recount over a generated 100-line file.
#[test]
fn qrels_recount() {
    let mut text = String::new();
    let mut expected = std::collections::BTreeMap::<String, usize>::new();
    for i in 0..100 {
        let q = format!("{}", 300 + i % 7);
        let grade = (i * 13) % 3;
        text.push_str(&format!("{q} 0 DOC-{i} {grade}\n"));
        if grade > 0 {
            *expected.entry(q).or_default() += 1;
        }
    }
    let qrels = parse_qrels(&text, &mut Warnings::default()).unwrap();
    assert_eq!(qrels.len(), 100);
    for (q, n) in expected {
        assert_eq!(qrels.relevant_count(&q), n);
    }
}

fn token() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9_\u{e0}-\u{ff}]{1,8}"
}

fn store_strategy() -> impl Strategy<Value = EmbeddingStore> {
    (1usize..6, prop::collection::btree_set(token(), 1..12)).prop_flat_map(|(dim, toks)| {
        let n = toks.len();
        prop::collection::vec(prop::collection::vec(-1e3f32..1e3, dim), n).prop_map(move |vs| {
            let mut s = EmbeddingStore::new(dim, "p").unwrap();
            for (t, v) in toks.iter().zip(vs) {
                s.insert(t.as_bytes(), &v).unwrap();
            }
            s
        })
    })
}

proptest! {
    #[test]
    fn binary_round_trip(s in store_strategy()) {
        let bytes = binary_bytes(&s);
        let back = read_binary(&bytes[..], LoadOptions::default()).unwrap();
        prop_assert_eq!(bits(&back), bits(&s));
        prop_assert_eq!(binary_bytes(&back), bytes);
    }

    #[test]
    fn text_round_trip(s in store_strategy()) {
        let bytes = text_bytes(&s);
        let back = read_text(&bytes[..], LoadOptions::default()).unwrap();
        prop_assert_eq!(bits(&back), bits(&s));
        prop_assert_eq!(text_bytes(&back), bytes);
    }

    #[test]
    fn jsonl_round_trip(docs in prop::collection::btree_map("[A-Z0-9-]{1,10}", "\\PC{0,40}", 0..10)) {
        let docs: Vec<Document> = docs.into_iter().map(|(id, text)| Document::new(id, text)).collect();
        let text = write_jsonl(&docs);
        let mut w = Warnings::default();
        let back = parse_jsonl_docs(&text, &mut w).unwrap();
        prop_assert_eq!(&back, &docs);
        prop_assert_eq!(write_jsonl(&back), text);
    }
}
