//! TREC topics, qrels and SGML documents, plus a JSON-lines corpus format.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use gsr_core::{Document, Qrels, Topic};
use serde::{Deserialize, Serialize};

use crate::error::{FormatError, Result, Warnings};

/// Reads a whole file, transparently inflating gzip.
pub fn read_to_string(path: &Path) -> Result<String> {
    let mut file = BufReader::new(File::open(path)?);
    let gz = file.fill_buf()?.starts_with(&[0x1f, 0x8b]);
    let mut bytes = Vec::new();
    if gz {
        flate2::read::MultiGzDecoder::new(file).read_to_end(&mut bytes)?;
    } else {
        file.read_to_end(&mut bytes)?;
    }
    // TREC collections contain stray Latin-1 bytes; decode those lossily.
    Ok(match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => String::from_utf8_lossy(e.as_bytes()).into_owned(),
    })
}

pub fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Case-insensitive search for an ASCII tag.
fn find_tag(hay: &str, tag: &str, from: usize) -> Option<usize> {
    let h = hay.as_bytes();
    let t = tag.as_bytes();
    if t.len() > h.len() {
        return None;
    }
    (from..=h.len() - t.len()).find(|&i| h[i..i + t.len()].eq_ignore_ascii_case(t))
}

/// Splits `text` into the contents of successive `<tag>…</tag>` blocks.
fn blocks<'a>(text: &'a str, tag: &str) -> Vec<&'a str> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(start) = find_tag(text, &open, pos) {
        let body = start + open.len();
        let end = find_tag(text, &close, body).unwrap_or(text.len());
        out.push(&text[body..end]);
        pos = (end + close.len()).min(text.len());
    }
    out
}

/// Text following `<tag>` up to the next `<`.
fn field<'a>(block: &'a str, tag: &str) -> Option<&'a str> {
    let open = format!("<{tag}>");
    let start = find_tag(block, &open, 0)? + open.len();
    let end = block[start..].find('<').map_or(block.len(), |i| start + i);
    Some(&block[start..end])
}

pub fn parse_topics(text: &str) -> Result<Vec<Topic>> {
    let mut topics = Vec::new();
    for (i, block) in blocks(text, "top").into_iter().enumerate() {
        let ordinal = i + 1;
        let bad = |m: &str| FormatError::BadBlock {
            block: ordinal,
            message: m.to_string(),
        };
        let num = field(block, "num").ok_or_else(|| bad("missing <num>"))?;
        let digits: String = num.chars().filter(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(bad("<num> has no digits"));
        }
        let title = field(block, "title").ok_or_else(|| bad("missing <title>"))?;
        topics.push(Topic::new(digits, decode_entities(&normalize_ws(title))));
    }
    Ok(topics)
}

pub fn parse_qrels(text: &str, warnings: &mut Warnings) -> Result<Qrels> {
    let mut qrels = Qrels::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: String| FormatError::BadLine { line: line_no, message: m };
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let grade: i64 = fields[3]
            .parse()
            .map_err(|_| bad(format!("grade {:?} is not an integer", fields[3])))?;
        let grade = if grade < 0 {
            warnings.push(format!("line {line_no}"), format!("negative grade {grade} treated as 0"));
            0
        } else {
            u32::try_from(grade).map_err(|_| bad(format!("grade {grade} out of range")))?
        };
        qrels
            .insert(fields[0], fields[2], grade)
            .map_err(|e| bad(e.to_string()))?;
    }
    Ok(qrels)
}

pub fn parse_trec_docs(text: &str, warnings: &mut Warnings) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, block) in blocks(text, "DOC").into_iter().enumerate() {
        let ordinal = i + 1;
        let id = blocks(block, "DOCNO")
            .first()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .ok_or_else(|| FormatError::BadBlock {
                block: ordinal,
                message: "missing <DOCNO>".into(),
            })?;
        let segments: Vec<String> = blocks(block, "TEXT")
            .into_iter()
            .map(|s| normalize_ws(&decode_entities(s)))
            .filter(|s| !s.is_empty())
            .collect();
        if segments.is_empty() {
            warnings.push(format!("block {ordinal}"), format!("document {id} has no text"));
        }
        if !seen.insert(id.clone()) {
            return Err(FormatError::DuplicateDocument(id));
        }
        docs.push(Document::new(id, segments.join(" ")));
    }
    Ok(docs)
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    id: String,
    text: String,
}

pub fn parse_jsonl_docs(text: &str, warnings: &mut Warnings) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let d: JsonDoc = serde_json::from_str(line).map_err(|e| FormatError::BadLine {
            line: line_no,
            message: e.to_string(),
        })?;
        let id = d.id.trim().to_string();
        if id.is_empty() {
            return Err(FormatError::BadLine {
                line: line_no,
                message: "empty id".into(),
            });
        }
        if d.text.trim().is_empty() {
            warnings.push(format!("line {line_no}"), format!("document {id} has no text"));
        }
        if !seen.insert(id.clone()) {
            return Err(FormatError::DuplicateDocument(id));
        }
        docs.push(Document::new(id, d.text));
    }
    Ok(docs)
}

pub fn write_jsonl(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        let line = serde_json::to_string(&JsonDoc {
            id: d.id.clone(),
            text: d.text.clone(),
        })
        .expect("strings always serialize");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Writes topics back as minimal TREC SGML.
pub fn write_topics(topics: &[Topic]) -> String {
    let mut out = String::new();
    for t in topics {
        let title = t.title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        out.push_str(&format!("<top>\n<num> Number: {}\n<title> {}\n</top>\n\n", t.id, title));
    }
    out
}

pub fn write_qrels(qrels: &Qrels) -> String {
    let mut out = String::new();
    for q in qrels.queries() {
        for (d, g) in qrels.judged(q).into_iter().flatten() {
            out.push_str(&format!("{q} 0 {d} {g}\n"));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DocFormat {
    Trec,
    Jsonl,
}

impl DocFormat {
    pub fn guess(path: &Path) -> Self {
        let name = path.to_string_lossy().to_ascii_lowercase();
        if name.ends_with(".jsonl") || name.ends_with(".jsonl.gz") || name.ends_with(".json") {
            Self::Jsonl
        } else {
            Self::Trec
        }
    }
}

/// Loads documents from a file, or from every regular file in a directory
/// (sorted by name) for TREC collections split across many files.
pub fn load_documents(path: &Path, format: Option<DocFormat>, warnings: &mut Warnings) -> Result<Vec<Document>> {
    let files: Vec<std::path::PathBuf> = if path.is_dir() {
        let mut v: Vec<_> = walk(path)?;
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for f in files {
        let text = read_to_string(&f)?;
        let parsed = match format.unwrap_or_else(|| DocFormat::guess(&f)) {
            DocFormat::Trec => parse_trec_docs(&text, warnings)?,
            DocFormat::Jsonl => parse_jsonl_docs(&text, warnings)?,
        };
        for d in parsed {
            if !seen.insert(d.id.clone()) {
                return Err(FormatError::DuplicateDocument(d.id));
            }
            docs.push(d);
        }
    }
    Ok(docs)
}

fn walk(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            out.extend(walk(&p)?);
        } else if !p
            .file_name()
            .is_some_and(|n| n.to_string_lossy().starts_with('.'))
        {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_topic() {
        let t = parse_topics("<top>\n<num> Number: 321\n<title> Women in Parliaments\n<desc> Description:\nx\n</top>").unwrap();
        assert_eq!(t, vec![Topic::new("321", "Women in Parliaments")]);
        assert!(parse_topics("").unwrap().is_empty());
    }

    #[test]
    fn malformed_topic_names_its_block() {
        let text = "<top><num>1<title>a</top>\n<top><title>b</top>\n<top><num>3<title>c</top>";
        match parse_topics(text) {
            Err(FormatError::BadBlock { block, .. }) => assert_eq!(block, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn topic_entities_and_whitespace() {
        let t = parse_topics("<top><num> 7 <title>  R&amp;D   &lt;costs&gt;\n spending </top>").unwrap();
        assert_eq!(t[0].title, "R&D <costs> spending");
    }

    #[test]
    fn qrels_lines() {
        let mut w = Warnings::default();
        let q = parse_qrels("301 0 FBIS3-1 1\n301 0 FBIS3-2 -1\n\n302 0 X 2\n", &mut w).unwrap();
        assert_eq!(q.grade("301", "FBIS3-1"), Some(1));
        assert_eq!(q.grade("301", "FBIS3-2"), Some(0));
        assert_eq!(w.len(), 1);
        assert_eq!(w.0[0].locator, "line 2");
        let e = parse_qrels("1 0 a 1\n1 0 a 0\n", &mut w).unwrap_err();
        assert!(matches!(e, FormatError::BadLine { line: 2, .. }));
        let e = parse_qrels("1 0 a\n", &mut w).unwrap_err();
        assert!(matches!(e, FormatError::BadLine { line: 1, .. }));
    }

    #[test]
    fn trec_documents() {
        let mut w = Warnings::default();
        let text = "<DOC>\n<DOCNO> FT911-1 </DOCNO>\n<HEADLINE>h</HEADLINE>\n<TEXT>\nfirst part\n</TEXT>\n<TEXT>second</TEXT>\n</DOC>\n<DOC><DOCNO>B</DOCNO></DOC>";
        let d = parse_trec_docs(text, &mut w).unwrap();
        assert_eq!(d[0], Document::new("FT911-1", "first part second"));
        assert_eq!(d[1].text, "");
        assert_eq!(w.len(), 1);
        assert!(matches!(
            parse_trec_docs("<DOC><TEXT>x</TEXT></DOC>", &mut w),
            Err(FormatError::BadBlock { block: 1, .. })
        ));
        assert!(matches!(
            parse_trec_docs("<DOC><DOCNO>a</DOCNO></DOC><DOC><DOCNO>a</DOCNO></DOC>", &mut w),
            Err(FormatError::DuplicateDocument(_))
        ));
    }

    #[test]
    fn jsonl_documents() {
        let mut w = Warnings::default();
        let d = parse_jsonl_docs("{\"id\":\"a\",\"text\":\"x y\"}\n{\"id\":\"b\",\"text\":\"z\"}\n", &mut w).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(write_jsonl(&d), "{\"id\":\"a\",\"text\":\"x y\"}\n{\"id\":\"b\",\"text\":\"z\"}\n");
        let e = parse_jsonl_docs("{\"id\":\"a\",\"text\":\"x\"}\nnot json\n", &mut w).unwrap_err();
        assert!(matches!(e, FormatError::BadLine { line: 2, .. }));
        let e = parse_jsonl_docs("{\"id\":\"a\",\"text\":1}\n", &mut w).unwrap_err();
        assert!(matches!(e, FormatError::BadLine { line: 1, .. }));
    }

    #[test]
    fn topics_round_trip() {
        let t = vec![Topic::new("1", "a & b"), Topic::new("22", "nurse")];
        assert_eq!(parse_topics(&write_topics(&t)).unwrap(), t);
    }
}
