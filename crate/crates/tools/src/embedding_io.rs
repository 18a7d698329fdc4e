//! word2vec binary and whitespace text embedding files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use gsr_core::embedding::display_token;
use gsr_core::EmbeddingStore;

use crate::error::{FormatError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EmbeddingFormat {
    Binary,
    Text,
}

impl EmbeddingFormat {
    /// `.bin` (optionally gzipped) is binary, anything else is text.
    pub fn guess(path: &Path) -> Self {
        let name = path.to_string_lossy().to_ascii_lowercase();
        if name.ends_with(".bin") || name.ends_with(".bin.gz") {
            Self::Binary
        } else {
            Self::Text
        }
    }
}

/// Loads at most `limit` entries when given; the file is then allowed to hold
/// more than were read.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub limit: Option<usize>,
}

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = BufReader::with_capacity(1 << 20, File::open(path)?);
    let gz = file.fill_buf()?.starts_with(&[0x1f, 0x8b]);
    Ok(if gz {
        Box::new(BufReader::with_capacity(1 << 20, flate2::read::MultiGzDecoder::new(file)))
    } else {
        Box::new(file)
    })
}

pub fn load(path: &Path, format: EmbeddingFormat, options: LoadOptions) -> Result<EmbeddingStore> {
    let reader = open(path)?;
    let mut store = match format {
        EmbeddingFormat::Binary => read_binary(reader, options)?,
        EmbeddingFormat::Text => read_text(reader, options)?,
    };
    store.set_source_tag(path.display().to_string());
    Ok(store)
}

pub fn load_binary(path: &Path) -> Result<EmbeddingStore> {
    load(path, EmbeddingFormat::Binary, LoadOptions::default())
}

pub fn load_text(path: &Path) -> Result<EmbeddingStore> {
    load(path, EmbeddingFormat::Text, LoadOptions::default())
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_ascii_whitespace();
    let (Some(n), Some(d), None) = (it.next(), it.next(), it.next()) else {
        return Err(FormatError::BadHeader(line.trim_end().to_string()));
    };
    let n = n.parse().map_err(|_| FormatError::BadHeader(line.trim_end().to_string()))?;
    let d = d.parse().map_err(|_| FormatError::BadHeader(line.trim_end().to_string()))?;
    Ok((n, d))
}

pub fn read_binary<R: BufRead>(mut r: R, options: LoadOptions) -> Result<EmbeddingStore> {
    let mut header = Vec::new();
    r.read_until(b'\n', &mut header)?;
    let header = String::from_utf8(header).map_err(|_| FormatError::BadHeader("not ASCII".into()))?;
    let (n, dim) = parse_header(&header)?;
    let take = options.limit.map_or(n, |l| l.min(n));
    let mut store = EmbeddingStore::with_capacity(dim, take, "")?;
    let mut token = Vec::new();
    let mut raw = vec![0u8; dim * 4];
    let mut values = vec![0f32; dim];
    for read in 0..take {
        token.clear();
        r.read_until(b' ', &mut token)?;
        // A newline left over from the previous entry belongs to no token.
        let start = token.iter().position(|&b| b != b'\n').unwrap_or(token.len());
        if token.last() != Some(&b' ') {
            return Err(FormatError::Truncated { expected: n, found: read });
        }
        let tok = &token[start..token.len() - 1];
        if let Err(e) = r.read_exact(&mut raw) {
            return Err(if e.kind() == io::ErrorKind::UnexpectedEof {
                FormatError::Truncated { expected: n, found: read }
            } else {
                e.into()
            });
        }
        for (v, b) in values.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
        }
        store.insert(tok, &values)?;
    }
    Ok(store)
}

pub fn read_text<R: BufRead>(mut r: R, options: LoadOptions) -> Result<EmbeddingStore> {
    let mut store: Option<EmbeddingStore> = None;
    let mut declared: Option<(usize, usize)> = None;
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    let mut values = Vec::new();
    loop {
        buf.clear();
        if r.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| FormatError::NotUtf8(line_no))?;
        let line = line.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        if line_no == 1 {
            if let Ok(h) = parse_header(line) {
                declared = Some(h);
                continue;
            }
        }
        if let Some(limit) = options.limit {
            if store.as_ref().is_some_and(|s| s.len() >= limit) {
                break;
            }
        }
        let mut fields = line.split_ascii_whitespace();
        let token = fields.next().expect("line is not blank");
        values.clear();
        for f in fields {
            let v: f32 = f.parse().map_err(|_| FormatError::BadLine {
                line: line_no,
                message: format!("{f:?} is not a number"),
            })?;
            values.push(v);
        }
        let expected = declared.map(|(_, d)| d).or(store.as_ref().map(|s| s.dim())).unwrap_or(values.len());
        if values.len() != expected || expected == 0 {
            return Err(FormatError::RaggedLine {
                line: line_no,
                expected,
                found: values.len(),
            });
        }
        let s = match &mut store {
            Some(s) => s,
            None => store.insert(EmbeddingStore::new(expected, "")?),
        };
        s.insert(token, &values).map_err(|e| FormatError::BadLine {
            line: line_no,
            message: e.to_string(),
        })?;
    }
    let store = match (store, declared) {
        (Some(s), _) => s,
        (None, Some((_, d))) => EmbeddingStore::new(d, "")?,
        (None, None) => return Err(FormatError::BadHeader("empty file".into())),
    };
    if let Some((n, _)) = declared {
        let want = options.limit.map_or(n, |l| l.min(n));
        if store.len() != want {
            return Err(FormatError::Truncated {
                expected: want,
                found: store.len(),
            });
        }
    }
    Ok(store)
}

pub fn write_binary<W: Write>(store: &EmbeddingStore, mut w: W) -> Result<()> {
    if store.is_empty() {
        return Err(FormatError::EmptyStore);
    }
    writeln!(w, "{} {}", store.len(), store.dim())?;
    for (token, v) in store.iter() {
        if token.is_empty() || token.iter().any(|&b| b == b' ' || b == b'\n') {
            return Err(FormatError::UnwritableToken(display_token(token)));
        }
        w.write_all(token)?;
        w.write_all(b" ")?;
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_text<W: Write>(store: &EmbeddingStore, mut w: W) -> Result<()> {
    if store.is_empty() {
        return Err(FormatError::EmptyStore);
    }
    writeln!(w, "{} {}", store.len(), store.dim())?;
    for (token, v) in store.iter() {
        let tok = std::str::from_utf8(token).map_err(|_| FormatError::UnwritableToken(display_token(token)))?;
        if tok.is_empty() || tok.chars().any(char::is_whitespace) {
            return Err(FormatError::UnwritableToken(tok.to_string()));
        }
        w.write_all(tok.as_bytes())?;
        for x in v {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save(store: &EmbeddingStore, path: &Path, format: EmbeddingFormat) -> Result<()> {
    // Validate before touching the file system.
    let mut buf = Vec::new();
    match format {
        EmbeddingFormat::Binary => write_binary(store, &mut buf)?,
        EmbeddingFormat::Text => write_text(store, &mut buf)?,
    }
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn save_binary(store: &EmbeddingStore, path: &Path) -> Result<()> {
    save(store, path, EmbeddingFormat::Binary)
}

pub fn save_text(store: &EmbeddingStore, path: &Path) -> Result<()> {
    save(store, path, EmbeddingFormat::Text)
}
