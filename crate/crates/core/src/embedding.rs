//! In-memory word vector store.
//!
//! Tokens are keyed on raw bytes because large pretrained vocabularies contain
//! byte sequences that are not valid UTF-8. Insertion order is kept so that a
//! store can be written back in exactly the order it was read.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Which surface form of a token produced a lookup hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitForm {
    Exact,
    Lowercase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit<'a> {
    pub vector: &'a [f32],
    pub form: HitForm,
}

#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    tokens: Vec<Vec<u8>>,
    data: Vec<f32>,
    index: BTreeMap<Vec<u8>, usize>,
    source_tag: String,
}

impl EmbeddingStore {
    pub fn new(dim: usize, source_tag: impl Into<String>) -> Result<Self> {
        Self::with_capacity(dim, 0, source_tag)
    }

    pub fn with_capacity(dim: usize, capacity: usize, source_tag: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            dim,
            tokens: Vec::with_capacity(capacity),
            data: Vec::with_capacity(capacity.saturating_mul(dim)),
            index: BTreeMap::new(),
            source_tag: source_tag.into(),
        })
    }

    /// Appends a token. Rejects wrong lengths, non-finite components and
    /// duplicate tokens, leaving the store unchanged on error.
    pub fn insert(&mut self, token: impl Into<Vec<u8>>, vector: &[f32]) -> Result<()> {
        let token = token.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                token: display_token(&token),
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(display_token(&token)));
        }
        if self.index.contains_key(&token) {
            return Err(Error::DuplicateToken(display_token(&token)));
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn set_source_tag(&mut self, tag: impl Into<String>) {
        self.source_tag = tag.into();
    }

    pub fn token(&self, i: usize) -> &[u8] {
        &self.tokens[i]
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&[u8], &[f32])> + '_ {
        self.tokens
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(t, v)| (t.as_slice(), v))
    }

    pub fn get_bytes(&self, token: &[u8]) -> Option<&[f32]> {
        self.index.get(token).map(|&i| self.vector(i))
    }

    /// Exact match first, then the lowercased form.
    pub fn lookup(&self, token: &str) -> Option<Hit<'_>> {
        if let Some(vector) = self.get_bytes(token.as_bytes()) {
            return Some(Hit {
                vector,
                form: HitForm::Exact,
            });
        }
        let lower = token.to_lowercase();
        if lower != token {
            if let Some(vector) = self.get_bytes(lower.as_bytes()) {
                return Some(Hit {
                    vector,
                    form: HitForm::Lowercase,
                });
            }
        }
        None
    }

    /// Builds a new store with the same tokens, order and tag, transforming
    /// every vector. `f` receives the token and its vector promoted to f64.
    pub fn map_vectors<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[u8], &[f64]) -> Option<Vec<f64>>,
    {
        let mut out = Self::with_capacity(self.dim, self.len(), self.source_tag.clone())?;
        let mut buf = Vec::with_capacity(self.dim);
        let mut narrowed = Vec::with_capacity(self.dim);
        for (token, vector) in self.iter() {
            buf.clear();
            buf.extend(vector.iter().map(|&x| f64::from(x)));
            narrowed.clear();
            match f(token, &buf) {
                Some(mapped) => narrowed.extend(mapped.iter().map(|&x| x as f32)),
                None => narrowed.extend_from_slice(vector),
            }
            out.insert(token.to_vec(), &narrowed)?;
        }
        Ok(out)
    }
}

/// Equality over token order, dimension and values; the source tag is ignored.
impl PartialEq for EmbeddingStore {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.tokens == other.tokens
            && self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Lossy UTF-8 rendering of a raw token for messages and reports.
pub fn display_token(token: &[u8]) -> String {
    String::from_utf8_lossy(token).to_string()
}
