//! Gender direction, word genderedness and directional debiasing.
//!
//! The gender direction is the first principal component of the difference
//! vectors of definitional pairs such as (she, he). A word's genderedness is the
//! cosine between its vector and that direction; positive values lean female.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::data;
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::linalg::{cosine, dot, norm, symmetric_eigen, widen};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinitionalPairs {
    pairs: Vec<(String, String)>,
}

impl DefinitionalPairs {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::TooFewPairs { found: pairs.len() });
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.pairs
            .iter()
            .flat_map(|(f, m)| [f.as_str(), m.as_str()])
    }
}

impl Default for DefinitionalPairs {
    fn default() -> Self {
        Self {
            pairs: data::DEFINITIONAL_PAIRS
                .iter()
                .map(|(f, m)| (f.to_string(), m.to_string()))
                .collect(),
        }
    }
}

/// How the difference vectors are centered before the principal component
/// analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PcaCentering {
    /// Each pair is centered on its own midpoint, giving rows ±(f − m)/2.
    /// The row set has zero mean, so the shared gender signal is kept.
    #[default]
    PairMidpoint,
    /// Differences are centered on the mean difference.
    DifferenceMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DirectionOptions {
    pub centering: PcaCentering,
    /// Scale every difference vector to unit length first.
    pub normalize_differences: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenderDirection {
    vector: Vec<f64>,
    explained_variance_ratio: f64,
    sign_anchor: String,
    pairs_used: DefinitionalPairs,
    dropped: Vec<(String, String)>,
}

impl GenderDirection {
    /// Wraps an externally computed direction; the vector is normalized.
    pub fn from_vector(vector: Vec<f64>, sign_anchor: impl Into<String>) -> Result<Self> {
        let n = norm(&vector);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DegenerateDirection);
        }
        Ok(Self {
            vector: vector.iter().map(|x| x / n).collect(),
            explained_variance_ratio: 1.0,
            sign_anchor: sign_anchor.into(),
            pairs_used: DefinitionalPairs {
                pairs: Vec::new(),
            },
            dropped: Vec::new(),
        })
    }

    /// Unit vector `w_g`.
    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn explained_variance_ratio(&self) -> f64 {
        self.explained_variance_ratio
    }

    pub fn sign_anchor(&self) -> &str {
        &self.sign_anchor
    }

    pub fn pairs_used(&self) -> &DefinitionalPairs {
        &self.pairs_used
    }

    /// Pairs skipped because a member had no vector.
    pub fn dropped_pairs(&self) -> &[(String, String)] {
        &self.dropped
    }

    /// Cosine of `v` with the direction, `None` for a zero vector.
    pub fn project(&self, v: &[f64]) -> Option<f64> {
        cosine(v, &self.vector)
    }
}

pub fn extract_direction(
    store: &EmbeddingStore,
    pairs: &DefinitionalPairs,
    sign_anchor: &str,
    options: DirectionOptions,
) -> Result<GenderDirection> {
    let mut used = Vec::new();
    let mut dropped = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (f, m) in pairs.pairs() {
        match (store.lookup(f), store.lookup(m)) {
            (Some(fv), Some(mv)) => {
                let mut diff: Vec<f64> = fv
                    .vector
                    .iter()
                    .zip(mv.vector)
                    .map(|(a, b)| f64::from(*a) - f64::from(*b))
                    .collect();
                if options.normalize_differences {
                    let n = norm(&diff);
                    if n > 0.0 {
                        diff.iter_mut().for_each(|x| *x /= n);
                    }
                }
                rows.push(diff);
                used.push((f.clone(), m.clone()));
            }
            _ => dropped.push((f.clone(), m.clone())),
        }
    }
    if rows.len() < 2 {
        return Err(Error::TooFewPairs { found: rows.len() });
    }
    let anchor = store
        .lookup(sign_anchor)
        .map(|h| widen(h.vector))
        .ok_or_else(|| Error::UnusableAnchor(sign_anchor.to_string()))?;

    if options.centering == PcaCentering::DifferenceMean {
        let dim = store.dim();
        let mut mean = vec![0.0; dim];
        for r in &rows {
            mean.iter_mut().zip(r).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
        for r in &mut rows {
            r.iter_mut().zip(&mean).for_each(|(x, m)| *x -= m);
        }
    }

    // The midpoint rows ±d/2 share their second-moment matrix with d (up to a
    // constant factor), so the Gram matrix of the differences suffices. Its
    // top eigenvector u maps back to the principal axis as Rᵀu.
    let n = rows.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let g = dot(&rows[i], &rows[j]);
            gram[i * n + j] = g;
            gram[j * n + i] = g;
        }
    }
    let trace: f64 = (0..n).map(|i| gram[i * n + i]).sum();
    if !(trace > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let (values, vectors) = symmetric_eigen(&gram, n);
    let mut axis = vec![0.0; store.dim()];
    for (i, row) in rows.iter().enumerate() {
        let u = vectors[i * n];
        axis.iter_mut().zip(row).for_each(|(a, x)| *a += u * x);
    }
    let len = norm(&axis);
    if !(len > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    axis.iter_mut().for_each(|a| *a /= len);

    let anchor_projection = dot(&anchor, &axis);
    if anchor_projection == 0.0 || !anchor_projection.is_finite() {
        return Err(Error::UnusableAnchor(sign_anchor.to_string()));
    }
    if anchor_projection < 0.0 {
        axis.iter_mut().for_each(|a| *a = -*a);
    }

    Ok(GenderDirection {
        vector: axis,
        explained_variance_ratio: (values[0] / trace).clamp(0.0, 1.0),
        sign_anchor: sign_anchor.to_string(),
        pairs_used: DefinitionalPairs { pairs: used },
        dropped,
    })
}

/// Genderedness `g(w)` of a token, with the store's case fallback.
pub fn genderedness(store: &EmbeddingStore, direction: &GenderDirection, token: &str) -> Option<f64> {
    let hit = store.lookup(token)?;
    direction.project(&widen(hit.vector))
}

/// Source of per-word genderedness scores.
pub trait WordGenderedness {
    fn word(&self, token: &str) -> Option<f64>;
}

/// Scores words by projecting their vectors on a gender direction.
#[derive(Debug, Clone, Copy)]
pub struct Projector<'a> {
    pub store: &'a EmbeddingStore,
    pub direction: &'a GenderDirection,
}

impl<'a> Projector<'a> {
    pub fn new(store: &'a EmbeddingStore, direction: &'a GenderDirection) -> Self {
        Self { store, direction }
    }

    /// Precomputes scores for a vocabulary; misses are left out of the table.
    pub fn table<'t, I>(&self, vocabulary: I) -> BTreeMap<String, f64>
    where
        I: IntoIterator<Item = &'t str>,
    {
        vocabulary
            .into_iter()
            .filter_map(|t| self.word(t).map(|g| (t.to_string(), g)))
            .collect()
    }
}

impl WordGenderedness for Projector<'_> {
    fn word(&self, token: &str) -> Option<f64> {
        genderedness(self.store, self.direction, token)
    }
}

impl WordGenderedness for BTreeMap<String, f64> {
    fn word(&self, token: &str) -> Option<f64> {
        self.get(token).copied()
    }
}

impl<T: WordGenderedness + ?Sized> WordGenderedness for &T {
    fn word(&self, token: &str) -> Option<f64> {
        (**self).word(token)
    }
}

/// Tokens exempt from regular debiasing. Matching is on the exact token or
/// its lowercased form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GenderedWordSet {
    tokens: BTreeSet<String>,
}

impl GenderedWordSet {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    /// Definitional pair members plus both entity lexicons.
    pub fn default_set() -> Self {
        let pairs = DefinitionalPairs::default();
        let mut tokens: BTreeSet<String> = pairs.tokens().map(|t| t.to_lowercase()).collect();
        tokens.extend(
            data::word_lines(data::MALE_ENTITIES)
                .chain(data::word_lines(data::FEMALE_ENTITIES))
                .map(String::from),
        );
        Self { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains_raw(&self, token: &[u8]) -> bool {
        match core::str::from_utf8(token) {
            Ok(s) => self.tokens.contains(s) || self.tokens.contains(&s.to_lowercase()),
            Err(_) => false,
        }
    }
}

fn neutralize(v: &[f64], w: &[f64]) -> Vec<f64> {
    let p = dot(v, w);
    v.iter().zip(w).map(|(x, wi)| x - p * wi).collect()
}

/// Removes the gender component from every token outside `exempt`; exempt
/// vectors are copied bit for bit. Vectors are not re-normalized.
pub fn debias_regular(
    store: &EmbeddingStore,
    direction: &GenderDirection,
    exempt: &GenderedWordSet,
) -> Result<EmbeddingStore> {
    check_dim(store, direction)?;
    store.map_vectors(|token, v| {
        if exempt.contains_raw(token) {
            None
        } else {
            Some(neutralize(v, direction.vector()))
        }
    })
}

/// Removes the gender component from every token.
pub fn debias_strong(store: &EmbeddingStore, direction: &GenderDirection) -> Result<EmbeddingStore> {
    check_dim(store, direction)?;
    store.map_vectors(|_, v| Some(neutralize(v, direction.vector())))
}

fn check_dim(store: &EmbeddingStore, direction: &GenderDirection) -> Result<()> {
    if store.dim() != direction.vector().len() {
        return Err(Error::DimensionMismatch {
            token: String::from("<gender direction>"),
            expected: store.dim(),
            found: direction.vector().len(),
        });
    }
    Ok(())
}
