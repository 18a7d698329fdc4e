//! Tokenization and bag-of-words genderedness of queries and documents.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data;
use crate::geometry::WordGenderedness;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    words: BTreeSet<String>,
}

impl StopList {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn empty() -> Self {
        Self {
            words: BTreeSet::new(),
        }
    }

    /// Parses one word per line, `#` starting a comment line.
    pub fn from_lines(text: &str) -> Self {
        Self::new(data::word_lines(text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

impl Default for StopList {
    fn default() -> Self {
        Self::from_lines(data::SMART_STOP_LIST)
    }
}

/// Lowercase tokens in occurrence order, stop words removed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BagOfWords {
    tokens: Vec<String>,
}

impl BagOfWords {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            tokens: tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty())
                .collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn types(&self) -> BTreeSet<&str> {
        self.iter().collect()
    }
}

/// Lowercases, splits on every non-alphanumeric character, and drops
/// purely numeric tokens and stop words.
pub fn tokenize(text: &str, stops: &StopList) -> BagOfWords {
    let lower = text.to_lowercase();
    let tokens = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !t.chars().all(char::is_numeric))
        .filter(|t| !stops.contains(t))
        .map(String::from)
        .collect();
    BagOfWords { tokens }
}

fn mean<I: Iterator<Item = f64>>(values: I) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// `g(q)`: mean genderedness over query token occurrences that have a score.
pub fn query_genderedness<G: WordGenderedness + ?Sized>(q: &BagOfWords, scorer: &G) -> Option<f64> {
    mean(q.iter().filter_map(|t| scorer.word(t)))
}

/// `g_q(d)`: mean genderedness of the document after removing every
/// occurrence of any query token.
pub fn document_genderedness<G: WordGenderedness + ?Sized>(
    d: &BagOfWords,
    q: &BagOfWords,
    scorer: &G,
) -> Option<f64> {
    let query_types = q.types();
    mean(
        d.iter()
            .filter(|t| !query_types.contains(t))
            .filter_map(|t| scorer.word(t)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;
    use alloc::vec;

    fn table(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
        entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn tokenize_examples() {
        let stops = StopList::new(["the", "is"]);
        assert_eq!(
            tokenize("The nurse is affectionate.", &stops).tokens(),
            &["nurse", "affectionate"]
        );
        assert!(tokenize("", &stops).is_empty());
        assert_eq!(
            tokenize("Women in Parliaments", &StopList::new(["in"])).tokens(),
            &["women", "parliaments"]
        );
        assert_eq!(
            tokenize("B-52s flew 1994 (x2)", &StopList::empty()).tokens(),
            &["b", "52s", "flew", "x2"]
        );
    }

    #[test]
    fn default_stop_list_strips_template_words() {
        let bag = tokenize("The man is an electrician.", &StopList::default());
        assert_eq!(bag.tokens(), &["man", "electrician"]);
    }

    #[test]
    fn query_genderedness_examples() {
        let t = table(&[("electrician", -0.12), ("a", 0.2), ("b", -0.1)]);
        let q = BagOfWords::from_tokens(["electrician"]);
        assert_eq!(query_genderedness(&q, &t), Some(-0.12));
        assert_eq!(query_genderedness(&BagOfWords::default(), &t), None);
        let q = BagOfWords::from_tokens(["a", "b", "oov"]);
        assert!((query_genderedness(&q, &t).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn document_genderedness_examples() {
        let t = table(&[
            ("man", -0.2),
            ("electrician", -0.1),
            ("care", 0.1),
            ("woman", 0.3),
            ("mary", 0.4),
            ("nurse", 0.25),
        ]);
        let q = BagOfWords::from_tokens(["electrician"]);
        let d = BagOfWords::from_tokens(["man", "electrician"]);
        assert_eq!(document_genderedness(&d, &q, &t), Some(-0.2));
        assert_eq!(document_genderedness(&q, &q, &t), None);

        let q = BagOfWords::from_tokens(["nurse"]);
        let d = BagOfWords::from_tokens(["care", "woman", "mary", "nurse"]);
        let expected = (0.1 + 0.3 + 0.4) / 3.0;
        assert!((document_genderedness(&d, &q, &t).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn multiset_semantics() {
        let t = table(&[("a", 1.0), ("b", 0.0)]);
        let d = BagOfWords::from_tokens(vec!["a", "a", "b"]);
        let q = BagOfWords::default();
        assert!((document_genderedness(&d, &q, &t).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }
}
