use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("vector for `{token}` has {found} components, expected {expected}")]
    DimensionMismatch {
        token: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite component in vector for `{0}`")]
    NonFinite(String),
    #[error("duplicate token `{0}`")]
    DuplicateToken(String),
    #[error("only {found} definitional pairs resolvable, at least 2 required")]
    TooFewPairs { found: usize },
    #[error("sign anchor `{0}` cannot orient the gender direction")]
    UnusableAnchor(String),
    #[error("definitional pair differences carry no variance")]
    DegenerateDirection,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),
    #[error("no query term has an embedding")]
    QueryNotEmbeddable,
    #[error("cannot sample {k} documents from a corpus of {available}")]
    SampleTooLarge { k: usize, available: usize },
    #[error("query `{0}` has no relevant documents")]
    NoRelevantDocuments(String),
    #[error("at least {needed} usable points required, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("query genderedness has zero variance")]
    DegenerateVariance,
    #[error("reference (perfect engine) slope is zero")]
    ZeroReferenceSlope,
    #[error("query `{0}` has no relevance judgments")]
    UnjudgedQuery(String),
    #[error("ideal DCG is zero for query `{0}`")]
    ZeroIdealDcg(String),
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("permutation test group is empty")]
    EmptyGroup,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("duplicate judgment for query `{0}`, document `{1}`")]
    DuplicateJudgment(String, String),
    #[error("query sets differ between runs (first mismatch: `{0}`)")]
    QueryMismatch(String),
}
