//! Measurement of gender stereotype reinforcement (GSR) in ranking systems.
//!
//! The crate is `no_std` and only needs an allocator. Everything here is pure
//! computation over in-memory data: word vectors, the gender direction
//! extracted from them, genderedness of words, queries, documents and ranked
//! lists, the GSR slope, the retrieval models being audited, the IR metrics
//! and statistical tests used to interpret results, and the toy and synthetic
//! collections. File formats and the command line live in `gsr-tools`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod collection;
pub mod data;
pub mod direct;
pub mod embedding;
pub mod engines;
mod error;
pub mod geometry;
pub mod gsr;
pub mod linalg;
pub mod metrics;
pub mod special;
pub mod stats;
pub mod synthetic;
pub mod text;

pub use collection::{Document, Qrels, RankedItem, RankedList, RunSet, Topic};
pub use embedding::{EmbeddingStore, Hit, HitForm};
pub use error::{Error, Result};
pub use geometry::{
    DefinitionalPairs, DirectionOptions, GenderDirection, GenderedWordSet, PcaCentering,
    Projector, WordGenderedness,
};
pub use gsr::{GsrPoint, GsrResult};
pub use text::{BagOfWords, StopList};
