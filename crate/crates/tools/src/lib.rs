//! File formats, collection loading, reports and experiment drivers around
//! `gsr-core`. The `gsr` binary is a thin layer over this library.

pub mod collection_io;
pub mod embedding_io;
mod error;
pub mod experiments;
pub mod pipeline;
pub mod report;
pub mod runfile;
pub mod tables;

pub use error::{FormatError, Result, Warning, Warnings};

use gsr_core::geometry::extract_direction;
use gsr_core::{DefinitionalPairs, DirectionOptions, EmbeddingStore, GenderDirection};

/// Default word the gender direction is oriented toward: it projects
/// positively.
pub const SIGN_ANCHOR: &str = "she";

/// Extracts the gender direction and logs the pairs that had to be dropped.
pub fn direction_for(
    store: &EmbeddingStore,
    pairs: &DefinitionalPairs,
    anchor: &str,
    options: DirectionOptions,
) -> gsr_core::Result<GenderDirection> {
    let dir = extract_direction(store, pairs, anchor, options)?;
    for (f, m) in dir.dropped_pairs() {
        log::warn!("definitional pair ({f}, {m}) dropped: missing vector");
    }
    Ok(dir)
}
