//! Hierarchical metadata tree built from a token stream.

mod affiliation;
mod build;
mod tree;

use thiserror::Error;

use crate::ring_topology::TopologyError;
use crate::structure_builder::BuildError;

pub use affiliation::{rearrange_affiliations, retain_elements};
pub use build::build_parse_tree;
pub use tree::{Element, MetadataTree, RetentionReason, Tag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseTreeError {
    #[error("structural error: {0}")]
    StructuralError(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("ambiguous affiliation of {0}")]
    AmbiguousAffiliation(String),
    #[error(transparent)]
    Assembly(#[from] BuildError),
}
