//! Chemical name parsing into structural metadata, plus the dataset tooling built on it.

pub mod annotation_pipeline;
pub mod llm;
pub mod metadata_serializer;
pub mod molgraph;
pub mod parse_tree;
pub mod ring_topology;
pub mod structure_builder;
pub mod tokenizer;
pub mod validation_service;

use thiserror::Error;

use molgraph::MolecularGraph;
use parse_tree::{MetadataTree, ParseTreeError};
use structure_builder::BuildError;
use tokenizer::{Token, TokenizeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NameError {
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
    #[error(transparent)]
    Tree(#[from] ParseTreeError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Everything derived from one name.
#[derive(Clone, Debug)]
pub struct ParsedName {
    pub tokens: Vec<Token>,
    pub tree: MetadataTree,
    pub graph: MolecularGraph,
}

/// Tokenizes, builds and corrects the metadata tree, and assembles the structure.
pub fn parse_name(name: &str) -> Result<ParsedName, NameError> {
    let tokens = tokenizer::tokenize(name)?;
    let tree = parse_tree::build_parse_tree(&tokens)?;
    let tree = parse_tree::retain_elements(tree);
    let tree = parse_tree::rearrange_affiliations(tree)?;
    let graph = structure_builder::build_structure(&tree)?;
    Ok(ParsedName {
        tokens,
        tree,
        graph,
    })
}
