use thiserror::Error;

use crate::molgraph::MolecularGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OutputError {
    #[error("missing <{0}> tag")]
    MissingTag(String),
    #[error("atom count is not an integer: {0:?}")]
    NonIntegerCount(String),
}

fn tagged<'a>(raw: &'a str, tag: &str) -> Result<&'a str, OutputError> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = raw
        .find(&open)
        .ok_or_else(|| OutputError::MissingTag(tag.to_string()))?
        + open.len();
    let len = raw[start..]
        .find(&close)
        .ok_or_else(|| OutputError::MissingTag(tag.to_string()))?;
    Ok(raw[start..start + len].trim())
}

/// Extracts the description and the self-reported heavy-atom count. Text around the
/// tags is ignored; the count must be a bare non-negative integer.
pub fn parse_llm_output(raw: &str) -> Result<(String, usize), OutputError> {
    let description = tagged(raw, "description")?;
    let count = tagged(raw, "non_hydrogen_atom_count")?;
    if description.is_empty() {
        return Err(OutputError::MissingTag("description".into()));
    }
    if count.is_empty() || !count.bytes().all(|b| b.is_ascii_digit()) {
        return Err(OutputError::NonIntegerCount(count.to_string()));
    }
    let n = count
        .parse()
        .map_err(|_| OutputError::NonIntegerCount(count.to_string()))?;
    Ok((description.to_string(), n))
}

pub fn atom_match_filter(reported: usize, graph: &MolecularGraph) -> bool {
    reported == graph.heavy_atom_count()
}
