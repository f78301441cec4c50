use crate::molgraph::{graphs_equivalent, parse_linear, MolecularGraph};
use crate::{parse_name, ParsedName};

use super::{CandidateRecord, FilterReason, FilterVerdict};

/// An accepted candidate with everything the later stages need.
pub struct Screened {
    pub name: String,
    pub parsed: ParsedName,
    pub reference: MolecularGraph,
}

/// Applies the exclusion rules in order; the first failing rule is the reason.
pub fn screen(c: &CandidateRecord) -> Result<Screened, FilterReason> {
    let name = match c.iupac_name.as_deref().map(str::trim) {
        Some(n) if !n.is_empty() => n.to_string(),
        _ => return Err(FilterReason::MissingName),
    };
    if c.reference_notation.contains('.') {
        return Err(FilterReason::MultiComponent);
    }
    let parsed = parse_name(&name).map_err(|_| FilterReason::ParserWarningOrError)?;
    // An unreadable reference cannot be matched against anything.
    let reference =
        parse_linear(&c.reference_notation).map_err(|_| FilterReason::StructureMismatch)?;
    match graphs_equivalent(&parsed.graph, &reference) {
        Ok(true) => Ok(Screened {
            name,
            parsed,
            reference,
        }),
        _ => Err(FilterReason::StructureMismatch),
    }
}

pub fn filter_candidate(c: &CandidateRecord) -> FilterVerdict {
    match screen(c) {
        Ok(_) => FilterVerdict::accept(),
        Err(r) => FilterVerdict::reject(r),
    }
}
