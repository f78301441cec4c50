//! Dataset generation: candidate filtering, difficulty routing, prompt assembly,
//! generation through an [`LlmClient`](crate::llm::LlmClient), output parsing and
//! the atom-matching filter.

mod filter;
pub mod mock;
mod output;
mod policy;
mod prompt;
mod run;

use serde::{Deserialize, Serialize};

use crate::molgraph::Difficulty;

pub use filter::{filter_candidate, screen, Screened};
pub use output::{atom_match_filter, parse_llm_output, OutputError};
pub use policy::{GenerationPolicy, PolicyError, Route};
pub use prompt::{
    assemble_prompt, assemble_prompt_without_metadata, semantics_blocks, SemanticsBlock,
    PROMPT_VERSION,
};
pub use run::{
    export, read_candidates, read_records, run_pipeline, DirSink, MemorySink, RecordSink,
    Rejection, RunReport, METADATA_DIR, RECORDS_FILE, REJECTED_FILE, REPORT_FILE,
};

/// One molecule offered to the pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateRecord {
    pub id: String,
    #[serde(default, alias = "name")]
    pub iupac_name: Option<String>,
    #[serde(alias = "notation")]
    pub reference_notation: String,
    #[serde(default)]
    pub source: String,
}

/// Exclusion rules, in the order they are applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FilterReason {
    MissingName,
    MultiComponent,
    ParserWarningOrError,
    StructureMismatch,
}

impl FilterReason {
    pub const ALL: [FilterReason; 4] = [
        FilterReason::MissingName,
        FilterReason::MultiComponent,
        FilterReason::ParserWarningOrError,
        FilterReason::StructureMismatch,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub accepted: bool,
    pub reason: Option<FilterReason>,
}

impl FilterVerdict {
    pub fn accept() -> FilterVerdict {
        FilterVerdict {
            accepted: true,
            reason: None,
        }
    }

    pub fn reject(reason: FilterReason) -> FilterVerdict {
        FilterVerdict {
            accepted: false,
            reason: Some(reason),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecordStatus {
    Passed,
    AtomMismatch,
    /// No parsable output within the retry budget.
    GenerationFailed,
}

/// A generated (structure, description) pair with its provenance. Failed records are
/// kept with their status; [`export`] drops them from the final dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetRecord {
    pub id: String,
    pub iupac_name: String,
    pub reference_notation: String,
    pub metadata_xml: String,
    pub difficulty: Difficulty,
    pub description: String,
    pub reported_heavy_atoms: Option<usize>,
    pub true_heavy_atoms: usize,
    pub atom_match_passed: bool,
    pub status: RecordStatus,
    pub model: String,
    pub reasoning_effort: String,
    pub prompt_version: String,
    /// Client calls spent on this record.
    pub generation_calls: usize,
    pub last_error: Option<String>,
    /// Seconds since the Unix epoch.
    pub generated_at: u64,
}
