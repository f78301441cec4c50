//! Hybrid validation of generated descriptions: pass@k reconstruction by a model
//! validator, then up to two human validators with three attempts each.

mod http;
mod llm_check;
pub mod mock;
mod report;
mod store;
mod task;

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::annotation_pipeline::Route;

pub use http::{router, serve, VALIDATOR_HEADER};
pub use llm_check::{
    extract_notation, llm_attempts, llm_validate, validator_prompt, VALIDATOR_PROMPT_VERSION,
};
pub use report::{validation_report, StateCounts, ValidationReport};
pub use store::{TaskStore, EVENT_LOG, SNAPSHOT};
pub use task::{
    Attempt, AttemptView, GroundTruth, SubmitOutcome, TaskState, TaskSummary, TaskView,
    ValidationTask, ATTEMPTS_PER_VALIDATOR, LLM_VALIDATOR, MAX_HUMAN_VALIDATORS,
};

pub const DEFAULT_PASS_K: usize = 3;

/// Milliseconds since the Unix epoch.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    })
}

/// The model validator's default route.
pub fn default_validator_route() -> Route {
    Route {
        model: "gpt-5.2".into(),
        effort: "medium".into(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("task is {0} and not open for this action")]
    TaskNotEligible(TaskState),
    #[error("validator has no attempts left on this task")]
    ValidatorExhausted,
    #[error("task is claimed by another validator")]
    AlreadyClaimed,
    #[error("task is not assigned to this validator")]
    NotAssigned,
    #[error("no attempts left")]
    NoAttemptsLeft,
    #[error("invalid validator id {0:?}")]
    InvalidValidator(String),
    #[error("attempt budget must be at least 1")]
    InvalidBudget,
    #[error("task {0} already exists")]
    DuplicateTask(String),
    #[error("ground truth does not parse: {0}")]
    InvalidGroundTruth(String),
    #[error("storage: {0}")]
    Io(String),
}

impl From<std::io::Error> for ValidationError {
    fn from(e: std::io::Error) -> Self {
        ValidationError::Io(e.to_string())
    }
}
