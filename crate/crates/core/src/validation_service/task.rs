use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::molgraph::{canonical_form, parse_linear, Difficulty, MolError};

use super::ValidationError;

pub const ATTEMPTS_PER_VALIDATOR: usize = 3;
pub const MAX_HUMAN_VALIDATORS: usize = 2;
/// `validatorId` recorded on model attempts.
pub const LLM_VALIDATOR: &str = "llm";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskState {
    PendingLlm,
    LlmPassed,
    AwaitingHuman,
    HumanPassed,
    Failed,
}

impl TaskState {
    pub const ALL: [TaskState; 5] = [
        TaskState::PendingLlm,
        TaskState::LlmPassed,
        TaskState::AwaitingHuman,
        TaskState::HumanPassed,
        TaskState::Failed,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            TaskState::LlmPassed | TaskState::HumanPassed | TaskState::Failed
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskState::PendingLlm => "PendingLlm",
            TaskState::LlmPassed => "LlmPassed",
            TaskState::AwaitingHuman => "AwaitingHuman",
            TaskState::HumanPassed => "HumanPassed",
            TaskState::Failed => "Failed",
        }
    }

    /// Whether the state machine has an edge from `self` to `next`.
    pub fn can_move_to(self, next: TaskState) -> bool {
        use TaskState::*;
        matches!(
            (self, next),
            (PendingLlm, LlmPassed | AwaitingHuman) | (AwaitingHuman, HumanPassed | Failed)
        )
    }
}

impl fmt::Display for TaskState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskState::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown task state '{s}'"))
    }
}

/// The reference structure, kept as its canonical form plus the notation it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub canonical: String,
    pub notation: String,
}

impl GroundTruth {
    pub fn from_notation(notation: &str) -> Result<GroundTruth, MolError> {
        let canonical = canonical_form(&parse_linear(notation)?)?;
        Ok(GroundTruth {
            canonical,
            notation: notation.to_string(),
        })
    }

    /// Parses a submission and compares canonical forms.
    pub fn matches(&self, submitted: &str) -> Result<bool, MolError> {
        Ok(canonical_form(&parse_linear(submitted.trim())?)? == self.canonical)
    }

    /// Scores a submission; unreadable notation is a miss with a diagnostic.
    pub fn judge(&self, submitted: &str) -> (bool, Option<String>) {
        match self.matches(submitted) {
            Ok(m) => (m, None),
            Err(e) => (false, Some(format!("syntax error: {e}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Attempt {
    pub submitted_notation: String,
    pub matched: bool,
    /// Milliseconds since the Unix epoch.
    pub timestamp_start: u64,
    pub timestamp_end: u64,
    pub validator_id: String,
    /// Parse or transport diagnostic for an attempt that could not be scored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Attempt {
    pub fn is_llm(&self) -> bool {
        self.validator_id == LLM_VALIDATOR
    }
}

/// One sample under validation. Holds the ground truth, so it never leaves the server;
/// clients get a [`TaskView`] or [`TaskSummary`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationTask {
    pub sample_id: String,
    pub description: String,
    pub difficulty: Difficulty,
    pub ground_truth: GroundTruth,
    pub state: TaskState,
    pub attempts: Vec<Attempt>,
    pub assigned_validator: Option<String>,
    pub first_validator: Option<String>,
    pub second_validator_used: bool,
}

impl ValidationTask {
    pub fn new(
        sample_id: &str,
        description: &str,
        difficulty: Difficulty,
        ground_truth: GroundTruth,
    ) -> ValidationTask {
        ValidationTask {
            sample_id: sample_id.to_string(),
            description: description.to_string(),
            difficulty,
            ground_truth,
            state: TaskState::PendingLlm,
            attempts: Vec::new(),
            assigned_validator: None,
            first_validator: None,
            second_validator_used: false,
        }
    }

    pub fn attempts_by(&self, validator: &str) -> usize {
        self.attempts
            .iter()
            .filter(|a| a.validator_id == validator)
            .count()
    }

    pub fn human_attempts(&self) -> impl Iterator<Item = &Attempt> {
        self.attempts.iter().filter(|a| !a.is_llm())
    }

    pub fn remaining_for(&self, validator: &str) -> usize {
        ATTEMPTS_PER_VALIDATOR.saturating_sub(self.attempts_by(validator))
    }

    fn has_claimed(&self, validator: &str) -> bool {
        self.first_validator.as_deref() == Some(validator)
            || (self.second_validator_used && self.assigned_validator.as_deref() == Some(validator))
    }

    /// Assigns the task to `validator`. Claiming a task one already holds is a no-op.
    pub fn claim(&mut self, validator: &str) -> Result<(), ValidationError> {
        if validator == LLM_VALIDATOR {
            return Err(ValidationError::InvalidValidator(validator.to_string()));
        }
        if self.state != TaskState::AwaitingHuman {
            return Err(ValidationError::TaskNotEligible(self.state));
        }
        if self.remaining_for(validator) == 0 {
            return Err(ValidationError::ValidatorExhausted);
        }
        match self.assigned_validator.as_deref() {
            Some(v) if v == validator => return Ok(()),
            Some(_) => return Err(ValidationError::AlreadyClaimed),
            None => {}
        }
        if self.first_validator.is_none() {
            self.first_validator = Some(validator.to_string());
        } else if self.second_validator_used {
            return Err(ValidationError::ValidatorExhausted);
        } else {
            self.second_validator_used = true;
        }
        self.assigned_validator = Some(validator.to_string());
        Ok(())
    }

    /// Checks that `validator` may submit now.
    pub fn check_submit(&self, validator: &str) -> Result<(), ValidationError> {
        if self.remaining_for(validator) == 0 && self.has_claimed(validator) {
            return Err(ValidationError::NoAttemptsLeft);
        }
        if self.state != TaskState::AwaitingHuman {
            return Err(ValidationError::TaskNotEligible(self.state));
        }
        if self.assigned_validator.as_deref() != Some(validator) {
            return Err(ValidationError::NotAssigned);
        }
        Ok(())
    }

    /// Records a scored human attempt and advances the state: a match passes the task,
    /// a first validator's last miss releases it, a second validator's last miss fails it.
    pub fn record_human_attempt(&mut self, attempt: Attempt) -> Result<(), ValidationError> {
        let validator = attempt.validator_id.clone();
        self.check_submit(&validator)?;
        let matched = attempt.matched;
        self.attempts.push(attempt);
        if matched {
            self.state = TaskState::HumanPassed;
        } else if self.remaining_for(&validator) == 0 {
            if self.second_validator_used {
                self.state = TaskState::Failed;
            } else {
                self.assigned_validator = None;
            }
        }
        Ok(())
    }

    /// Applies the outcome of model validation: passed if any attempt matched, otherwise
    /// handed to human validators.
    pub fn record_llm_attempts(&mut self, attempts: Vec<Attempt>) -> Result<(), ValidationError> {
        if self.state != TaskState::PendingLlm {
            return Err(ValidationError::TaskNotEligible(self.state));
        }
        let passed = attempts.iter().any(|a| a.matched);
        self.attempts.extend(attempts);
        self.state = if passed {
            TaskState::LlmPassed
        } else {
            TaskState::AwaitingHuman
        };
        Ok(())
    }

    pub fn view_for(&self, validator: &str) -> TaskView {
        TaskView {
            sample_id: self.sample_id.clone(),
            description: self.description.clone(),
            difficulty: self.difficulty,
            state: self.state,
            assigned_to_you: self.assigned_validator.as_deref() == Some(validator),
            remaining: self.remaining_for(validator),
            attempts: self
                .attempts
                .iter()
                .filter(|a| a.validator_id == validator)
                .map(|a| AttemptView {
                    submitted_notation: a.submitted_notation.clone(),
                    matched: a.matched,
                    message: a.message.clone(),
                    duration_ms: a.timestamp_end.saturating_sub(a.timestamp_start),
                })
                .collect(),
        }
    }

    pub fn summary_for(&self, validator: Option<&str>) -> TaskSummary {
        let mut probe = self.clone();
        let claimable = validator.is_some_and(|v| probe.claim(v).is_ok());
        TaskSummary {
            sample_id: self.sample_id.clone(),
            difficulty: self.difficulty,
            state: self.state,
            claimed: self.assigned_validator.is_some(),
            claimable,
        }
    }

    /// Every rule a task must satisfy at rest. Re-checks matched attempts against the
    /// ground truth, so it also works on tasks loaded from disk.
    pub fn check_invariants(&self) -> Result<(), String> {
        let id = &self.sample_id;
        let mut validators: Vec<&str> = self
            .human_attempts()
            .map(|a| a.validator_id.as_str())
            .collect();
        validators.sort_unstable();
        validators.dedup();
        if validators.len() > MAX_HUMAN_VALIDATORS {
            return Err(format!("{id}: {} human validators", validators.len()));
        }
        for v in &validators {
            if self.attempts_by(v) > ATTEMPTS_PER_VALIDATOR {
                return Err(format!("{id}: {v} made {} attempts", self.attempts_by(v)));
            }
        }
        let human = self.human_attempts().count();
        if human > ATTEMPTS_PER_VALIDATOR * MAX_HUMAN_VALIDATORS {
            return Err(format!("{id}: {human} human attempts"));
        }
        for a in &self.attempts {
            let (ok, _) = self.ground_truth.judge(&a.submitted_notation);
            if ok != a.matched {
                return Err(format!(
                    "{id}: attempt {:?} recorded matched={}",
                    a.submitted_notation, a.matched
                ));
            }
        }
        let llm_match = self.attempts.iter().any(|a| a.is_llm() && a.matched);
        let human_match = self.human_attempts().any(|a| a.matched);
        let ok = match self.state {
            TaskState::PendingLlm => self.attempts.is_empty(),
            TaskState::LlmPassed => llm_match && human == 0,
            TaskState::AwaitingHuman => !llm_match && !human_match,
            TaskState::HumanPassed => human_match && !llm_match,
            TaskState::Failed => {
                !llm_match
                    && !human_match
                    && validators.len() == MAX_HUMAN_VALIDATORS
                    && validators
                        .iter()
                        .all(|v| self.attempts_by(v) == ATTEMPTS_PER_VALIDATOR)
            }
        };
        if !ok {
            return Err(format!(
                "{id}: attempts inconsistent with state {}",
                self.state
            ));
        }
        Ok(())
    }
}

/// What a validator sees of a task: the description and their own attempt history.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskView {
    pub sample_id: String,
    pub description: String,
    pub difficulty: Difficulty,
    pub state: TaskState,
    pub assigned_to_you: bool,
    pub remaining: usize,
    pub attempts: Vec<AttemptView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttemptView {
    pub submitted_notation: String,
    pub matched: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub duration_ms: u64,
}

/// A queue row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskSummary {
    pub sample_id: String,
    pub difficulty: Difficulty,
    pub state: TaskState,
    pub claimed: bool,
    /// Whether the requesting validator could claim it now.
    pub claimable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubmitOutcome {
    pub matched: bool,
    pub remaining: usize,
    pub task_state: TaskState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}
