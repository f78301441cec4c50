use crate::annotation_pipeline::Route;
use crate::llm::{ClientError, LlmClient};

use super::task::{Attempt, ValidationTask, LLM_VALIDATOR};
use super::{Clock, ValidationError};

pub const VALIDATOR_PROMPT_VERSION: &str = "v1";
const VALIDATOR_PROMPT: &str = include_str!("../../resources/prompts/v1/validator.txt");

pub fn validator_prompt(description: &str) -> String {
    VALIDATOR_PROMPT.replace("{DESCRIPTION}", description.trim())
}

/// The reconstruction inside `<smiles>` tags, or failing that the last non-empty line.
pub fn extract_notation(reply: &str) -> String {
    if let Some(start) = reply.rfind("<smiles>") {
        let rest = &reply[start + "<smiles>".len()..];
        return rest[..rest.find("</smiles>").unwrap_or(rest.len())]
            .trim()
            .to_string();
    }
    reply
        .lines()
        .rev()
        .map(|l| l.trim().trim_matches('`').trim())
        .find(|l| !l.is_empty())
        .unwrap_or("")
        .to_string()
}

fn send_with_retry(
    client: &dyn LlmClient,
    prompt: &str,
    route: &Route,
) -> Result<String, ClientError> {
    client
        .send(prompt, &route.model, &route.effort)
        .or_else(|_| client.send(prompt, &route.model, &route.effort))
}

/// Runs up to `k` model reconstruction attempts and returns them, stopping at the first
/// match. A call that fails twice in a row is a failed attempt.
pub fn llm_attempts(
    task: &ValidationTask,
    client: &dyn LlmClient,
    k: usize,
    route: &Route,
    clock: &Clock,
) -> Result<Vec<Attempt>, ValidationError> {
    if k == 0 {
        return Err(ValidationError::InvalidBudget);
    }
    let prompt = validator_prompt(&task.description);
    let mut attempts = Vec::with_capacity(k);
    for _ in 0..k {
        let start = clock();
        let (notation, matched, message) = match send_with_retry(client, &prompt, route) {
            Err(e) => (String::new(), false, Some(e.to_string())),
            Ok(reply) => {
                let notation = extract_notation(&reply);
                let (matched, message) = task.ground_truth.judge(&notation);
                (notation, matched, message)
            }
        };
        attempts.push(Attempt {
            submitted_notation: notation,
            matched,
            timestamp_start: start,
            timestamp_end: clock(),
            validator_id: LLM_VALIDATOR.to_string(),
            message,
        });
        if matched {
            break;
        }
    }
    Ok(attempts)
}

/// Pass@k model validation of a pending task.
pub fn llm_validate(
    task: &mut ValidationTask,
    client: &dyn LlmClient,
    k: usize,
    route: &Route,
    clock: &Clock,
) -> Result<(), ValidationError> {
    if task.state != super::TaskState::PendingLlm {
        return Err(ValidationError::TaskNotEligible(task.state));
    }
    let attempts = llm_attempts(task, client, k, route, clock)?;
    task.record_llm_attempts(attempts)
}
