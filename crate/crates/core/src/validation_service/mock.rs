//! Stand-in model validators.

use std::collections::VecDeque;
use std::sync::Mutex;

use crate::llm::{ClientError, LlmClient};
use crate::molgraph::emit_linear;
use crate::parse_name;

/// Replies from a fixed queue; once it runs dry every call is a transport failure.
pub struct QueuedValidator {
    replies: Mutex<VecDeque<Result<String, ClientError>>>,
}

impl QueuedValidator {
    pub fn new(replies: impl IntoIterator<Item = Result<String, ClientError>>) -> QueuedValidator {
        QueuedValidator {
            replies: Mutex::new(replies.into_iter().collect()),
        }
    }

    /// Wraps each notation in answer tags.
    pub fn answers<'a>(notations: impl IntoIterator<Item = &'a str>) -> QueuedValidator {
        QueuedValidator::new(
            notations
                .into_iter()
                .map(|n| Ok(format!("<smiles>{n}</smiles>"))),
        )
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().unwrap_or_else(|p| p.into_inner()).len()
    }
}

impl LlmClient for QueuedValidator {
    fn send(&self, _: &str, _: &str, _: &str) -> Result<String, ClientError> {
        self.replies
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .pop_front()
            .unwrap_or_else(|| Err(ClientError::Transport("no scripted reply left".into())))
    }
}

/// Reads the compound name out of descriptions written by the generator mock
/// ("A molecule named X, ...") and answers with its structure.
#[derive(Default)]
pub struct NameEchoValidator;

impl LlmClient for NameEchoValidator {
    fn send(&self, prompt: &str, _: &str, _: &str) -> Result<String, ClientError> {
        let name = prompt
            .split("A molecule named ")
            .nth(1)
            .and_then(|rest| rest.split(", described by").next())
            .ok_or_else(|| ClientError::BadResponse("description names no compound".into()))?;
        let parsed =
            parse_name(name.trim()).map_err(|e| ClientError::BadResponse(e.to_string()))?;
        let notation =
            emit_linear(&parsed.graph).map_err(|e| ClientError::BadResponse(e.to_string()))?;
        Ok(format!("<smiles>{notation}</smiles>"))
    }
}
