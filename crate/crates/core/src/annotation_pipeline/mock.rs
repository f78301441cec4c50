//! A scripted stand-in for the generator model, used by tests and `forge generate --mock`.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::llm::{ClientError, ConcurrencyProbe, LlmClient};
use crate::molgraph::count_heavy_atoms;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MockReply {
    /// Well-formed output with the true heavy-atom count.
    Correct,
    /// Well-formed output with the count shifted by this amount.
    Offset(i64),
    /// Output missing the count tag.
    Malformed,
    /// Count tag holding something other than an integer.
    NonInteger,
    Transport,
}

impl FromStr for MockReply {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "correct" => Ok(MockReply::Correct),
            "malformed" => Ok(MockReply::Malformed),
            "noninteger" => Ok(MockReply::NonInteger),
            "transport" => Ok(MockReply::Transport),
            other => other
                .strip_prefix("offset:")
                .and_then(|k| k.trim_start_matches('+').parse().ok())
                .map(MockReply::Offset)
                .ok_or_else(|| format!("unknown mock reply '{other}'")),
        }
    }
}

/// Answers from the name and notation embedded in the prompt. Each name has a reply
/// sequence; its n-th call gets the n-th reply and the last one repeats. Names without
/// a script get the default reply on every call.
pub struct MockClient {
    script: HashMap<String, Vec<MockReply>>,
    default: MockReply,
    calls: Mutex<HashMap<String, usize>>,
    probe: Arc<ConcurrencyProbe>,
    delay: Duration,
}

impl Default for MockClient {
    fn default() -> Self {
        MockClient::new(MockReply::Correct)
    }
}

fn prompt_field<'a>(prompt: &'a str, key: &str) -> Option<&'a str> {
    prompt
        .lines()
        .find_map(|l| l.trim_start().strip_prefix(key))
        .map(str::trim)
}

impl MockClient {
    pub fn new(default: MockReply) -> MockClient {
        MockClient {
            script: HashMap::new(),
            default,
            calls: Mutex::new(HashMap::new()),
            probe: Arc::new(ConcurrencyProbe::default()),
            delay: Duration::ZERO,
        }
    }

    pub fn with_script(mut self, name: impl Into<String>, replies: Vec<MockReply>) -> Self {
        self.script.insert(name.into(), replies);
        self
    }

    /// Sleeps this long inside every call, so overlap is observable.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn probe(&self) -> Arc<ConcurrencyProbe> {
        Arc::clone(&self.probe)
    }

    /// Parses `name<TAB>reply,reply,...` lines; `#` lines and blanks are skipped.
    /// The name `*` sets the default reply.
    pub fn from_script(text: &str) -> Result<MockClient, String> {
        let mut client = MockClient::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (name, replies) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected a tab", i + 1))?;
            let replies: Vec<MockReply> = replies
                .split(',')
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| format!("line {}: {e}", i + 1))?;
            if replies.is_empty() {
                return Err(format!("line {}: no replies", i + 1));
            }
            if name == "*" {
                client.default = replies[0];
            } else {
                client.script.insert(name.to_string(), replies);
            }
        }
        Ok(client)
    }

    fn next_reply(&self, name: &str) -> MockReply {
        let Some(replies) = self.script.get(name) else {
            return self.default;
        };
        let mut calls = self.calls.lock().unwrap_or_else(|p| p.into_inner());
        let n = calls.entry(name.to_string()).or_default();
        let reply = replies[(*n).min(replies.len() - 1)];
        *n += 1;
        reply
    }
}

impl LlmClient for MockClient {
    fn send(&self, prompt: &str, model: &str, effort: &str) -> Result<String, ClientError> {
        let _guard = self.probe.enter();
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let name = prompt_field(prompt, "- IUPAC Name:")
            .ok_or_else(|| ClientError::BadResponse("no name in prompt".into()))?;
        let notation = prompt_field(prompt, "- SMILES String:")
            .ok_or_else(|| ClientError::BadResponse("no notation in prompt".into()))?;
        let heavy = count_heavy_atoms(notation)
            .map_err(|e| ClientError::BadResponse(e.to_string()))? as i64;
        let description =
            format!("A molecule named {name}, described by {model} at {effort} effort.");
        let tagged = |count: String| {
            format!("<description>{description}</description>\n<non_hydrogen_atom_count>{count}</non_hydrogen_atom_count>")
        };
        match self.next_reply(name) {
            MockReply::Correct => Ok(tagged(heavy.to_string())),
            MockReply::Offset(k) => Ok(tagged((heavy + k).max(0).to_string())),
            MockReply::Malformed => Ok(format!("<description>{description}</description>")),
            MockReply::NonInteger => Ok(tagged("about twenty".into())),
            MockReply::Transport => {
                Err(ClientError::Transport("scripted transport failure".into()))
            }
        }
    }
}
