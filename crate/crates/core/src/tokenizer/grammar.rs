use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use super::TokenClass;

const BUILTIN: &str = include_str!("../../resources/grammar.txt");

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One lexical entry of the grammar table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarEntry {
    pub surface: String,
    /// `None` for recognised-but-unsupported constructs.
    pub class: Option<TokenClass>,
    pub payload: BTreeMap<String, String>,
}

impl GrammarEntry {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.payload.get(key).map(String::as_str)
    }

    pub fn unsupported_feature(&self) -> Option<&str> {
        if self.class.is_none() {
            Some(self.get("feature").unwrap_or("unsupported construct"))
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Grammar {
    entries: Vec<Arc<GrammarEntry>>,
}

impl Grammar {
    pub fn builtin() -> &'static Grammar {
        static G: OnceLock<Grammar> = OnceLock::new();
        G.get_or_init(|| Grammar::parse(BUILTIN).expect("built-in grammar is valid"))
    }

    pub fn load(path: &Path) -> Result<Grammar, GrammarError> {
        Grammar::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Grammar, GrammarError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [surface, class, payload] = fields[..] else {
                return Err(GrammarError::Malformed {
                    line: line_no,
                    message: "expected 3 tab-separated fields".into(),
                });
            };
            let class = match class {
                "Unsupported" => None,
                c => Some(
                    TokenClass::from_name(c).ok_or_else(|| GrammarError::Malformed {
                        line: line_no,
                        message: format!("unknown class {c}"),
                    })?,
                ),
            };
            let mut map = BTreeMap::new();
            if payload != "-" {
                for kv in payload.split(';') {
                    let (k, v) = kv.split_once('=').ok_or_else(|| GrammarError::Malformed {
                        line: line_no,
                        message: format!("bad payload item '{kv}'"),
                    })?;
                    map.insert(k.to_string(), v.to_string());
                }
            }
            entries.push(Arc::new(GrammarEntry {
                surface: surface.to_string(),
                class,
                payload: map,
            }));
        }
        Ok(Grammar { entries })
    }

    pub fn entries(&self) -> &[Arc<GrammarEntry>] {
        &self.entries
    }

    /// Entries whose surface form is a prefix of `s`.
    pub fn matches<'a>(&'a self, s: &'a str) -> impl Iterator<Item = &'a Arc<GrammarEntry>> + 'a {
        self.entries
            .iter()
            .filter(move |e| s.starts_with(e.surface.as_str()))
    }

    /// First entry with the given surface and class.
    pub fn lookup(&self, surface: &str, class: TokenClass) -> Option<&Arc<GrammarEntry>> {
        self.entries
            .iter()
            .find(|e| e.surface == surface && e.class == Some(class))
    }
}
