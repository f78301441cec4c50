use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::Difficulty;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub model: String,
    pub effort: String,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.model, self.effort)
    }
}

/// Difficulty routing plus worker and retry limits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationPolicy {
    routes: BTreeMap<Difficulty, Route>,
    pub max_concurrent: usize,
    /// Extra generation calls allowed after a failed one.
    pub retry_limit: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("line {0}: unknown key `{1}`")]
    UnknownKey(usize, String),
    #[error("line {0}: bad value `{1}`")]
    BadValue(usize, String),
    #[error("no route for {0}")]
    MissingRoute(Difficulty),
}

impl GenerationPolicy {
    pub fn new(
        routes: BTreeMap<Difficulty, Route>,
        max_concurrent: usize,
        retry_limit: usize,
    ) -> Result<Self, PolicyError> {
        if let Some(d) = Difficulty::ALL.iter().find(|d| !routes.contains_key(d)) {
            return Err(PolicyError::MissingRoute(*d));
        }
        Ok(GenerationPolicy {
            routes,
            max_concurrent: max_concurrent.max(1),
            retry_limit,
        })
    }

    pub fn route(&self, d: Difficulty) -> &Route {
        &self.routes[&d]
    }

    pub fn routes(&self) -> &BTreeMap<Difficulty, Route> {
        &self.routes
    }

    /// Writes the policy in the format [`FromStr`] reads.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (d, r) in &self.routes {
            s.push_str(&format!(
                "route.{} = {} {}\n",
                d.as_str().to_ascii_lowercase(),
                r.model,
                r.effort
            ));
        }
        s.push_str(&format!(
            "max_concurrent = {}\nretry_limit = {}\n",
            self.max_concurrent, self.retry_limit
        ));
        s
    }
}

impl Default for GenerationPolicy {
    fn default() -> Self {
        let route = |effort: &str| Route {
            model: "gpt-5.2".into(),
            effort: effort.into(),
        };
        let routes = BTreeMap::from([
            (Difficulty::Easy, route("high")),
            (Difficulty::Medium, route("xhigh")),
            (Difficulty::Hard, route("xhigh")),
        ]);
        GenerationPolicy {
            routes,
            max_concurrent: 8,
            retry_limit: 2,
        }
    }
}

/// `key = value` lines; `#` starts a comment. Routes are `route.<difficulty> = <model> <effort>`.
impl FromStr for GenerationPolicy {
    type Err = PolicyError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let defaults = GenerationPolicy::default();
        let mut routes = BTreeMap::new();
        let (mut max_concurrent, mut retry_limit) = (defaults.max_concurrent, defaults.retry_limit);
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(PolicyError::Syntax(n))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || PolicyError::BadValue(n, value.to_string());
            match key {
                "max_concurrent" => max_concurrent = value.parse().map_err(|_| bad())?,
                "retry_limit" => retry_limit = value.parse().map_err(|_| bad())?,
                _ => {
                    let d = key
                        .strip_prefix("route.")
                        .and_then(|d| d.parse::<Difficulty>().ok())
                        .ok_or_else(|| PolicyError::UnknownKey(n, key.to_string()))?;
                    let (model, effort) = value.rsplit_once(char::is_whitespace).ok_or_else(bad)?;
                    routes.insert(
                        d,
                        Route {
                            model: model.trim().to_string(),
                            effort: effort.to_string(),
                        },
                    );
                }
            }
        }
        GenerationPolicy::new(routes, max_concurrent, retry_limit)
    }
}
