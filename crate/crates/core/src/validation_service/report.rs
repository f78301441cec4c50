use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use crate::molgraph::Difficulty;

use super::task::{TaskState, ValidationTask};

fn precision_or_na<S: Serializer>(p: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_str("n/a"),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateCounts {
    pub total: usize,
    pub pending_llm: usize,
    pub awaiting_human: usize,
    pub llm_passed: usize,
    pub human_passed: usize,
    pub failed: usize,
    /// Passed over decided (passed or failed) tasks.
    #[serde(serialize_with = "precision_or_na", skip_deserializing)]
    pub precision: Option<f64>,
    /// Mean human attempt duration in seconds.
    pub mean_human_attempt_secs: Option<f64>,
    pub human_attempts: usize,
}

impl StateCounts {
    fn add(&mut self, t: &ValidationTask) {
        self.total += 1;
        match t.state {
            TaskState::PendingLlm => self.pending_llm += 1,
            TaskState::AwaitingHuman => self.awaiting_human += 1,
            TaskState::LlmPassed => self.llm_passed += 1,
            TaskState::HumanPassed => self.human_passed += 1,
            TaskState::Failed => self.failed += 1,
        }
    }

    pub fn passed(&self) -> usize {
        self.llm_passed + self.human_passed
    }

    pub fn precision_label(&self) -> String {
        self.precision
            .map_or_else(|| "n/a".to_string(), |p| format!("{:.1}%", p * 100.0))
    }

    fn finish(&mut self, human_ms: u64) {
        let decided = self.passed() + self.failed;
        self.precision = (decided > 0).then(|| self.passed() as f64 / decided as f64);
        self.mean_human_attempt_secs = (self.human_attempts > 0)
            .then(|| human_ms as f64 / 1000.0 / self.human_attempts as f64);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub by_difficulty: BTreeMap<Difficulty, StateCounts>,
    pub overall: StateCounts,
}

pub fn validation_report(tasks: &[ValidationTask]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut ms: BTreeMap<Difficulty, u64> = BTreeMap::new();
    for t in tasks {
        let row = report.by_difficulty.entry(t.difficulty).or_default();
        row.add(t);
        report.overall.add(t);
        for a in t.human_attempts() {
            let d = a.timestamp_end.saturating_sub(a.timestamp_start);
            *ms.entry(t.difficulty).or_default() += d;
            row.human_attempts += 1;
            report.overall.human_attempts += 1;
        }
    }
    for (d, row) in report.by_difficulty.iter_mut() {
        row.finish(ms.get(d).copied().unwrap_or(0));
    }
    report.overall.finish(ms.values().sum());
    report
}
