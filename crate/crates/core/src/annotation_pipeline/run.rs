use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::llm::LlmClient;
use crate::metadata_serializer::serialize;
use crate::molgraph::{classify_difficulty, Difficulty};

use super::filter::{screen, Screened};
use super::{
    assemble_prompt, atom_match_filter, parse_llm_output, CandidateRecord, DatasetRecord,
    FilterReason, GenerationPolicy, RecordStatus, PROMPT_VERSION,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub reason: FilterReason,
}

/// Where finished records go. Calls arrive from one thread, in input order.
pub trait RecordSink {
    fn record(&mut self, record: &DatasetRecord) -> io::Result<()>;
    fn rejected(&mut self, rejection: &Rejection) -> io::Result<()>;
    fn finish(&mut self, _report: &RunReport) -> io::Result<()> {
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct MemorySink {
    pub records: Vec<DatasetRecord>,
    pub rejections: Vec<Rejection>,
}

impl RecordSink for MemorySink {
    fn record(&mut self, record: &DatasetRecord) -> io::Result<()> {
        self.records.push(record.clone());
        Ok(())
    }

    fn rejected(&mut self, rejection: &Rejection) -> io::Result<()> {
        self.rejections.push(rejection.clone());
        Ok(())
    }
}

pub const RECORDS_FILE: &str = "records.jsonl";
pub const REJECTED_FILE: &str = "rejected.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const METADATA_DIR: &str = "metadata";

/// Writes `records.jsonl`, `rejected.jsonl`, `report.json` and one
/// `metadata/<id>.xml` sidecar per record.
pub struct DirSink {
    dir: PathBuf,
    records: BufWriter<File>,
    rejected: BufWriter<File>,
    sidecars: HashSet<String>,
}

impl DirSink {
    pub fn create(dir: impl AsRef<Path>) -> io::Result<DirSink> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(dir.join(METADATA_DIR))?;
        Ok(DirSink {
            records: BufWriter::new(File::create(dir.join(RECORDS_FILE))?),
            rejected: BufWriter::new(File::create(dir.join(REJECTED_FILE))?),
            dir,
            sidecars: HashSet::new(),
        })
    }

    fn sidecar_name(&mut self, id: &str) -> String {
        let base: String = id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        let mut name = base.clone();
        let mut n = 2;
        while !self.sidecars.insert(name.clone()) {
            name = format!("{base}-{n}");
            n += 1;
        }
        name
    }
}

impl RecordSink for DirSink {
    fn record(&mut self, record: &DatasetRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.records, record)?;
        self.records.write_all(b"\n")?;
        let name = self.sidecar_name(&record.id);
        fs::write(
            self.dir.join(METADATA_DIR).join(format!("{name}.xml")),
            &record.metadata_xml,
        )
    }

    fn rejected(&mut self, rejection: &Rejection) -> io::Result<()> {
        serde_json::to_writer(&mut self.rejected, rejection)?;
        self.rejected.write_all(b"\n")
    }

    fn finish(&mut self, report: &RunReport) -> io::Result<()> {
        self.records.flush()?;
        self.rejected.flush()?;
        fs::write(
            self.dir.join(REPORT_FILE),
            serde_json::to_string_pretty(report)?,
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub candidates: usize,
    pub accepted: usize,
    pub rejected: BTreeMap<FilterReason, usize>,
    pub by_difficulty: BTreeMap<Difficulty, usize>,
    /// Records per route, keyed by `model (effort)`.
    pub route_usage: BTreeMap<String, usize>,
    pub atom_match_passed: usize,
    pub atom_match_failed: usize,
    pub generation_failed: usize,
    pub client_calls: usize,
    pub errors: Vec<String>,
}

impl RunReport {
    /// Share of generated records whose reported count matched; `None` if none were generated.
    pub fn pass_rate(&self) -> Option<f64> {
        let n = self.atom_match_passed + self.atom_match_failed;
        (n > 0).then(|| self.atom_match_passed as f64 / n as f64)
    }
}

enum Outcome {
    Record(DatasetRecord),
    Rejected(Rejection),
    Error(String),
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn generate(
    c: &CandidateRecord,
    s: Screened,
    policy: &GenerationPolicy,
    client: &dyn LlmClient,
) -> DatasetRecord {
    let difficulty = classify_difficulty(&s.reference);
    let route = policy.route(difficulty);
    let prompt = assemble_prompt(&s.name, &c.reference_notation, &s.parsed.tree);
    let true_heavy_atoms = s.reference.heavy_atom_count();
    let mut last_error = None;
    let mut parsed = None;
    let mut calls = 0;
    while calls <= policy.retry_limit {
        calls += 1;
        match client.send(&prompt, &route.model, &route.effort) {
            Err(e) => last_error = Some(e.to_string()),
            Ok(raw) => match parse_llm_output(&raw) {
                Err(e) => last_error = Some(e.to_string()),
                Ok(p) => {
                    parsed = Some(p);
                    break;
                }
            },
        }
    }
    let (description, reported, status) = match parsed {
        None => (String::new(), None, RecordStatus::GenerationFailed),
        Some((d, n)) => {
            last_error = None;
            let status = if atom_match_filter(n, &s.reference) {
                RecordStatus::Passed
            } else {
                RecordStatus::AtomMismatch
            };
            (d, Some(n), status)
        }
    };
    DatasetRecord {
        id: c.id.clone(),
        iupac_name: s.name,
        reference_notation: c.reference_notation.clone(),
        metadata_xml: serialize(&s.parsed.tree),
        difficulty,
        description,
        reported_heavy_atoms: reported,
        true_heavy_atoms,
        atom_match_passed: status == RecordStatus::Passed,
        status,
        model: route.model.clone(),
        reasoning_effort: route.effort.clone(),
        prompt_version: PROMPT_VERSION.to_string(),
        generation_calls: calls,
        last_error,
        generated_at: now_secs(),
    }
}

fn process(c: &CandidateRecord, policy: &GenerationPolicy, client: &dyn LlmClient) -> Outcome {
    match screen(c) {
        Err(reason) => Outcome::Rejected(Rejection {
            id: c.id.clone(),
            reason,
        }),
        Ok(s) => Outcome::Record(generate(c, s, policy, client)),
    }
}

/// Filters, generates and checks every candidate. At most `policy.max_concurrent`
/// candidates are in generation at once; the sink sees results in input order.
/// Problems with one candidate are noted in the report and never stop the run.
pub fn run_pipeline(
    candidates: Vec<CandidateRecord>,
    policy: &GenerationPolicy,
    client: &dyn LlmClient,
    sink: &mut dyn RecordSink,
) -> RunReport {
    let mut report = RunReport {
        candidates: candidates.len(),
        ..RunReport::default()
    };
    let mut seen = HashSet::new();
    let duplicate: Vec<bool> = candidates
        .iter()
        .map(|c| !seen.insert(c.id.clone()))
        .collect();
    let queue = Mutex::new(candidates.into_iter().enumerate());
    let workers = policy.max_concurrent.max(1).min(report.candidates.max(1));
    let (tx, rx) = mpsc::channel::<(usize, Outcome)>();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (queue, duplicate) = (&queue, &duplicate);
            scope.spawn(move || loop {
                let next = queue.lock().map(|mut q| q.next()).unwrap_or(None);
                let Some((i, c)) = next else { break };
                let outcome = if duplicate[i] {
                    Outcome::Error(format!("{}: duplicate id", c.id))
                } else {
                    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                        process(&c, policy, client)
                    }));
                    result.unwrap_or_else(|_| {
                        Outcome::Error(format!("{}: internal error while processing", c.id))
                    })
                };
                if tx.send((i, outcome)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, outcome) in rx {
            pending.insert(i, outcome);
            while let Some(outcome) = pending.remove(&next) {
                write_outcome(outcome, sink, &mut report);
                next += 1;
            }
        }
    });

    if let Err(e) = sink.finish(&report) {
        report.errors.push(format!("sink: {e}"));
    }
    report
}

fn write_outcome(outcome: Outcome, sink: &mut dyn RecordSink, report: &mut RunReport) {
    let written = match outcome {
        Outcome::Error(e) => {
            report.errors.push(e);
            return;
        }
        Outcome::Rejected(r) => {
            *report.rejected.entry(r.reason).or_default() += 1;
            sink.rejected(&r).map_err(|e| format!("{}: {e}", r.id))
        }
        Outcome::Record(r) => {
            report.accepted += 1;
            report.client_calls += r.generation_calls;
            *report.by_difficulty.entry(r.difficulty).or_default() += 1;
            *report
                .route_usage
                .entry(format!("{} ({})", r.model, r.reasoning_effort))
                .or_default() += 1;
            match r.status {
                RecordStatus::Passed => report.atom_match_passed += 1,
                RecordStatus::AtomMismatch => report.atom_match_failed += 1,
                RecordStatus::GenerationFailed => report.generation_failed += 1,
            }
            sink.record(&r).map_err(|e| format!("{}: {e}", r.id))
        }
    };
    if let Err(e) = written {
        report.errors.push(e);
    }
}

fn invalid(line: usize, e: impl std::fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {e}"))
}

/// Reads JSON-lines candidates (`id`, `name`, `notation`); blank lines are skipped.
pub fn read_candidates(path: impl AsRef<Path>) -> io::Result<Vec<CandidateRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| invalid(i + 1, e))?);
    }
    Ok(out)
}

/// Reads the records a run wrote into `dir`.
pub fn read_records(dir: impl AsRef<Path>) -> io::Result<Vec<DatasetRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(dir.as_ref().join(RECORDS_FILE))?)
        .lines()
        .enumerate()
    {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(|e| invalid(i + 1, e))?);
        }
    }
    Ok(out)
}

/// Copies a run's records to `out` as JSON lines, keeping only passing ones when
/// `only_passed` is set. Returns the number written.
pub fn export(dir: impl AsRef<Path>, only_passed: bool, out: &mut dyn Write) -> io::Result<usize> {
    let mut n = 0;
    for r in read_records(dir)? {
        if only_passed && !r.atom_match_passed {
            continue;
        }
        serde_json::to_writer(&mut *out, &r)?;
        out.write_all(b"\n")?;
        n += 1;
    }
    Ok(n)
}
