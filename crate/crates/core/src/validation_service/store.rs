use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use serde::{Deserialize, Serialize};

use crate::annotation_pipeline::Route;
use crate::llm::LlmClient;
use crate::molgraph::Difficulty;

use super::llm_check::llm_attempts;
use super::report::{validation_report, ValidationReport};
use super::task::{
    Attempt, GroundTruth, SubmitOutcome, TaskState, TaskSummary, TaskView, ValidationTask,
};
use super::{system_clock, Clock, ValidationError};

pub const EVENT_LOG: &str = "events.jsonl";
pub const SNAPSHOT: &str = "snapshot.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "camelCase")]
enum Event {
    TaskAdded {
        task: ValidationTask,
    },
    LlmValidated {
        sample_id: String,
        attempts: Vec<Attempt>,
    },
    Claimed {
        sample_id: String,
        validator_id: String,
        at: u64,
    },
    ViewOpened {
        sample_id: String,
        validator_id: String,
        at: u64,
    },
    AttemptSubmitted {
        sample_id: String,
        attempt: Attempt,
    },
}

#[derive(Serialize, Deserialize)]
struct LogLine {
    seq: u64,
    #[serde(flatten)]
    event: Event,
}

#[derive(Default, Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    tasks: Vec<ValidationTask>,
    /// Open attempt timers as `(sampleId, validatorId, startedAt)`.
    timers: Vec<(String, String, u64)>,
}

struct EventLog {
    dir: PathBuf,
    file: File,
    seq: u64,
}

impl EventLog {
    fn append(&mut self, event: &Event) -> Result<(), ValidationError> {
        let line = LogLine {
            seq: self.seq + 1,
            event: event.clone(),
        };
        let mut text =
            serde_json::to_string(&line).map_err(|e| ValidationError::Io(e.to_string()))?;
        text.push('\n');
        self.file
            .write_all(text.as_bytes())
            .and_then(|_| self.file.flush())?;
        self.seq += 1;
        Ok(())
    }
}

type TimerKey = (String, String);

/// Validation tasks behind per-task locks, with an optional append-only event log.
/// Each change is logged before it is applied in memory.
pub struct TaskStore {
    tasks: RwLock<BTreeMap<String, Arc<Mutex<ValidationTask>>>>,
    timers: Mutex<HashMap<TimerKey, u64>>,
    log: Option<Mutex<EventLog>>,
    clock: Clock,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl TaskStore {
    pub fn in_memory() -> TaskStore {
        TaskStore {
            tasks: RwLock::default(),
            timers: Mutex::default(),
            log: None,
            clock: system_clock(),
        }
    }

    /// Opens or creates a persistent store in `dir`: loads the snapshot, then replays
    /// logged events newer than it.
    pub fn open(dir: impl AsRef<Path>) -> Result<TaskStore, ValidationError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let snapshot: Snapshot = match fs::read_to_string(dir.join(SNAPSHOT)) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| ValidationError::Io(format!("{SNAPSHOT}: {e}")))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Snapshot::default(),
            Err(e) => return Err(e.into()),
        };
        let store = TaskStore::in_memory();
        let mut seq = snapshot.seq;
        {
            let mut tasks = store.tasks.write().unwrap_or_else(|p| p.into_inner());
            for t in snapshot.tasks {
                tasks.insert(t.sample_id.clone(), Arc::new(Mutex::new(t)));
            }
            lock(&store.timers).extend(snapshot.timers.into_iter().map(|(t, v, at)| ((t, v), at)));
        }
        let path = dir.join(EVENT_LOG);
        if path.exists() {
            for (i, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: LogLine = serde_json::from_str(&line)
                    .map_err(|e| ValidationError::Io(format!("{EVENT_LOG} line {}: {e}", i + 1)))?;
                if entry.seq > seq {
                    store.apply(entry.event)?;
                    seq = entry.seq;
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(TaskStore {
            log: Some(Mutex::new(EventLog { dir, file, seq })),
            ..store
        })
    }

    pub fn with_clock(mut self, clock: Clock) -> TaskStore {
        self.clock = clock;
        self
    }

    fn apply(&self, event: Event) -> Result<(), ValidationError> {
        match event {
            Event::TaskAdded { task } => {
                self.tasks
                    .write()
                    .unwrap_or_else(|p| p.into_inner())
                    .insert(task.sample_id.clone(), Arc::new(Mutex::new(task)));
            }
            Event::LlmValidated {
                sample_id,
                attempts,
            } => lock(&*self.task(&sample_id)?).record_llm_attempts(attempts)?,
            Event::Claimed {
                sample_id,
                validator_id,
                at,
            } => {
                lock(&*self.task(&sample_id)?).claim(&validator_id)?;
                lock(&self.timers)
                    .entry((sample_id, validator_id))
                    .or_insert(at);
            }
            Event::ViewOpened {
                sample_id,
                validator_id,
                at,
            } => {
                lock(&self.timers)
                    .entry((sample_id, validator_id))
                    .or_insert(at);
            }
            Event::AttemptSubmitted { sample_id, attempt } => {
                lock(&self.timers).remove(&(sample_id.clone(), attempt.validator_id.clone()));
                lock(&*self.task(&sample_id)?).record_human_attempt(attempt)?;
            }
        }
        Ok(())
    }

    fn record(&self, event: &Event) -> Result<(), ValidationError> {
        match &self.log {
            Some(log) => lock(log).append(event),
            None => Ok(()),
        }
    }

    fn task(&self, id: &str) -> Result<Arc<Mutex<ValidationTask>>, ValidationError> {
        self.tasks
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ValidationError::UnknownTask(id.to_string()))
    }

    /// Adds a sample awaiting model validation.
    pub fn add_task(
        &self,
        sample_id: &str,
        description: &str,
        difficulty: Difficulty,
        notation: &str,
    ) -> Result<(), ValidationError> {
        let truth = GroundTruth::from_notation(notation)
            .map_err(|e| ValidationError::InvalidGroundTruth(e.to_string()))?;
        let mut tasks = self.tasks.write().unwrap_or_else(|p| p.into_inner());
        if tasks.contains_key(sample_id) {
            return Err(ValidationError::DuplicateTask(sample_id.to_string()));
        }
        let task = ValidationTask::new(sample_id, description, difficulty, truth);
        self.record(&Event::TaskAdded { task: task.clone() })?;
        tasks.insert(sample_id.to_string(), Arc::new(Mutex::new(task)));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tasks.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Server-side copies of every task, in id order.
    pub fn tasks(&self) -> Vec<ValidationTask> {
        let handles: Vec<_> = self
            .tasks
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .values()
            .cloned()
            .collect();
        handles.iter().map(|t| lock(t).clone()).collect()
    }

    pub fn get(&self, id: &str) -> Result<ValidationTask, ValidationError> {
        Ok(lock(&*self.task(id)?).clone())
    }

    pub fn list(&self, state: Option<TaskState>, validator: Option<&str>) -> Vec<TaskSummary> {
        self.tasks()
            .iter()
            .filter(|t| state.is_none_or(|s| t.state == s))
            .map(|t| t.summary_for(validator))
            .collect()
    }

    /// Pass@k model validation of every pending task, `max_concurrent` at a time.
    /// Returns how many tasks were validated.
    pub fn run_llm_validation(
        &self,
        client: &dyn LlmClient,
        k: usize,
        route: &Route,
        max_concurrent: usize,
    ) -> Result<usize, ValidationError> {
        if k == 0 {
            return Err(ValidationError::InvalidBudget);
        }
        let pending: Vec<ValidationTask> = self
            .tasks()
            .into_iter()
            .filter(|t| t.state == TaskState::PendingLlm)
            .collect();
        let queue = Mutex::new(pending.iter());
        let done = Mutex::new(Ok(0usize));
        std::thread::scope(|scope| {
            for _ in 0..max_concurrent.max(1) {
                scope.spawn(|| loop {
                    let Some(task) = lock(&queue).next() else {
                        break;
                    };
                    let result =
                        llm_attempts(task, client, k, route, &self.clock).and_then(|attempts| {
                            let handle = self.task(&task.sample_id)?;
                            let mut live = lock(&handle);
                            let event = Event::LlmValidated {
                                sample_id: task.sample_id.clone(),
                                attempts: attempts.clone(),
                            };
                            if live.state != TaskState::PendingLlm {
                                return Err(ValidationError::TaskNotEligible(live.state));
                            }
                            self.record(&event)?;
                            live.record_llm_attempts(attempts)
                        });
                    let mut done = lock(&done);
                    match (result, &mut *done) {
                        (Ok(()), Ok(n)) => *n += 1,
                        (Err(e), slot @ Ok(_)) => *slot = Err(e),
                        _ => {}
                    }
                });
            }
        });
        done.into_inner().unwrap_or_else(|p| p.into_inner())
    }

    pub fn claim(&self, id: &str, validator: &str) -> Result<TaskView, ValidationError> {
        let handle = self.task(id)?;
        let mut task = lock(&handle);
        if task.assigned_validator.as_deref() != Some(validator) {
            let mut trial = task.clone();
            trial.claim(validator)?;
            let at = (self.clock)();
            self.record(&Event::Claimed {
                sample_id: id.to_string(),
                validator_id: validator.to_string(),
                at,
            })?;
            *task = trial;
            lock(&self.timers)
                .entry((id.to_string(), validator.to_string()))
                .or_insert(at);
        } else {
            task.claim(validator)?;
        }
        Ok(task.view_for(validator))
    }

    /// The assigned validator's view; opening it starts the clock on their next attempt.
    pub fn view(&self, id: &str, validator: &str) -> Result<TaskView, ValidationError> {
        let handle = self.task(id)?;
        let task = lock(&handle);
        if task.assigned_validator.as_deref() != Some(validator) {
            return Err(ValidationError::NotAssigned);
        }
        let key = (id.to_string(), validator.to_string());
        if task.state == TaskState::AwaitingHuman && !lock(&self.timers).contains_key(&key) {
            let at = (self.clock)();
            self.record(&Event::ViewOpened {
                sample_id: key.0.clone(),
                validator_id: key.1.clone(),
                at,
            })?;
            lock(&self.timers).insert(key, at);
        }
        Ok(task.view_for(validator))
    }

    pub fn submit_attempt(
        &self,
        id: &str,
        validator: &str,
        notation: &str,
    ) -> Result<SubmitOutcome, ValidationError> {
        let handle = self.task(id)?;
        let mut task = lock(&handle);
        task.check_submit(validator)?;
        let (matched, message) = task.ground_truth.judge(notation);
        let end = (self.clock)();
        let key = (id.to_string(), validator.to_string());
        let start = lock(&self.timers)
            .get(&key)
            .copied()
            .unwrap_or(end)
            .min(end);
        let attempt = Attempt {
            submitted_notation: notation.to_string(),
            matched,
            timestamp_start: start,
            timestamp_end: end,
            validator_id: validator.to_string(),
            message: message.clone(),
        };
        let mut next = task.clone();
        next.record_human_attempt(attempt.clone())?;
        self.record(&Event::AttemptSubmitted {
            sample_id: id.to_string(),
            attempt,
        })?;
        *task = next;
        lock(&self.timers).remove(&key);
        Ok(SubmitOutcome {
            matched,
            remaining: task.remaining_for(validator),
            task_state: task.state,
            message,
        })
    }

    pub fn report(&self) -> ValidationReport {
        validation_report(&self.tasks())
    }

    /// Writes a snapshot of the current state. The event log is left intact; events
    /// up to the snapshot are skipped on the next open.
    pub fn snapshot(&self) -> Result<(), ValidationError> {
        let Some(log) = &self.log else { return Ok(()) };
        // Lock order matches the mutating paths: map, tasks, timers, log.
        let map = self.tasks.read().unwrap_or_else(|p| p.into_inner());
        let guards: Vec<_> = map.values().map(|t| lock(t)).collect();
        let timers = lock(&self.timers);
        let log = lock(log);
        let snap = Snapshot {
            seq: log.seq,
            tasks: guards.iter().map(|t| (**t).clone()).collect(),
            timers: timers
                .iter()
                .map(|((t, v), at)| (t.clone(), v.clone(), *at))
                .collect(),
        };
        let tmp = log.dir.join(format!("{SNAPSHOT}.tmp"));
        fs::write(
            &tmp,
            serde_json::to_vec_pretty(&snap).map_err(|e| ValidationError::Io(e.to_string()))?,
        )?;
        fs::rename(&tmp, log.dir.join(SNAPSHOT))?;
        Ok(())
    }
}
