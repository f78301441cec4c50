use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use forge_core::llm::ClientError;
use forge_core::molgraph::{canonical_form, parse_linear, Difficulty};
use forge_core::validation_service::mock::{NameEchoValidator, QueuedValidator};
use forge_core::validation_service::{
    default_validator_route, extract_notation, llm_validate, router, validation_report,
    validator_prompt, Clock, GroundTruth, TaskState, TaskStore, ValidationError, ValidationTask,
    LLM_VALIDATOR, VALIDATOR_HEADER,
};
use http_body_util::BodyExt;
use proptest::prelude::*;
use tower::ServiceExt;

const TRUTH: &str = "CC(O)C";
const SAME: &str = "OC(C)C";
const WRONG: &str = "CCCO";
const GARBAGE: &str = "C((";

fn fake_clock() -> (Clock, Arc<AtomicU64>) {
    let t = Arc::new(AtomicU64::new(1_000));
    let c = Arc::clone(&t);
    (Arc::new(move || c.load(Ordering::SeqCst)), t)
}

fn pending(id: &str) -> ValidationTask {
    ValidationTask::new(
        id,
        "A three-carbon chain with a hydroxyl on the middle carbon.",
        Difficulty::Easy,
        GroundTruth::from_notation(TRUTH).unwrap(),
    )
}

fn llm(task: &mut ValidationTask, answers: &[&str], k: usize) -> Result<(), ValidationError> {
    let (clock, _) = fake_clock();
    llm_validate(
        task,
        &QueuedValidator::answers(answers.iter().copied()),
        k,
        &default_validator_route(),
        &clock,
    )
}

/// A store holding one task that the model validator failed.
fn awaiting_store() -> (TaskStore, Arc<AtomicU64>) {
    let (clock, t) = fake_clock();
    let store = TaskStore::in_memory().with_clock(clock);
    store
        .add_task(
            "s1",
            "A three-carbon chain with a hydroxyl on the middle carbon.",
            Difficulty::Easy,
            TRUTH,
        )
        .unwrap();
    let client = QueuedValidator::answers([WRONG, WRONG, WRONG]);
    store
        .run_llm_validation(&client, 3, &default_validator_route(), 1)
        .unwrap();
    assert_eq!(store.get("s1").unwrap().state, TaskState::AwaitingHuman);
    (store, t)
}

fn assert_sound(store: &TaskStore) {
    for t in store.tasks() {
        t.check_invariants().unwrap();
    }
}

#[test]
fn llm_pass_on_second_attempt() {
    let mut t = pending("a");
    llm(&mut t, &[WRONG, SAME, WRONG], 3).unwrap();
    assert_eq!(t.state, TaskState::LlmPassed);
    assert_eq!(t.attempts.len(), 2);
    assert!(t.attempts.iter().all(|a| a.validator_id == LLM_VALIDATOR));
    assert_eq!(
        t.attempts.iter().map(|a| a.matched).collect::<Vec<_>>(),
        [false, true]
    );
    t.check_invariants().unwrap();
}

#[test]
fn llm_always_wrong_goes_to_humans() {
    let mut t = pending("a");
    llm(&mut t, &[WRONG, GARBAGE, WRONG, SAME], 3).unwrap();
    assert_eq!(t.state, TaskState::AwaitingHuman);
    assert_eq!(t.attempts.len(), 3);
    assert!(t.attempts[1]
        .message
        .as_deref()
        .unwrap()
        .starts_with("syntax error"));
    t.check_invariants().unwrap();
}

#[test]
fn llm_single_attempt_budget() {
    let mut t = pending("a");
    llm(&mut t, &[TRUTH], 1).unwrap();
    assert_eq!((t.state, t.attempts.len()), (TaskState::LlmPassed, 1));
    let mut u = pending("b");
    assert_eq!(
        llm(&mut u, &[TRUTH], 0),
        Err(ValidationError::InvalidBudget)
    );
    assert_eq!(u.state, TaskState::PendingLlm);
    assert_eq!(
        llm(&mut t, &[TRUTH], 3),
        Err(ValidationError::TaskNotEligible(TaskState::LlmPassed))
    );
}

#[test]
fn transport_failures_are_retried_once_then_count() {
    let (clock, _) = fake_clock();
    let route = default_validator_route();
    let transport = || Err(ClientError::Transport("down".into()));
    let answer = |n: &str| Ok(format!("<smiles>{n}</smiles>"));

    let mut t = pending("a");
    let client = QueuedValidator::new([transport(), answer(TRUTH)]);
    llm_validate(&mut t, &client, 3, &route, &clock).unwrap();
    assert_eq!((t.state, t.attempts.len()), (TaskState::LlmPassed, 1));

    let mut u = pending("b");
    let client = QueuedValidator::new([
        transport(),
        transport(),
        answer(WRONG),
        answer(WRONG),
        answer(TRUTH),
    ]);
    llm_validate(&mut u, &client, 3, &route, &clock).unwrap();
    assert_eq!(u.state, TaskState::AwaitingHuman);
    assert_eq!(u.attempts[0].submitted_notation, "");
    assert!(u.attempts[0]
        .message
        .as_deref()
        .unwrap()
        .contains("transport"));
    assert_eq!(client.remaining(), 1);
}

#[test]
fn notation_extraction_and_prompt() {
    assert_eq!(
        extract_notation("thinking...\n<smiles> CCO </smiles>"),
        "CCO"
    );
    assert_eq!(
        extract_notation("<smiles>C</smiles> then <smiles>CC</smiles>"),
        "CC"
    );
    assert_eq!(extract_notation("The answer is\n`CCN`\n"), "CCN");
    assert_eq!(extract_notation(""), "");
    let p = validator_prompt("  A ring.  ");
    assert!(
        p.contains("Description:\nA ring.")
            && p.contains("<smiles>")
            && !p.contains("{DESCRIPTION}")
    );
}

#[test]
fn fresh_validator_gets_three_attempts() {
    let (store, _) = awaiting_store();
    let view = store.claim("s1", "v1").unwrap();
    assert_eq!((view.remaining, view.assigned_to_you), (3, true));
    assert!(view.attempts.is_empty());
}

#[test]
fn ineligible_and_exhausted_claims() {
    let (clock, _) = fake_clock();
    let store = TaskStore::in_memory().with_clock(clock);
    store.add_task("p", "d", Difficulty::Easy, TRUTH).unwrap();
    assert_eq!(
        store.claim("p", "v1"),
        Err(ValidationError::TaskNotEligible(TaskState::PendingLlm))
    );
    store
        .run_llm_validation(
            &QueuedValidator::answers([TRUTH]),
            3,
            &default_validator_route(),
            1,
        )
        .unwrap();
    assert_eq!(
        store.claim("p", "v1"),
        Err(ValidationError::TaskNotEligible(TaskState::LlmPassed))
    );
    assert_eq!(
        store.claim("nope", "v1"),
        Err(ValidationError::UnknownTask("nope".into()))
    );

    let (store, _) = awaiting_store();
    store.claim("s1", "v1").unwrap();
    assert_eq!(
        store.claim("s1", "v2"),
        Err(ValidationError::AlreadyClaimed)
    );
    for _ in 0..3 {
        store.submit_attempt("s1", "v1", WRONG).unwrap();
    }
    assert_eq!(
        store.claim("s1", "v1"),
        Err(ValidationError::ValidatorExhausted)
    );
    assert_eq!(
        store.claim("s1", LLM_VALIDATOR),
        Err(ValidationError::InvalidValidator(LLM_VALIDATOR.into()))
    );
}

#[test]
fn human_pass_on_first_attempt() {
    let (store, _) = awaiting_store();
    store.claim("s1", "v1").unwrap();
    let out = store.submit_attempt("s1", "v1", SAME).unwrap();
    assert!(out.matched);
    assert_eq!((out.remaining, out.task_state), (2, TaskState::HumanPassed));
    assert_sound(&store);
}

#[test]
fn validator_one_passes_on_third_attempt() {
    let (store, _) = awaiting_store();
    store.claim("s1", "v1").unwrap();
    let r1 = store.submit_attempt("s1", "v1", WRONG).unwrap();
    let r2 = store.submit_attempt("s1", "v1", GARBAGE).unwrap();
    let r3 = store.submit_attempt("s1", "v1", SAME).unwrap();
    assert_eq!((r1.remaining, r2.remaining, r3.remaining), (2, 1, 0));
    assert!(r1.message.is_none());
    assert!(r2.message.as_deref().unwrap().starts_with("syntax error"));
    assert!(!r2.matched);
    assert_eq!(r3.task_state, TaskState::HumanPassed);
    let t = store.get("s1").unwrap();
    assert!(!t.second_validator_used);
    assert_eq!(t.human_attempts().count(), 3);
    assert_sound(&store);
}

#[test]
fn exhaustion_hands_over_then_fails() {
    let (store, _) = awaiting_store();
    store.claim("s1", "v1").unwrap();
    for _ in 0..3 {
        store.submit_attempt("s1", "v1", WRONG).unwrap();
    }
    let t = store.get("s1").unwrap();
    assert_eq!(
        (
            t.state,
            t.assigned_validator.clone(),
            t.second_validator_used
        ),
        (TaskState::AwaitingHuman, None, false)
    );
    assert_eq!(
        store.submit_attempt("s1", "v1", TRUTH),
        Err(ValidationError::NoAttemptsLeft)
    );
    assert!(store.list(Some(TaskState::AwaitingHuman), Some("v2"))[0].claimable);
    assert!(!store.list(Some(TaskState::AwaitingHuman), Some("v1"))[0].claimable);

    assert_eq!(store.claim("s1", "v2").unwrap().remaining, 3);
    assert!(store.get("s1").unwrap().second_validator_used);
    assert_eq!(
        store.claim("s1", "v3"),
        Err(ValidationError::AlreadyClaimed)
    );
    let outcomes: Vec<_> = (0..3)
        .map(|_| store.submit_attempt("s1", "v2", WRONG).unwrap())
        .collect();
    assert_eq!(outcomes[2].task_state, TaskState::Failed);
    assert_eq!(
        store.submit_attempt("s1", "v2", TRUTH),
        Err(ValidationError::NoAttemptsLeft)
    );
    assert_eq!(
        store.claim("s1", "v3"),
        Err(ValidationError::TaskNotEligible(TaskState::Failed))
    );
    assert_eq!(store.get("s1").unwrap().human_attempts().count(), 6);
    assert_sound(&store);
}

#[test]
fn submit_errors() {
    let (store, _) = awaiting_store();
    assert_eq!(
        store.submit_attempt("zz", "v1", TRUTH),
        Err(ValidationError::UnknownTask("zz".into()))
    );
    assert_eq!(
        store.submit_attempt("s1", "v1", TRUTH),
        Err(ValidationError::NotAssigned)
    );
    store.claim("s1", "v1").unwrap();
    assert_eq!(
        store.submit_attempt("s1", "v2", TRUTH),
        Err(ValidationError::NotAssigned)
    );
    assert_eq!(store.view("s1", "v2"), Err(ValidationError::NotAssigned));
}

#[test]
fn terminal_tasks_never_change() {
    let (store, _) = awaiting_store();
    store.claim("s1", "v1").unwrap();
    store.submit_attempt("s1", "v1", TRUTH).unwrap();
    let before = store.get("s1").unwrap();
    assert!(store.submit_attempt("s1", "v1", WRONG).is_err());
    assert!(store.claim("s1", "v2").is_err());
    let mut copy = before.clone();
    assert!(llm(&mut copy, &[TRUTH], 3).is_err());
    assert!(copy.record_llm_attempts(vec![]).is_err());
    assert_eq!(store.get("s1").unwrap(), before);
}

#[test]
fn attempt_timing_runs_from_view_to_submit() {
    let (store, now) = awaiting_store();
    now.store(10_000, Ordering::SeqCst);
    store.claim("s1", "v1").unwrap();
    now.store(20_000, Ordering::SeqCst);
    store.view("s1", "v1").unwrap();
    now.store(80_000, Ordering::SeqCst);
    store.submit_attempt("s1", "v1", WRONG).unwrap();
    now.store(90_000, Ordering::SeqCst);
    store.view("s1", "v1").unwrap();
    now.store(100_000, Ordering::SeqCst);
    store.view("s1", "v1").unwrap();
    now.store(120_000, Ordering::SeqCst);
    let view = store.view("s1", "v1").unwrap();
    assert_eq!(view.attempts[0].duration_ms, 70_000);
    store.submit_attempt("s1", "v1", TRUTH).unwrap();
    let t = store.get("s1").unwrap();
    let human: Vec<_> = t
        .human_attempts()
        .map(|a| (a.timestamp_start, a.timestamp_end))
        .collect();
    // Claiming starts the first timer; later views do not reset an open one.
    assert_eq!(human, [(10_000, 80_000), (90_000, 120_000)]);
    let report = store.report();
    assert_eq!(report.overall.mean_human_attempt_secs, Some(50.0));
}

#[test]
fn report_counts_and_precision() {
    let empty = validation_report(&[]);
    assert_eq!(empty.overall.total, 0);
    assert_eq!(empty.overall.precision, None);
    let json = serde_json::to_value(&empty).unwrap();
    assert_eq!(json["overall"]["precision"], "n/a");

    let mut tasks = Vec::new();
    for i in 0..10 {
        let mut t = pending(&format!("t{i}"));
        if i < 9 {
            llm(&mut t, &[TRUTH], 3).unwrap();
        } else {
            t.state = TaskState::Failed;
        }
        t.difficulty = if i % 2 == 0 {
            Difficulty::Easy
        } else {
            Difficulty::Hard
        };
        tasks.push(t);
    }
    let r = validation_report(&tasks);
    assert_eq!(r.overall.precision, Some(0.9));
    assert_eq!(r.overall.precision_label(), "90.0%");
    assert_eq!(r.by_difficulty[&Difficulty::Easy].precision, Some(1.0));
    assert_eq!(r.by_difficulty[&Difficulty::Hard].failed, 1);
    assert_eq!(r.overall.mean_human_attempt_secs, None);
}

#[test]
fn model_then_human_flow_conserves_states() {
    let (clock, _) = fake_clock();
    let store = TaskStore::in_memory().with_clock(clock);
    let names = [
        "propan-2-ol",
        "ethanol",
        "cyclohexanol",
        "benzene",
        "naphthalene",
        "butan-2-one",
    ];
    let notations = [
        "CC(O)C",
        "CCO",
        "OC1CCCCC1",
        "c1ccccc1",
        "c1ccc2ccccc2c1",
        "CC(=O)CC",
    ];
    for (i, (n, s)) in names.iter().zip(notations).enumerate() {
        // The last two descriptions name nothing the echo validator can read.
        let desc = if i < 4 {
            format!("A molecule named {n}, described by m at e effort.")
        } else {
            "Unreadable.".into()
        };
        store
            .add_task(&format!("s{i}"), &desc, Difficulty::Easy, s)
            .unwrap();
    }
    assert_eq!(
        store
            .run_llm_validation(&NameEchoValidator, 3, &default_validator_route(), 3)
            .unwrap(),
        6
    );
    assert_eq!(
        store
            .run_llm_validation(&NameEchoValidator, 3, &default_validator_route(), 3)
            .unwrap(),
        0
    );
    store.claim("s4", "v1").unwrap();
    store.submit_attempt("s4", "v1", "c1ccc2ccccc2c1").unwrap();
    let r = store.report();
    assert_eq!(
        (
            r.overall.llm_passed,
            r.overall.human_passed,
            r.overall.awaiting_human
        ),
        (4, 1, 1)
    );
    let o = &r.overall;
    assert_eq!(
        o.pending_llm + o.llm_passed + o.awaiting_human + o.human_passed + o.failed,
        o.total
    );
    assert_eq!(o.total, 6);
    assert_sound(&store);
}

#[test]
fn event_log_and_snapshot_restore_state() {
    let dir = tempfile::tempdir().unwrap();
    let (clock, now) = fake_clock();
    {
        let store = TaskStore::open(dir.path())
            .unwrap()
            .with_clock(Arc::clone(&clock));
        store.add_task("a", "d1", Difficulty::Easy, TRUTH).unwrap();
        store
            .add_task("b", "d2", Difficulty::Hard, "c1ccccc1")
            .unwrap();
        store
            .run_llm_validation(
                &QueuedValidator::answers([WRONG; 6]),
                3,
                &default_validator_route(),
                1,
            )
            .unwrap();
        store.claim("a", "v1").unwrap();
        now.store(5_000, Ordering::SeqCst);
        store.submit_attempt("a", "v1", WRONG).unwrap();
        store.snapshot().unwrap();
        store.claim("b", "v2").unwrap();
        now.store(9_000, Ordering::SeqCst);
        store.submit_attempt("b", "v2", "c1ccccc1").unwrap();
    }
    let reopened = TaskStore::open(dir.path())
        .unwrap()
        .with_clock(Arc::clone(&clock));
    let a = reopened.get("a").unwrap();
    assert_eq!(a.human_attempts().count(), 1);
    assert_eq!(a.assigned_validator.as_deref(), Some("v1"));
    assert_eq!(reopened.get("b").unwrap().state, TaskState::HumanPassed);
    now.store(12_000, Ordering::SeqCst);
    assert_eq!(
        reopened
            .submit_attempt("a", "v1", TRUTH)
            .unwrap()
            .task_state,
        TaskState::HumanPassed
    );
    assert_eq!(
        reopened.add_task("a", "x", Difficulty::Easy, "C"),
        Err(ValidationError::DuplicateTask("a".into()))
    );
    drop(reopened);

    let log = std::fs::read_to_string(dir.path().join("events.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 9);
    let third = TaskStore::open(dir.path()).unwrap();
    assert_eq!(third.get("a").unwrap().state, TaskState::HumanPassed);
    assert_eq!(third.tasks().len(), 2);
    assert_sound(&third);
}

#[test]
fn ground_truth_rejects_bad_notation() {
    let store = TaskStore::in_memory();
    assert!(matches!(
        store.add_task("x", "d", Difficulty::Easy, "C(("),
        Err(ValidationError::InvalidGroundTruth(_))
    ));
    assert!(store.is_empty());
}

async fn call(
    app: &axum::Router,
    method: &str,
    uri: &str,
    who: Option<&str>,
    body: Option<&str>,
) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(v) = who {
        req = req.header(VALIDATOR_HEADER, v);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

#[tokio::test]
async fn http_api_flow_hides_ground_truth() {
    let (clock, _) = fake_clock();
    let store = Arc::new(TaskStore::in_memory().with_clock(clock));
    let truths = ["CC(O)C", "c1ccc2ccccc2c1", "OC1CCCCC1"];
    for (i, s) in truths.iter().enumerate() {
        store
            .add_task(
                &format!("t{i}"),
                &format!("Description number {i}."),
                Difficulty::Medium,
                s,
            )
            .unwrap();
    }
    store
        .run_llm_validation(
            &QueuedValidator::answers(["C"; 9]),
            3,
            &default_validator_route(),
            1,
        )
        .unwrap();
    let app = router(Arc::clone(&store));
    let mut bodies = Vec::new();

    let (s, b) = call(
        &app,
        "GET",
        "/tasks?state=AwaitingHuman",
        Some("alice"),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    let rows: serde_json::Value = serde_json::from_str(&b).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[0]["claimable"], true);
    bodies.push(b);

    let (s, b) = call(&app, "POST", "/tasks/t0/claim", Some("alice"), None).await;
    assert_eq!(s, StatusCode::OK);
    let view: serde_json::Value = serde_json::from_str(&b).unwrap();
    assert_eq!(
        (view["remaining"].as_u64(), view["description"].as_str()),
        (Some(3), Some("Description number 0."))
    );
    bodies.push(b);

    let (s, b) = call(&app, "POST", "/tasks/t0/claim", Some("bob"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert!(b.contains("AlreadyClaimed"));
    bodies.push(b);

    let (s, b) = call(&app, "GET", "/tasks/t0/view", Some("alice"), None).await;
    assert_eq!(s, StatusCode::OK);
    bodies.push(b);
    let (s, b) = call(&app, "GET", "/tasks/t0/view", Some("bob"), None).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    bodies.push(b);

    let (s, b) = call(
        &app,
        "POST",
        "/tasks/t0/attempts",
        Some("alice"),
        Some(r#"{"notation":"CCCO"}"#),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    let out: serde_json::Value = serde_json::from_str(&b).unwrap();
    assert_eq!(
        (
            out["matched"].as_bool(),
            out["remaining"].as_u64(),
            out["taskState"].as_str()
        ),
        (Some(false), Some(2), Some("AwaitingHuman"))
    );
    bodies.push(b);

    let (s, b) = call(
        &app,
        "POST",
        "/tasks/t0/attempts",
        Some("alice"),
        Some(r#"{"notation":"C(("}"#),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert!(b.contains("syntax error"));
    bodies.push(b);

    let (s, b) = call(
        &app,
        "POST",
        "/tasks/t0/attempts",
        Some("alice"),
        Some(r#"{"notation":"OC(C)C"}"#),
    )
    .await;
    let out: serde_json::Value = serde_json::from_str(&b).unwrap();
    assert_eq!(
        (s, out["matched"].as_bool(), out["taskState"].as_str()),
        (StatusCode::OK, Some(true), Some("HumanPassed"))
    );
    bodies.push(b);

    for (method, uri, who, body, expected) in [
        (
            "POST",
            "/tasks/t1/claim",
            None,
            None,
            StatusCode::BAD_REQUEST,
        ),
        (
            "POST",
            "/tasks/zz/claim",
            Some("alice"),
            None,
            StatusCode::NOT_FOUND,
        ),
        (
            "POST",
            "/tasks/t1/attempts",
            Some("alice"),
            Some(r#"{"notation":"C"}"#),
            StatusCode::FORBIDDEN,
        ),
        (
            "POST",
            "/tasks/t0/attempts",
            Some("alice"),
            Some(r#"{"notation":"C"}"#),
            StatusCode::CONFLICT,
        ),
        (
            "GET",
            "/tasks?state=Bogus",
            Some("alice"),
            None,
            StatusCode::BAD_REQUEST,
        ),
    ] {
        let (s, b) = call(&app, method, uri, who, body).await;
        assert_eq!(s, expected, "{method} {uri}: {b}");
        bodies.push(b);
    }

    let (s, b) = call(&app, "GET", "/report", None, None).await;
    assert_eq!(s, StatusCode::OK);
    let report: serde_json::Value = serde_json::from_str(&b).unwrap();
    assert_eq!(report["overall"]["humanPassed"], 1);
    assert_eq!(report["overall"]["awaitingHuman"], 2);

    let (_, b) = call(&app, "GET", "/tasks", Some("bob"), None).await;
    bodies.push(b);

    for t in store.tasks().iter().filter(|t| !t.state.is_terminal()) {
        for body in &bodies {
            assert!(!body.contains(&t.ground_truth.notation), "{body}");
            assert!(!body.contains(&t.ground_truth.canonical), "{body}");
        }
    }
    assert_sound(&store);
}

#[derive(Clone, Debug)]
enum Op {
    Claim(usize),
    View(usize),
    Submit(usize, usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..3usize).prop_map(Op::Claim),
        (0..3usize).prop_map(Op::View),
        (0..3usize, 0..4usize).prop_map(|(v, n)| Op::Submit(v, n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Arbitrary validator traffic keeps budgets, and terminal states never move.
    #[test]
    fn state_machine_invariants(ops in proptest::collection::vec(op(), 0..40), llm_right in any::<bool>()) {
        let validators = ["v1", "v2", "v3"];
        let submissions = [TRUTH, WRONG, GARBAGE, SAME];
        let store = TaskStore::in_memory();
        store.add_task("t", "d", Difficulty::Easy, TRUTH).unwrap();
        let answers = if llm_right { [WRONG, TRUTH, WRONG] } else { [WRONG; 3] };
        store.run_llm_validation(&QueuedValidator::answers(answers), 3, &default_validator_route(), 1).unwrap();
        let mut prev = store.get("t").unwrap();
        for op in ops {
            let result = match op {
                Op::Claim(v) => store.claim("t", validators[v]).map(|_| ()),
                Op::View(v) => store.view("t", validators[v]).map(|_| ()),
                Op::Submit(v, n) => store.submit_attempt("t", validators[v], submissions[n]).map(|o| {
                    assert_eq!(o.matched, n == 0 || n == 3);
                }),
            };
            let now = store.get("t").unwrap();
            now.check_invariants().map_err(TestCaseError::fail)?;
            if prev.state.is_terminal() {
                prop_assert_eq!(&now, &prev);
            } else if now.state != prev.state {
                prop_assert!(prev.state.can_move_to(now.state), "{} -> {}", prev.state, now.state);
            }
            if result.is_err() {
                prop_assert_eq!(&now.attempts, &prev.attempts);
            }
            prev = now;
        }
    }
}

#[test]
fn ground_truth_uses_canonical_equality() {
    let g = GroundTruth::from_notation("C[C@H](O)CC").unwrap();
    assert_eq!(
        g.canonical,
        canonical_form(&parse_linear("CC[C@H](C)O").unwrap()).unwrap()
    );
    assert_eq!(g.matches("CC[C@H](C)O"), Ok(true));
    assert_eq!(g.matches("CC[C@@H](C)O"), Ok(false));
    assert_eq!(g.matches("CCC(C)O"), Ok(false));
    assert!(g.matches("CC.O").is_err());
}
