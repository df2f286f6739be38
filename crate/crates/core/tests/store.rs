mod support;

use std::fs::OpenOptions;
use std::io::Write;

use procap_core::model::{AnswerOption, Role};
use procap_core::survey::SurveyError;
use procap_core::{AssessmentId, AssessmentState, CapabilityLevel, MeasurementConfig, ProcessId, Store, StoreError};

use support::at;

fn id() -> AssessmentId {
    AssessmentId::from("acme")
}

fn seeded(dir: &std::path::Path) -> (Store, procap_core::AccessToken, Vec<String>) {
    let bank = support::sample_bank();
    let mut s = Store::open(dir, bank.clone()).unwrap();
    s.create_assessment(id(), "Acme", vec![ProcessId::new("PRB")], CapabilityLevel::CL3, at(0)).unwrap();
    let (p, token) = s.register_participant(&id(), "Ann", &[(ProcessId::new("PRB"), Role::ProcessPerformer)]).unwrap();
    s.open_assessment(&id(), at(1)).unwrap();
    let qs: Vec<String> = s
        .assessment(&id())
        .unwrap()
        .allocate_questionnaire(&bank, &p.id)
        .unwrap()
        .iter()
        .map(|q| q.question.id.clone())
        .collect();
    (s, token, qs)
}

#[test]
fn acknowledged_writes_survive_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let (mut s, token, qs) = seeded(dir.path());
    for q in qs.iter().take(7) {
        s.submit_response(&token, None, q, AnswerOption::L, at(2)).unwrap();
    }
    let before = s.assessment(&id()).unwrap().to_record();
    drop(s);

    let s = Store::open(dir.path(), support::sample_bank()).unwrap();
    assert_eq!(s.assessment(&id()).unwrap().to_record(), before);
    let (a, pid) = s.resolve_token(&token).unwrap();
    assert_eq!(a.id(), &id());
    assert_eq!(pid.0, "P0001");
}

#[test]
fn second_open_is_refused_while_locked() {
    let dir = tempfile::tempdir().unwrap();
    let _s = Store::open(dir.path(), support::sample_bank()).unwrap();
    assert!(matches!(Store::open(dir.path(), support::sample_bank()), Err(StoreError::Locked(_))));
}

#[test]
fn torn_journal_tail_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    let (mut s, token, qs) = seeded(dir.path());
    s.submit_response(&token, None, &qs[0], AnswerOption::F, at(2)).unwrap();
    drop(s);
    let mut j = OpenOptions::new().append(true).open(dir.path().join("journal.jsonl")).unwrap();
    j.write_all(br#"{"seq":99,"event":{"ResponseRecorded":{"assess"#).unwrap();
    drop(j);

    let mut s = Store::open(dir.path(), support::sample_bank()).unwrap();
    assert_eq!(s.assessment(&id()).unwrap().response_count(), 1);
    // Still writable after recovery.
    s.submit_response(&token, None, &qs[1], AnswerOption::P, at(3)).unwrap();
    drop(s);
    let s = Store::open(dir.path(), support::sample_bank()).unwrap();
    assert_eq!(s.assessment(&id()).unwrap().response_count(), 2);
}

#[test]
fn compaction_keeps_state() {
    let dir = tempfile::tempdir().unwrap();
    let (mut s, token, qs) = seeded(dir.path());
    for (i, q) in qs.iter().enumerate() {
        s.submit_response(&token, None, q, AnswerOption::ALL[i % 5], at(2)).unwrap();
    }
    let before = s.assessment(&id()).unwrap().to_record();
    s.compact().unwrap();
    let journal = std::fs::read_to_string(dir.path().join("journal.jsonl")).unwrap_or_default();
    assert!(journal.trim().is_empty());
    s.submit_response(&token, None, &qs[0], AnswerOption::N, at(4)).unwrap();
    drop(s);
    let s = Store::open(dir.path(), support::sample_bank()).unwrap();
    let after = s.assessment(&id()).unwrap();
    assert_eq!(after.response_count(), before.responses.len());
    assert_eq!(after.responses().find(|r| r.question == qs[0]).unwrap().answer, AnswerOption::N);
}

#[test]
fn rejected_operations_leave_no_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (mut s, token, _) = seeded(dir.path());
    let err = s.submit_response(&token, None, "CHG-01", AnswerOption::F, at(2)).unwrap_err();
    assert!(matches!(err, StoreError::Survey(SurveyError::NotAllocated { .. })), "{err:?}");
    assert!(matches!(
        s.create_assessment(id(), "Again", vec![ProcessId::new("PRB")], CapabilityLevel::CL1, at(0)),
        Err(StoreError::DuplicateAssessment(_))
    ));
    assert!(matches!(s.build_report(&id(), &MeasurementConfig::default(), at(5)), Err(StoreError::Measurement(_))));
    assert!(matches!(s.report(&id()), Err(StoreError::NoReport(_))));
    drop(s);
    let s = Store::open(dir.path(), support::sample_bank()).unwrap();
    assert_eq!(s.assessment(&id()).unwrap().response_count(), 0);
    assert_eq!(s.assessment(&id()).unwrap().state(), AssessmentState::Open);
}

#[test]
fn report_is_persisted() {
    let dir = tempfile::tempdir().unwrap();
    let (mut s, token, qs) = seeded(dir.path());
    for q in &qs {
        s.submit_response(&token, None, q, AnswerOption::P, at(2)).unwrap();
    }
    s.close_assessment(&id(), at(3)).unwrap();
    assert!(matches!(
        s.submit_response(&token, None, &qs[0], AnswerOption::F, at(4)),
        Err(StoreError::Survey(SurveyError::InvalidState { .. }))
    ));
    let r = s.build_report(&id(), &MeasurementConfig::default(), at(4)).unwrap();
    drop(s);
    let s = Store::open(dir.path(), support::sample_bank()).unwrap();
    assert_eq!(s.report(&id()).unwrap(), &r);
    assert_eq!(s.assessment(&id()).unwrap().state(), AssessmentState::Reported);
}

#[test]
fn batch_import_matches_direct_construction() {
    let dir = tempfile::tempdir().unwrap();
    let bank = support::sample_bank();
    let batch = support::load_batch("mixed_batch.json");
    let mut s = Store::open(dir.path(), bank.clone()).unwrap();
    s.create_assessment(
        "fixture".into(),
        "Fixture organisation",
        vec![ProcessId::new("PRB"), ProcessId::new("CHG")],
        CapabilityLevel::CL5,
        at(0),
    )
    .unwrap();
    s.open_assessment(&"fixture".into(), at(1)).unwrap();
    let summary = s.import_batch(&"fixture".into(), &batch, at(2)).unwrap();
    assert_eq!(summary.participants_registered, batch.participants.len());
    assert_eq!(summary.responses_recorded, batch.responses.len());
    s.close_assessment(&"fixture".into(), at(3)).unwrap();

    let mut direct = support::open_with_batch(&bank, &["PRB", "CHG"], CapabilityLevel::CL5, &batch);
    direct.close(at(3)).unwrap();
    let cfg = MeasurementConfig::default();
    let via_store = s.measure(&"fixture".into(), &cfg).unwrap();
    let plain = procap_core::measurement::measure(&direct, &bank, &cfg).unwrap();
    assert_eq!(via_store.processes, plain.processes);
}

#[test]
fn store_refuses_a_different_bank() {
    let dir = tempfile::tempdir().unwrap();
    let (s, _, _) = seeded(dir.path());
    drop(s);
    let other = procap_core::ContentBank::load_str(
        r#"{"schema_version":1,"processes":[{"id":"PRB","name":"Problem Management"}],
            "questions":[{"id":"PRB-01","attribute":"PA1.1","scope":{"Process":"PRB"},
                          "text":"Is it done?","roles":["ProcessManager"]}],
            "knowledge_items":[]}"#,
    )
    .unwrap();
    assert!(Store::open(dir.path(), std::sync::Arc::new(other)).is_err());
}
