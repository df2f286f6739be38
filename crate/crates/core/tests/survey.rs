mod support;

use procap_core::model::{AnswerOption, Role};
use procap_core::survey::SurveyError;
use procap_core::{AccessToken, Assessment, AssessmentId, AssessmentState, CapabilityLevel, ContentBank, ProcessId};
use proptest::prelude::*;

use support::at;

fn pid(s: &str) -> ProcessId {
    ProcessId::new(s)
}

fn draft(bank: &ContentBank, processes: &[&str]) -> Assessment {
    Assessment::create(
        bank,
        AssessmentId::from("a1"),
        "Org",
        processes.iter().map(|p| pid(p)).collect(),
        CapabilityLevel::CL5,
        at(0),
    )
    .unwrap()
}

#[test]
fn create_rejects_bad_process_lists() {
    let bank = support::sample_bank();
    let mk = |ps: Vec<ProcessId>| Assessment::create(&bank, "x".into(), "Org", ps, CapabilityLevel::CL3, at(0));
    assert!(matches!(mk(vec![]), Err(SurveyError::EmptyProcessList)));
    assert!(matches!(mk(vec![pid("NOPE")]), Err(SurveyError::UnknownProcess(_))));
    assert!(matches!(mk(vec![pid("PRB"), pid("PRB")]), Err(SurveyError::DuplicateProcess(_))));
    let ok = mk(vec![pid("PRB"), pid("CHG")]).unwrap();
    assert_eq!(ok.state(), AssessmentState::Draft);
    assert_eq!(ok.bank_fingerprint(), bank.fingerprint());
}

#[test]
fn registration_assigns_sequential_ids_and_checks_assignments() {
    let bank = support::sample_bank();
    let mut a = draft(&bank, &["PRB", "CHG"]);
    let (p1, t1) = a.register_participant("Ann", &[(pid("PRB"), Role::ProcessManager)]).unwrap();
    let (p2, t2) = a
        .register_participant("Bo", &[(pid("PRB"), Role::ProcessPerformer), (pid("CHG"), Role::ProcessManager)])
        .unwrap();
    assert_eq!(p1.id.0, "P0001");
    assert_eq!(p2.id.0, "P0002");
    assert_ne!(t1.expose(), t2.expose());
    assert_eq!(t1.expose().len(), 64);
    assert_eq!(p1.token_hash, t1.hash());
    assert!(!format!("{t1:?}").contains(t1.expose()));

    assert!(matches!(a.register_participant("X", &[]), Err(SurveyError::EmptyAssignments)));
    assert!(matches!(
        a.register_participant("X", &[(pid("SLM"), Role::ProcessManager)]),
        Err(SurveyError::UnknownProcess(_))
    ));
    assert!(matches!(
        a.register_participant("X", &[(pid("PRB"), Role::ProcessManager), (pid("PRB"), Role::ProcessPerformer)]),
        Err(SurveyError::DuplicateRoleForProcess(_))
    ));
    assert_eq!(a.participants().len(), 2);

    a.open(at(1)).unwrap();
    a.register_participant("Late", &[(pid("PRB"), Role::ExternalStakeholder)]).unwrap();
    a.close(at(2)).unwrap();
    assert!(matches!(
        a.register_participant("Too late", &[(pid("PRB"), Role::ExternalStakeholder)]),
        Err(SurveyError::InvalidState { .. })
    ));
}

#[test]
fn allocation_is_deterministic_and_role_filtered() {
    let bank = support::sample_bank();
    let mut a = draft(&bank, &["PRB", "CHG"]);
    let (m, _) = a.register_participant("M", &[(pid("PRB"), Role::ProcessManager)]).unwrap();
    let (p, _) = a
        .register_participant("P", &[(pid("PRB"), Role::ProcessPerformer), (pid("CHG"), Role::ExternalStakeholder)])
        .unwrap();
    let ids = |who| -> Vec<(String, String)> {
        a.allocate_questionnaire(&bank, who)
            .unwrap()
            .iter()
            .map(|q| (q.process.0.clone(), q.question.id.clone()))
            .collect()
    };
    assert_eq!(ids(&m.id), ids(&m.id));
    let manager = a.allocate_questionnaire(&bank, &m.id).unwrap();
    let want = bank.questions_for(&pid("PRB"), Role::ProcessManager, CapabilityLevel::CL5).unwrap();
    assert_eq!(manager.len(), want.len());
    assert!(manager.iter().all(|q| q.role == Role::ProcessManager && q.question.roles.contains(&Role::ProcessManager)));

    let perf = a.allocate_questionnaire(&bank, &p.id).unwrap();
    let n_prb = bank.questions_for(&pid("PRB"), Role::ProcessPerformer, CapabilityLevel::CL5).unwrap().len();
    let n_chg = bank.questions_for(&pid("CHG"), Role::ExternalStakeholder, CapabilityLevel::CL5).unwrap().len();
    assert_eq!(perf.len(), n_prb + n_chg);
    assert!(perf.iter().filter(|q| q.process.0 == "CHG").all(|q| q.role == Role::ExternalStakeholder));
    assert!(matches!(
        a.allocate_questionnaire(&bank, &"P0099".into()),
        Err(SurveyError::UnknownParticipant(_))
    ));
}

#[test]
fn submission_rules() {
    let bank = support::sample_bank();
    let mut a = draft(&bank, &["PRB"]);
    let (p, token) = a.register_participant("P", &[(pid("PRB"), Role::ProcessManager)]).unwrap();
    let first = a.allocate_questionnaire(&bank, &p.id).unwrap()[0].question.id.clone();

    // Draft: not accepting responses yet.
    let err = a.submit_response(&bank, &token, &pid("PRB"), &first, AnswerOption::L, at(1)).unwrap_err();
    assert!(matches!(err, SurveyError::InvalidState { state: AssessmentState::Draft, .. }));

    a.open(at(1)).unwrap();
    a.submit_response(&bank, &token, &pid("PRB"), &first, AnswerOption::L, at(2)).unwrap();
    a.submit_response(&bank, &token, &pid("PRB"), &first, AnswerOption::F, at(3)).unwrap();
    assert_eq!(a.response_count(), 1, "resubmission replaces");
    let r = a.responses().next().unwrap();
    assert_eq!((r.answer, r.submitted_at), (AnswerOption::F, at(3)));

    let bogus = AccessToken::from_secret("0".repeat(64));
    assert!(matches!(
        a.submit_response(&bank, &bogus, &pid("PRB"), &first, AnswerOption::F, at(4)),
        Err(SurveyError::AuthError)
    ));

    let not_for_manager = bank
        .applicable_questions(&pid("PRB"), CapabilityLevel::CL5)
        .unwrap()
        .into_iter()
        .find(|q| !q.roles.contains(&Role::ProcessManager))
        .unwrap()
        .id
        .clone();
    assert!(matches!(
        a.submit_response(&bank, &token, &pid("PRB"), &not_for_manager, AnswerOption::F, at(4)),
        Err(SurveyError::NotAllocated { .. })
    ));
    assert!(matches!(
        a.submit_response(&bank, &token, &pid("PRB"), "CHG-01", AnswerOption::F, at(4)),
        Err(SurveyError::NotAllocated { .. })
    ));

    a.close(at(5)).unwrap();
    assert!(matches!(
        a.submit_response(&bank, &token, &pid("PRB"), &first, AnswerOption::N, at(6)),
        Err(SurveyError::InvalidState { state: AssessmentState::Closed, .. })
    ));
    assert_eq!(a.responses().next().unwrap().answer, AnswerOption::F);
}

#[test]
fn process_resolution_for_generic_questions() {
    let bank = support::sample_bank();
    let mut a = draft(&bank, &["PRB", "CHG"]);
    let (p, _) = a
        .register_participant("P", &[(pid("PRB"), Role::ProcessManager), (pid("CHG"), Role::ProcessManager)])
        .unwrap();
    let own = bank.questions_for(&pid("PRB"), Role::ProcessManager, CapabilityLevel::CL1).unwrap()[0].id.clone();
    assert_eq!(a.resolve_process(&bank, &p.id, &own).unwrap(), pid("PRB"));
    let generic = a
        .allocate_questionnaire(&bank, &p.id)
        .unwrap()
        .into_iter()
        .find(|q| q.question.attribute.level() > CapabilityLevel::CL1)
        .unwrap()
        .question
        .id
        .clone();
    assert!(matches!(a.resolve_process(&bank, &p.id, &generic), Err(SurveyError::AmbiguousProcess(_))));
}

#[test]
fn progress_counts_answered_over_allocated() {
    let bank = support::sample_bank();
    let mut a = draft(&bank, &["PRB"]);
    let (p, token) = a.register_participant("P", &[(pid("PRB"), Role::ExternalStakeholder)]).unwrap();
    a.open(at(1)).unwrap();
    let allocated: Vec<String> =
        a.allocate_questionnaire(&bank, &p.id).unwrap().iter().map(|q| q.question.id.clone()).collect();
    for q in allocated.iter().take(5) {
        a.submit_response(&bank, &token, &pid("PRB"), q, AnswerOption::P, at(2)).unwrap();
    }
    let snap = a.progress(&bank);
    let pp = snap.participant(&p.id).unwrap();
    assert_eq!(pp.counts.allocated, allocated.len());
    assert_eq!(pp.counts.answered, 5);
    assert!((pp.counts.completion - 5.0 / allocated.len() as f64).abs() < 1e-12);
    assert_eq!(snap.overall, pp.counts);
    assert_eq!(snap.processes[0].counts, pp.counts);
    assert!(!pp.zero_allocation);
}

#[test]
fn completion_arithmetic() {
    let c = procap_core::survey::Completion::new(20, 5);
    assert_eq!(c.completion, 0.25);
    assert_eq!(procap_core::survey::Completion::new(0, 0).completion, 0.0);
}

#[test]
fn zero_allocation_is_flagged() {
    let bank = ContentBank::load_str(
        r#"{"schema_version":1,
            "processes":[{"id":"PRB","name":"Problem Management"}],
            "questions":[{"id":"PRB-01","attribute":"PA1.1","scope":{"Process":"PRB"},
                          "text":"Is it done?","roles":["ProcessManager"]}],
            "knowledge_items":[]}"#,
    )
    .unwrap();
    let mut a = Assessment::create(&bank, "z".into(), "Org", vec![pid("PRB")], CapabilityLevel::CL1, at(0)).unwrap();
    let (p, _) = a.register_participant("S", &[(pid("PRB"), Role::ExternalStakeholder)]).unwrap();
    let snap = a.progress(&bank);
    let pp = snap.participant(&p.id).unwrap();
    assert!(pp.zero_allocation);
    assert_eq!(pp.counts.completion, 0.0);
}

#[test]
fn record_round_trip_revalidates() {
    let bank = support::sample_bank();
    let batch = support::load_batch("mixed_batch.json");
    let mut a = support::open_with_batch(&bank, &["PRB", "CHG"], CapabilityLevel::CL5, &batch);
    a.close(at(9)).unwrap();
    let rec = a.to_record();
    let json = serde_json::to_string(&rec).unwrap();
    let back = Assessment::from_record(&bank, serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back.to_record(), rec);

    let mut tampered = rec.clone();
    tampered.responses[0].question = "CFG-01".into();
    assert!(Assessment::from_record(&bank, tampered).is_err());
}

#[test]
fn bank_mismatch_is_refused() {
    let bank = support::sample_bank();
    let mut a = draft(&bank, &["PRB"]);
    let (p, _) = a.register_participant("P", &[(pid("PRB"), Role::ProcessManager)]).unwrap();
    let other = ContentBank::load_str(
        r#"{"schema_version":1,
            "processes":[{"id":"PRB","name":"Problem Management"}],
            "questions":[{"id":"PRB-01","attribute":"PA1.1","scope":{"Process":"PRB"},
                          "text":"Is it done?","roles":["ProcessManager"]}],
            "knowledge_items":[]}"#,
    )
    .unwrap();
    assert!(matches!(a.allocate_questionnaire(&other, &p.id), Err(SurveyError::BankMismatch)));
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Open,
    Close,
    Report,
}

fn apply(a: &mut Assessment, op: Op) -> bool {
    match op {
        Op::Open => a.open(at(1)).is_ok(),
        Op::Close => a.close(at(2)).is_ok(),
        Op::Report => a.mark_reported(at(3)).is_ok(),
    }
}

#[test]
fn state_machine_over_all_short_sequences() {
    use AssessmentState::*;
    let bank = support::sample_bank();
    let ops = [Op::Open, Op::Close, Op::Report];
    for len in 0..=4u32 {
        for code in 0..3u32.pow(len) {
            let mut a = draft(&bank, &["PRB"]);
            let mut model = Draft;
            let mut c = code;
            for _ in 0..len {
                let op = ops[(c % 3) as usize];
                c /= 3;
                let target = match op {
                    Op::Open => Open,
                    Op::Close => Closed,
                    Op::Report => Reported,
                };
                let allowed = model.can_transition_to(target) || (model == Reported && target == Reported);
                assert_eq!(apply(&mut a, op), allowed, "{op:?} from {model:?}");
                if allowed {
                    model = target;
                }
                assert_eq!(a.state(), model);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn last_write_wins_per_question(
        picks in prop::collection::vec((0usize..80, 0usize..5), 1..60),
    ) {
        let bank = support::sample_bank();
        let mut a = draft(&bank, &["PRB"]);
        let (p, token) = a.register_participant("P", &[(pid("PRB"), Role::ProcessPerformer)]).unwrap();
        a.open(at(1)).unwrap();
        let allocated: Vec<String> =
            a.allocate_questionnaire(&bank, &p.id).unwrap().iter().map(|q| q.question.id.clone()).collect();
        let mut model = std::collections::BTreeMap::new();
        for (i, (qi, ai)) in picks.iter().enumerate() {
            let q = &allocated[qi % allocated.len()];
            let ans = AnswerOption::ALL[*ai];
            a.submit_response(&bank, &token, &pid("PRB"), q, ans, at(2 + i as i64)).unwrap();
            model.insert(q.clone(), ans);
        }
        prop_assert_eq!(a.response_count(), model.len());
        for r in a.responses() {
            prop_assert_eq!(model[&r.question], r.answer);
        }
        prop_assert_eq!(a.progress(&bank).overall.answered, model.len());
    }
}
