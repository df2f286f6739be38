#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use procap_core::survey::{Participant, ResponseBatch};
use procap_core::{AccessToken, Assessment, AssessmentId, CapabilityLevel, ContentBank, ProcessId, Response};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn sample_bank() -> Arc<ContentBank> {
    Arc::new(ContentBank::load_path(repo_root().join("data/sample-bank.json")).expect("sample bank loads"))
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Fixed instant, `minutes` after 2024-01-01T00:00:00Z.
pub fn at(minutes: i64) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::minutes(minutes)
}

/// Builds an Open assessment over `processes` populated from `batch`.
pub fn open_with_batch(
    bank: &ContentBank,
    processes: &[&str],
    target: CapabilityLevel,
    batch: &ResponseBatch,
) -> Assessment {
    let mut a = Assessment::create(
        bank,
        AssessmentId::from("fixture"),
        "Fixture organisation",
        processes.iter().map(|p| ProcessId::new(*p)).collect(),
        target,
        at(0),
    )
    .unwrap();
    for entry in &batch.participants {
        a.insert_participant(Participant {
            id: entry.id.clone(),
            display_name: entry.display_name.clone(),
            token_hash: AccessToken::generate().hash(),
            assignments: entry.assignment_pairs().into_iter().collect(),
        })
        .unwrap();
    }
    a.open(at(1)).unwrap();
    for r in &batch.responses {
        a.record_response(
            bank,
            Response {
                participant: r.participant.clone(),
                question: r.question.clone(),
                process: r.process.clone(),
                answer: r.answer,
                submitted_at: at(2),
            },
        )
        .unwrap();
    }
    a
}

pub fn load_batch(name: &str) -> ResponseBatch {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}
