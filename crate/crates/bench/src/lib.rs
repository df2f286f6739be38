//! Benchmark fixtures.

use chrono::{DateTime, TimeZone, Utc};
use procap_core::{AnswerOption, Assessment, CapabilityLevel, ContentBank, ProcessId, Response, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sample_bank() -> ContentBank {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/sample-bank.json");
    ContentBank::load_path(path).expect("sample bank")
}

fn at(min: i64) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::minutes(min)
}

/// Closed single-process assessment with `per_role` participants in each
/// role, every allocated question answered at random.
pub fn closed_assessment(bank: &ContentBank, process: &str, per_role: usize, seed: u64) -> Assessment {
    let process = ProcessId::new(process);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Assessment::create(bank, "bench".into(), "Bench org", vec![process.clone()], CapabilityLevel::CL5, at(0))
        .unwrap();
    let mut people = Vec::new();
    for role in Role::ALL {
        for i in 0..per_role {
            let (p, _) = a.register_participant(format!("{role} {i}"), &[(process.clone(), role)]).unwrap();
            people.push((p.id, role));
        }
    }
    a.open(at(1)).unwrap();
    for (id, role) in people {
        for q in bank.questions_for(&process, role, CapabilityLevel::CL5).unwrap() {
            let answer = AnswerOption::ALL[rng.random_range(0..AnswerOption::ALL.len())];
            a.record_response(
                bank,
                Response { participant: id.clone(), question: q.id.clone(), process: process.clone(), answer, submitted_at: at(2) },
            )
            .unwrap();
        }
    }
    a.close(at(3)).unwrap();
    a
}
