//! Seeded synthetic response generation for demos and regression fixtures.
//!
//! The same bank, assessment, profile and seed always produce the same
//! batch: participants are visited in roster order, sections in the
//! assessment's process order and questions in questionnaire order, with
//! one ChaCha8 stream driving every draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bank::ContentBank;
use crate::model::{AnswerOption, ProcessAttribute, ProcessId, Role};
use crate::survey::{Assessment, BatchResponse, ParticipantId, ResponseBatch, RosterAssignment, RosterEntry};

const SUM_TOLERANCE: f64 = 1e-9;

/// Probability of each answer option; must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnswerDistribution {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "Unable", default)]
    pub unable: f64,
}

impl AnswerDistribution {
    fn weights(&self) -> [(AnswerOption, f64); 5] {
        [
            (AnswerOption::N, self.n),
            (AnswerOption::P, self.p),
            (AnswerOption::L, self.l),
            (AnswerOption::F, self.f),
            (AnswerOption::Unable, self.unable),
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        let w = self.weights();
        if w.iter().any(|(_, p)| !p.is_finite() || *p < 0.0) {
            return Err("probabilities must be finite and non-negative".into());
        }
        let sum: f64 = w.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(format!("probabilities sum to {sum}, expected 1"));
        }
        Ok(())
    }

    fn draw(&self, u: f64) -> AnswerOption {
        let mut acc = 0.0;
        let mut last = AnswerOption::N;
        for (option, p) in self.weights() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = option;
            if u < acc {
                return option;
            }
        }
        last
    }
}

/// Replaces the default distribution where every given field matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<ProcessAttribute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
    pub distribution: AnswerDistribution,
}

impl DistributionOverride {
    fn matches(&self, process: &ProcessId, attribute: ProcessAttribute, role: Role) -> bool {
        self.process.as_ref().is_none_or(|p| p == process)
            && self.attribute.is_none_or(|a| a == attribute)
            && self.role.is_none_or(|r| r == role)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedParticipant {
    pub display_name: String,
    pub assignments: Vec<RosterAssignment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationProfile {
    pub default: AnswerDistribution,
    /// First matching override wins.
    #[serde(default)]
    pub overrides: Vec<DistributionOverride>,
    /// Chance that an allocated question gets answered at all.
    #[serde(default = "full_rate")]
    pub response_rate: f64,
    /// When empty, one participant per role per process is simulated.
    #[serde(default)]
    pub roster: Vec<SimulatedParticipant>,
}

fn full_rate() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulationError {
    #[error("invalid simulation profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Survey(#[from] crate::survey::SurveyError),
}

impl SimulationProfile {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidProfile(m));
        if let Err(m) = self.default.validate() {
            return bad(format!("default: {m}"));
        }
        for (i, o) in self.overrides.iter().enumerate() {
            if let Err(m) = o.distribution.validate() {
                return bad(format!("overrides[{i}]: {m}"));
            }
        }
        if !(0.0..=1.0).contains(&self.response_rate) {
            return bad("response_rate must be within [0, 1]".into());
        }
        Ok(())
    }

    fn distribution(&self, process: &ProcessId, attribute: ProcessAttribute, role: Role) -> &AnswerDistribution {
        self.overrides
            .iter()
            .find(|o| o.matches(process, attribute, role))
            .map_or(&self.default, |o| &o.distribution)
    }
}

/// Generates a roster and responses for `assessment`. New participant ids
/// continue after the ones already registered.
pub fn simulate(
    bank: &ContentBank,
    assessment: &Assessment,
    profile: &SimulationProfile,
    seed: u64,
) -> Result<ResponseBatch, SimulationError> {
    profile.validate()?;
    let roster: Vec<SimulatedParticipant> = if profile.roster.is_empty() {
        assessment
            .processes()
            .iter()
            .flat_map(|p| {
                Role::ALL.iter().map(move |r| SimulatedParticipant {
                    display_name: format!("{r} ({p})"),
                    assignments: vec![RosterAssignment { process: p.clone(), role: *r }],
                })
            })
            .collect()
    } else {
        profile.roster.clone()
    };

    // Validate the roster against a scratch copy so allocation and ids
    // come from the real registration rules.
    let mut scratch = assessment.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batch = ResponseBatch { participants: Vec::new(), responses: Vec::new() };
    for sp in &roster {
        let pairs: Vec<_> = sp.assignments.iter().map(|a| (a.process.clone(), a.role)).collect();
        let (participant, _) = scratch.register_participant(sp.display_name.clone(), &pairs)?;
        let id: ParticipantId = participant.id.clone();
        batch.participants.push(RosterEntry {
            id: id.clone(),
            display_name: sp.display_name.clone(),
            assignments: sp.assignments.clone(),
        });
        for q in scratch.allocate_questionnaire(bank, &id)? {
            let answered: f64 = rng.random();
            let u: f64 = rng.random();
            if answered >= profile.response_rate {
                continue;
            }
            let dist = profile.distribution(q.process, q.question.attribute, q.role);
            batch.responses.push(BatchResponse {
                participant: id.clone(),
                process: q.process.clone(),
                question: q.question.id.clone(),
                answer: dist.draw(u),
            });
        }
    }
    Ok(batch)
}
