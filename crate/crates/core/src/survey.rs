//! Assessment lifecycle: participants, questionnaire allocation, response
//! capture and participation tracking.
//!
//! An assessment moves strictly `Draft -> Open -> Closed -> Reported`.
//! Participants may be registered while Draft or Open; responses are only
//! accepted while Open. Every operation validates completely before it
//! mutates anything, so a returned error leaves the assessment untouched.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bank::{BankFingerprint, ContentBank, Question};
use crate::model::{AnswerOption, CapabilityLevel, ProcessId, Role};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssessmentId(pub String);

impl fmt::Display for AssessmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AssessmentId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParticipantId(pub String);

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ParticipantId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// Participant secret. Only its hash is ever stored.
#[derive(Clone, PartialEq, Eq)]
pub struct AccessToken(String);

impl AccessToken {
    /// 256 random bits, hex encoded.
    pub fn generate() -> Self {
        let mut bytes = [0u8; 32];
        rand::rng().fill_bytes(&mut bytes);
        Self(hex::encode(bytes))
    }

    pub fn from_secret(secret: impl Into<String>) -> Self {
        Self(secret.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn hash(&self) -> TokenHash {
        TokenHash(hex::encode(Sha256::digest(self.0.as_bytes())))
    }
}

impl fmt::Debug for AccessToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AccessToken(<redacted>)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenHash(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssessmentState {
    Draft,
    Open,
    Closed,
    Reported,
}

impl AssessmentState {
    pub fn can_transition_to(self, to: AssessmentState) -> bool {
        use AssessmentState::*;
        matches!((self, to), (Draft, Open) | (Open, Closed) | (Closed, Reported))
    }

    /// Responses are frozen and measurement may run.
    pub fn is_frozen(self) -> bool {
        matches!(self, AssessmentState::Closed | AssessmentState::Reported)
    }
}

impl fmt::Display for AssessmentState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: ParticipantId,
    pub display_name: String,
    pub token_hash: TokenHash,
    /// One role per process.
    pub assignments: BTreeMap<ProcessId, Role>,
}

impl Participant {
    pub fn role_for(&self, process: &ProcessId) -> Option<Role> {
        self.assignments.get(process).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub participant: ParticipantId,
    pub question: String,
    pub process: ProcessId,
    pub answer: AnswerOption,
    pub submitted_at: DateTime<Utc>,
}

type ResponseKey = (ParticipantId, ProcessId, String);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurveyError {
    #[error("cannot {action} an assessment in state {state}")]
    InvalidState {
        state: AssessmentState,
        action: &'static str,
    },
    #[error("process list is empty")]
    EmptyProcessList,
    #[error("unknown process `{0}`")]
    UnknownProcess(ProcessId),
    #[error("process `{0}` listed twice")]
    DuplicateProcess(ProcessId),
    #[error("participant has more than one role for process `{0}`")]
    DuplicateRoleForProcess(ProcessId),
    #[error("participant needs at least one (process, role) assignment")]
    EmptyAssignments,
    #[error("unknown participant `{0}`")]
    UnknownParticipant(ParticipantId),
    #[error("participant id `{0}` already registered")]
    DuplicateParticipant(ParticipantId),
    #[error("invalid participant credential")]
    AuthError,
    #[error("question `{question}` for process `{process}` is not in this participant's questionnaire")]
    NotAllocated { question: String, process: ProcessId },
    #[error("question `{0}` applies to several assigned processes; name the process")]
    AmbiguousProcess(String),
    #[error("assessment was created against a different content bank")]
    BankMismatch,
    #[error("invalid assessment record: {0}")]
    Corrupt(String),
}

/// One question in a participant's questionnaire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocatedQuestion<'b> {
    pub process: &'b ProcessId,
    pub role: Role,
    pub question: &'b Question,
}

#[derive(Debug, Clone)]
pub struct Assessment {
    id: AssessmentId,
    org_profile: String,
    processes: Vec<ProcessId>,
    target_level: CapabilityLevel,
    bank_fingerprint: BankFingerprint,
    participants: Vec<Participant>,
    responses: BTreeMap<ResponseKey, Response>,
    state: AssessmentState,
    created_at: DateTime<Utc>,
    opened_at: Option<DateTime<Utc>>,
    closed_at: Option<DateTime<Utc>>,
    reported_at: Option<DateTime<Utc>>,
}

impl Assessment {
    /// A new Draft assessment over `processes`, all of which must be
    /// declared in `bank`.
    pub fn create(
        bank: &ContentBank,
        id: AssessmentId,
        org_profile: impl Into<String>,
        processes: Vec<ProcessId>,
        target_level: CapabilityLevel,
        now: DateTime<Utc>,
    ) -> Result<Self, SurveyError> {
        if processes.is_empty() {
            return Err(SurveyError::EmptyProcessList);
        }
        for (i, p) in processes.iter().enumerate() {
            if bank.process(p).is_none() {
                return Err(SurveyError::UnknownProcess(p.clone()));
            }
            if processes[..i].contains(p) {
                return Err(SurveyError::DuplicateProcess(p.clone()));
            }
        }
        if target_level < CapabilityLevel::CL1 {
            return Err(SurveyError::Corrupt("target level must be at least CL1".into()));
        }
        Ok(Self {
            id,
            org_profile: org_profile.into(),
            processes,
            target_level,
            bank_fingerprint: bank.fingerprint().clone(),
            participants: Vec::new(),
            responses: BTreeMap::new(),
            state: AssessmentState::Draft,
            created_at: now,
            opened_at: None,
            closed_at: None,
            reported_at: None,
        })
    }

    pub fn id(&self) -> &AssessmentId {
        &self.id
    }

    pub fn org_profile(&self) -> &str {
        &self.org_profile
    }

    pub fn processes(&self) -> &[ProcessId] {
        &self.processes
    }

    pub fn target_level(&self) -> CapabilityLevel {
        self.target_level
    }

    pub fn bank_fingerprint(&self) -> &BankFingerprint {
        &self.bank_fingerprint
    }

    pub fn state(&self) -> AssessmentState {
        self.state
    }

    pub fn created_at(&self) -> DateTime<Utc> {
        self.created_at
    }

    pub fn opened_at(&self) -> Option<DateTime<Utc>> {
        self.opened_at
    }

    pub fn closed_at(&self) -> Option<DateTime<Utc>> {
        self.closed_at
    }

    pub fn reported_at(&self) -> Option<DateTime<Utc>> {
        self.reported_at
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn participant(&self, id: &ParticipantId) -> Option<&Participant> {
        self.participants.iter().find(|p| &p.id == id)
    }

    pub fn participant_by_token(&self, token: &AccessToken) -> Option<&Participant> {
        let hash = token.hash();
        self.participants.iter().find(|p| p.token_hash == hash)
    }

    /// All stored responses, ordered by (participant, process, question).
    pub fn responses(&self) -> impl Iterator<Item = &Response> {
        self.responses.values()
    }

    pub fn response_count(&self) -> usize {
        self.responses.len()
    }

    fn check_bank(&self, bank: &ContentBank) -> Result<(), SurveyError> {
        if bank.fingerprint() != &self.bank_fingerprint {
            return Err(SurveyError::BankMismatch);
        }
        Ok(())
    }

    fn transition(
        &mut self,
        to: AssessmentState,
        action: &'static str,
    ) -> Result<(), SurveyError> {
        if !self.state.can_transition_to(to) {
            return Err(SurveyError::InvalidState {
                state: self.state,
                action,
            });
        }
        self.state = to;
        Ok(())
    }

    pub fn open(&mut self, now: DateTime<Utc>) -> Result<(), SurveyError> {
        self.transition(AssessmentState::Open, "open")?;
        self.opened_at = Some(now);
        Ok(())
    }

    /// Freezes responses. Closing with zero responses is allowed; the
    /// affected attributes come out Unassessed.
    pub fn close(&mut self, now: DateTime<Utc>) -> Result<(), SurveyError> {
        self.transition(AssessmentState::Closed, "close")?;
        self.closed_at = Some(now);
        Ok(())
    }

    /// Records that a report was built. Idempotent once Reported.
    pub fn mark_reported(&mut self, now: DateTime<Utc>) -> Result<(), SurveyError> {
        match self.state {
            AssessmentState::Reported => Ok(()),
            _ => {
                self.transition(AssessmentState::Reported, "report on")?;
                self.reported_at = Some(now);
                Ok(())
            }
        }
    }

    fn next_participant_id(&self) -> ParticipantId {
        ParticipantId(format!("P{:04}", self.participants.len() + 1))
    }

    fn build_assignments(
        &self,
        assignments: &[(ProcessId, Role)],
    ) -> Result<BTreeMap<ProcessId, Role>, SurveyError> {
        if assignments.is_empty() {
            return Err(SurveyError::EmptyAssignments);
        }
        let mut map = BTreeMap::new();
        for (process, role) in assignments {
            if !self.processes.contains(process) {
                return Err(SurveyError::UnknownProcess(process.clone()));
            }
            if map.insert(process.clone(), *role).is_some() {
                return Err(SurveyError::DuplicateRoleForProcess(process.clone()));
            }
        }
        Ok(map)
    }

    fn check_registration_state(&self) -> Result<(), SurveyError> {
        match self.state {
            AssessmentState::Draft | AssessmentState::Open => Ok(()),
            state => Err(SurveyError::InvalidState {
                state,
                action: "register participants on",
            }),
        }
    }

    /// Registers a participant and returns its id and a fresh access token.
    /// The token is not retained; only its hash is stored.
    pub fn register_participant(
        &mut self,
        display_name: impl Into<String>,
        assignments: &[(ProcessId, Role)],
    ) -> Result<(Participant, AccessToken), SurveyError> {
        let token = AccessToken::generate();
        let participant = Participant {
            id: self.next_participant_id(),
            display_name: display_name.into(),
            token_hash: token.hash(),
            assignments: self.build_assignments(assignments)?,
        };
        self.insert_participant(participant.clone())?;
        Ok((participant, token))
    }

    /// Inserts an already-built participant record (journal replay).
    pub fn insert_participant(&mut self, participant: Participant) -> Result<(), SurveyError> {
        self.check_registration_state()?;
        let pairs: Vec<_> = participant
            .assignments
            .iter()
            .map(|(p, r)| (p.clone(), *r))
            .collect();
        self.build_assignments(&pairs)?;
        if self.participant(&participant.id).is_some() {
            return Err(SurveyError::DuplicateParticipant(participant.id));
        }
        if self
            .participants
            .iter()
            .any(|p| p.token_hash == participant.token_hash)
        {
            return Err(SurveyError::Corrupt("token hash collision".into()));
        }
        self.participants.push(participant);
        Ok(())
    }

    /// The participant's questionnaire: for each assigned process (in the
    /// assessment's process order), the role-filtered questions up to the
    /// target level. Pure in (bank, assignments, target level).
    pub fn allocate_questionnaire<'b>(
        &'b self,
        bank: &'b ContentBank,
        participant: &ParticipantId,
    ) -> Result<Vec<AllocatedQuestion<'b>>, SurveyError> {
        self.check_bank(bank)?;
        let p = self
            .participant(participant)
            .ok_or_else(|| SurveyError::UnknownParticipant(participant.clone()))?;
        let mut out = Vec::new();
        for process in &self.processes {
            let Some(role) = p.role_for(process) else {
                continue;
            };
            let questions = bank
                .questions_for(process, role, self.target_level)
                .map_err(|_| SurveyError::UnknownProcess(process.clone()))?;
            out.extend(questions.into_iter().map(|question| AllocatedQuestion {
                process,
                role,
                question,
            }));
        }
        Ok(out)
    }

    /// Allocated question count for one participant and process.
    pub fn allocated_count(&self, bank: &ContentBank, participant: &Participant, process: &ProcessId) -> usize {
        participant
            .role_for(process)
            .and_then(|role| bank.questions_for(process, role, self.target_level).ok())
            .map_or(0, |q| q.len())
    }

    fn is_allocated(
        &self,
        bank: &ContentBank,
        participant: &Participant,
        process: &ProcessId,
        question: &str,
    ) -> bool {
        let Some(role) = participant.role_for(process) else {
            return false;
        };
        bank.question(question).is_some_and(|q| {
            q.scope.applies_to(process) && q.level() <= self.target_level && q.asks(role)
        })
    }

    /// Picks the process a submission refers to when the client did not
    /// name one: the only assigned process the question is allocated for.
    pub fn resolve_process(
        &self,
        bank: &ContentBank,
        participant: &ParticipantId,
        question: &str,
    ) -> Result<ProcessId, SurveyError> {
        let p = self
            .participant(participant)
            .ok_or_else(|| SurveyError::UnknownParticipant(participant.clone()))?;
        let candidates: Vec<&ProcessId> = p
            .assignments
            .keys()
            .filter(|proc_id| self.is_allocated(bank, p, proc_id, question))
            .collect();
        match candidates.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(SurveyError::NotAllocated {
                question: question.to_string(),
                process: p.assignments.keys().next().cloned().unwrap_or(ProcessId::new("")),
            }),
            _ => Err(SurveyError::AmbiguousProcess(question.to_string())),
        }
    }

    /// Token-authenticated submission. Resubmitting the same question
    /// replaces the earlier answer.
    pub fn submit_response(
        &mut self,
        bank: &ContentBank,
        token: &AccessToken,
        process: &ProcessId,
        question: &str,
        answer: AnswerOption,
        now: DateTime<Utc>,
    ) -> Result<Response, SurveyError> {
        if self.state != AssessmentState::Open {
            return Err(SurveyError::InvalidState {
                state: self.state,
                action: "submit responses to",
            });
        }
        let participant = self
            .participant_by_token(token)
            .ok_or(SurveyError::AuthError)?
            .id
            .clone();
        self.record_response(
            bank,
            Response {
                participant,
                question: question.to_string(),
                process: process.clone(),
                answer,
                submitted_at: now,
            },
        )
    }

    /// Stores a response for an identified participant (offline import and
    /// journal replay). Same validation as [`Assessment::submit_response`].
    pub fn record_response(
        &mut self,
        bank: &ContentBank,
        response: Response,
    ) -> Result<Response, SurveyError> {
        self.check_response(bank, &response)?;
        let key = (
            response.participant.clone(),
            response.process.clone(),
            response.question.clone(),
        );
        self.responses.insert(key, response.clone());
        Ok(response)
    }

    /// Validation half of [`Assessment::record_response`].
    pub fn check_response(&self, bank: &ContentBank, response: &Response) -> Result<(), SurveyError> {
        if self.state != AssessmentState::Open {
            return Err(SurveyError::InvalidState {
                state: self.state,
                action: "submit responses to",
            });
        }
        self.check_bank(bank)?;
        let p = self
            .participant(&response.participant)
            .ok_or_else(|| SurveyError::UnknownParticipant(response.participant.clone()))?;
        if !self.is_allocated(bank, p, &response.process, &response.question) {
            return Err(SurveyError::NotAllocated {
                question: response.question.clone(),
                process: response.process.clone(),
            });
        }
        Ok(())
    }

    pub fn progress(&self, bank: &ContentBank) -> ProgressSnapshot {
        let mut answered: BTreeMap<(&ParticipantId, &ProcessId), usize> = BTreeMap::new();
        for (pid, proc_id, _) in self.responses.keys() {
            *answered.entry((pid, proc_id)).or_default() += 1;
        }
        let mut per_process: BTreeMap<&ProcessId, (usize, usize)> = BTreeMap::new();
        let participants: Vec<ParticipantProgress> = self
            .participants
            .iter()
            .map(|p| {
                let sections: Vec<SectionProgress> = self
                    .processes
                    .iter()
                    .filter_map(|proc_id| {
                        let role = p.role_for(proc_id)?;
                        let allocated = self.allocated_count(bank, p, proc_id);
                        let done = answered.get(&(&p.id, proc_id)).copied().unwrap_or(0);
                        let agg = per_process.entry(proc_id).or_default();
                        agg.0 += allocated;
                        agg.1 += done;
                        Some(SectionProgress {
                            process: proc_id.clone(),
                            role,
                            counts: Completion::new(allocated, done),
                        })
                    })
                    .collect();
                let counts = Completion::sum(sections.iter().map(|s| s.counts));
                ParticipantProgress {
                    participant: p.id.clone(),
                    display_name: p.display_name.clone(),
                    zero_allocation: counts.allocated == 0,
                    counts,
                    sections,
                }
            })
            .collect();
        let processes: Vec<ProcessProgress> = self
            .processes
            .iter()
            .map(|proc_id| {
                let (allocated, done) = per_process.get(proc_id).copied().unwrap_or((0, 0));
                ProcessProgress {
                    process: proc_id.clone(),
                    counts: Completion::new(allocated, done),
                }
            })
            .collect();
        ProgressSnapshot {
            assessment: self.id.clone(),
            state: self.state,
            overall: Completion::sum(participants.iter().map(|p| p.counts)),
            participants,
            processes,
        }
    }

    pub fn to_record(&self) -> AssessmentRecord {
        AssessmentRecord {
            id: self.id.clone(),
            org_profile: self.org_profile.clone(),
            processes: self.processes.clone(),
            target_level: self.target_level,
            bank_fingerprint: self.bank_fingerprint.clone(),
            state: self.state,
            created_at: self.created_at,
            opened_at: self.opened_at,
            closed_at: self.closed_at,
            reported_at: self.reported_at,
            participants: self.participants.clone(),
            responses: self.responses.values().cloned().collect(),
        }
    }

    /// Rebuilds an assessment from its persisted record, re-running every
    /// domain check along the way.
    pub fn from_record(bank: &ContentBank, rec: AssessmentRecord) -> Result<Self, SurveyError> {
        if &rec.bank_fingerprint != bank.fingerprint() {
            return Err(SurveyError::BankMismatch);
        }
        let mut a = Self::create(
            bank,
            rec.id,
            rec.org_profile,
            rec.processes,
            rec.target_level,
            rec.created_at,
        )?;
        for p in rec.participants {
            a.insert_participant(p)?;
        }
        let corrupt = |m: &str| SurveyError::Corrupt(m.to_string());
        if rec.state != AssessmentState::Draft {
            a.open(rec.opened_at.ok_or_else(|| corrupt("missing opened_at"))?)?;
        }
        for r in rec.responses {
            a.record_response(bank, r)?;
        }
        if rec.state.is_frozen() {
            a.close(rec.closed_at.ok_or_else(|| corrupt("missing closed_at"))?)?;
        }
        if rec.state == AssessmentState::Reported {
            a.mark_reported(rec.reported_at.ok_or_else(|| corrupt("missing reported_at"))?)?;
        }
        Ok(a)
    }
}

/// Serialized form of an [`Assessment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentRecord {
    pub id: AssessmentId,
    pub org_profile: String,
    pub processes: Vec<ProcessId>,
    pub target_level: CapabilityLevel,
    pub bank_fingerprint: BankFingerprint,
    pub state: AssessmentState,
    pub created_at: DateTime<Utc>,
    pub opened_at: Option<DateTime<Utc>>,
    pub closed_at: Option<DateTime<Utc>>,
    pub reported_at: Option<DateTime<Utc>>,
    pub participants: Vec<Participant>,
    pub responses: Vec<Response>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub allocated: usize,
    pub answered: usize,
    /// `answered / allocated`, or 0 when nothing is allocated.
    pub completion: f64,
}

impl Completion {
    pub fn new(allocated: usize, answered: usize) -> Self {
        let completion = if allocated == 0 {
            0.0
        } else {
            answered as f64 / allocated as f64
        };
        Self {
            allocated,
            answered,
            completion,
        }
    }

    fn sum(items: impl Iterator<Item = Completion>) -> Self {
        let (a, d) = items.fold((0, 0), |(a, d), c| (a + c.allocated, d + c.answered));
        Self::new(a, d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionProgress {
    pub process: ProcessId,
    pub role: Role,
    #[serde(flatten)]
    pub counts: Completion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantProgress {
    pub participant: ParticipantId,
    pub display_name: String,
    #[serde(flatten)]
    pub counts: Completion,
    /// Set when the participant's assignments yield no questions.
    pub zero_allocation: bool,
    pub sections: Vec<SectionProgress>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessProgress {
    pub process: ProcessId,
    #[serde(flatten)]
    pub counts: Completion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressSnapshot {
    pub assessment: AssessmentId,
    pub state: AssessmentState,
    pub overall: Completion,
    pub participants: Vec<ParticipantProgress>,
    pub processes: Vec<ProcessProgress>,
}

impl ProgressSnapshot {
    pub fn participant(&self, id: &ParticipantId) -> Option<&ParticipantProgress> {
        self.participants.iter().find(|p| &p.participant == id)
    }
}

/// A participant entry in a response batch file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub id: ParticipantId,
    pub display_name: String,
    pub assignments: Vec<RosterAssignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterAssignment {
    pub process: ProcessId,
    pub role: Role,
}

impl RosterEntry {
    pub fn assignment_pairs(&self) -> Vec<(ProcessId, Role)> {
        self.assignments
            .iter()
            .map(|a| (a.process.clone(), a.role))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchResponse {
    pub participant: ParticipantId,
    pub process: ProcessId,
    pub question: String,
    pub answer: AnswerOption,
}

/// Offline response file: a roster plus answers keyed by participant id.
/// Produced by the simulator and consumed by `procap respond --file`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseBatch {
    pub participants: Vec<RosterEntry>,
    pub responses: Vec<BatchResponse>,
}
