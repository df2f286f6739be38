//! Durable single-writer store for assessments and reports.
//!
//! Layout of a data directory:
//!
//! * `LOCK` - held with an exclusive OS file lock while a store is open.
//! * `snapshot.json` - full state as of sequence number `last_seq`,
//!   replaced atomically (write temp file, fsync, rename, fsync dir).
//! * `journal.jsonl` - one event per line, fsynced before the mutating
//!   call returns. Replay skips events already covered by the snapshot.
//!
//! A torn final journal line (interrupted write) is discarded on open;
//! it was never acknowledged. Every record is re-validated through the
//! domain operations when loaded.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::bank::{BankFingerprint, ContentBank};
use crate::measurement::{measure, MeasurementConfig, MeasurementError, MeasurementResults};
use crate::model::{AnswerOption, CapabilityLevel, ProcessId, Role};
use crate::reporting::{build_report, AssessmentReport, ReportError};
use crate::survey::{
    AccessToken, Assessment, AssessmentId, AssessmentRecord, Participant, ParticipantId,
    Response, ResponseBatch, SurveyError, TokenHash,
};

pub const STORE_SCHEMA_VERSION: u32 = 1;
const SNAPSHOT: &str = "snapshot.json";
const JOURNAL: &str = "journal.jsonl";
const LOCK: &str = "LOCK";
const COMPACT_EVERY: u64 = 1024;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("data directory {0} is locked by another process")]
    Locked(PathBuf),
    #[error("corrupt store ({0})")]
    Corrupt(String),
    #[error("unknown assessment `{0}`")]
    UnknownAssessment(AssessmentId),
    #[error("assessment `{0}` already exists")]
    DuplicateAssessment(AssessmentId),
    #[error("no report has been built for assessment `{0}`")]
    NoReport(AssessmentId),
    #[error(transparent)]
    Survey(#[from] SurveyError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Event {
    AssessmentCreated {
        record: AssessmentRecord,
    },
    ParticipantRegistered {
        assessment: AssessmentId,
        participant: Participant,
    },
    Opened {
        assessment: AssessmentId,
        at: DateTime<Utc>,
    },
    Closed {
        assessment: AssessmentId,
        at: DateTime<Utc>,
    },
    ResponseRecorded {
        assessment: AssessmentId,
        response: Response,
    },
    ReportBuilt {
        assessment: AssessmentId,
        at: DateTime<Utc>,
        report: Box<AssessmentReport>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct JournalLine {
    seq: u64,
    event: Event,
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    schema_version: u32,
    bank_fingerprint: BankFingerprint,
    last_seq: u64,
    assessments: Vec<AssessmentRecord>,
    reports: Vec<AssessmentReport>,
}

pub struct Store {
    dir: PathBuf,
    bank: Arc<ContentBank>,
    assessments: BTreeMap<AssessmentId, Assessment>,
    reports: BTreeMap<AssessmentId, AssessmentReport>,
    tokens: HashMap<TokenHash, (AssessmentId, ParticipantId)>,
    journal: File,
    last_seq: u64,
    since_snapshot: u64,
    _lock: File,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("dir", &self.dir)
            .field("assessments", &self.assessments.len())
            .field("last_seq", &self.last_seq)
            .finish()
    }
}

impl Store {
    /// Opens (creating if needed) the store in `dir`, replaying its
    /// journal. Fails with [`StoreError::Locked`] if another process holds it.
    pub fn open(dir: impl AsRef<Path>, bank: Arc<ContentBank>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(LOCK))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(dir)),
            Err(fs::TryLockError::Error(e)) => return Err(e.into()),
        }

        let journal = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(dir.join(JOURNAL))?;
        let mut store = Self {
            dir,
            bank,
            assessments: BTreeMap::new(),
            reports: BTreeMap::new(),
            tokens: HashMap::new(),
            journal,
            last_seq: 0,
            since_snapshot: 0,
            _lock: lock,
        };
        store.load_snapshot()?;
        let replayed = store.replay_journal()?;
        if replayed > 0 {
            store.compact()?;
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn bank(&self) -> &Arc<ContentBank> {
        &self.bank
    }

    fn load_snapshot(&mut self) -> Result<(), StoreError> {
        let path = self.dir.join(SNAPSHOT);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(()),
            Err(e) => return Err(e.into()),
        };
        let snap: Snapshot = serde_json::from_str(&text)
            .map_err(|e| StoreError::Corrupt(format!("{SNAPSHOT}: {e}")))?;
        if snap.schema_version != STORE_SCHEMA_VERSION {
            return Err(StoreError::Corrupt(format!(
                "{SNAPSHOT}: unsupported schema_version {}",
                snap.schema_version
            )));
        }
        if &snap.bank_fingerprint != self.bank.fingerprint() && !snap.assessments.is_empty() {
            return Err(SurveyError::BankMismatch.into());
        }
        for rec in snap.assessments {
            let a = Assessment::from_record(&self.bank, rec)?;
            self.index_tokens(&a);
            self.assessments.insert(a.id().clone(), a);
        }
        for r in snap.reports {
            if !self.assessments.contains_key(&r.assessment.id) {
                return Err(StoreError::Corrupt(format!(
                    "report for unknown assessment `{}`",
                    r.assessment.id
                )));
            }
            self.reports.insert(r.assessment.id.clone(), r);
        }
        self.last_seq = snap.last_seq;
        Ok(())
    }

    fn replay_journal(&mut self) -> Result<u64, StoreError> {
        self.journal.seek(SeekFrom::Start(0))?;
        let mut reader = BufReader::new(self.journal.try_clone()?);
        let mut good_len: u64 = 0;
        let mut replayed = 0;
        let mut line = Vec::new();
        let mut lineno = 0;
        loop {
            line.clear();
            let n = reader.read_until(b'\n', &mut line)?;
            if n == 0 {
                break;
            }
            lineno += 1;
            let complete = line.last() == Some(&b'\n');
            let parsed: Result<JournalLine, _> = serde_json::from_slice(&line);
            match parsed {
                Ok(entry) if complete => {
                    good_len += n as u64;
                    if entry.seq <= self.last_seq {
                        continue;
                    }
                    if entry.seq != self.last_seq + 1 {
                        return Err(StoreError::Corrupt(format!(
                            "{JOURNAL}:{lineno}: expected seq {}, found {}",
                            self.last_seq + 1,
                            entry.seq
                        )));
                    }
                    self.apply(entry.event)
                        .map_err(|e| StoreError::Corrupt(format!("{JOURNAL}:{lineno}: {e}")))?;
                    self.last_seq = entry.seq;
                    replayed += 1;
                }
                _ => {
                    // Only a torn tail is tolerated.
                    let mut rest = Vec::new();
                    reader.read_until(b'\n', &mut rest)?;
                    if !rest.is_empty() {
                        return Err(StoreError::Corrupt(format!(
                            "{JOURNAL}:{lineno}: unreadable entry"
                        )));
                    }
                    self.journal.set_len(good_len)?;
                    self.journal.sync_data()?;
                    break;
                }
            }
        }
        Ok(replayed)
    }

    fn index_tokens(&mut self, a: &Assessment) {
        for p in a.participants() {
            self.tokens
                .insert(p.token_hash.clone(), (a.id().clone(), p.id.clone()));
        }
    }

    fn assessment_mut(&mut self, id: &AssessmentId) -> Result<&mut Assessment, StoreError> {
        self.assessments
            .get_mut(id)
            .ok_or_else(|| StoreError::UnknownAssessment(id.clone()))
    }

    fn apply(&mut self, event: Event) -> Result<(), StoreError> {
        let bank = Arc::clone(&self.bank);
        match event {
            Event::AssessmentCreated { record } => {
                if self.assessments.contains_key(&record.id) {
                    return Err(StoreError::DuplicateAssessment(record.id));
                }
                let a = Assessment::from_record(&bank, record)?;
                self.index_tokens(&a);
                self.assessments.insert(a.id().clone(), a);
            }
            Event::ParticipantRegistered {
                assessment,
                participant,
            } => {
                let hash = participant.token_hash.clone();
                let pid = participant.id.clone();
                self.assessment_mut(&assessment)?
                    .insert_participant(participant)?;
                self.tokens.insert(hash, (assessment, pid));
            }
            Event::Opened { assessment, at } => self.assessment_mut(&assessment)?.open(at)?,
            Event::Closed { assessment, at } => self.assessment_mut(&assessment)?.close(at)?,
            Event::ResponseRecorded {
                assessment,
                response,
            } => {
                self.assessment_mut(&assessment)?
                    .record_response(&bank, response)?;
            }
            Event::ReportBuilt {
                assessment,
                at,
                report,
            } => {
                self.assessment_mut(&assessment)?.mark_reported(at)?;
                self.reports.insert(assessment, *report);
            }
        }
        Ok(())
    }

    /// Applies `event` to a scratch copy first, persists it, then commits.
    fn commit(&mut self, event: Event) -> Result<(), StoreError> {
        self.check_event(&event)?;
        let seq = self.last_seq + 1;
        let mut line = serde_json::to_string(&JournalLine {
            seq,
            event: event.clone(),
        })
        .map_err(|e| StoreError::Corrupt(e.to_string()))?;
        line.push('\n');
        self.journal.write_all(line.as_bytes())?;
        self.journal.sync_data()?;
        self.apply(event)
            .expect("event was validated against a copy of the same state");
        self.last_seq = seq;
        self.since_snapshot += 1;
        if self.since_snapshot >= COMPACT_EVERY {
            self.compact()?;
        }
        Ok(())
    }

    fn check_event(&self, event: &Event) -> Result<(), StoreError> {
        let bank = &self.bank;
        let copy = |id: &AssessmentId| {
            self.assessments
                .get(id)
                .cloned()
                .ok_or_else(|| StoreError::UnknownAssessment(id.clone()))
        };
        match event {
            Event::AssessmentCreated { record } => {
                if self.assessments.contains_key(&record.id) {
                    return Err(StoreError::DuplicateAssessment(record.id.clone()));
                }
                Assessment::from_record(bank, record.clone())?;
            }
            Event::ParticipantRegistered {
                assessment,
                participant,
            } => {
                if self.tokens.contains_key(&participant.token_hash) {
                    return Err(SurveyError::Corrupt("token hash collision".into()).into());
                }
                copy(assessment)?.insert_participant(participant.clone())?;
            }
            Event::Opened { assessment, at } => copy(assessment)?.open(*at)?,
            Event::Closed { assessment, at } => copy(assessment)?.close(*at)?,
            Event::ResponseRecorded {
                assessment,
                response,
            } => {
                // Cheaper than cloning the whole response set.
                let a = self
                    .assessments
                    .get(assessment)
                    .ok_or_else(|| StoreError::UnknownAssessment(assessment.clone()))?;
                a.check_response(bank, response)?;
            }
            Event::ReportBuilt { assessment, at, .. } => copy(assessment)?.mark_reported(*at)?,
        }
        Ok(())
    }

    /// Writes a full snapshot and truncates the journal.
    pub fn compact(&mut self) -> Result<(), StoreError> {
        let snap = Snapshot {
            schema_version: STORE_SCHEMA_VERSION,
            bank_fingerprint: self.bank.fingerprint().clone(),
            last_seq: self.last_seq,
            assessments: self.assessments.values().map(|a| a.to_record()).collect(),
            reports: self.reports.values().cloned().collect(),
        };
        let bytes =
            serde_json::to_vec(&snap).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        let tmp = self.dir.join(format!("{SNAPSHOT}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join(SNAPSHOT))?;
        if let Ok(d) = File::open(&self.dir) {
            let _ = d.sync_all();
        }
        self.journal.set_len(0)?;
        self.journal.sync_data()?;
        self.since_snapshot = 0;
        Ok(())
    }

    // ---- queries ----

    pub fn assessments(&self) -> impl Iterator<Item = &Assessment> {
        self.assessments.values()
    }

    pub fn assessment(&self, id: &AssessmentId) -> Result<&Assessment, StoreError> {
        self.assessments
            .get(id)
            .ok_or_else(|| StoreError::UnknownAssessment(id.clone()))
    }

    pub fn report(&self, id: &AssessmentId) -> Result<&AssessmentReport, StoreError> {
        self.assessment(id)?;
        self.reports
            .get(id)
            .ok_or_else(|| StoreError::NoReport(id.clone()))
    }

    /// Resolves a participant token to its assessment and participant.
    pub fn resolve_token(
        &self,
        token: &AccessToken,
    ) -> Result<(&Assessment, ParticipantId), StoreError> {
        let (aid, pid) = self
            .tokens
            .get(&token.hash())
            .ok_or(SurveyError::AuthError)?;
        Ok((self.assessment(aid)?, pid.clone()))
    }

    pub fn measure(
        &self,
        id: &AssessmentId,
        config: &MeasurementConfig,
    ) -> Result<MeasurementResults, StoreError> {
        Ok(measure(self.assessment(id)?, &self.bank, config)?)
    }

    // ---- mutations ----

    pub fn create_assessment(
        &mut self,
        id: AssessmentId,
        org_profile: &str,
        processes: Vec<ProcessId>,
        target_level: CapabilityLevel,
        now: DateTime<Utc>,
    ) -> Result<&Assessment, StoreError> {
        let a = Assessment::create(&self.bank, id.clone(), org_profile, processes, target_level, now)?;
        self.commit(Event::AssessmentCreated {
            record: a.to_record(),
        })?;
        self.assessment(&id)
    }

    /// Registers a participant; the returned token is the only copy.
    pub fn register_participant(
        &mut self,
        id: &AssessmentId,
        display_name: &str,
        assignments: &[(ProcessId, Role)],
    ) -> Result<(Participant, AccessToken), StoreError> {
        let mut scratch = self.assessment(id)?.clone();
        let (participant, token) = scratch.register_participant(display_name, assignments)?;
        self.commit(Event::ParticipantRegistered {
            assessment: id.clone(),
            participant: participant.clone(),
        })?;
        Ok((participant, token))
    }

    /// Registers a participant under a caller-chosen id (offline import).
    pub fn import_participant(
        &mut self,
        id: &AssessmentId,
        participant_id: ParticipantId,
        display_name: &str,
        assignments: &[(ProcessId, Role)],
    ) -> Result<AccessToken, StoreError> {
        let token = AccessToken::generate();
        let participant = Participant {
            id: participant_id,
            display_name: display_name.to_string(),
            token_hash: token.hash(),
            assignments: assignments.iter().cloned().collect(),
        };
        if participant.assignments.len() != assignments.len() {
            let dup = assignments
                .iter()
                .find(|(p, _)| assignments.iter().filter(|(q, _)| q == p).count() > 1)
                .map(|(p, _)| p.clone())
                .expect("a duplicate exists");
            return Err(SurveyError::DuplicateRoleForProcess(dup).into());
        }
        self.commit(Event::ParticipantRegistered {
            assessment: id.clone(),
            participant,
        })?;
        Ok(token)
    }

    pub fn open_assessment(&mut self, id: &AssessmentId, now: DateTime<Utc>) -> Result<(), StoreError> {
        self.commit(Event::Opened {
            assessment: id.clone(),
            at: now,
        })
    }

    pub fn close_assessment(&mut self, id: &AssessmentId, now: DateTime<Utc>) -> Result<(), StoreError> {
        self.commit(Event::Closed {
            assessment: id.clone(),
            at: now,
        })
    }

    /// Token-authenticated submission; returns the stored response once it
    /// is durable. `process` may be omitted when unambiguous.
    pub fn submit_response(
        &mut self,
        token: &AccessToken,
        process: Option<&ProcessId>,
        question: &str,
        answer: AnswerOption,
        now: DateTime<Utc>,
    ) -> Result<(AssessmentId, Response), StoreError> {
        let (a, participant) = self.resolve_token(token)?;
        let process = match process {
            Some(p) => p.clone(),
            None => a.resolve_process(&self.bank, &participant, question)?,
        };
        let aid = a.id().clone();
        let response = Response {
            participant,
            question: question.to_string(),
            process,
            answer,
            submitted_at: now,
        };
        self.record_response(&aid, response.clone())?;
        Ok((aid, response))
    }

    pub fn record_response(&mut self, id: &AssessmentId, response: Response) -> Result<(), StoreError> {
        self.commit(Event::ResponseRecorded {
            assessment: id.clone(),
            response,
        })
    }

    /// Measures and builds the report, storing it and marking the
    /// assessment Reported.
    pub fn build_report(
        &mut self,
        id: &AssessmentId,
        config: &MeasurementConfig,
        now: DateTime<Utc>,
    ) -> Result<AssessmentReport, StoreError> {
        let mut scratch = self.assessment(id)?.clone();
        let results = measure(&scratch, &self.bank, config)?;
        let report = build_report(&mut scratch, &results.processes, &self.bank, config, now)?;
        let at = scratch.reported_at().unwrap_or(now);
        self.commit(Event::ReportBuilt {
            assessment: id.clone(),
            at,
            report: Box::new(report.clone()),
        })?;
        Ok(report)
    }

    /// Imports a response batch: registers roster entries not yet present
    /// (matched by participant id), then records every response. Stops at
    /// the first invalid entry; entries before it stay committed.
    pub fn import_batch(
        &mut self,
        id: &AssessmentId,
        batch: &ResponseBatch,
        now: DateTime<Utc>,
    ) -> Result<ImportSummary, StoreError> {
        let mut summary = ImportSummary::default();
        for entry in &batch.participants {
            let existing = self.assessment(id)?.participant(&entry.id).cloned();
            match existing {
                Some(p) => {
                    let wanted: BTreeMap<_, _> = entry.assignment_pairs().into_iter().collect();
                    if p.assignments != wanted {
                        return Err(SurveyError::DuplicateParticipant(entry.id.clone()).into());
                    }
                }
                None => {
                    self.import_participant(
                        id,
                        entry.id.clone(),
                        &entry.display_name,
                        &entry.assignment_pairs(),
                    )?;
                    summary.participants_registered += 1;
                }
            }
        }
        for r in &batch.responses {
            self.record_response(
                id,
                Response {
                    participant: r.participant.clone(),
                    question: r.question.clone(),
                    process: r.process.clone(),
                    answer: r.answer,
                    submitted_at: now,
                },
            )?;
            summary.responses_recorded += 1;
        }
        Ok(summary)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ImportSummary {
    pub participants_registered: usize,
    pub responses_recorded: usize,
}
