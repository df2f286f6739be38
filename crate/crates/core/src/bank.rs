//! Question bank and knowledge base.
//!
//! A bank is a single JSON document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "processes": [{ "id": "PRB", "name": "Problem Management" }],
//!   "questions": [{
//!     "id": "PRB-01", "attribute": "PA1.1", "scope": { "Process": "PRB" },
//!     "text": "...", "roles": ["ProcessPerformer"], "knowledge_item": "K-PRB-01"
//!   }],
//!   "knowledge_items": [{ "id": "K-PRB-01", "observation": "...", "recommendation": "..." }]
//! }
//! ```
//!
//! Level-1 (PA1.1) questions are scoped to one process; all higher-level
//! questions are `"Generic"` and apply to every process. The bank is
//! validated in full on load and is immutable afterwards.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{CapabilityLevel, ProcessAttribute, ProcessId, ProcessRef, Role};

pub const BANK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuestionScope {
    Process(ProcessId),
    Generic,
}

impl QuestionScope {
    pub fn applies_to(&self, process: &ProcessId) -> bool {
        match self {
            QuestionScope::Process(p) => p == process,
            QuestionScope::Generic => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub attribute: ProcessAttribute,
    pub scope: QuestionScope,
    pub text: String,
    pub roles: Vec<Role>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge_item: Option<String>,
}

impl Question {
    pub fn level(&self) -> CapabilityLevel {
        self.attribute.level()
    }

    pub fn asks(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeItem {
    pub id: String,
    pub observation: String,
    pub recommendation: String,
}

/// Hex SHA-256 of a bank's canonical serialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BankFingerprint(pub String);

impl fmt::Display for BankFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct BankDocument {
    schema_version: u32,
    processes: Vec<ProcessRef>,
    questions: Vec<Question>,
    knowledge_items: Vec<KnowledgeItem>,
}

/// A validated, immutable content bank.
#[derive(Debug, Clone)]
pub struct ContentBank {
    doc: BankDocument,
    question_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    fingerprint: BankFingerprint,
}

impl PartialEq for ContentBank {
    fn eq(&self, other: &Self) -> bool {
        self.doc == other.doc
    }
}

/// One path-addressed validation problem, e.g. `questions[3].scope`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BankError {
    #[error("cannot read bank: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed bank document: {0}")]
    Parse(String),
    #[error("unsupported bank schema_version {found} (expected {BANK_SCHEMA_VERSION})")]
    Version { found: u64 },
    #[error("invalid bank: {}", join_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
    #[error("unknown process `{0}`")]
    UnknownProcess(ProcessId),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

impl ContentBank {
    pub fn load_path(path: impl AsRef<Path>) -> Result<Self, BankError> {
        let text = std::fs::read_to_string(path)?;
        Self::load_str(&text)
    }

    /// Parses and validates a bank document.
    pub fn load_str(text: &str) -> Result<Self, BankError> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| BankError::Parse(e.to_string()))?;
        match raw.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(BANK_SCHEMA_VERSION) => {}
            Some(found) => return Err(BankError::Version { found }),
            None => {
                return Err(BankError::Parse(
                    "missing or non-integer field `schema_version`".into(),
                ))
            }
        }
        let doc: BankDocument =
            serde_json::from_value(raw).map_err(|e| BankError::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn from_parts(
        processes: Vec<ProcessRef>,
        questions: Vec<Question>,
        knowledge_items: Vec<KnowledgeItem>,
    ) -> Result<Self, BankError> {
        Self::from_document(BankDocument {
            schema_version: BANK_SCHEMA_VERSION,
            processes,
            questions,
            knowledge_items,
        })
    }

    fn from_document(doc: BankDocument) -> Result<Self, BankError> {
        let diags = validate(&doc);
        if !diags.is_empty() {
            return Err(BankError::Validation(diags));
        }
        let question_index = doc
            .questions
            .iter()
            .enumerate()
            .map(|(i, q)| (q.id.clone(), i))
            .collect();
        let item_index = doc
            .knowledge_items
            .iter()
            .enumerate()
            .map(|(i, k)| (k.id.clone(), i))
            .collect();
        let canonical = serde_json::to_vec(&doc).expect("bank serializes");
        let fingerprint = BankFingerprint(hex::encode(Sha256::digest(&canonical)));
        Ok(Self {
            doc,
            question_index,
            item_index,
            fingerprint,
        })
    }

    /// Canonical JSON form; `load_str(&bank.to_json())` yields an equal bank.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("bank serializes")
    }

    pub fn schema_version(&self) -> u32 {
        self.doc.schema_version
    }

    pub fn fingerprint(&self) -> &BankFingerprint {
        &self.fingerprint
    }

    pub fn processes(&self) -> &[ProcessRef] {
        &self.doc.processes
    }

    pub fn questions(&self) -> &[Question] {
        &self.doc.questions
    }

    pub fn knowledge_items(&self) -> &[KnowledgeItem] {
        &self.doc.knowledge_items
    }

    pub fn process(&self, id: &ProcessId) -> Option<&ProcessRef> {
        self.doc.processes.iter().find(|p| &p.id == id)
    }

    pub fn question(&self, id: &str) -> Option<&Question> {
        self.question_index.get(id).map(|&i| &self.doc.questions[i])
    }

    pub fn knowledge_item(&self, id: &str) -> Option<&KnowledgeItem> {
        self.item_index.get(id).map(|&i| &self.doc.knowledge_items[i])
    }

    /// Knowledge item linked to a question, if any.
    pub fn item_for(&self, question: &Question) -> Option<&KnowledgeItem> {
        question
            .knowledge_item
            .as_deref()
            .and_then(|id| self.knowledge_item(id))
    }

    /// All questions applicable to `process` up to `target`, regardless of
    /// role, ordered by attribute then question id.
    pub fn applicable_questions(
        &self,
        process: &ProcessId,
        target: CapabilityLevel,
    ) -> Result<Vec<&Question>, BankError> {
        self.select(process, target, |_| true)
    }

    /// The questionnaire for one role on one process: questions scoped to
    /// the process (or generic), tagged with `role`, at or below `target`.
    pub fn questions_for(
        &self,
        process: &ProcessId,
        role: Role,
        target: CapabilityLevel,
    ) -> Result<Vec<&Question>, BankError> {
        self.select(process, target, |q| q.asks(role))
    }

    fn select(
        &self,
        process: &ProcessId,
        target: CapabilityLevel,
        keep: impl Fn(&Question) -> bool,
    ) -> Result<Vec<&Question>, BankError> {
        if self.process(process).is_none() {
            return Err(BankError::UnknownProcess(process.clone()));
        }
        let mut out: Vec<&Question> = self
            .doc
            .questions
            .iter()
            .filter(|q| q.scope.applies_to(process) && q.level() <= target && keep(q))
            .collect();
        out.sort_by(|a, b| (a.attribute, &a.id).cmp(&(b.attribute, &b.id)));
        Ok(out)
    }

    pub fn stats(&self) -> BankStats {
        bank_stats(self)
    }
}

fn validate(doc: &BankDocument) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut push = |path: String, message: String| diags.push(Diagnostic { path, message });

    if doc.processes.is_empty() {
        push("processes".into(), "at least one process is required".into());
    }
    if doc.questions.is_empty() {
        push("questions".into(), "at least one question is required".into());
    }

    let mut process_ids = HashSet::new();
    for (i, p) in doc.processes.iter().enumerate() {
        if p.id.as_str().trim().is_empty() {
            push(format!("processes[{i}].id"), "must be non-empty".into());
        } else if !process_ids.insert(&p.id) {
            push(format!("processes[{i}].id"), format!("duplicate process id `{}`", p.id));
        }
    }

    let mut item_ids = HashSet::new();
    for (i, k) in doc.knowledge_items.iter().enumerate() {
        if k.id.trim().is_empty() {
            push(format!("knowledge_items[{i}].id"), "must be non-empty".into());
        } else if !item_ids.insert(k.id.as_str()) {
            push(format!("knowledge_items[{i}].id"), format!("duplicate knowledge item id `{}`", k.id));
        }
        if k.observation.trim().is_empty() {
            push(format!("knowledge_items[{i}].observation"), "must be non-empty".into());
        }
        if k.recommendation.trim().is_empty() {
            push(format!("knowledge_items[{i}].recommendation"), "must be non-empty".into());
        }
    }

    let mut question_ids = HashSet::new();
    for (i, q) in doc.questions.iter().enumerate() {
        let at = |field: &str| format!("questions[{i}].{field}");
        if q.id.trim().is_empty() {
            push(at("id"), "must be non-empty".into());
        } else if !question_ids.insert(q.id.as_str()) {
            push(at("id"), format!("duplicate question id `{}`", q.id));
        }
        if q.text.trim().is_empty() {
            push(at("text"), "must be non-empty".into());
        }
        if q.roles.is_empty() {
            push(at("roles"), "at least one role is required".into());
        }
        let mut seen = BTreeSet::new();
        for r in &q.roles {
            if !seen.insert(*r) {
                push(at("roles"), format!("role {r} listed twice"));
            }
        }
        match (&q.scope, q.attribute) {
            (QuestionScope::Process(p), ProcessAttribute::PA1_1) => {
                if !process_ids.contains(p) {
                    push(at("scope"), format!("references undeclared process `{p}`"));
                }
            }
            (QuestionScope::Generic, ProcessAttribute::PA1_1) => push(
                at("scope"),
                "PA1.1 questions must be scoped to a specific process".into(),
            ),
            (QuestionScope::Process(_), a) => push(
                at("scope"),
                format!("{a} questions must be Generic (level {} > 1)", a.level().value()),
            ),
            (QuestionScope::Generic, _) => {}
        }
        if let Some(k) = &q.knowledge_item {
            if !item_ids.contains(k.as_str()) {
                push(at("knowledge_item"), format!("references unknown knowledge item `{k}`"));
            }
        }
    }
    diags
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankStats {
    pub schema_version: u32,
    pub fingerprint: BankFingerprint,
    pub processes: usize,
    pub total_questions: usize,
    /// PA1.1 questions, each scoped to one process.
    pub process_specific_questions: usize,
    pub generic_questions: usize,
    pub process_specific_by_process: BTreeMap<ProcessId, usize>,
    pub by_attribute: BTreeMap<String, usize>,
    pub by_role: BTreeMap<String, usize>,
    pub knowledge_items: usize,
    pub questions_with_items: usize,
    pub questions_without_items: Vec<String>,
}

pub fn bank_stats(bank: &ContentBank) -> BankStats {
    let questions = bank.questions();
    let process_specific_by_process = bank
        .processes()
        .iter()
        .map(|p| {
            let n = questions
                .iter()
                .filter(|q| q.scope == QuestionScope::Process(p.id.clone()))
                .count();
            (p.id.clone(), n)
        })
        .collect();
    let by_attribute = ProcessAttribute::ALL
        .iter()
        .map(|a| {
            (
                a.id().to_string(),
                questions.iter().filter(|q| q.attribute == *a).count(),
            )
        })
        .collect();
    let by_role = Role::ALL
        .iter()
        .map(|r| (r.to_string(), questions.iter().filter(|q| q.asks(*r)).count()))
        .collect();
    let without: Vec<String> = questions
        .iter()
        .filter(|q| q.knowledge_item.is_none())
        .map(|q| q.id.clone())
        .collect();
    let generic = questions
        .iter()
        .filter(|q| q.scope == QuestionScope::Generic)
        .count();
    BankStats {
        schema_version: bank.schema_version(),
        fingerprint: bank.fingerprint().clone(),
        processes: bank.processes().len(),
        total_questions: questions.len(),
        process_specific_questions: questions.len() - generic,
        generic_questions: generic,
        process_specific_by_process,
        by_attribute,
        by_role,
        knowledge_items: bank.knowledge_items().len(),
        questions_with_items: questions.len() - without.len(),
        questions_without_items: without,
    }
}
