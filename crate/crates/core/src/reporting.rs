//! Assessment report: capability profile, attribute tables and
//! risk-triggered improvement entries.
//!
//! A question produces an entry exactly when its knowledge score falls in
//! band N or P. Entries are ordered riskiest first (ascending knowledge
//! score, then question id). Questions without a linked knowledge item
//! still produce an entry, flagged `guidance_missing`.

use std::fmt::Write as _;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::bank::{BankFingerprint, ContentBank};
use crate::measurement::{AttributeResult, MeasurementConfig, ProcessResult};
use crate::model::{CapabilityLevel, ProcessAttribute, ProcessId, RatingBand};
use crate::survey::{Assessment, AssessmentId, AssessmentState, SurveyError};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const SUMMARY_TOP_RISKS: usize = 5;
pub const MISSING_GUIDANCE_OBSERVATION: &str = "risk identified";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub question: String,
    pub process: ProcessId,
    pub attribute: ProcessAttribute,
    pub question_text: String,
    pub knowledge_score: f64,
    pub band: RatingBand,
    pub observation: String,
    pub recommendation: Option<String>,
    pub guidance_missing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub id: AssessmentId,
    pub org_profile: String,
    pub target_level: CapabilityLevel,
    pub created_at: DateTime<Utc>,
    pub opened_at: Option<DateTime<Utc>>,
    pub closed_at: Option<DateTime<Utc>>,
    pub bank_fingerprint: BankFingerprint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub process: ProcessId,
    pub name: String,
    pub capability_level: CapabilityLevel,
    pub attributes: Vec<AttributeResult>,
    pub questions_assessed: usize,
    pub questions_unassessed: usize,
    pub entries: Vec<ReportEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSummary {
    pub question: String,
    pub attribute: ProcessAttribute,
    pub knowledge_score: f64,
    pub band: RatingBand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSummary {
    pub process: ProcessId,
    pub name: String,
    pub capability_level: CapabilityLevel,
    pub risk_entries: usize,
    pub unassessed_attributes: Vec<ProcessAttribute>,
    pub low_reliability_attributes: Vec<ProcessAttribute>,
    pub top_risks: Vec<RiskSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub schema_version: u32,
    pub assessment: ReportMeta,
    pub method: MeasurementConfig,
    pub summary: Vec<ProcessSummary>,
    pub processes: Vec<ProcessReport>,
}

impl AssessmentReport {
    /// Equality ignoring assessment identity and timestamps.
    pub fn content_eq(&self, other: &Self) -> bool {
        self.schema_version == other.schema_version
            && self.assessment.org_profile == other.assessment.org_profile
            && self.assessment.target_level == other.assessment.target_level
            && self.assessment.bank_fingerprint == other.assessment.bank_fingerprint
            && self.method == other.method
            && self.summary == other.summary
            && self.processes == other.processes
    }

    pub fn entry_count(&self) -> usize {
        self.processes.iter().map(|p| p.entries.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("cannot build a report for an assessment in state {0}")]
    InvalidState(AssessmentState),
    #[error("results missing for process `{0}`")]
    IncompleteResults(ProcessId),
    #[error("content bank does not match the one used for this assessment ({0})")]
    BankMismatch(String),
    #[error("unsupported report format `{0}` (expected structured, markdown or html)")]
    UnsupportedFormat(String),
    #[error("malformed structured report: {0}")]
    Parse(String),
}

/// Risk entries for one process's results.
pub fn select_knowledge_items(
    result: &ProcessResult,
    bank: &ContentBank,
) -> Result<Vec<ReportEntry>, ReportError> {
    let mut entries = Vec::new();
    for qr in &result.questions {
        let question = bank
            .question(&qr.question)
            .ok_or_else(|| ReportError::BankMismatch(format!("unknown question `{}`", qr.question)))?;
        let (Some(band), Some(score)) = (qr.rating.band(), qr.knowledge_score) else {
            continue;
        };
        if !band.is_risk() {
            continue;
        }
        let item = match &question.knowledge_item {
            Some(id) => Some(bank.knowledge_item(id).ok_or_else(|| {
                ReportError::BankMismatch(format!("unknown knowledge item `{id}`"))
            })?),
            None => None,
        };
        entries.push(ReportEntry {
            question: qr.question.clone(),
            process: qr.process.clone(),
            attribute: qr.attribute,
            question_text: question.text.clone(),
            knowledge_score: score,
            band,
            observation: item.map_or_else(
                || MISSING_GUIDANCE_OBSERVATION.to_string(),
                |k| k.observation.clone(),
            ),
            recommendation: item.map(|k| k.recommendation.clone()),
            guidance_missing: item.is_none(),
        });
    }
    entries.sort_by(|a, b| {
        a.knowledge_score
            .total_cmp(&b.knowledge_score)
            .then_with(|| a.question.cmp(&b.question))
    });
    Ok(entries)
}

/// Assembles the report and moves the assessment to Reported on first
/// build. Rebuilding an already Reported assessment yields the same content.
pub fn build_report(
    assessment: &mut Assessment,
    results: &[ProcessResult],
    bank: &ContentBank,
    config: &MeasurementConfig,
    now: DateTime<Utc>,
) -> Result<AssessmentReport, ReportError> {
    if !assessment.state().is_frozen() {
        return Err(ReportError::InvalidState(assessment.state()));
    }
    if assessment.bank_fingerprint() != bank.fingerprint() {
        return Err(ReportError::BankMismatch("fingerprint differs".into()));
    }
    let mut processes = Vec::with_capacity(assessment.processes().len());
    for pid in assessment.processes() {
        let result = results
            .iter()
            .find(|r| &r.process == pid)
            .ok_or_else(|| ReportError::IncompleteResults(pid.clone()))?;
        let name = bank
            .process(pid)
            .map(|p| p.name.clone())
            .ok_or_else(|| ReportError::BankMismatch(format!("unknown process `{pid}`")))?;
        let entries = select_knowledge_items(result, bank)?;
        let assessed = result.questions.iter().filter(|q| q.count > 0).count();
        processes.push(ProcessReport {
            process: pid.clone(),
            name,
            capability_level: result.capability_level,
            attributes: result.attributes.clone(),
            questions_assessed: assessed,
            questions_unassessed: result.questions.len() - assessed,
            entries,
        });
    }
    let summary = processes.iter().map(summarize).collect();
    let report = AssessmentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        assessment: ReportMeta {
            id: assessment.id().clone(),
            org_profile: assessment.org_profile().to_string(),
            target_level: assessment.target_level(),
            created_at: assessment.created_at(),
            opened_at: assessment.opened_at(),
            closed_at: assessment.closed_at(),
            bank_fingerprint: assessment.bank_fingerprint().clone(),
        },
        method: *config,
        summary,
        processes,
    };
    assessment.mark_reported(now).map_err(|e| match e {
        SurveyError::InvalidState { state, .. } => ReportError::InvalidState(state),
        other => ReportError::BankMismatch(other.to_string()),
    })?;
    Ok(report)
}

fn summarize(p: &ProcessReport) -> ProcessSummary {
    ProcessSummary {
        process: p.process.clone(),
        name: p.name.clone(),
        capability_level: p.capability_level,
        risk_entries: p.entries.len(),
        unassessed_attributes: p
            .attributes
            .iter()
            .filter(|a| a.rating.band().is_none())
            .map(|a| a.attribute)
            .collect(),
        low_reliability_attributes: p
            .attributes
            .iter()
            .filter(|a| a.low_reliability)
            .map(|a| a.attribute)
            .collect(),
        top_risks: p
            .entries
            .iter()
            .take(SUMMARY_TOP_RISKS)
            .map(|e| RiskSummary {
                question: e.question.clone(),
                attribute: e.attribute,
                knowledge_score: e.knowledge_score,
                band: e.band,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Structured,
    Markdown,
    Html,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" | "json" => Ok(Self::Structured),
            "markdown" | "md" => Ok(Self::Markdown),
            "html" => Ok(Self::Html),
            other => Err(ReportError::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn render_report(report: &AssessmentReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Markdown => render_markdown(report).into_bytes(),
        ReportFormat::Html => render_html(report).into_bytes(),
    }
}

pub fn parse_report(bytes: &[u8]) -> Result<AssessmentReport, ReportError> {
    let report: AssessmentReport =
        serde_json::from_slice(bytes).map_err(|e| ReportError::Parse(e.to_string()))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(ReportError::Parse(format!(
            "unsupported schema_version {}",
            report.schema_version
        )));
    }
    Ok(report)
}

fn opt4(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

fn date(d: Option<DateTime<Utc>>) -> String {
    d.map_or_else(|| "-".to_string(), |d| d.to_rfc3339())
}

fn attr_list(v: &[ProcessAttribute]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.iter().map(|a| a.id()).collect::<Vec<_>>().join(", ")
    }
}

fn method_lines(m: &MeasurementConfig) -> Vec<String> {
    let s = &m.scale;
    vec![
        format!(
            "Answer percentages: N = {}, P = {}, L = {}, F = {}; Unable answers are excluded.",
            s.n_percent, s.p_percent, s.l_percent, s.f_percent
        ),
        format!(
            "Rating bands: N = [0, {}], P = ({}, {}], L = ({}, {}], F = ({}, 100].",
            s.n_max, s.n_max, s.p_max, s.p_max, s.l_max, s.l_max
        ),
        "Attribute scores are the mean of all pooled responses to the attribute's questions.".into(),
        format!(
            "Reliability: coefficient of variation (population); flagged above {}.",
            m.cv_threshold
        ),
        "A level is achieved when its attributes are rated F or L and all lower attributes are rated F.".into(),
        "Improvement entries are listed for questions whose knowledge score is rated N or P.".into(),
    ]
}

fn render_markdown(r: &AssessmentReport) -> String {
    let mut o = String::new();
    let m = &r.assessment;
    let _ = writeln!(o, "# Process Capability Assessment Report\n");
    let _ = writeln!(o, "- Assessment: `{}`", m.id);
    let _ = writeln!(o, "- Organisation: {}", m.org_profile);
    let _ = writeln!(o, "- Target level: {}", m.target_level);
    let _ = writeln!(
        o,
        "- Created: {} | Opened: {} | Closed: {}\n",
        m.created_at.to_rfc3339(),
        date(m.opened_at),
        date(m.closed_at)
    );

    let _ = writeln!(o, "## Summary\n");
    for s in &r.summary {
        let _ = writeln!(
            o,
            "- **{} ({})**: {}; {} risk entries; unassessed: {}; low reliability: {}",
            s.name,
            s.process,
            s.capability_level,
            s.risk_entries,
            attr_list(&s.unassessed_attributes),
            attr_list(&s.low_reliability_attributes)
        );
        for t in &s.top_risks {
            let _ = writeln!(
                o,
                "  - `{}` ({}): {:.4} ({})",
                t.question, t.attribute, t.knowledge_score, t.band
            );
        }
    }

    let _ = writeln!(o, "\n## Capability Profile\n");
    let _ = writeln!(o, "| Process | Name | Capability level |");
    let _ = writeln!(o, "|---|---|---|");
    for p in &r.processes {
        let _ = writeln!(o, "| {} | {} | {} |", p.process, p.name, p.capability_level);
    }

    let _ = writeln!(o, "\n## Per-Attribute Tables");
    for p in &r.processes {
        let _ = writeln!(o, "\n### {} ({})\n", p.name, p.process);
        let _ = writeln!(
            o,
            "| Attribute | Mean % | Rating | CV | Responses | Unable | Low reliability |"
        );
        let _ = writeln!(o, "|---|---|---|---|---|---|---|");
        for a in &p.attributes {
            let _ = writeln!(
                o,
                "| {} {} | {} | {} | {} | {} | {} | {} |",
                a.attribute,
                a.attribute.title(),
                opt4(a.mean_percent),
                a.rating,
                opt4(a.cv),
                a.count,
                a.unable_count,
                if a.low_reliability { "yes" } else { "no" }
            );
        }
    }

    if r.entry_count() > 0 {
        let _ = writeln!(o, "\n## Improvement Recommendations");
        for p in r.processes.iter().filter(|p| !p.entries.is_empty()) {
            let _ = writeln!(o, "\n### {} ({})\n", p.name, p.process);
            for (i, e) in p.entries.iter().enumerate() {
                let _ = writeln!(
                    o,
                    "{}. `{}` ({}) knowledge score {:.4} ({}): {}",
                    i + 1,
                    e.question,
                    e.attribute,
                    e.knowledge_score,
                    e.band,
                    e.question_text
                );
                let _ = writeln!(o, "   - Observation: {}", e.observation);
                match &e.recommendation {
                    Some(rec) => {
                        let _ = writeln!(o, "   - Recommendation: {rec}");
                    }
                    None => {
                        let _ = writeln!(o, "   - Recommendation: no guidance available");
                    }
                }
            }
        }
    }

    let _ = writeln!(o, "\n## Method Notes\n");
    for line in method_lines(&r.method) {
        let _ = writeln!(o, "- {line}");
    }
    o
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn render_html(r: &AssessmentReport) -> String {
    let mut o = String::new();
    let m = &r.assessment;
    o.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    o.push_str("<title>Process Capability Assessment Report</title>\n</head>\n<body>\n");
    o.push_str("<h1>Process Capability Assessment Report</h1>\n<ul>\n");
    let _ = writeln!(o, "<li>Assessment: <code>{}</code></li>", esc(&m.id.0));
    let _ = writeln!(o, "<li>Organisation: {}</li>", esc(&m.org_profile));
    let _ = writeln!(o, "<li>Target level: {}</li>", m.target_level);
    let _ = writeln!(
        o,
        "<li>Created: {} | Opened: {} | Closed: {}</li>\n</ul>",
        m.created_at.to_rfc3339(),
        date(m.opened_at),
        date(m.closed_at)
    );

    o.push_str("<section id=\"summary\">\n<h2>Summary</h2>\n<ul>\n");
    for s in &r.summary {
        let _ = write!(
            o,
            "<li><strong>{} ({})</strong>: {}; {} risk entries; unassessed: {}; low reliability: {}",
            esc(&s.name),
            esc(s.process.as_str()),
            s.capability_level,
            s.risk_entries,
            attr_list(&s.unassessed_attributes),
            attr_list(&s.low_reliability_attributes)
        );
        if !s.top_risks.is_empty() {
            o.push_str("\n<ol>\n");
            for t in &s.top_risks {
                let _ = writeln!(
                    o,
                    "<li><code>{}</code> ({}): {:.4} ({})</li>",
                    esc(&t.question),
                    t.attribute,
                    t.knowledge_score,
                    t.band
                );
            }
            o.push_str("</ol>\n");
        }
        o.push_str("</li>\n");
    }
    o.push_str("</ul>\n</section>\n");

    o.push_str("<section id=\"capability-profile\">\n<h2>Capability Profile</h2>\n<table>\n");
    o.push_str("<tr><th>Process</th><th>Name</th><th>Capability level</th></tr>\n");
    for p in &r.processes {
        let _ = writeln!(
            o,
            "<tr><td>{}</td><td>{}</td><td>{}</td></tr>",
            esc(p.process.as_str()),
            esc(&p.name),
            p.capability_level
        );
    }
    o.push_str("</table>\n</section>\n");

    o.push_str("<section id=\"attributes\">\n<h2>Per-Attribute Tables</h2>\n");
    for p in &r.processes {
        let _ = writeln!(o, "<h3>{} ({})</h3>", esc(&p.name), esc(p.process.as_str()));
        o.push_str("<table>\n<tr><th>Attribute</th><th>Mean %</th><th>Rating</th><th>CV</th><th>Responses</th><th>Unable</th><th>Low reliability</th></tr>\n");
        for a in &p.attributes {
            let _ = writeln!(
                o,
                "<tr><td>{} {}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                a.attribute,
                a.attribute.title(),
                opt4(a.mean_percent),
                a.rating,
                opt4(a.cv),
                a.count,
                a.unable_count,
                if a.low_reliability { "yes" } else { "no" }
            );
        }
        o.push_str("</table>\n");
    }
    o.push_str("</section>\n");

    if r.entry_count() > 0 {
        o.push_str("<section id=\"recommendations\">\n<h2>Improvement Recommendations</h2>\n");
        for p in r.processes.iter().filter(|p| !p.entries.is_empty()) {
            let _ = writeln!(o, "<h3>{} ({})</h3>\n<ol>", esc(&p.name), esc(p.process.as_str()));
            for e in &p.entries {
                let _ = writeln!(
                    o,
                    "<li><code>{}</code> ({}) knowledge score {:.4} ({}): {}<ul>",
                    esc(&e.question),
                    e.attribute,
                    e.knowledge_score,
                    e.band,
                    esc(&e.question_text)
                );
                let _ = writeln!(o, "<li>Observation: {}</li>", esc(&e.observation));
                let rec = e
                    .recommendation
                    .as_deref()
                    .map_or_else(|| "no guidance available".to_string(), esc);
                let _ = writeln!(o, "<li>Recommendation: {rec}</li>\n</ul></li>");
            }
            o.push_str("</ol>\n");
        }
        o.push_str("</section>\n");
    }

    o.push_str("<section id=\"method\">\n<h2>Method Notes</h2>\n<ul>\n");
    for line in method_lines(&r.method) {
        let _ = writeln!(o, "<li>{}</li>", esc(&line));
    }
    o.push_str("</ul>\n</section>\n</body>\n</html>\n");
    o
}
