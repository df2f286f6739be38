use std::io::Write;
use std::path::Path;

use anyhow::Context;
use procap_core::bank::BankStats;
use procap_core::selection::ProcessScore;
use procap_core::survey::ProgressSnapshot;
use procap_core::MeasurementResults;
use serde::Serialize;

pub fn json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::io::stdout().write_all(s.as_bytes())?;
    Ok(())
}

/// Writes to `path`, or stdout when none is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn opt4(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

pub fn stats_text(s: &BankStats) -> String {
    let mut o = String::new();
    o += &format!("schema version      {}\n", s.schema_version);
    o += &format!("fingerprint         {}\n", s.fingerprint);
    o += &format!("processes           {}\n", s.processes);
    o += &format!("questions           {}\n", s.total_questions);
    o += &format!("  process-specific  {}\n", s.process_specific_questions);
    for (p, n) in &s.process_specific_by_process {
        o += &format!("    {p:<15} {n}\n");
    }
    o += &format!("  generic           {}\n", s.generic_questions);
    o += "by attribute\n";
    for (a, n) in &s.by_attribute {
        o += &format!("  {a:<17} {n}\n");
    }
    o += "by role\n";
    for (r, n) in &s.by_role {
        o += &format!("  {r:<20} {n}\n");
    }
    o += &format!("knowledge items     {}\n", s.knowledge_items);
    o += &format!("questions with item {}\n", s.questions_with_items);
    o += &format!("without item        {}\n", s.questions_without_items.len());
    o
}

pub fn scores_text(scores: &[ProcessScore]) -> String {
    let mut o = format!("{:<5} {:<10} {:>10} {:>8} {:>9}\n", "rank", "process", "importance", "gap", "combined");
    for s in scores {
        o += &format!(
            "{:<5} {:<10} {:>10.4} {:>8.4} {:>9.4}\n",
            s.rank, s.process, s.importance_norm, s.gap_norm, s.combined
        );
    }
    o
}

pub fn progress_text(p: &ProgressSnapshot) -> String {
    let pct = |c: f64| format!("{:.1}%", c * 100.0);
    let mut o = format!(
        "assessment {} ({}): {}/{} answered, {}\n",
        p.assessment,
        p.state,
        p.overall.answered,
        p.overall.allocated,
        pct(p.overall.completion)
    );
    for pr in &p.processes {
        o += &format!("  process {:<8} {}/{} {}\n", pr.process, pr.counts.answered, pr.counts.allocated, pct(pr.counts.completion));
    }
    for pp in &p.participants {
        o += &format!(
            "  {} {:<24} {}/{} {}{}\n",
            pp.participant,
            pp.display_name,
            pp.counts.answered,
            pp.counts.allocated,
            pct(pp.counts.completion),
            if pp.zero_allocation { " (no questions allocated)" } else { "" }
        );
    }
    o
}

pub fn results_text(r: &MeasurementResults) -> String {
    let mut o = format!("assessment {} (target {})\n", r.assessment, r.target_level);
    for p in &r.processes {
        o += &format!("\n{}: {}\n", p.process, p.capability_level);
        o += &format!("  {:<6} {:>9} {:<10} {:>7} {:>5} {:>6}\n", "attr", "mean %", "rating", "cv", "n", "unable");
        for a in &p.attributes {
            o += &format!(
                "  {:<6} {:>9} {:<10} {:>7} {:>5} {:>6}{}\n",
                a.attribute.id(),
                opt4(a.mean_percent),
                a.rating.to_string(),
                opt4(a.cv),
                a.count,
                a.unable_count,
                if a.low_reliability { "  low reliability" } else { "" }
            );
        }
    }
    o
}
