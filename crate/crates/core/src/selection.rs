//! Ranking candidate processes for assessment.
//!
//! Each process gets a normalised business-driver importance and a
//! normalised service gap, convex-combined into one score:
//!
//! * `importance_norm = (mean importance - 1) / 4` over 1..=5 ratings
//! * `gap_norm = max(0, mean(expectation - perception)) / 6` over 1..=7 ratings
//! * `combined = w_importance * importance_norm + w_gap * gap_norm`
//!
//! All ratings for a process are pooled regardless of which stakeholder
//! gave them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::ProcessId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Perspective {
    Financial,
    Customer,
    Internal,
    Learning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverRating {
    pub process: ProcessId,
    pub perspective: Perspective,
    pub importance: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRating {
    pub process: ProcessId,
    pub expectation: u8,
    pub perception: u8,
}

/// Ratings file accepted by `procap select`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionInput {
    pub drivers: Vec<DriverRating>,
    pub gaps: Vec<GapRating>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub importance: f64,
    pub gap: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            importance: 0.5,
            gap: 0.5,
        }
    }
}

impl Weights {
    pub fn new(importance: f64, gap: f64) -> Result<Self, SelectionError> {
        let w = Self { importance, gap };
        w.check()?;
        Ok(w)
    }

    fn check(&self) -> Result<(), SelectionError> {
        let ok = self.importance.is_finite()
            && self.gap.is_finite()
            && self.importance >= 0.0
            && self.gap >= 0.0
            && (self.importance + self.gap - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(SelectionError::InvalidWeights(self.importance, self.gap))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessScore {
    pub process: ProcessId,
    pub importance_norm: f64,
    pub gap_norm: f64,
    pub combined: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("no driver or gap ratings given")]
    EmptyInput,
    #[error("processes rated for drivers and gaps differ (only drivers: {only_drivers:?}; only gaps: {only_gaps:?})")]
    MismatchedProcessSets {
        only_drivers: Vec<ProcessId>,
        only_gaps: Vec<ProcessId>,
    },
    #[error("weights ({0}, {1}) must be non-negative and sum to 1")]
    InvalidWeights(f64, f64),
    #[error("{0}")]
    OutOfRange(String),
}

pub fn score_processes(
    drivers: &[DriverRating],
    gaps: &[GapRating],
    weights: Weights,
) -> Result<Vec<ProcessScore>, SelectionError> {
    weights.check()?;
    if drivers.is_empty() || gaps.is_empty() {
        return Err(SelectionError::EmptyInput);
    }
    for d in drivers {
        if !(1..=5).contains(&d.importance) {
            return Err(SelectionError::OutOfRange(format!(
                "importance {} for {} outside 1..=5",
                d.importance, d.process
            )));
        }
    }
    for g in gaps {
        if !(1..=7).contains(&g.expectation) || !(1..=7).contains(&g.perception) {
            return Err(SelectionError::OutOfRange(format!(
                "gap rating ({}, {}) for {} outside 1..=7",
                g.expectation, g.perception, g.process
            )));
        }
    }

    // Integer sums keep the means independent of input order.
    let mut importance: BTreeMap<&ProcessId, (i64, i64)> = BTreeMap::new();
    for d in drivers {
        let e = importance.entry(&d.process).or_default();
        e.0 += i64::from(d.importance);
        e.1 += 1;
    }
    let mut gap: BTreeMap<&ProcessId, (i64, i64)> = BTreeMap::new();
    for g in gaps {
        let e = gap.entry(&g.process).or_default();
        e.0 += i64::from(g.expectation) - i64::from(g.perception);
        e.1 += 1;
    }

    let only_drivers: Vec<ProcessId> = importance
        .keys()
        .filter(|p| !gap.contains_key(*p))
        .map(|p| (*p).clone())
        .collect();
    let only_gaps: Vec<ProcessId> = gap
        .keys()
        .filter(|p| !importance.contains_key(*p))
        .map(|p| (*p).clone())
        .collect();
    if !only_drivers.is_empty() || !only_gaps.is_empty() {
        return Err(SelectionError::MismatchedProcessSets {
            only_drivers,
            only_gaps,
        });
    }

    let mut scores: Vec<ProcessScore> = importance
        .iter()
        .map(|(process, &(isum, icount))| {
            let (gsum, gcount) = gap[process];
            let importance_norm = (isum as f64 / icount as f64 - 1.0) / 4.0;
            let gap_norm = (gsum as f64 / gcount as f64).max(0.0) / 6.0;
            let combined =
                (weights.importance * importance_norm + weights.gap * gap_norm).clamp(0.0, 1.0);
            ProcessScore {
                process: (*process).clone(),
                importance_norm,
                gap_norm,
                combined,
                rank: 0,
            }
        })
        .collect();

    scores.sort_by(|a, b| {
        b.combined
            .partial_cmp(&a.combined)
            .unwrap_or(Ordering::Equal)
            .then(b.gap_norm.partial_cmp(&a.gap_norm).unwrap_or(Ordering::Equal))
            .then_with(|| a.process.cmp(&b.process))
    });
    for (i, s) in scores.iter_mut().enumerate() {
        s.rank = i + 1;
    }
    Ok(scores)
}
