//! Straight-line reference computations, written independently of
//! `procap_core::measurement`. Only plain data types are shared.

#![allow(dead_code)]

use procap_core::bank::{ContentBank, QuestionScope};
use procap_core::model::{AnswerOption, ProcessId, Rating, RatingBand};

pub const ATTRS: [&str; 9] = [
    "PA1.1", "PA2.1", "PA2.2", "PA3.1", "PA3.2", "PA4.1", "PA4.2", "PA5.1", "PA5.2",
];

pub fn percent(a: AnswerOption) -> Option<f64> {
    match a {
        AnswerOption::N => Some(7.5),
        AnswerOption::P => Some(32.5),
        AnswerOption::L => Some(67.5),
        AnswerOption::F => Some(92.5),
        AnswerOption::Unable => None,
    }
}

pub fn band(p: f64) -> RatingBand {
    if p <= 15.0 {
        RatingBand::N
    } else if p <= 50.0 {
        RatingBand::P
    } else if p <= 85.0 {
        RatingBand::L
    } else {
        RatingBand::F
    }
}

pub fn level_of(attr: &str) -> u8 {
    attr.as_bytes()[2] - b'0'
}

/// Largest level whose own attributes are F/L and all lower ones F,
/// found by checking every candidate from the top down.
pub fn ladder(ratings: &[Rating; 9]) -> u8 {
    for candidate in (1..=5u8).rev() {
        let mut ok = true;
        for (i, attr) in ATTRS.iter().enumerate() {
            let l = level_of(attr);
            let r = ratings[i];
            if l == candidate && !(r == Rating::Rated(RatingBand::F) || r == Rating::Rated(RatingBand::L)) {
                ok = false;
            }
            if l < candidate && r != Rating::Rated(RatingBand::F) {
                ok = false;
            }
        }
        if ok {
            return candidate;
        }
    }
    0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub count: usize,
    pub unable: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub cv: Option<f64>,
    pub rating: Rating,
}

pub fn stats(answers: &[AnswerOption]) -> Stats {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut unable = 0usize;
    for a in answers {
        match percent(*a) {
            Some(p) => {
                sum += p;
                n += 1;
            }
            None => unable += 1,
        }
    }
    if n == 0 {
        return Stats { count: 0, unable, mean: None, sd: None, cv: None, rating: Rating::Unassessed };
    }
    let mean = sum / n as f64;
    let mut sq = 0.0;
    for a in answers {
        if let Some(p) = percent(*a) {
            sq += (p - mean) * (p - mean);
        }
    }
    let sd = (sq / n as f64).sqrt();
    let cv = if n >= 2 && mean > 0.0 { Some(sd / mean) } else { None };
    Stats { count: n, unable, mean: Some(mean), sd: Some(sd), cv, rating: Rating::Rated(band(mean)) }
}

#[derive(Debug, Clone)]
pub struct ProcessOracle {
    /// (question id, stats), in attribute then id order.
    pub questions: Vec<(String, usize, Stats)>,
    pub attributes: Vec<Stats>,
    pub level: u8,
}

/// Full process evaluation over `(question, answer)` pairs already
/// restricted to one process.
pub fn process(
    bank: &ContentBank,
    process: &ProcessId,
    target: u8,
    responses: &[(String, AnswerOption)],
) -> ProcessOracle {
    let mut qs: Vec<_> = bank
        .questions()
        .iter()
        .filter(|q| match &q.scope {
            QuestionScope::Generic => true,
            QuestionScope::Process(p) => p == process,
        })
        .filter(|q| level_of(q.attribute.id()) <= target)
        .collect();
    qs.sort_by(|a, b| {
        let ia = ATTRS.iter().position(|x| *x == a.attribute.id()).unwrap();
        let ib = ATTRS.iter().position(|x| *x == b.attribute.id()).unwrap();
        (ia, &a.id).cmp(&(ib, &b.id))
    });
    let mut per_attr: Vec<Vec<AnswerOption>> = vec![Vec::new(); 9];
    let mut questions = Vec::new();
    for q in qs {
        let idx = ATTRS.iter().position(|x| *x == q.attribute.id()).unwrap();
        let answers: Vec<AnswerOption> = responses
            .iter()
            .filter(|(id, _)| *id == q.id)
            .map(|(_, a)| *a)
            .collect();
        per_attr[idx].extend(answers.iter().copied());
        questions.push((q.id.clone(), idx, stats(&answers)));
    }
    let attributes: Vec<Stats> = per_attr.iter().map(|a| stats(a)).collect();
    let mut ratings = [Rating::Unassessed; 9];
    for (i, s) in attributes.iter().enumerate() {
        ratings[i] = s.rating;
    }
    ProcessOracle { questions, attributes, level: ladder(&ratings) }
}

pub fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        _ => false,
    }
}
