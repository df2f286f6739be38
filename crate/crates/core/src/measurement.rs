//! Turning frozen responses into knowledge scores, attribute ratings and
//! capability levels.
//!
//! Each answer maps to a percentage (by default the midpoint of its band).
//! A question's knowledge score is the mean over its scorable responses; an
//! attribute's score is the mean over all scorable responses to all of its
//! questions, pooled, so every response carries equal weight. `Unable`
//! answers are excluded everywhere. The attribute's spread is reported as
//! the coefficient of variation (population standard deviation / mean).
//!
//! A process reaches level `L` when every attribute of level `L` is rated
//! F or L and every attribute below `L` is rated F.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bank::{ContentBank, Question};
use crate::model::{
    AnswerOption, CapabilityLevel, ProcessAttribute, ProcessId, Rating, RatingBand,
};
use crate::survey::{Assessment, AssessmentId, AssessmentState, Response};

/// Answer percentages and band upper bounds. Bands are
/// N = [0, n_max], P = (n_max, p_max], L = (p_max, l_max], F = (l_max, 100].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleMapping {
    pub n_percent: f64,
    pub p_percent: f64,
    pub l_percent: f64,
    pub f_percent: f64,
    pub n_max: f64,
    pub p_max: f64,
    pub l_max: f64,
}

impl Default for ScaleMapping {
    fn default() -> Self {
        Self {
            n_percent: 7.5,
            p_percent: 32.5,
            l_percent: 67.5,
            f_percent: 92.5,
            n_max: 15.0,
            p_max: 50.0,
            l_max: 85.0,
        }
    }
}

impl ScaleMapping {
    pub fn validate(&self) -> Result<(), MeasurementError> {
        let answers = [self.n_percent, self.p_percent, self.l_percent, self.f_percent];
        let bounds = [0.0, self.n_max, self.p_max, self.l_max, 100.0];
        let in_range = answers.iter().chain(&bounds).all(|v| (0.0..=100.0).contains(v));
        let increasing = answers.windows(2).all(|w| w[0] < w[1]);
        let partitions = bounds.windows(2).all(|w| w[0] < w[1]);
        if in_range && increasing && partitions {
            Ok(())
        } else {
            Err(MeasurementError::InvalidScale)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConfig {
    pub scale: ScaleMapping,
    /// Attributes whose cv exceeds this are flagged low-reliability.
    pub cv_threshold: f64,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            scale: ScaleMapping::default(),
            cv_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasurementError {
    #[error("percent {0} outside [0, 100]")]
    OutOfRange(f64),
    #[error("scale mapping must be strictly increasing within [0, 100]")]
    InvalidScale,
    #[error("responses refer to more than one question/process (expected `{expected}`, found `{found}`)")]
    MixedQuestionIds { expected: String, found: String },
    #[error("responses refer to more than one attribute/process (expected {expected}, found {found})")]
    MixedAttributes { expected: String, found: String },
    #[error("rating for {0} is missing")]
    MissingAttribute(ProcessAttribute),
    #[error("cannot measure an assessment in state {0}")]
    InvalidState(AssessmentState),
    #[error("process `{0}` is not part of this assessment")]
    UnknownProcess(ProcessId),
    #[error("question `{0}` is unknown to the content bank")]
    BankMismatch(String),
}

/// Percentage for an answer, or `None` for `Unable` (excluded).
pub fn answer_to_percent(answer: AnswerOption, scale: &ScaleMapping) -> Option<f64> {
    match answer {
        AnswerOption::N => Some(scale.n_percent),
        AnswerOption::P => Some(scale.p_percent),
        AnswerOption::L => Some(scale.l_percent),
        AnswerOption::F => Some(scale.f_percent),
        AnswerOption::Unable => None,
    }
}

/// Band containing `percent`; boundary values belong to the lower band.
pub fn band_of(percent: f64, scale: &ScaleMapping) -> Result<RatingBand, MeasurementError> {
    if !(0.0..=100.0).contains(&percent) {
        return Err(MeasurementError::OutOfRange(percent));
    }
    Ok(if percent <= scale.n_max {
        RatingBand::N
    } else if percent <= scale.p_max {
        RatingBand::P
    } else if percent <= scale.l_max {
        RatingBand::L
    } else {
        RatingBand::F
    })
}

/// Mean, population standard deviation and count of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Spread {
    count: usize,
    mean: f64,
    std_dev: f64,
}

fn spread(values: &[f64]) -> Option<Spread> {
    if values.is_empty() {
        return None;
    }
    // Summing in sorted order keeps results bit-identical under any
    // permutation of the responses.
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some(Spread {
        count: values.len(),
        mean,
        std_dev: var.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question: String,
    pub process: ProcessId,
    pub attribute: ProcessAttribute,
    /// Scorable responses (Unable excluded).
    pub count: usize,
    pub unable_count: usize,
    pub knowledge_score: Option<f64>,
    pub rating: Rating,
}

/// Knowledge score for one question on one process.
pub fn question_result(
    question: &Question,
    process: &ProcessId,
    responses: &[&Response],
    scale: &ScaleMapping,
) -> Result<QuestionResult, MeasurementError> {
    let mut percents = Vec::with_capacity(responses.len());
    let mut unable_count = 0;
    for r in responses {
        if r.question != question.id || &r.process != process {
            return Err(MeasurementError::MixedQuestionIds {
                expected: format!("{}@{}", question.id, process),
                found: format!("{}@{}", r.question, r.process),
            });
        }
        match answer_to_percent(r.answer, scale) {
            Some(p) => percents.push(p),
            None => unable_count += 1,
        }
    }
    let stats = spread(&percents);
    let knowledge_score = stats.map(|s| s.mean);
    let rating = match knowledge_score {
        Some(m) => Rating::Rated(band_of(m, scale)?),
        None => Rating::Unassessed,
    };
    Ok(QuestionResult {
        question: question.id.clone(),
        process: process.clone(),
        attribute: question.attribute,
        count: percents.len(),
        unable_count,
        knowledge_score,
        rating,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeResult {
    pub attribute: ProcessAttribute,
    pub process: ProcessId,
    /// Scorable responses pooled over the attribute's questions.
    pub count: usize,
    pub unable_count: usize,
    pub mean_percent: Option<f64>,
    pub rating: Rating,
    pub std_dev: Option<f64>,
    /// Undefined when fewer than two scorable responses or mean is 0.
    pub cv: Option<f64>,
    pub low_reliability: bool,
}

/// Pooled result for one attribute on one process. Every response must
/// reference a question of `attribute` and be for `process`.
pub fn attribute_result(
    bank: &ContentBank,
    attribute: ProcessAttribute,
    process: &ProcessId,
    responses: &[&Response],
    config: &MeasurementConfig,
) -> Result<AttributeResult, MeasurementError> {
    let mut percents = Vec::with_capacity(responses.len());
    let mut unable_count = 0;
    for r in responses {
        let q = bank
            .question(&r.question)
            .ok_or_else(|| MeasurementError::BankMismatch(r.question.clone()))?;
        if q.attribute != attribute || &r.process != process {
            return Err(MeasurementError::MixedAttributes {
                expected: format!("{attribute}@{process}"),
                found: format!("{}@{}", q.attribute, r.process),
            });
        }
        match answer_to_percent(r.answer, &config.scale) {
            Some(p) => percents.push(p),
            None => unable_count += 1,
        }
    }
    pooled_attribute(attribute, process, &percents, unable_count, config)
}

fn pooled_attribute(
    attribute: ProcessAttribute,
    process: &ProcessId,
    percents: &[f64],
    unable_count: usize,
    config: &MeasurementConfig,
) -> Result<AttributeResult, MeasurementError> {
    let stats = spread(percents);
    let rating = match stats {
        Some(s) => Rating::Rated(band_of(s.mean, &config.scale)?),
        None => Rating::Unassessed,
    };
    let cv = stats
        .filter(|s| s.count >= 2 && s.mean > 0.0)
        .map(|s| s.std_dev / s.mean);
    Ok(AttributeResult {
        attribute,
        process: process.clone(),
        count: percents.len(),
        unable_count,
        mean_percent: stats.map(|s| s.mean),
        rating,
        std_dev: stats.map(|s| s.std_dev),
        cv,
        low_reliability: cv.is_some_and(|cv| cv > config.cv_threshold),
    })
}

/// Capability level from nine attribute ratings in canonical order.
pub fn capability_from_ratings(ratings: &[Rating; 9]) -> CapabilityLevel {
    let rating = |a: ProcessAttribute| ratings[a.index()];
    let mut achieved = CapabilityLevel::CL0;
    for level in 1..=5u8 {
        let level = CapabilityLevel::new(level).expect("level in range");
        let at_level = ProcessAttribute::ALL.iter().filter(|a| a.level() == level);
        let below = ProcessAttribute::ALL.iter().filter(|a| a.level() < level);
        let target_met = at_level
            .clone()
            .all(|a| rating(*a).is(RatingBand::F) || rating(*a).is(RatingBand::L));
        let lower_full = below.clone().all(|a| rating(*a).is(RatingBand::F));
        if target_met && lower_full {
            achieved = level;
        } else {
            break;
        }
    }
    achieved
}

pub fn determine_capability_level(
    ratings: &BTreeMap<ProcessAttribute, Rating>,
) -> Result<CapabilityLevel, MeasurementError> {
    let mut arr = [Rating::Unassessed; 9];
    for a in ProcessAttribute::ALL {
        arr[a.index()] = *ratings
            .get(&a)
            .ok_or(MeasurementError::MissingAttribute(a))?;
    }
    Ok(capability_from_ratings(&arr))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessResult {
    pub process: ProcessId,
    pub capability_level: CapabilityLevel,
    /// All nine attributes in canonical order.
    pub attributes: Vec<AttributeResult>,
    /// Every question applicable to the process up to the target level,
    /// ordered by attribute then question id.
    pub questions: Vec<QuestionResult>,
}

impl ProcessResult {
    pub fn attribute(&self, a: ProcessAttribute) -> &AttributeResult {
        &self.attributes[a.index()]
    }

    pub fn question(&self, id: &str) -> Option<&QuestionResult> {
        self.questions.iter().find(|q| q.question == id)
    }
}

pub fn assess_process(
    assessment: &Assessment,
    bank: &ContentBank,
    process: &ProcessId,
    config: &MeasurementConfig,
) -> Result<ProcessResult, MeasurementError> {
    if !assessment.state().is_frozen() {
        return Err(MeasurementError::InvalidState(assessment.state()));
    }
    if !assessment.processes().contains(process) {
        return Err(MeasurementError::UnknownProcess(process.clone()));
    }
    config.scale.validate()?;

    let mut by_question: HashMap<&str, Vec<&Response>> = HashMap::new();
    for r in assessment.responses().filter(|r| &r.process == process) {
        if bank.question(&r.question).is_none() {
            return Err(MeasurementError::BankMismatch(r.question.clone()));
        }
        by_question.entry(r.question.as_str()).or_default().push(r);
    }

    let questions = bank
        .applicable_questions(process, assessment.target_level())
        .map_err(|_| MeasurementError::UnknownProcess(process.clone()))?;
    let mut question_results = Vec::with_capacity(questions.len());
    let mut pooled: [Vec<f64>; 9] = Default::default();
    let mut unable = [0usize; 9];
    for q in questions {
        let responses = by_question.remove(q.id.as_str()).unwrap_or_default();
        for r in &responses {
            match answer_to_percent(r.answer, &config.scale) {
                Some(p) => pooled[q.attribute.index()].push(p),
                None => unable[q.attribute.index()] += 1,
            }
        }
        question_results.push(question_result(q, process, &responses, &config.scale)?);
    }
    if let Some(stray) = by_question.keys().next() {
        return Err(MeasurementError::BankMismatch((*stray).to_string()));
    }

    let attributes = ProcessAttribute::ALL
        .iter()
        .map(|a| pooled_attribute(*a, process, &pooled[a.index()], unable[a.index()], config))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ratings = [Rating::Unassessed; 9];
    for r in &attributes {
        ratings[r.attribute.index()] = r.rating;
    }
    Ok(ProcessResult {
        process: process.clone(),
        capability_level: capability_from_ratings(&ratings),
        attributes,
        questions: question_results,
    })
}

/// Results for every process of an assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementResults {
    pub assessment: AssessmentId,
    pub target_level: CapabilityLevel,
    pub config: MeasurementConfig,
    pub processes: Vec<ProcessResult>,
}

pub fn measure(
    assessment: &Assessment,
    bank: &ContentBank,
    config: &MeasurementConfig,
) -> Result<MeasurementResults, MeasurementError> {
    let processes = assessment
        .processes()
        .iter()
        .map(|p| assess_process(assessment, bank, p, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MeasurementResults {
        assessment: assessment.id().clone(),
        target_level: assessment.target_level(),
        config: *config,
        processes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AnswerOption::*;
    use chrono::Utc;

    fn resp(q: &str, answer: AnswerOption) -> Response {
        Response {
            participant: "P0001".into(),
            question: q.to_string(),
            process: "PRB".into(),
            answer,
            submitted_at: Utc::now(),
        }
    }

    fn question(id: &str, attribute: ProcessAttribute) -> Question {
        Question {
            id: id.into(),
            attribute,
            scope: crate::bank::QuestionScope::Generic,
            text: "q".into(),
            roles: vec![crate::model::Role::ProcessManager],
            knowledge_item: None,
        }
    }

    fn ratings(bands: [&str; 9]) -> BTreeMap<ProcessAttribute, Rating> {
        ProcessAttribute::ALL
            .into_iter()
            .zip(bands)
            .map(|(a, b)| (a, serde_json::from_value(serde_json::json!(b)).unwrap()))
            .collect()
    }

    #[test]
    fn answer_percents() {
        let s = ScaleMapping::default();
        assert_eq!(answer_to_percent(F, &s), Some(92.5));
        assert_eq!(answer_to_percent(N, &s), Some(7.5));
        assert_eq!(answer_to_percent(Unable, &s), None);
    }

    #[test]
    fn band_boundaries() {
        let s = ScaleMapping::default();
        assert_eq!(band_of(15.0, &s), Ok(RatingBand::N));
        assert_eq!(band_of(15.000001, &s), Ok(RatingBand::P));
        assert_eq!(band_of(50.0, &s), Ok(RatingBand::P));
        assert_eq!(band_of(85.0, &s), Ok(RatingBand::L));
        assert_eq!(band_of(92.5, &s), Ok(RatingBand::F));
        assert_eq!(band_of(0.0, &s), Ok(RatingBand::N));
        assert_eq!(band_of(100.0, &s), Ok(RatingBand::F));
        assert!(matches!(band_of(100.5, &s), Err(MeasurementError::OutOfRange(_))));
        assert!(band_of(-1.0, &s).is_err());
        assert!(band_of(f64::NAN, &s).is_err());
    }

    #[test]
    fn single_answers_round_trip_to_own_band() {
        let s = ScaleMapping::default();
        for a in [N, P, L, F] {
            let pct = answer_to_percent(a, &s).unwrap();
            assert_eq!(Some(band_of(pct, &s).unwrap()), a.band());
        }
    }

    #[test]
    fn question_knowledge_scores() {
        let q = question("Q1", ProcessAttribute::PA2_1);
        let prb = ProcessId::new("PRB");
        let s = ScaleMapping::default();
        let ff = [resp("Q1", F), resp("Q1", F)];
        let r = question_result(&q, &prb, &ff.iter().collect::<Vec<_>>(), &s).unwrap();
        assert_eq!(r.knowledge_score, Some(92.5));
        assert!(r.rating.is(RatingBand::F));

        let flp = [resp("Q1", F), resp("Q1", L), resp("Q1", P)];
        let r = question_result(&q, &prb, &flp.iter().collect::<Vec<_>>(), &s).unwrap();
        assert!((r.knowledge_score.unwrap() - 64.166_666_666_666_67).abs() < 1e-9);
        assert!(r.rating.is(RatingBand::L));

        let uu = [resp("Q1", Unable), resp("Q1", Unable)];
        let r = question_result(&q, &prb, &uu.iter().collect::<Vec<_>>(), &s).unwrap();
        assert_eq!(r.rating, Rating::Unassessed);
        assert_eq!((r.count, r.unable_count), (0, 2));

        let mixed = [resp("Q1", F), resp("Q2", F)];
        assert!(matches!(
            question_result(&q, &prb, &mixed.iter().collect::<Vec<_>>(), &s),
            Err(MeasurementError::MixedQuestionIds { .. })
        ));
    }

    #[test]
    fn pooled_attribute_statistics() {
        let cfg = MeasurementConfig::default();
        let prb = ProcessId::new("PRB");
        let r = pooled_attribute(ProcessAttribute::PA2_1, &prb, &[92.5, 92.5, 67.5, 67.5], 0, &cfg)
            .unwrap();
        assert_eq!(r.mean_percent, Some(80.0));
        assert!(r.rating.is(RatingBand::L));
        assert_eq!(r.std_dev, Some(12.5));
        assert_eq!(r.cv, Some(0.15625));
        assert!(!r.low_reliability);

        let same = pooled_attribute(ProcessAttribute::PA2_1, &prb, &[32.5; 5], 0, &cfg).unwrap();
        assert_eq!(same.cv, Some(0.0));

        let one = pooled_attribute(ProcessAttribute::PA2_1, &prb, &[32.5], 0, &cfg).unwrap();
        assert_eq!(one.cv, None);
        assert!(one.rating.is(RatingBand::P));

        let none = pooled_attribute(ProcessAttribute::PA2_1, &prb, &[], 3, &cfg).unwrap();
        assert_eq!(none.rating, Rating::Unassessed);
        assert_eq!((none.mean_percent, none.cv), (None, None));

        // N and F: mean 50, sd 42.5, cv 0.85
        let wide = pooled_attribute(ProcessAttribute::PA2_1, &prb, &[7.5, 92.5], 0, &cfg).unwrap();
        assert!(wide.low_reliability);
        assert!(wide.rating.is(RatingBand::P));
    }

    #[test]
    fn ladder_examples() {
        let lvl = |b| determine_capability_level(&ratings(b)).unwrap();
        assert_eq!(
            lvl(["F", "F", "F", "L", "F", "P", "N", "N", "N"]),
            CapabilityLevel::CL3
        );
        assert_eq!(lvl(["F"; 9]), CapabilityLevel::CL5);
        assert_eq!(lvl(["L"; 9]), CapabilityLevel::CL1);
        assert_eq!(
            lvl(["P", "F", "F", "F", "F", "F", "F", "F", "F"]),
            CapabilityLevel::CL0
        );
        assert_eq!(
            lvl(["F", "L", "F", "F", "F", "F", "F", "F", "F"]),
            CapabilityLevel::CL2
        );
        assert_eq!(
            lvl(["F", "F", "F", "F", "F", "F", "F", "Unassessed", "F"]),
            CapabilityLevel::CL4
        );
        assert_eq!(
            lvl(["Unassessed", "F", "F", "F", "F", "F", "F", "F", "F"]),
            CapabilityLevel::CL0
        );
    }

    #[test]
    fn missing_attribute() {
        let mut r = ratings(["F"; 9]);
        r.remove(&ProcessAttribute::PA4_2);
        assert_eq!(
            determine_capability_level(&r),
            Err(MeasurementError::MissingAttribute(ProcessAttribute::PA4_2))
        );
    }

    #[test]
    fn scale_validation() {
        assert!(ScaleMapping::default().validate().is_ok());
        let bad = ScaleMapping {
            p_percent: 5.0,
            ..ScaleMapping::default()
        };
        assert_eq!(bad.validate(), Err(MeasurementError::InvalidScale));
    }
}
