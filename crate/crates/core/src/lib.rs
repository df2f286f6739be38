//! Process capability self-assessment.
//!
//! The crate covers the whole assessment pipeline: choosing which
//! processes to assess ([`selection`]), the question bank and knowledge
//! base ([`bank`]), the survey lifecycle ([`survey`]), capability
//! measurement on the NPLF scale ([`measurement`]), the improvement report
//! ([`reporting`]), seeded synthetic responses ([`simulation`]) and durable storage shared by the CLI and the HTTP
//! service ([`store`]).

pub mod bank;
pub mod measurement;
pub mod model;
pub mod reporting;
pub mod selection;
pub mod simulation;
pub mod store;
pub mod survey;

pub use bank::{BankError, BankStats, ContentBank, KnowledgeItem, Question, QuestionScope};
pub use measurement::{
    AttributeResult, MeasurementConfig, MeasurementError, MeasurementResults, ProcessResult,
    QuestionResult, ScaleMapping,
};
pub use model::{
    attributes_at_or_below, AnswerOption, CapabilityLevel, ProcessAttribute, ProcessId,
    ProcessRef, Rating, RatingBand, Role,
};
pub use reporting::{AssessmentReport, ReportEntry, ReportError, ReportFormat};
pub use simulation::{simulate, SimulationProfile};
pub use store::{Store, StoreError};
pub use survey::{
    AccessToken, Assessment, AssessmentId, AssessmentState, ParticipantId, ProgressSnapshot,
    Response, SurveyError,
};
