//! Design and analysis of crowd-sourced annotation campaigns over sampled
//! text corpora.
//!
//! The pipeline runs in the order of the modules below: build an enriched
//! study set from a day-stratified sample ([`sampling`]), recover
//! population-level importance weights ([`weights`]), validate and
//! aggregate rater labels ([`annotation`]), measure inter-rater agreement
//! ([`agreement`], [`simplex`]) and score classifiers against crowd or
//! expert labels ([`evaluation`]). [`synthetic`] generates seeded
//! campaigns for fixtures and tests.

pub mod agreement;
pub mod annotation;
pub mod corpus_io;
pub mod error;
pub mod evaluation;
pub mod rng;
pub mod sampling;
pub mod simplex;
pub mod synthetic;
pub mod weights;

pub use annotation::{AbuseType, Annotation, AnnotationCounts, ConflationOrder, ContainAbuse, Label, LabelMode};
pub use corpus_io::{Cohort, RawAnnotation, ScoreKind, ScoreTable, SetTag, TweetRecord, VolumeTable};
pub use error::{Error, Result};
pub use evaluation::{EvalReport, PrCurve};
pub use weights::{WeightAssignment, WeightTables};
