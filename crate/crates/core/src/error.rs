use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// [`Error::Io`] is the only variant caused by the environment; everything
/// else is a validation or domain error in the inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("duplicate guid {guid:?} on lines {first_line} and {second_line}")]
    DuplicateGuid {
        guid: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("line {line}: tweet {guid:?} has day {day} outside the campaign window {start}..={end}")]
    DayOutsideWindow {
        guid: String,
        day: NaiveDate,
        start: NaiveDate,
        end: NaiveDate,
        line: usize,
    },

    #[error("line {line}: tweet {guid:?}: {message}")]
    InvalidTweet {
        guid: String,
        line: usize,
        message: String,
    },

    #[error("line {line}: negative count {count} for day {day}")]
    NegativeCount { day: NaiveDate, count: i64, line: usize },

    #[error("duplicate day {day} on lines {first_line} and {second_line}")]
    DuplicateDay {
        day: NaiveDate,
        first_line: usize,
        second_line: usize,
    },

    #[error("volume table total is zero")]
    EmptyVolumes,

    #[error("day {day} is missing from the volume table")]
    DayMissingFromVolumes { day: NaiveDate },

    #[error("day {day}: volume {volume} is smaller than the {records} corpus records")]
    VolumeBelowCorpus {
        day: NaiveDate,
        volume: u64,
        records: usize,
    },

    #[error("duplicate {what} {id:?}")]
    Duplicate { what: &'static str, id: String },

    #[error("score endpoint {endpoint} unreachable after {attempts} attempts: {message}")]
    EndpointUnreachable {
        endpoint: String,
        attempts: u32,
        message: String,
    },

    #[error("classifier {classifier:?} returned no score for guid {guid:?}")]
    MissingScore { classifier: String, guid: String },

    #[error("classifier {classifier:?}: score {score} for guid {guid:?} is outside the declared range")]
    ScoreOutOfRange {
        classifier: String,
        guid: String,
        score: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("requested sample of {requested} exceeds the {available} available records")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("enrichment needs {requested} flagged records outside B but only {available} exist")]
    InsufficientFlagged { requested: usize, available: usize },

    #[error("guid {guid:?} is in both B and F")]
    SetOverlap { guid: String },

    #[error("expert subsample needs {requested} {side} members but the pool has {available}")]
    InsufficientMembers {
        side: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("study-set record {guid:?} is not part of corpus C")]
    NotInCorpus { guid: String },

    #[error("cell (k={k}, day={day}) is populated in A but empty in {set}")]
    EmptyCell {
        k: bool,
        day: NaiveDate,
        set: &'static str,
    },

    #[error("no weight for guid {guid:?}")]
    MissingWeight { guid: String },

    #[error("annotation of {guid:?} by {rater:?}: {message}")]
    SkipLogic {
        guid: String,
        rater: String,
        message: String,
    },

    #[error("annotation of {guid:?} by {rater:?}: {label} requires at least one abuse type")]
    MissingTypes {
        guid: String,
        rater: String,
        label: String,
    },

    #[error("unknown {field} value {token:?}")]
    UnknownToken { field: &'static str, token: String },

    #[error("rater {rater:?} annotated tweet {guid:?} more than once")]
    DuplicateRater { guid: String, rater: String },

    #[error("annotations for one tally span tweets {first:?} and {second:?}")]
    MixedGuids { first: String, second: String },

    #[error("no annotations (N = 0)")]
    NoAnnotations,

    #[error("tweets have differing rater counts ({first} and {second})")]
    MixedRaterCount { first: u32, second: u32 },

    #[error("{0} needs at least one item")]
    Empty(&'static str),

    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRows {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("row {row}: value {value} is not an ordinal label in {{0,1,2}}")]
    OrdinalOutOfRange { row: usize, value: u8 },

    #[error("invalid class distribution: {0}")]
    InvalidDistribution(String),

    #[error("{source_name}: missing column {column:?}")]
    MissingColumn { source_name: String, column: String },

    #[error("no positive labels; recall is undefined")]
    NoPositives,

    #[error("labeled guid {guid:?} has no score")]
    GuidMismatch { guid: String },

    #[error("every curve point has precision + recall = 0")]
    NoDefinedF1,

    #[error("classifier {classifier:?} scores none of the labeled guids")]
    EmptyIntersection { classifier: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: &str, line: usize, message: impl ToString) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.to_string(),
        }
    }

    /// True when the failure came from the filesystem or network rather
    /// than from the content of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::EndpointUnreachable { .. })
    }
}
