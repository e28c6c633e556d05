use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{open, read_jsonl, source_name, write_file, write_jsonl};
use crate::error::Result;

/// Which labeling population produced an annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cohort {
    Crowd,
    Expert,
}

impl Cohort {
    pub const ALL: [Cohort; 2] = [Cohort::Crowd, Cohort::Expert];

    pub fn as_str(self) -> &'static str {
        match self {
            Cohort::Crowd => "crowd",
            Cohort::Expert => "expert",
        }
    }
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Cohort {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "crowd" => Ok(Cohort::Crowd),
            "expert" => Ok(Cohort::Expert),
            other => Err(format!("unknown cohort {other:?}")),
        }
    }
}

/// An annotation as it appears on disk. Label fields stay as strings here;
/// the annotation module turns them into checked enums.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAnnotation {
    pub tweet_guid: String,
    pub rater_id: String,
    pub rater_cohort: Cohort,
    pub contain_abuse: String,
    #[serde(default)]
    pub types: Vec<String>,
    #[serde(default)]
    pub medium: Option<String>,
    pub timestamp: DateTime<Utc>,
}

pub fn load_annotations(path: &Path) -> Result<Vec<RawAnnotation>> {
    read_annotations(open(path)?, &source_name(path))
}

pub fn read_annotations<R: BufRead>(reader: R, source: &str) -> Result<Vec<RawAnnotation>> {
    Ok(read_jsonl(reader, source)?.into_iter().map(|(_, a)| a).collect())
}

pub fn cohort_counts(records: &[RawAnnotation]) -> BTreeMap<Cohort, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.rater_cohort).or_default() += 1;
    }
    counts
}

pub fn write_annotations<W: Write>(writer: W, records: &[RawAnnotation]) -> std::io::Result<()> {
    write_jsonl(writer, records)
}

pub fn save_annotations(path: &Path, records: &[RawAnnotation]) -> Result<()> {
    write_file(path, |w| write_annotations(w, records))
}
