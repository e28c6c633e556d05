use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{csv_line, csv_reader, expect_header, open, source_name, write_file};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// Scores must lie in `[0, 1]`.
    #[default]
    Probability,
    /// Any finite real.
    Unbounded,
}

/// Scores of one classifier, keyed by tweet guid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    classifier_name: String,
    kind: ScoreKind,
    entries: BTreeMap<String, f64>,
}

impl ScoreTable {
    pub fn new(classifier_name: impl Into<String>, kind: ScoreKind) -> Self {
        ScoreTable {
            classifier_name: classifier_name.into(),
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I, S>(classifier_name: impl Into<String>, kind: ScoreKind, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut t = ScoreTable::new(classifier_name, kind);
        for (g, s) in pairs {
            t.insert(g.into(), s)?;
        }
        Ok(t)
    }

    /// Add one score, enforcing uniqueness and the declared range.
    pub fn insert(&mut self, guid: String, score: f64) -> Result<()> {
        let in_range = match self.kind {
            ScoreKind::Probability => (0.0..=1.0).contains(&score),
            ScoreKind::Unbounded => score.is_finite(),
        };
        if !in_range {
            return Err(Error::ScoreOutOfRange {
                classifier: self.classifier_name.clone(),
                guid,
                score,
            });
        }
        if self.entries.contains_key(&guid) {
            return Err(Error::Duplicate { what: "score guid", id: guid });
        }
        self.entries.insert(guid, score);
        Ok(())
    }

    pub fn classifier_name(&self) -> &str {
        &self.classifier_name
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn get(&self, guid: &str) -> Option<f64> {
        self.entries.get(guid).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(g, s)| (g.as_str(), *s))
    }
}

/// Reads `scores.csv` with header `guid,score`.
pub fn load_scores(path: &Path, classifier_name: &str, kind: ScoreKind) -> Result<ScoreTable> {
    read_scores(open(path)?, &source_name(path), classifier_name, kind)
}

pub fn read_scores<R: Read>(reader: R, source: &str, classifier_name: &str, kind: ScoreKind) -> Result<ScoreTable> {
    let mut rdr = csv_reader(reader);
    expect_header(&mut rdr, source, &["guid", "score"])?;
    let mut table = ScoreTable::new(classifier_name, kind);
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(source, 0, e))?;
        let line = csv_line(&record);
        let score: f64 = record[1]
            .parse()
            .map_err(|e| Error::parse(source, line, format!("malformed score {:?}: {e}", &record[1])))?;
        table.insert(record[0].to_string(), score)?;
    }
    Ok(table)
}

pub fn write_scores<W: Write>(writer: W, table: &ScoreTable) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["guid", "score"])?;
    for (g, s) in table.iter() {
        w.write_record([g, &s.to_string()])?;
    }
    w.flush()
}

pub fn save_scores(path: &Path, table: &ScoreTable) -> Result<()> {
    write_file(path, |w| write_scores(w, table))
}
