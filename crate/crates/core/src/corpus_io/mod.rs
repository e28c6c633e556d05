//! Reading, validating and writing campaign data files.
//!
//! Record streams are JSONL, tabular metadata is CSV. Loaders report the
//! 1-based line number of the first offending line.

mod annotations;
mod fetch;
mod flags;
mod roster;
mod scores;
mod tweets;
mod volumes;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub use annotations::{cohort_counts, load_annotations, read_annotations, save_annotations, write_annotations, Cohort, RawAnnotation};
pub use fetch::{fetch_scores, HttpTransport, RetryPolicy, ScoreRequest, ScoreResponse, ScoreTransport, TransportError};
pub use flags::{load_flags, read_flags, save_flags, write_flags};
pub use roster::{load_roster, read_roster, RosterCategory, RosterEntry};
pub use scores::{load_scores, read_scores, save_scores, write_scores, ScoreKind, ScoreTable};
pub use tweets::{load_tweets, read_tweets, save_tweets, write_tweets, DateWindow, SetTag, TweetRecord};
pub use volumes::{load_volumes, read_volumes, save_volumes, write_volumes, VolumeTable};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn source_name(path: &Path) -> String {
    path.display().to_string()
}

/// Parse every non-blank line of a JSONL stream, keeping 1-based line numbers.
pub(crate) fn read_jsonl<T: DeserializeOwned, R: BufRead>(
    reader: R,
    source: &str,
) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(source, lineno, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::parse(source, lineno, e))?;
        out.push((lineno, value));
    }
    Ok(out)
}

pub(crate) fn write_jsonl<T: Serialize, W: Write>(mut writer: W, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

/// Run a writer closure against a freshly created file, mapping failures to
/// [`Error::Io`] for that path.
pub(crate) fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_reader<R: std::io::Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

/// Check the CSV header names exactly, in order.
pub(crate) fn expect_header<R: std::io::Read>(
    rdr: &mut csv::Reader<R>,
    source: &str,
    expected: &[&str],
) -> Result<()> {
    let headers = rdr.headers().map_err(|e| Error::parse(source, 1, e))?;
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(Error::parse(
            source,
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), found.join(",")),
        ));
    }
    Ok(())
}

pub(crate) fn csv_line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// Positions of the `required` columns, in the given order. Extra columns
/// are ignored; the first missing one is named in the error.
pub(crate) fn column_positions<R: std::io::Read>(
    rdr: &mut csv::Reader<R>,
    source: &str,
    required: &[&str],
) -> Result<Vec<usize>> {
    let headers = rdr.headers().map_err(|e| Error::parse(source, 1, e))?;
    required
        .iter()
        .map(|name| {
            headers.iter().position(|h| h == *name).ok_or_else(|| Error::MissingColumn {
                source_name: source.to_string(),
                column: name.to_string(),
            })
        })
        .collect()
}
