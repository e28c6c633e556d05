use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{csv_line, csv_reader, expect_header, open, source_name};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RosterCategory {
    Politician,
    Journalist,
}

/// One studied individual. Handles arrive already anonymized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub individual_id: String,
    pub category: RosterCategory,
    pub organization: Option<String>,
    pub handle_hash: String,
}

/// Reads `roster.csv` with header `individual_id,category,organization,handle_hash`.
pub fn load_roster(path: &Path) -> Result<Vec<RosterEntry>> {
    read_roster(open(path)?, &source_name(path))
}

pub fn read_roster<R: Read>(reader: R, source: &str) -> Result<Vec<RosterEntry>> {
    let mut rdr = csv_reader(reader);
    expect_header(&mut rdr, source, &["individual_id", "category", "organization", "handle_hash"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(source, 0, e))?;
        let line = csv_line(&record);
        let category = match &record[1] {
            "politician" => RosterCategory::Politician,
            "journalist" => RosterCategory::Journalist,
            other => return Err(Error::parse(source, line, format!("unknown category {other:?}"))),
        };
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(Error::parse(source, line, "empty individual_id"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::Duplicate {
                what: "individual_id",
                id,
            });
        }
        out.push(RosterEntry {
            individual_id: id,
            category,
            organization: Some(record[2].to_string()).filter(|s| !s.is_empty()),
            handle_hash: record[3].to_string(),
        });
    }
    Ok(out)
}
