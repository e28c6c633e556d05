use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{csv_line, csv_reader, expect_header, open, source_name, write_file, TweetRecord};
use crate::error::{Error, Result};

/// True per-day population volumes `n_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolumeTable {
    entries: BTreeMap<NaiveDate, u64>,
    total: u64,
}

impl VolumeTable {
    pub fn new(entries: BTreeMap<NaiveDate, u64>) -> Result<Self> {
        let total = entries.values().sum();
        if total == 0 {
            return Err(Error::EmptyVolumes);
        }
        Ok(VolumeTable { entries, total })
    }

    pub fn get(&self, day: NaiveDate) -> Option<u64> {
        self.entries.get(&day).copied()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, u64)> + '_ {
        self.entries.iter().map(|(d, n)| (*d, *n))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every corpus day must be listed, with a volume at least as large as
    /// the number of corpus records on that day.
    pub fn check_covers(&self, corpus: &[TweetRecord]) -> Result<()> {
        let mut per_day: BTreeMap<NaiveDate, usize> = BTreeMap::new();
        for r in corpus {
            *per_day.entry(r.day).or_default() += 1;
        }
        for (day, records) in per_day {
            let volume = self.get(day).ok_or(Error::DayMissingFromVolumes { day })?;
            if (volume as u128) < records as u128 {
                return Err(Error::VolumeBelowCorpus { day, volume, records });
            }
        }
        Ok(())
    }
}

pub fn load_volumes(path: &Path) -> Result<VolumeTable> {
    read_volumes(open(path)?, &source_name(path))
}

pub fn read_volumes<R: Read>(reader: R, source: &str) -> Result<VolumeTable> {
    let mut rdr = csv_reader(reader);
    expect_header(&mut rdr, source, &["day", "n_d"])?;
    let mut entries = BTreeMap::new();
    let mut lines: HashMap<NaiveDate, usize> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(source, line, e)
        })?;
        let line = csv_line(&record);
        let day = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| Error::parse(source, line, format!("malformed date {:?}: {e}", &record[0])))?;
        let count: i64 = record[1]
            .parse()
            .map_err(|e| Error::parse(source, line, format!("malformed count {:?}: {e}", &record[1])))?;
        if count < 0 {
            return Err(Error::NegativeCount { day, count, line });
        }
        if let Some(&first_line) = lines.get(&day) {
            return Err(Error::DuplicateDay {
                day,
                first_line,
                second_line: line,
            });
        }
        lines.insert(day, line);
        entries.insert(day, count as u64);
    }
    VolumeTable::new(entries)
}

pub fn write_volumes<W: Write>(writer: W, table: &VolumeTable) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["day", "n_d"])?;
    for (day, n) in table.iter() {
        w.write_record([day.format("%Y-%m-%d").to_string(), n.to_string()])?;
    }
    w.flush()
}

pub fn save_volumes(path: &Path, table: &VolumeTable) -> Result<()> {
    write_file(path, |w| write_volumes(w, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_totals() {
        let t = read_volumes("day,n_d\n2017-01-01,100\n2017-01-02,300\n".as_bytes(), "v").unwrap();
        assert_eq!(t.total(), 400);
        assert_eq!(t.get(d("2017-01-02")), Some(300));
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn negative_count_rejected() {
        let e = read_volumes("day,n_d\n2017-01-01,-5\n".as_bytes(), "v").unwrap_err();
        assert!(matches!(e, Error::NegativeCount { count: -5, line: 2, .. }), "{e:?}");
    }

    #[test]
    fn duplicate_day_rejected() {
        let e = read_volumes("day,n_d\n2017-01-01,5\n2017-01-01,6\n".as_bytes(), "v").unwrap_err();
        assert!(
            matches!(e, Error::DuplicateDay { first_line: 2, second_line: 3, .. }),
            "{e:?}"
        );
    }

    #[test]
    fn malformed_date_and_header() {
        assert!(matches!(
            read_volumes("day,n_d\n2017-02-30,5\n".as_bytes(), "v"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_volumes("date,count\n2017-01-01,5\n".as_bytes(), "v"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_volumes("day,n_d\n2017-01-01\n".as_bytes(), "v"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn zero_total_rejected() {
        assert!(matches!(
            read_volumes("day,n_d\n2017-01-01,0\n".as_bytes(), "v"),
            Err(Error::EmptyVolumes)
        ));
    }

    #[test]
    fn coverage_check() {
        let t = read_volumes("day,n_d\n2017-01-01,1\n".as_bytes(), "v").unwrap();
        let r1 = TweetRecord::new("a", d("2017-01-01"), false);
        let r2 = TweetRecord::new("b", d("2017-01-01"), false);
        let r3 = TweetRecord::new("c", d("2017-01-02"), false);
        assert!(t.check_covers(std::slice::from_ref(&r1)).is_ok());
        assert!(matches!(
            t.check_covers(&[r1.clone(), r2]),
            Err(Error::VolumeBelowCorpus { .. })
        ));
        assert!(matches!(
            t.check_covers(&[r1, r3]),
            Err(Error::DayMissingFromVolumes { .. })
        ));
    }
}
