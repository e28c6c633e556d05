//! Per-tweet binary flags, `guid,flag` with `flag` in {0, 1}.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{csv_line, csv_reader, expect_header, open, source_name, write_file};
use crate::error::{Error, Result};

pub fn load_flags(path: &Path) -> Result<BTreeMap<String, bool>> {
    read_flags(open(path)?, &source_name(path))
}

pub fn read_flags<R: Read>(reader: R, source: &str) -> Result<BTreeMap<String, bool>> {
    let mut rdr = csv_reader(reader);
    expect_header(&mut rdr, source, &["guid", "flag"])?;
    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(source, 0, e))?;
        let line = csv_line(&record);
        let flag = match &record[1] {
            "0" | "false" => false,
            "1" | "true" => true,
            other => return Err(Error::parse(source, line, format!("flag must be 0 or 1, got {other:?}"))),
        };
        if out.insert(record[0].to_string(), flag).is_some() {
            return Err(Error::parse(source, line, format!("duplicate guid {:?}", &record[0])));
        }
    }
    Ok(out)
}

pub fn write_flags<W: Write>(writer: W, flags: &BTreeMap<String, bool>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["guid", "flag"])?;
    for (g, f) in flags {
        w.write_record([g.as_str(), if *f { "1" } else { "0" }])?;
    }
    w.flush()
}

pub fn save_flags(path: &Path, flags: &BTreeMap<String, bool>) -> Result<()> {
    write_file(path, |w| write_flags(w, flags))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_bad_values() {
        let flags: BTreeMap<String, bool> = [("a".to_string(), true), ("b".to_string(), false)].into();
        let mut buf = Vec::new();
        write_flags(&mut buf, &flags).unwrap();
        assert_eq!(read_flags(&buf[..], "mem").unwrap(), flags);
        assert!(read_flags("guid,flag\na,2\n".as_bytes(), "mem").is_err());
        assert!(read_flags("guid,flag\na,1\na,0\n".as_bytes(), "mem").is_err());
    }
}
