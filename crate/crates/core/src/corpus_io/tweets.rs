use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{open, read_jsonl, source_name, write_file, write_jsonl};
use crate::error::{Error, Result};

/// Set membership of a record: the firehose sample C, the stratified sample
/// B, the enriched sample F, the study set A = B ∪ F and the expert subset E.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetTag {
    C,
    B,
    F,
    A,
    E,
}

/// One `(t, k, d)` observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TweetRecord {
    pub guid: String,
    pub day: NaiveDate,
    /// Prefilter flag.
    pub k: bool,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default)]
    pub set_tags: BTreeSet<SetTag>,
}

impl TweetRecord {
    pub fn new(guid: impl Into<String>, day: NaiveDate, k: bool) -> Self {
        TweetRecord {
            guid: guid.into(),
            day,
            k,
            text: None,
            mentions: Vec::new(),
            set_tags: BTreeSet::from([SetTag::C]),
        }
    }

    pub fn has_tag(&self, tag: SetTag) -> bool {
        self.set_tags.contains(&tag)
    }

    /// Per-record form of the set invariants: B ∩ F = ∅, F only holds
    /// flagged records, A = B ∪ F, E ⊆ A.
    pub fn check_tags(&self) -> std::result::Result<(), String> {
        let b = self.has_tag(SetTag::B);
        let f = self.has_tag(SetTag::F);
        let a = self.has_tag(SetTag::A);
        if b && f {
            return Err("tagged both B and F".into());
        }
        if f && !self.k {
            return Err("tagged F but k = false".into());
        }
        if (b || f) != a {
            return Err("A membership must equal B or F membership".into());
        }
        if self.has_tag(SetTag::E) && !a {
            return Err("tagged E but not A".into());
        }
        Ok(())
    }
}

/// Inclusive range of UTC calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidArgument(format!(
                "campaign window starts after it ends ({start} > {end})"
            )));
        }
        Ok(DateWindow { start, end })
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }
}

pub fn load_tweets(path: &Path, window: DateWindow) -> Result<Vec<TweetRecord>> {
    read_tweets(open(path)?, &source_name(path), window)
}

pub fn read_tweets<R: BufRead>(reader: R, source: &str, window: DateWindow) -> Result<Vec<TweetRecord>> {
    let rows: Vec<(usize, TweetRecord)> = read_jsonl(reader, source)?;
    let mut seen: HashMap<String, usize> = HashMap::with_capacity(rows.len());
    let mut out = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        if rec.guid.is_empty() {
            return Err(Error::InvalidTweet {
                guid: rec.guid,
                line,
                message: "empty guid".into(),
            });
        }
        if let Some(&first_line) = seen.get(&rec.guid) {
            return Err(Error::DuplicateGuid {
                guid: rec.guid,
                first_line,
                second_line: line,
            });
        }
        if !window.contains(rec.day) {
            return Err(Error::DayOutsideWindow {
                guid: rec.guid,
                day: rec.day,
                start: window.start,
                end: window.end,
                line,
            });
        }
        if let Err(message) = rec.check_tags() {
            return Err(Error::InvalidTweet {
                guid: rec.guid,
                line,
                message,
            });
        }
        seen.insert(rec.guid.clone(), line);
        out.push(rec);
    }
    Ok(out)
}

pub fn write_tweets<W: Write>(writer: W, records: &[TweetRecord]) -> std::io::Result<()> {
    write_jsonl(writer, records)
}

pub fn save_tweets(path: &Path, records: &[TweetRecord]) -> Result<()> {
    write_file(path, |w| write_tweets(w, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> DateWindow {
        DateWindow::new(
            NaiveDate::from_ymd_opt(2017, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2017, 12, 31).unwrap(),
        )
        .unwrap()
    }

    fn parse(s: &str) -> Result<Vec<TweetRecord>> {
        read_tweets(s.as_bytes(), "tweets.jsonl", window())
    }

    const LINE: &str = r#"{"guid":"g1","day":"2017-03-01","k":true,"text":null,"mentions":["p1"],"set_tags":["C"]}"#;

    #[test]
    fn three_lines_parse_in_order() {
        let text = format!(
            "{LINE}\n{}\n{}\n",
            LINE.replace("g1", "g2"),
            LINE.replace("g1", "g3").replace("true", "false")
        );
        let recs = parse(&text).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(
            recs.iter().map(|r| r.guid.as_str()).collect::<Vec<_>>(),
            ["g1", "g2", "g3"]
        );
        assert!(!recs[2].k);
        assert_eq!(recs[0].mentions, ["p1"]);
    }

    #[test]
    fn duplicate_guid_names_both_lines() {
        let other = |g: &str| LINE.replace("g1", g);
        let text = [other("a"), other("dup"), other("b"), other("c"), other("dup")].join("\n");
        match parse(&text) {
            Err(Error::DuplicateGuid {
                guid,
                first_line,
                second_line,
            }) => {
                assert_eq!(guid, "dup");
                assert_eq!((first_line, second_line), (2, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_collection() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{LINE}\n{{not json\n");
        match parse(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn day_outside_window_rejected() {
        let text = LINE.replace("2017-03-01", "2018-01-01");
        assert!(matches!(parse(&text), Err(Error::DayOutsideWindow { line: 1, .. })));
    }

    #[test]
    fn tag_invariants_enforced() {
        let bad_f = LINE.replace("true", "false").replace(r#"["C"]"#, r#"["C","F","A"]"#);
        assert!(matches!(parse(&bad_f), Err(Error::InvalidTweet { .. })));
        let b_and_f = LINE.replace(r#"["C"]"#, r#"["C","B","F","A"]"#);
        assert!(matches!(parse(&b_and_f), Err(Error::InvalidTweet { .. })));
        let a_only = LINE.replace(r#"["C"]"#, r#"["C","A"]"#);
        assert!(matches!(parse(&a_only), Err(Error::InvalidTweet { .. })));
        let e_outside = LINE.replace(r#"["C"]"#, r#"["C","E"]"#);
        assert!(matches!(parse(&e_outside), Err(Error::InvalidTweet { .. })));
        let ok = LINE.replace(r#"["C"]"#, r#"["E","A","F","C"]"#);
        assert!(parse(&ok).is_ok());
    }

    #[test]
    fn unknown_tag_and_field_are_parse_errors() {
        assert!(matches!(
            parse(&LINE.replace(r#"["C"]"#, r#"["Z"]"#)),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse(&LINE.replace(r#""k":"#, r#""extra":1,"k":"#)),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse(&LINE.replace("2017-03-01", "2017-13-01")),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn empty_guid_rejected() {
        assert!(matches!(
            parse(&LINE.replace(r#""g1""#, r#""""#)),
            Err(Error::InvalidTweet { .. })
        ));
    }

    #[test]
    fn save_canonicalizes_tag_order() {
        let text = LINE.replace(r#"["C"]"#, r#"["A","B","C"]"#);
        let recs = parse(&text).unwrap();
        let mut buf = Vec::new();
        write_tweets(&mut buf, &recs).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains(r#""set_tags":["C","B","A"]"#), "{s}");
    }
}
