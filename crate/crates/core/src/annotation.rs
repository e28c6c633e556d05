//! The labeling schema, per-tweet tallies and label aggregation.
//!
//! Raters first answer whether a tweet contains abuse (`No < Problematic <
//! Abusive`). Only when the answer is not `No` do they pick at least one
//! abuse type and, optionally, a medium.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{self, Cohort, RawAnnotation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContainAbuse {
    No = 0,
    Problematic = 1,
    Abusive = 2,
}

impl ContainAbuse {
    pub const ALL: [ContainAbuse; 3] = [ContainAbuse::No, ContainAbuse::Problematic, ContainAbuse::Abusive];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(v: u8) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContainAbuse::No => "no",
            ContainAbuse::Problematic => "problematic",
            ContainAbuse::Abusive => "abusive",
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == token)
            .ok_or_else(|| Error::UnknownToken {
                field: "contain_abuse",
                token: token.to_string(),
            })
    }
}

impl fmt::Display for ContainAbuse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Abuse typology offered to raters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbuseType {
    SexismOrMisogyny,
    Racism,
    HomophobiaOrTransphobia,
    EthnicOrReligiousSlur,
    PhysicalThreat,
    SexualThreat,
    Other,
}

impl AbuseType {
    pub const ALL: [AbuseType; 7] = [
        AbuseType::SexismOrMisogyny,
        AbuseType::Racism,
        AbuseType::HomophobiaOrTransphobia,
        AbuseType::EthnicOrReligiousSlur,
        AbuseType::PhysicalThreat,
        AbuseType::SexualThreat,
        AbuseType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AbuseType::SexismOrMisogyny => "sexism_or_misogyny",
            AbuseType::Racism => "racism",
            AbuseType::HomophobiaOrTransphobia => "homophobia_or_transphobia",
            AbuseType::EthnicOrReligiousSlur => "ethnic_or_religious_slur",
            AbuseType::PhysicalThreat => "physical_threat",
            AbuseType::SexualThreat => "sexual_threat",
            AbuseType::Other => "other",
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == token)
            .ok_or_else(|| Error::UnknownToken {
                field: "type",
                token: token.to_string(),
            })
    }
}

/// Accepted answers to the optional medium question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediumCategories(Vec<String>);

impl MediumCategories {
    pub fn new<I, S>(categories: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let list: Vec<String> = categories.into_iter().map(Into::into).collect();
        if list.is_empty() {
            return Err(Error::InvalidArgument("medium category list is empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = list.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(Error::Duplicate {
                what: "medium category",
                id: dup.clone(),
            });
        }
        Ok(MediumCategories(list))
    }

    pub fn contains(&self, medium: &str) -> bool {
        self.0.iter().any(|m| m == medium)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }
}

impl Default for MediumCategories {
    fn default() -> Self {
        MediumCategories(["text", "image", "video", "other"].map(String::from).to_vec())
    }
}

/// A schema-checked annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub tweet_guid: String,
    pub rater_id: String,
    pub cohort: Cohort,
    pub contain_abuse: ContainAbuse,
    pub types: BTreeSet<AbuseType>,
    pub medium: Option<String>,
}

pub fn validate_annotation(raw: &RawAnnotation, media: &MediumCategories) -> Result<Annotation> {
    let contain_abuse = ContainAbuse::parse(&raw.contain_abuse)?;
    let types = raw
        .types
        .iter()
        .map(|t| AbuseType::parse(t))
        .collect::<Result<BTreeSet<_>>>()?;
    if let Some(m) = raw.medium.as_deref().filter(|m| !media.contains(m)) {
        return Err(Error::UnknownToken {
            field: "medium",
            token: m.to_string(),
        });
    }
    let skip = |message: &str| Error::SkipLogic {
        guid: raw.tweet_guid.clone(),
        rater: raw.rater_id.clone(),
        message: message.to_string(),
    };
    match contain_abuse {
        ContainAbuse::No if !types.is_empty() => return Err(skip("abuse types given for a No answer")),
        ContainAbuse::No if raw.medium.is_some() => return Err(skip("medium given for a No answer")),
        ContainAbuse::Problematic | ContainAbuse::Abusive if types.is_empty() => {
            return Err(Error::MissingTypes {
                guid: raw.tweet_guid.clone(),
                rater: raw.rater_id.clone(),
                label: contain_abuse.to_string(),
            })
        }
        _ => {}
    }
    Ok(Annotation {
        tweet_guid: raw.tweet_guid.clone(),
        rater_id: raw.rater_id.clone(),
        cohort: raw.rater_cohort,
        contain_abuse,
        types,
        medium: raw.medium.clone(),
    })
}

pub fn validate_all(raw: &[RawAnnotation], media: &MediumCategories) -> Result<Vec<Annotation>> {
    raw.iter().map(|r| validate_annotation(r, media)).collect()
}

/// Class counts `(a_No, a_Pr, a_Ab)` of one tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationCounts {
    pub tweet_guid: String,
    pub counts: [u32; 3],
}

impl AnnotationCounts {
    pub fn new(tweet_guid: impl Into<String>, counts: [u32; 3]) -> Self {
        AnnotationCounts {
            tweet_guid: tweet_guid.into(),
            counts,
        }
    }

    /// Number of raters N.
    pub fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn from_labels(tweet_guid: impl Into<String>, labels: impl IntoIterator<Item = ContainAbuse>) -> Self {
        let mut counts = [0u32; 3];
        for l in labels {
            counts[l.ordinal() as usize] += 1;
        }
        AnnotationCounts::new(tweet_guid, counts)
    }

    /// One ordinal value per vote, in increasing order.
    pub fn ordinal_row(&self) -> Vec<u8> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c as u8, n as usize))
            .collect()
    }

    pub fn labels(&self) -> Vec<ContainAbuse> {
        self.ordinal_row()
            .into_iter()
            .filter_map(ContainAbuse::from_ordinal)
            .collect()
    }
}

/// Count the labels of one tweet. At most one annotation per rater.
pub fn tally_counts(annotations: &[Annotation]) -> Result<AnnotationCounts> {
    let first = annotations.first().ok_or(Error::NoAnnotations)?;
    let mut raters = HashSet::new();
    for a in annotations {
        if a.tweet_guid != first.tweet_guid {
            return Err(Error::MixedGuids {
                first: first.tweet_guid.clone(),
                second: a.tweet_guid.clone(),
            });
        }
        if !raters.insert(a.rater_id.as_str()) {
            return Err(Error::DuplicateRater {
                guid: a.tweet_guid.clone(),
                rater: a.rater_id.clone(),
            });
        }
    }
    Ok(AnnotationCounts::from_labels(
        first.tweet_guid.clone(),
        annotations.iter().map(|a| a.contain_abuse),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    ThreeClass,
    BinaryConflated,
}

impl LabelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelMode::ThreeClass => "three_class",
            LabelMode::BinaryConflated => "binary_conflated",
        }
    }
}

/// Order of conflation and voting for binary verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflationOrder {
    /// Map each vote to negative/positive, then take the majority.
    #[default]
    ConflateThenVote,
    /// Take the three-class majority, then map it.
    VoteThenConflate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Class(ContainAbuse),
    Binary(bool),
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Class(c) => c.as_str(),
            Label::Binary(true) => "positive",
            Label::Binary(false) => "negative",
        }
    }

    pub fn parse(mode: LabelMode, token: &str) -> Result<Self> {
        match mode {
            LabelMode::ThreeClass => ContainAbuse::parse(token).map(Label::Class),
            LabelMode::BinaryConflated => match token {
                "positive" => Ok(Label::Binary(true)),
                "negative" => Ok(Label::Binary(false)),
                other => Err(Error::UnknownToken {
                    field: "label",
                    token: other.to_string(),
                }),
            },
        }
    }

    /// Problematic and Abusive both count as positive.
    pub fn is_positive(self) -> bool {
        match self {
            Label::Class(c) => c != ContainAbuse::No,
            Label::Binary(b) => b,
        }
    }
}

/// Three-class plurality.
///
/// A full three-way tie goes to the ordinal median (Problematic). A two-way
/// tie goes to whichever tied class lies closer to the mean vote, and to
/// the less severe one when both are equally close.
pub fn three_class_majority(counts: &AnnotationCounts) -> Result<ContainAbuse> {
    let n = counts.n();
    if n == 0 {
        return Err(Error::NoAnnotations);
    }
    let max = *counts.counts.iter().max().expect("three classes");
    let tied: Vec<ContainAbuse> = ContainAbuse::ALL
        .into_iter()
        .filter(|c| counts.counts[c.ordinal() as usize] == max)
        .collect();
    Ok(match tied.as_slice() {
        [only] => *only,
        [lo, hi] => {
            // distances to the mean, scaled by N to stay in integers
            let sum: i64 = counts.counts[1] as i64 + 2 * counts.counts[2] as i64;
            let dist = |c: ContainAbuse| (c.ordinal() as i64 * n as i64 - sum).abs();
            if dist(*hi) < dist(*lo) {
                *hi
            } else {
                *lo
            }
        }
        _ => ContainAbuse::Problematic,
    })
}

pub fn majority_label(counts: &AnnotationCounts, mode: LabelMode, order: ConflationOrder) -> Result<Label> {
    if counts.n() == 0 {
        return Err(Error::NoAnnotations);
    }
    Ok(match (mode, order) {
        (LabelMode::ThreeClass, _) => Label::Class(three_class_majority(counts)?),
        (LabelMode::BinaryConflated, ConflationOrder::ConflateThenVote) => {
            let positive = counts.counts[1] + counts.counts[2];
            // an even split resolves negative
            Label::Binary(positive > counts.counts[0])
        }
        (LabelMode::BinaryConflated, ConflationOrder::VoteThenConflate) => {
            Label::Binary(three_class_majority(counts)? != ContainAbuse::No)
        }
    })
}

/// Share of positive (Problematic or Abusive) votes, `(a_Pr + a_Ab) / N`.
pub fn crowd_score(counts: &AnnotationCounts) -> Result<f64> {
    let n = counts.n();
    if n == 0 {
        return Err(Error::NoAnnotations);
    }
    Ok((counts.counts[1] + counts.counts[2]) as f64 / n as f64)
}

/// Annotations of one cohort grouped by tweet, each group sorted by rater.
pub fn group_by_tweet(annotations: &[Annotation], cohort: Cohort) -> BTreeMap<String, Vec<Annotation>> {
    let mut groups: BTreeMap<String, Vec<Annotation>> = BTreeMap::new();
    for a in annotations.iter().filter(|a| a.cohort == cohort) {
        groups.entry(a.tweet_guid.clone()).or_default().push(a.clone());
    }
    for g in groups.values_mut() {
        g.sort_by(|x, y| x.rater_id.cmp(&y.rater_id));
    }
    groups
}

/// One row of `aggregated_labels.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedLabel {
    pub guid: String,
    pub cohort: Cohort,
    pub mode: LabelMode,
    pub label: String,
    pub crowd_score: f64,
    #[serde(rename = "N")]
    pub n: u32,
}

impl AggregatedLabel {
    pub fn parsed_label(&self) -> Result<Label> {
        Label::parse(self.mode, &self.label)
    }
}

/// Tally every tweet of every cohort and emit a three-class and a binary
/// verdict for each. Rows are ordered by cohort, guid, then mode.
pub fn aggregate_labels(annotations: &[Annotation], order: ConflationOrder) -> Result<Vec<AggregatedLabel>> {
    let mut rows = Vec::new();
    for cohort in Cohort::ALL {
        for (guid, group) in group_by_tweet(annotations, cohort) {
            let counts = tally_counts(&group)?;
            let score = crowd_score(&counts)?;
            for mode in [LabelMode::ThreeClass, LabelMode::BinaryConflated] {
                rows.push(AggregatedLabel {
                    guid: guid.clone(),
                    cohort,
                    mode,
                    label: majority_label(&counts, mode, order)?.as_str().to_string(),
                    crowd_score: score,
                    n: counts.n(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_aggregated_labels<W: Write>(writer: W, rows: &[AggregatedLabel]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["guid", "cohort", "mode", "label", "crowd_score", "N"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

pub fn save_aggregated_labels(path: &Path, rows: &[AggregatedLabel]) -> Result<()> {
    corpus_io::write_file(path, |w| write_aggregated_labels(w, rows))
}

pub fn read_aggregated_labels<R: Read>(reader: R, source: &str) -> Result<Vec<AggregatedLabel>> {
    let mut rdr = corpus_io::csv_reader(reader);
    corpus_io::expect_header(&mut rdr, source, &["guid", "cohort", "mode", "label", "crowd_score", "N"])?;
    let mut rows = Vec::new();
    for row in rdr.deserialize::<AggregatedLabel>() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(source, line, e)
        })?;
        row.parsed_label()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_aggregated_labels(path: &Path) -> Result<Vec<AggregatedLabel>> {
    read_aggregated_labels(corpus_io::open(path)?, &corpus_io::source_name(path))
}

/// Summary statistics of one cohort's annotations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CohortSummary {
    pub annotations: usize,
    pub tweets: usize,
    /// Number of tweets by how many raters annotated them.
    pub annotations_per_tweet: BTreeMap<u32, usize>,
    pub tweets_annotated_more_than_twice: usize,
    pub contain_abuse: BTreeMap<String, usize>,
    /// Conditioned on contain_abuse != no.
    pub types: BTreeMap<String, usize>,
    /// Conditioned on contain_abuse != no; unanswered counted separately.
    pub medium: BTreeMap<String, usize>,
}

pub fn summarize(annotations: &[Annotation]) -> BTreeMap<Cohort, CohortSummary> {
    let mut out = BTreeMap::new();
    for cohort in Cohort::ALL {
        let groups = group_by_tweet(annotations, cohort);
        if groups.is_empty() {
            continue;
        }
        let mut s = CohortSummary {
            tweets: groups.len(),
            ..Default::default()
        };
        for c in ContainAbuse::ALL {
            s.contain_abuse.insert(c.as_str().to_string(), 0);
        }
        for group in groups.values() {
            *s.annotations_per_tweet.entry(group.len() as u32).or_default() += 1;
            if group.len() > 2 {
                s.tweets_annotated_more_than_twice += 1;
            }
            for a in group {
                s.annotations += 1;
                *s.contain_abuse.get_mut(a.contain_abuse.as_str()).expect("seeded") += 1;
                if a.contain_abuse == ContainAbuse::No {
                    continue;
                }
                for t in &a.types {
                    *s.types.entry(t.as_str().to_string()).or_default() += 1;
                }
                let m = a.medium.clone().unwrap_or_else(|| "unanswered".to_string());
                *s.medium.entry(m).or_default() += 1;
            }
        }
        out.insert(cohort, s);
    }
    out
}
