//! Construction of the study sets: the day-stratified representative
//! sample B, the prefilter-enriched sample F, their union A and the expert
//! subsample E.

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{Cohort, RawAnnotation, SetTag, TweetRecord, VolumeTable};
use crate::error::{Error, Result};
use crate::rng::{sorted_sample, substream};

pub const ROUNDING: &str = "largest_remainder";

/// Target sizes and seed of one sampling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub target_size_b: usize,
    pub target_size_f: usize,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(target_size_b: usize, target_size_f: usize, seed: u64) -> Result<Self> {
        if target_size_b == 0 {
            return Err(Error::InvalidArgument("target size of B must be positive".into()));
        }
        Ok(SamplingPlan {
            target_size_b,
            target_size_f,
            seed,
        })
    }

    /// Share of the enriched part in the study set, |F| / (|B| + |F|).
    pub fn beta(&self) -> f64 {
        beta(self.target_size_b, self.target_size_f)
    }
}

fn beta(b: usize, f: usize) -> f64 {
    if b + f == 0 {
        0.0
    } else {
        f as f64 / (b + f) as f64
    }
}

/// Split `n` across days in proportion to their volumes using the
/// largest-remainder rule. Ties in the remainder go to the earlier day.
///
/// The quotas are compared as exact integer fractions, so the result never
/// depends on floating-point rounding.
pub fn apportion(volumes: &VolumeTable, n: usize) -> BTreeMap<NaiveDate, usize> {
    let total = volumes.total() as u128;
    let n128 = n as u128;
    let mut alloc = BTreeMap::new();
    let mut remainders = Vec::with_capacity(volumes.len());
    let mut assigned = 0usize;
    for (day, volume) in volumes.iter() {
        let scaled = n128 * volume as u128;
        let base = (scaled / total) as usize;
        assigned += base;
        alloc.insert(day, base);
        remainders.push((scaled % total, day));
    }
    // largest remainder first, earliest day first among equals
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, day) in remainders.into_iter().take(n - assigned) {
        *alloc.get_mut(&day).expect("day from table") += 1;
    }
    alloc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub requested: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedSample {
    pub members: Vec<TweetRecord>,
    pub allocation: BTreeMap<NaiveDate, usize>,
    /// Days whose allocation exceeded the records available; all of that
    /// day's records were taken and nothing was reallocated.
    pub shortfalls: BTreeMap<NaiveDate, Shortfall>,
}

fn tag_into_study(mut r: TweetRecord, part: SetTag) -> TweetRecord {
    r.set_tags.insert(part);
    r.set_tags.insert(SetTag::A);
    r
}

/// Draw B: per-day uniform samples without replacement, sized by
/// [`apportion`] over the true daily volumes.
///
/// Each day draws from its own `(seed, day)` stream, so the result is the
/// same for any thread count. Members keep their order in `c`.
pub fn stratified_daily_sample(
    c: &[TweetRecord],
    volumes: &VolumeTable,
    n: usize,
    seed: u64,
) -> Result<StratifiedSample> {
    if n > c.len() {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: c.len(),
        });
    }
    let mut by_day: BTreeMap<NaiveDate, Vec<usize>> = BTreeMap::new();
    for (i, r) in c.iter().enumerate() {
        by_day.entry(r.day).or_default().push(i);
    }
    if let Some(day) = by_day.keys().find(|d| volumes.get(**d).is_none()) {
        return Err(Error::DayMissingFromVolumes { day: *day });
    }

    let allocation = apportion(volumes, n);
    let empty = Vec::new();
    let per_day: Vec<(NaiveDate, Vec<usize>, Option<Shortfall>)> = allocation
        .par_iter()
        .map(|(&day, &want)| {
            let pool = by_day.get(&day).unwrap_or(&empty);
            if want > pool.len() {
                let short = Shortfall {
                    requested: want,
                    available: pool.len(),
                };
                return (day, pool.clone(), Some(short));
            }
            let mut rng = substream(seed, "stratified", &day.to_string());
            let picked = sorted_sample(&mut rng, pool.len(), want).into_iter().map(|j| pool[j]).collect();
            (day, picked, None)
        })
        .collect();

    let mut shortfalls = BTreeMap::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for (day, picked, short) in per_day {
        chosen.extend(picked);
        if let Some(s) = short {
            shortfalls.insert(day, s);
        }
    }
    chosen.sort_unstable();
    let members = chosen.into_iter().map(|i| tag_into_study(c[i].clone(), SetTag::B)).collect();
    Ok(StratifiedSample {
        members,
        allocation,
        shortfalls,
    })
}

/// Draw F: a uniform sample of flagged records of C that are not in B.
pub fn enrich(c: &[TweetRecord], b: &[TweetRecord], size: usize, seed: u64) -> Result<Vec<TweetRecord>> {
    let in_b: HashSet<&str> = b.iter().map(|r| r.guid.as_str()).collect();
    let candidates: Vec<&TweetRecord> = c.iter().filter(|r| r.k && !in_b.contains(r.guid.as_str())).collect();
    if size > candidates.len() {
        return Err(Error::InsufficientFlagged {
            requested: size,
            available: candidates.len(),
        });
    }
    let mut rng = substream(seed, "enrich", "");
    Ok(sorted_sample(&mut rng, candidates.len(), size)
        .into_iter()
        .map(|i| tag_into_study(candidates[i].clone(), SetTag::F))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSizes {
    pub b: usize,
    pub f: usize,
    pub a: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DayCounts {
    pub b: usize,
    pub f: usize,
}

/// Reproducibility record written next to every sampled set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyManifest {
    pub sizes: SetSizes,
    pub beta: f64,
    pub seed: u64,
    pub rounding: String,
    pub allocation: BTreeMap<NaiveDate, usize>,
    pub shortfalls: BTreeMap<NaiveDate, Shortfall>,
    pub per_day: BTreeMap<NaiveDate, DayCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySet {
    pub members: Vec<TweetRecord>,
    pub manifest: StudyManifest,
}

/// A = B ∪ F, B members first.
pub fn build_study_set(b: &StratifiedSample, f: &[TweetRecord], seed: u64) -> Result<StudySet> {
    let in_b: HashSet<&str> = b.members.iter().map(|r| r.guid.as_str()).collect();
    if let Some(r) = f.iter().find(|r| in_b.contains(r.guid.as_str())) {
        return Err(Error::SetOverlap { guid: r.guid.clone() });
    }
    let mut per_day: BTreeMap<NaiveDate, DayCounts> = BTreeMap::new();
    for r in &b.members {
        per_day.entry(r.day).or_default().b += 1;
    }
    for r in f {
        per_day.entry(r.day).or_default().f += 1;
    }
    let members: Vec<TweetRecord> = b
        .members
        .iter()
        .cloned()
        .map(|r| tag_into_study(r, SetTag::B))
        .chain(f.iter().cloned().map(|r| tag_into_study(r, SetTag::F)))
        .collect();
    let sizes = SetSizes {
        b: b.members.len(),
        f: f.len(),
        a: members.len(),
    };
    Ok(StudySet {
        members,
        manifest: StudyManifest {
            sizes,
            beta: beta(sizes.b, sizes.f),
            seed,
            rounding: ROUNDING.to_string(),
            allocation: b.allocation.clone(),
            shortfalls: b.shortfalls.clone(),
            per_day,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertManifest {
    pub flag: String,
    pub n_pos: usize,
    pub n_neg: usize,
    pub pool_pos: usize,
    pub pool_neg: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertSample {
    pub members: Vec<TweetRecord>,
    pub manifest: ExpertManifest,
}

/// Draw E: `n_pos` records uniformly from those satisfying `is_positive`
/// and `n_neg` from the rest. `flag` names the predicate for the manifest.
pub fn expert_subsample<P>(
    pool: &[TweetRecord],
    flag: &str,
    is_positive: P,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<ExpertSample>
where
    P: Fn(&TweetRecord) -> bool,
{
    if let Some(r) = pool.iter().find(|r| !r.has_tag(SetTag::A)) {
        return Err(Error::InvalidArgument(format!(
            "expert pool member {:?} is not in the study set A",
            r.guid
        )));
    }
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..pool.len()).partition(|&i| is_positive(&pool[i]));
    for (side, want, have) in [("positive", n_pos, pos.len()), ("negative", n_neg, neg.len())] {
        if want > have {
            return Err(Error::InsufficientMembers {
                side,
                requested: want,
                available: have,
            });
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(n_pos + n_neg);
    let mut rng = substream(seed, "expert", "positive");
    chosen.extend(sorted_sample(&mut rng, pos.len(), n_pos).into_iter().map(|j| pos[j]));
    let mut rng = substream(seed, "expert", "negative");
    chosen.extend(sorted_sample(&mut rng, neg.len(), n_neg).into_iter().map(|j| neg[j]));
    chosen.sort_unstable();
    let members = chosen
        .into_iter()
        .map(|i| {
            let mut r = pool[i].clone();
            r.set_tags.insert(SetTag::E);
            r
        })
        .collect();
    Ok(ExpertSample {
        members,
        manifest: ExpertManifest {
            flag: flag.to_string(),
            n_pos,
            n_neg,
            pool_pos: pos.len(),
            pool_neg: neg.len(),
            seed,
        },
    })
}

/// Records annotated by exactly `raters` distinct raters of `cohort`.
pub fn with_exact_raters(
    records: &[TweetRecord],
    annotations: &[RawAnnotation],
    cohort: Cohort,
    raters: usize,
) -> Vec<TweetRecord> {
    let mut per_tweet: HashMap<&str, HashSet<&str>> = HashMap::new();
    for a in annotations.iter().filter(|a| a.rater_cohort == cohort) {
        per_tweet.entry(&a.tweet_guid).or_default().insert(&a.rater_id);
    }
    records
        .iter()
        .filter(|r| per_tweet.get(r.guid.as_str()).map_or(0, HashSet::len) == raters)
        .cloned()
        .collect()
}
