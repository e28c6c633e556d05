//! Seeded synthetic campaigns: a firehose sample with daily volumes and
//! latent labels, simulated raters and simulated classifier scores.
//!
//! Used for the bundled fixture, statistical tests and benchmarks.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::{AbuseType, ContainAbuse};
use crate::corpus_io::{Cohort, RawAnnotation, ScoreKind, ScoreTable, TweetRecord, VolumeTable};
use crate::error::{Error, Result};
use crate::rng::{sorted_sample, substream, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub start: NaiveDate,
    pub days: u32,
    pub records_per_day: usize,
    /// Each day's population volume is `records_per_day` times a factor
    /// drawn uniformly from this inclusive range.
    pub volume_factor: (u64, u64),
    pub flag_rate: f64,
    /// Relative day-to-day spread of the flag rate, in [0, 1).
    #[serde(default)]
    pub flag_rate_spread: f64,
    pub positive_given_flag: f64,
    pub positive_given_unflagged: f64,
    /// Share of positive tweets that are Abusive rather than Problematic.
    pub abusive_share: f64,
    #[serde(default)]
    pub seed: u64,
}

impl WorldConfig {
    fn check(&self) -> Result<()> {
        let probs = [
            ("flag_rate", self.flag_rate),
            ("positive_given_flag", self.positive_given_flag),
            ("positive_given_unflagged", self.positive_given_unflagged),
            ("abusive_share", self.abusive_share),
        ];
        if let Some((name, v)) = probs.iter().find(|(_, v)| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")));
        }
        if !(0.0..1.0).contains(&self.flag_rate_spread) {
            return Err(Error::InvalidArgument("flag_rate_spread must lie in [0, 1)".into()));
        }
        if self.days == 0 || self.records_per_day == 0 {
            return Err(Error::InvalidArgument("world needs at least one day and one record per day".into()));
        }
        let (lo, hi) = self.volume_factor;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!("bad volume_factor range ({lo}, {hi})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub corpus: Vec<TweetRecord>,
    pub volumes: VolumeTable,
    pub truth: BTreeMap<String, ContainAbuse>,
    pub flag_rates: BTreeMap<NaiveDate, f64>,
    pub config: WorldConfig,
}

impl World {
    /// Expected share of positive tweets in the population the volumes
    /// describe.
    pub fn population_prevalence(&self) -> f64 {
        let total = self.volumes.total() as f64;
        self.flag_rates
            .iter()
            .map(|(d, f)| {
                let w = self.volumes.get(*d).unwrap_or(0) as f64 / total;
                w * (f * self.config.positive_given_flag + (1.0 - f) * self.config.positive_given_unflagged)
            })
            .sum()
    }

    pub fn is_positive(&self, guid: &str) -> bool {
        self.truth.get(guid).is_some_and(|c| *c != ContainAbuse::No)
    }
}

fn bernoulli(rng: &mut Stream, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// One day's volume, flag rate and labeled records.
type DayDraw = (NaiveDate, u64, f64, Vec<(TweetRecord, ContainAbuse)>);

pub fn generate_world(config: &WorldConfig) -> Result<World> {
    config.check()?;
    let days: Vec<NaiveDate> = (0..config.days)
        .map(|i| config.start + Duration::days(i as i64))
        .collect();
    let per_day: Vec<DayDraw> = days
        .par_iter()
        .map(|&day| {
            let key = day.to_string();
            let mut rng = substream(config.seed, "world", &key);
            let factor = rng.random_range(config.volume_factor.0..=config.volume_factor.1);
            let spread = config.flag_rate_spread * (2.0 * rng.random::<f64>() - 1.0);
            let flag_rate = (config.flag_rate * (1.0 + spread)).clamp(0.0, 1.0);
            let records = (0..config.records_per_day)
                .map(|i| {
                    let k = bernoulli(&mut rng, flag_rate);
                    let p_pos = if k {
                        config.positive_given_flag
                    } else {
                        config.positive_given_unflagged
                    };
                    let class = if !bernoulli(&mut rng, p_pos) {
                        ContainAbuse::No
                    } else if bernoulli(&mut rng, config.abusive_share) {
                        ContainAbuse::Abusive
                    } else {
                        ContainAbuse::Problematic
                    };
                    let guid = format!("{}-{i:06}", day.format("%Y%m%d"));
                    (TweetRecord::new(guid, day, k), class)
                })
                .collect();
            (day, factor * config.records_per_day as u64, flag_rate, records)
        })
        .collect();

    let mut corpus = Vec::with_capacity(days.len() * config.records_per_day);
    let mut truth = BTreeMap::new();
    let mut volumes = BTreeMap::new();
    let mut flag_rates = BTreeMap::new();
    for (day, volume, rate, records) in per_day {
        volumes.insert(day, volume);
        flag_rates.insert(day, rate);
        for (r, class) in records {
            truth.insert(r.guid.clone(), class);
            corpus.push(r);
        }
    }
    Ok(World {
        corpus,
        volumes: VolumeTable::new(volumes)?,
        truth,
        flag_rates,
        config: config.clone(),
    })
}

/// How one cohort of simulated raters behaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaterDesign {
    pub cohort: Cohort,
    pub pool_size: usize,
    /// `(raters per tweet, probability)` pairs.
    pub raters_per_tweet: Vec<(usize, f64)>,
    /// Probability that a rater reports the latent class.
    pub accuracy: f64,
    /// Probability that a positive answer names the tweet's main abuse type.
    pub type_accuracy: f64,
    #[serde(default)]
    pub seed: u64,
}

impl RaterDesign {
    fn check(&self) -> Result<()> {
        let max = self.raters_per_tweet.iter().map(|r| r.0).max().unwrap_or(0);
        if max == 0 || max > self.pool_size {
            return Err(Error::InvalidArgument(format!(
                "rater pool of {} cannot cover {max} raters per tweet",
                self.pool_size
            )));
        }
        let total: f64 = self.raters_per_tweet.iter().map(|r| r.1).sum();
        if self.raters_per_tweet.iter().any(|r| r.1 < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution("raters_per_tweet probabilities must sum to 1".into()));
        }
        for (name, v) in [("accuracy", self.accuracy), ("type_accuracy", self.type_accuracy)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

fn pick<T: Copy>(rng: &mut Stream, options: &[(T, f64)]) -> T {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for &(v, p) in options {
        cum += p;
        if u < cum {
            return v;
        }
    }
    options.iter().rev().find(|o| o.1 > 0.0).expect("non-empty distribution").0
}

fn random_type(rng: &mut Stream) -> AbuseType {
    AbuseType::ALL[rng.random_range(0..AbuseType::ALL.len())]
}

/// Simulated annotations of `guids` by one cohort. Tweets absent from the
/// world's truth table are an error.
pub fn annotate(world: &World, guids: &[String], design: &RaterDesign) -> Result<Vec<RawAnnotation>> {
    design.check()?;
    let base: DateTime<Utc> = world
        .config
        .start
        .and_hms_opt(0, 0, 0)
        .expect("midnight")
        .and_utc();
    let purpose = format!("annotate/{}", design.cohort);
    let per_tweet: Vec<Result<Vec<RawAnnotation>>> = guids
        .par_iter()
        .map(|guid| {
            let truth = *world
                .truth
                .get(guid)
                .ok_or_else(|| Error::NotInCorpus { guid: guid.clone() })?;
            let mut rng = substream(design.seed, &purpose, guid);
            let main_type = random_type(&mut substream(world.config.seed, "main_type", guid));
            let n = pick(&mut rng, &design.raters_per_tweet);
            let raters = sorted_sample(&mut rng, design.pool_size, n);
            let out = raters
                .into_iter()
                .map(|r| {
                    let answer = if bernoulli(&mut rng, design.accuracy) {
                        truth
                    } else {
                        let others: Vec<ContainAbuse> = ContainAbuse::ALL.into_iter().filter(|c| *c != truth).collect();
                        others[rng.random_range(0..others.len())]
                    };
                    let (types, medium) = if answer == ContainAbuse::No {
                        (Vec::new(), None)
                    } else {
                        let mut types = vec![if bernoulli(&mut rng, design.type_accuracy) {
                            main_type
                        } else {
                            random_type(&mut rng)
                        }];
                        if bernoulli(&mut rng, 0.2) {
                            types.push(random_type(&mut rng));
                        }
                        types.sort();
                        types.dedup();
                        (types.iter().map(|t| t.as_str().to_string()).collect(), Some("text".to_string()))
                    };
                    RawAnnotation {
                        tweet_guid: guid.clone(),
                        rater_id: format!("{}-{:04}", design.cohort, r + 1),
                        rater_cohort: design.cohort,
                        contain_abuse: answer.as_str().to_string(),
                        types,
                        medium,
                        timestamp: base + Duration::seconds(rng.random_range(0..30 * 86_400)),
                    }
                })
                .collect();
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for t in per_tweet {
        all.extend(t?);
    }
    Ok(all)
}

/// A logistic scorer: `σ(bias + separation·y + flag_boost·k + noise·z)`
/// with `z` standard normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerDesign {
    pub name: String,
    pub bias: f64,
    pub separation: f64,
    pub flag_boost: f64,
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

pub fn classifier_scores(world: &World, records: &[TweetRecord], design: &ScorerDesign) -> Result<ScoreTable> {
    let purpose = format!("scores/{}", design.name);
    let scored: Vec<(String, f64)> = records
        .par_iter()
        .map(|r| {
            let mut rng = substream(design.seed, &purpose, &r.guid);
            let z: f64 = rng.sample(StandardNormal);
            let logit = design.bias
                + design.separation * world.is_positive(&r.guid) as u8 as f64
                + design.flag_boost * r.k as u8 as f64
                + design.noise * z;
            (r.guid.clone(), 1.0 / (1.0 + (-logit).exp()))
        })
        .collect();
    ScoreTable::from_pairs(design.name.clone(), ScoreKind::Probability, scored)
}
