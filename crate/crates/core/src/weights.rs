//! Importance weights that map statistics on the enriched study set A back
//! to the tweet population, and the self-normalized estimator that uses them.
//!
//! A weight only depends on the cell `(k, d)` of a record:
//!
//! ```text
//! w(k, d) = p̂_W(k | d) · p_W(d) / (p_A(k | d) · p_A(d))
//! ```
//!
//! `p_W(d)` comes from the daily volumes, `p̂_W(k | d)` from counting on the
//! firehose sample C, and both `p_A` terms from counting on A.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{self, TweetRecord, VolumeTable};
use crate::error::{Error, Result};

/// A value for each prefilter outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FlagPair<T> {
    #[serde(rename = "k=0")]
    pub unflagged: T,
    #[serde(rename = "k=1")]
    pub flagged: T,
}

impl<T: Copy> FlagPair<T> {
    pub fn get(&self, k: bool) -> T {
        if k {
            self.flagged
        } else {
            self.unflagged
        }
    }

    fn get_mut(&mut self, k: bool) -> &mut T {
        if k {
            &mut self.flagged
        } else {
            &mut self.unflagged
        }
    }
}

impl FlagPair<u64> {
    fn total(&self) -> u64 {
        self.flagged + self.unflagged
    }
}

/// How `p̂_W(k | d)` is estimated from C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagRateEstimator {
    /// `count_C(k, d) / count_C(d)`, a proper conditional over k.
    #[default]
    Conditional,
    /// `count_C(k, d) / count_C(k)`, the normalization over days. Kept
    /// for audits; it does not sum to one over k.
    AsPrinted,
}

/// Raw cell counts the probability tables were built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub corpus: BTreeMap<NaiveDate, FlagPair<u64>>,
    pub study: BTreeMap<NaiveDate, FlagPair<u64>>,
    pub volumes: BTreeMap<NaiveDate, u64>,
}

impl CellCounts {
    fn corpus_flag_total(&self, k: bool) -> u64 {
        self.corpus.values().map(|p| p.get(k)).sum()
    }

    fn study_total(&self) -> u64 {
        self.study.values().map(FlagPair::total).sum()
    }

    fn volume_total(&self) -> u64 {
        self.volumes.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTables {
    pub estimator: FlagRateEstimator,
    #[serde(rename = "p_W_d")]
    pub p_w_d: BTreeMap<NaiveDate, f64>,
    #[serde(rename = "p_W_k_given_d")]
    pub p_w_k_given_d: BTreeMap<NaiveDate, FlagPair<f64>>,
    #[serde(rename = "p_A_d")]
    pub p_a_d: BTreeMap<NaiveDate, f64>,
    #[serde(rename = "p_A_k_given_d")]
    pub p_a_k_given_d: BTreeMap<NaiveDate, FlagPair<f64>>,
    /// Population mass of the days that occur in A; the estimator
    /// renormalizes over exactly these days.
    pub covered_mass: f64,
    pub counts: CellCounts,
}

fn count_cells(records: &[TweetRecord]) -> BTreeMap<NaiveDate, FlagPair<u64>> {
    let mut cells: BTreeMap<NaiveDate, FlagPair<u64>> = BTreeMap::new();
    for r in records {
        *cells.entry(r.day).or_default().get_mut(r.k) += 1;
    }
    cells
}

fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}

/// Count the cells of C and A and turn them into the four tables.
pub fn estimate_weight_tables(
    c: &[TweetRecord],
    a: &[TweetRecord],
    volumes: &VolumeTable,
    estimator: FlagRateEstimator,
) -> Result<WeightTables> {
    volumes.check_covers(c)?;
    let in_c: HashSet<&str> = c.iter().map(|r| r.guid.as_str()).collect();
    if let Some(r) = a.iter().find(|r| !in_c.contains(r.guid.as_str())) {
        return Err(Error::NotInCorpus { guid: r.guid.clone() });
    }
    let counts = CellCounts {
        corpus: count_cells(c),
        study: count_cells(a),
        volumes: volumes.iter().collect(),
    };
    for (day, cell) in &counts.study {
        let c_cell = counts.corpus.get(day).copied().unwrap_or_default();
        for k in [false, true] {
            if cell.get(k) > 0 && c_cell.get(k) == 0 {
                return Err(Error::EmptyCell { k, day: *day, set: "C" });
            }
        }
    }

    let v_total = counts.volume_total();
    let p_w_d: BTreeMap<_, _> = counts.volumes.iter().map(|(d, n)| (*d, ratio(*n, v_total))).collect();
    let flag_totals = FlagPair {
        unflagged: counts.corpus_flag_total(false),
        flagged: counts.corpus_flag_total(true),
    };
    let p_w_k_given_d = counts
        .corpus
        .iter()
        .map(|(d, cell)| {
            let den = |k: bool| match estimator {
                FlagRateEstimator::Conditional => cell.total(),
                FlagRateEstimator::AsPrinted => flag_totals.get(k),
            };
            let p = FlagPair {
                unflagged: ratio(cell.unflagged, den(false)),
                flagged: ratio(cell.flagged, den(true)),
            };
            (*d, p)
        })
        .collect();
    let a_total = counts.study_total();
    let p_a_d = counts.study.iter().map(|(d, cell)| (*d, ratio(cell.total(), a_total))).collect();
    let p_a_k_given_d = counts
        .study
        .iter()
        .map(|(d, cell)| {
            let p = FlagPair {
                unflagged: ratio(cell.unflagged, cell.total()),
                flagged: ratio(cell.flagged, cell.total()),
            };
            (*d, p)
        })
        .collect();
    let covered_mass = ratio(counts.study.keys().map(|d| counts.volumes[d]).sum(), v_total);
    Ok(WeightTables {
        estimator,
        p_w_d,
        p_w_k_given_d,
        p_a_d,
        p_a_k_given_d,
        covered_mass,
        counts,
    })
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `∏ num / ∏ den` with a single rounding whenever the products fit in u128.
fn exact_quotient(num: [u64; 3], den: [u64; 3]) -> f64 {
    let prod = |xs: [u64; 3]| {
        xs.iter()
            .try_fold(1u128, |acc, &x| acc.checked_mul(x as u128))
    };
    match (prod(num), prod(den)) {
        (Some(n), Some(d)) => {
            let g = gcd(n, d).max(1);
            (n / g) as f64 / (d / g) as f64
        }
        _ => num.iter().map(|&x| x as f64).product::<f64>() / den.iter().map(|&x| x as f64).product::<f64>(),
    }
}

impl WeightTables {
    /// Unnormalized weight of cell `(k, day)`, or `None` when the cell is
    /// empty in A.
    pub fn cell_weight(&self, k: bool, day: NaiveDate) -> Option<f64> {
        let study = self.counts.study.get(&day)?.get(k);
        if study == 0 {
            return None;
        }
        let corpus_cell = self.counts.corpus.get(&day)?;
        let corpus_den = match self.estimator {
            FlagRateEstimator::Conditional => corpus_cell.total(),
            FlagRateEstimator::AsPrinted => self.counts.corpus_flag_total(k),
        };
        let volume = *self.counts.volumes.get(&day)?;
        Some(exact_quotient(
            [corpus_cell.get(k), volume, self.counts.study_total()],
            [corpus_den, self.counts.volume_total(), study],
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub guid: String,
    pub k: u8,
    pub day: NaiveDate,
    pub weight: f64,
}

/// Per-record weights of A, in the order of A.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment {
    entries: Vec<WeightEntry>,
    index: HashMap<String, usize>,
    normalizer: f64,
}

impl WeightAssignment {
    pub fn new(entries: Vec<WeightEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "weight of {:?} must be positive and finite, got {}",
                    e.guid, e.weight
                )));
            }
            if index.insert(e.guid.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    what: "weight guid",
                    id: e.guid.clone(),
                });
            }
        }
        if entries.is_empty() {
            return Err(Error::Empty("weight assignment"));
        }
        let normalizer = entries.iter().map(|e| e.weight).sum();
        Ok(WeightAssignment {
            entries,
            index,
            normalizer,
        })
    }

    /// Every record gets weight 1.
    pub fn uniform<'a>(guids: impl IntoIterator<Item = &'a TweetRecord>) -> Result<Self> {
        WeightAssignment::new(
            guids
                .into_iter()
                .map(|r| WeightEntry {
                    guid: r.guid.clone(),
                    k: r.k as u8,
                    day: r.day,
                    weight: 1.0,
                })
                .collect(),
        )
    }

    pub fn get(&self, guid: &str) -> Option<f64> {
        self.index.get(guid).map(|&i| self.entries[i].weight)
    }

    pub fn entries(&self) -> &[WeightEntry] {
        &self.entries
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same weights multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        WeightAssignment::new(
            self.entries
                .iter()
                .map(|e| WeightEntry {
                    weight: e.weight * factor,
                    ..e.clone()
                })
                .collect(),
        )
    }
}

/// Assign every record of A its cell weight.
pub fn importance_weights(a: &[TweetRecord], tables: &WeightTables) -> Result<WeightAssignment> {
    if a.len() as u64 != tables.counts.study_total() {
        return Err(Error::InvalidArgument(format!(
            "study set has {} records but the tables were counted on {}",
            a.len(),
            tables.counts.study_total()
        )));
    }
    let entries = a
        .iter()
        .map(|r| {
            let weight = tables.cell_weight(r.k, r.day).ok_or(Error::EmptyCell {
                k: r.k,
                day: r.day,
                set: "A",
            })?;
            Ok(WeightEntry {
                guid: r.guid.clone(),
                k: r.k as u8,
                day: r.day,
                weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    WeightAssignment::new(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEstimate {
    pub estimate: f64,
    /// `(Σw)² / Σw²`
    pub effective_sample_size: f64,
    pub weight_sum: f64,
    pub n: usize,
}

/// Self-normalized estimate `Σ w_i f_i / Σ w_i` over the guids in `values`.
///
/// Numerator and denominator are accumulated in the same (guid) order, so
/// a constant `f ≡ 1` yields exactly 1.
pub fn weighted_expectation(values: &BTreeMap<String, f64>, weights: &WeightAssignment) -> Result<WeightedEstimate> {
    if values.is_empty() {
        return Err(Error::Empty("weighted expectation"));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut sq = 0.0;
    for (guid, f) in values {
        let w = weights.get(guid).ok_or_else(|| Error::MissingWeight { guid: guid.clone() })?;
        num += w * f;
        den += w;
        sq += w * w;
    }
    Ok(WeightedEstimate {
        estimate: num / den,
        effective_sample_size: den * den / sq,
        weight_sum: den,
        n: values.len(),
    })
}

/// Reads `weights.csv` (`guid,k,day,weight`).
pub fn load_weights(path: &Path) -> Result<WeightAssignment> {
    read_weights(corpus_io::open(path)?, &corpus_io::source_name(path))
}

pub fn read_weights<R: Read>(reader: R, source: &str) -> Result<WeightAssignment> {
    let mut rdr = corpus_io::csv_reader(reader);
    corpus_io::expect_header(&mut rdr, source, &["guid", "k", "day", "weight"])?;
    let mut entries = Vec::new();
    for row in rdr.deserialize::<WeightEntry>() {
        let e = row.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(source, line, e)
        })?;
        if e.k > 1 {
            return Err(Error::parse(source, entries.len() + 2, format!("k must be 0 or 1, got {}", e.k)));
        }
        entries.push(e);
    }
    WeightAssignment::new(entries)
}

pub fn write_weights<W: Write>(writer: W, weights: &WeightAssignment) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for e in weights.entries() {
        w.serialize(e)?;
    }
    w.flush()
}

pub fn save_weights(path: &Path, weights: &WeightAssignment) -> Result<()> {
    corpus_io::write_file(path, |w| write_weights(w, weights))
}
