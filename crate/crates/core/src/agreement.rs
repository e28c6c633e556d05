//! Inter-rater agreement: Fleiss' kappa with its per-tweet and per-class
//! decomposition, the one-way ANOVA intraclass correlation, per-type kappa
//! for the multi-select abuse typology, and a report per cohort.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::{group_by_tweet, tally_counts, AbuseType, Annotation, AnnotationCounts, ContainAbuse};
use crate::corpus_io::Cohort;
use crate::error::{Error, Result};
use crate::rng::{sorted_sample, substream};
use crate::weights::WeightAssignment;

/// Items reduced to exactly `n_target` annotations each.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedNSelection<T> {
    pub items: Vec<(String, Vec<T>)>,
    /// Items with fewer than `n_target` annotations.
    pub dropped: usize,
    /// Items that had more and were subsampled.
    pub subsampled: usize,
    pub n_target: usize,
}

/// Keep items with at least `n_target` annotations, subsampling the larger
/// ones uniformly without replacement.
///
/// Each item draws from its own `(seed, purpose, guid)` stream, so adding
/// or removing items never changes another item's selection.
pub fn select_fixed_n<T>(
    groups: &BTreeMap<String, Vec<T>>,
    n_target: usize,
    seed: u64,
    purpose: &str,
) -> Result<FixedNSelection<T>>
where
    T: Clone + Send + Sync,
{
    if n_target < 2 {
        return Err(Error::InvalidArgument(format!("fixed rater count must be at least 2, got {n_target}")));
    }
    let picked: Vec<Option<(String, Vec<T>, bool)>> = groups
        .par_iter()
        .map(|(guid, items)| {
            if items.len() < n_target {
                return None;
            }
            if items.len() == n_target {
                return Some((guid.clone(), items.clone(), false));
            }
            let mut rng = substream(seed, purpose, guid);
            let kept = sorted_sample(&mut rng, items.len(), n_target)
                .into_iter()
                .map(|i| items[i].clone())
                .collect();
            Some((guid.clone(), kept, true))
        })
        .collect();
    let mut sel = FixedNSelection {
        items: Vec::with_capacity(picked.len()),
        dropped: 0,
        subsampled: 0,
        n_target,
    };
    for p in picked {
        match p {
            None => sel.dropped += 1,
            Some((guid, kept, sub)) => {
                sel.subsampled += sub as usize;
                sel.items.push((guid, kept));
            }
        }
    }
    Ok(sel)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountsSelection {
    pub counts: Vec<AnnotationCounts>,
    pub dropped: usize,
    pub subsampled: usize,
}

/// [`select_fixed_n`] over count tuples: the votes of a tweet are expanded,
/// subsampled and recounted.
pub fn select_raters(counts: &[AnnotationCounts], n_target: usize, seed: u64) -> Result<CountsSelection> {
    let mut groups = BTreeMap::new();
    for c in counts {
        if groups.insert(c.tweet_guid.clone(), c.labels()).is_some() {
            return Err(Error::Duplicate {
                what: "tweet guid",
                id: c.tweet_guid.clone(),
            });
        }
    }
    let sel = select_fixed_n(&groups, n_target, seed, "select_raters")?;
    Ok(CountsSelection {
        counts: sel
            .items
            .into_iter()
            .map(|(g, labels)| AnnotationCounts::from_labels(g, labels))
            .collect(),
        dropped: sel.dropped,
        subsampled: sel.subsampled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetKappa {
    pub guid: String,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    /// Mean of the per-tweet values. Set to 1 by convention when degenerate.
    pub kappa_overall: f64,
    /// Every annotation fell in one class, so chance correction is undefined.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub classes: Vec<String>,
    pub per_class_chance: BTreeMap<String, f64>,
    /// `Σ_c p_c²`
    pub chance_agreement: f64,
    /// Mean over tweets of each class's contribution; these sum to `kappa_overall`.
    pub per_class: BTreeMap<String, f64>,
    pub per_tweet: Vec<TweetKappa>,
    pub n_tweets: usize,
    pub n_raters: u32,
}

const DEGENERATE_WARNING: &str = "all annotations fall in a single class; kappa reported as 1 by convention";

fn kappa_core(ids: &[&str], rows: &[&[u32]], classes: &[&str], weights: Option<&[f64]>) -> Result<KappaResult> {
    let first = rows.first().ok_or(Error::Empty("kappa"))?;
    let n: u32 = first.iter().sum();
    for r in rows {
        if r.len() != classes.len() {
            return Err(Error::RaggedRows {
                row: 0,
                found: r.len(),
                expected: classes.len(),
            });
        }
        let m: u32 = r.iter().sum();
        if m != n {
            return Err(Error::MixedRaterCount { first: n, second: m });
        }
    }
    if n < 2 {
        return Err(Error::InvalidArgument("kappa needs at least 2 raters per tweet".into()));
    }
    if let Some(w) = weights {
        if w.len() != rows.len() || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidArgument("one positive weight per tweet required".into()));
        }
    }

    // pooled class distribution
    let n_classes = classes.len();
    let mut totals = vec![0u64; n_classes];
    for r in rows {
        for (t, &a) in totals.iter_mut().zip(r.iter()) {
            *t += a as u64;
        }
    }
    let p: Vec<f64> = match weights {
        None => {
            let all = (rows.len() as u64 * n as u64) as f64;
            totals.iter().map(|&t| t as f64 / all).collect()
        }
        Some(w) => {
            let mut acc = vec![0.0; n_classes];
            for (r, wt) in rows.iter().zip(w) {
                for (s, &a) in acc.iter_mut().zip(r.iter()) {
                    *s += wt * a as f64;
                }
            }
            let all: f64 = w.iter().sum::<f64>() * n as f64;
            acc.into_iter().map(|s| s / all).collect()
        }
    };
    let chance: f64 = p.iter().map(|x| x * x).sum();
    let degenerate = totals.iter().filter(|&&t| t > 0).count() == 1;
    let pairs = (n as u64 * (n as u64 - 1)) as f64;
    let denom = 1.0 - chance;

    let contribution = |c: usize, a: u32| {
        if degenerate {
            (totals[c] > 0) as u8 as f64
        } else {
            ((a as u64 * (a as u64).saturating_sub(1)) as f64 / pairs - p[c] * p[c]) / denom
        }
    };
    let mut per_tweet = Vec::with_capacity(rows.len());
    let mut class_sums = vec![0.0; n_classes];
    let mut weight_sum = 0.0;
    let mut kappa_sum = 0.0;
    for (i, (id, r)) in ids.iter().zip(rows).enumerate() {
        let agreeing: u64 = r.iter().map(|&a| a as u64 * (a as u64).saturating_sub(1)).sum();
        let kappa = if degenerate {
            1.0
        } else {
            (agreeing as f64 / pairs - chance) / denom
        };
        let wt = weights.map_or(1.0, |w| w[i]);
        for (c, s) in class_sums.iter_mut().enumerate() {
            *s += wt * contribution(c, r[c]);
        }
        weight_sum += wt;
        kappa_sum += wt * kappa;
        per_tweet.push(TweetKappa {
            guid: id.to_string(),
            kappa,
        });
    }
    let kappa_overall = kappa_sum / weight_sum;
    let per_class_mean: Vec<f64> = class_sums.iter().map(|s| s / weight_sum).collect();

    let names: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
    Ok(KappaResult {
        kappa_overall,
        degenerate,
        warning: degenerate.then(|| DEGENERATE_WARNING.to_string()),
        per_class_chance: names.iter().cloned().zip(p.iter().copied()).collect(),
        chance_agreement: chance,
        per_class: names.iter().cloned().zip(per_class_mean).collect(),
        classes: names,
        per_tweet,
        n_tweets: rows.len(),
        n_raters: n,
    })
}

const CONTAIN_ABUSE_CLASSES: [&str; 3] = ["no", "problematic", "abusive"];

/// Fleiss' kappa over fixed-N three-class counts.
pub fn fleiss_kappa(counts: &[AnnotationCounts]) -> Result<KappaResult> {
    let ids: Vec<&str> = counts.iter().map(|c| c.tweet_guid.as_str()).collect();
    let rows: Vec<&[u32]> = counts.iter().map(|c| &c.counts[..]).collect();
    kappa_core(&ids, &rows, &CONTAIN_ABUSE_CLASSES, None)
}

/// Importance-weighted variant: class rates and the tweet average both use
/// `weights` (one per tweet, same order).
pub fn fleiss_kappa_weighted(counts: &[AnnotationCounts], weights: &[f64]) -> Result<KappaResult> {
    let ids: Vec<&str> = counts.iter().map(|c| c.tweet_guid.as_str()).collect();
    let rows: Vec<&[u32]> = counts.iter().map(|c| &c.counts[..]).collect();
    kappa_core(&ids, &rows, &CONTAIN_ABUSE_CLASSES, Some(weights))
}

/// Fleiss' kappa over arbitrary nominal classes.
pub fn fleiss_kappa_categorical(ids: &[&str], rows: &[Vec<u32>], classes: &[&str]) -> Result<KappaResult> {
    if ids.len() != rows.len() {
        return Err(Error::InvalidArgument("one id per row required".into()));
    }
    let rows: Vec<&[u32]> = rows.iter().map(Vec::as_slice).collect();
    kappa_core(ids, &rows, classes, None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    /// `None` when the matrix is constant.
    pub icc: Option<f64>,
    /// Mean within-tweet variance.
    pub v_w: f64,
    /// Between-tweet variance.
    pub v_b: f64,
    pub grand_mean: f64,
    pub row_means: Vec<f64>,
    pub n_raters: usize,
    pub n_tweets: usize,
    pub degenerate: bool,
}

/// ICC(1,k) of an ordinal annotation matrix with values in {0, 1, 2}.
/// Columns carry no meaning; raters are exchangeable.
pub fn icc_1k(matrix: &[Vec<u8>]) -> Result<IccResult> {
    let mut values = Vec::with_capacity(matrix.len());
    for (i, row) in matrix.iter().enumerate() {
        if let Some(&v) = row.iter().find(|&&v| v > 2) {
            return Err(Error::OrdinalOutOfRange { row: i, value: v });
        }
        values.push(row.iter().map(|&v| v as f64).collect::<Vec<_>>());
    }
    icc_from_values(&values)
}

/// ICC(1,k) for a real-valued matrix.
pub fn icc_from_values(matrix: &[Vec<f64>]) -> Result<IccResult> {
    if matrix.len() < 2 {
        return Err(Error::InvalidArgument("icc needs at least 2 tweets".into()));
    }
    let n = matrix[0].len();
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(Error::RaggedRows {
                row: i,
                found: row.len(),
                expected: n,
            });
        }
    }
    if n < 2 {
        return Err(Error::InvalidArgument("icc needs at least 2 raters per tweet".into()));
    }
    let nf = n as f64;
    let t = matrix.len() as f64;
    let row_means: Vec<f64> = matrix.iter().map(|r| r.iter().sum::<f64>() / nf).collect();
    let v_w = matrix
        .iter()
        .zip(&row_means)
        .map(|(r, m)| r.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / t;
    let grand_mean = row_means.iter().sum::<f64>() / t;
    let v_b = nf * row_means.iter().map(|m| (m - grand_mean) * (m - grand_mean)).sum::<f64>() / (t - 1.0);
    let denom = v_b + (nf - 1.0) * v_w;
    let degenerate = denom == 0.0;
    Ok(IccResult {
        icc: (!degenerate).then(|| (v_b - v_w) / denom),
        v_w,
        v_b,
        grand_mean,
        row_means,
        n_raters: n,
        n_tweets: matrix.len(),
        degenerate,
    })
}

const PRESENCE_CLASSES: [&str; 2] = ["absent", "present"];

/// Binary kappa for one abuse type: per tweet, how many of the selected
/// raters marked it versus not.
pub fn per_type_kappa(selection: &[(String, Vec<Annotation>)], abuse_type: AbuseType) -> Result<KappaResult> {
    let ids: Vec<&str> = selection.iter().map(|(g, _)| g.as_str()).collect();
    let rows: Vec<Vec<u32>> = selection
        .iter()
        .map(|(_, anns)| {
            let marked = anns.iter().filter(|a| a.types.contains(&abuse_type)).count() as u32;
            vec![anns.len() as u32 - marked, marked]
        })
        .collect();
    fleiss_kappa_categorical(&ids, &rows, &PRESENCE_CLASSES)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeKappa {
    pub kappa: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeAgreement {
    pub per_type: BTreeMap<String, TypeKappa>,
    /// Average over the non-degenerate types; `None` when all are degenerate.
    pub macro_kappa: Option<f64>,
    pub degenerate_types: Vec<String>,
}

pub fn type_agreement(selection: &[(String, Vec<Annotation>)]) -> Result<TypeAgreement> {
    let mut per_type = BTreeMap::new();
    let mut live = Vec::new();
    let mut degenerate_types = Vec::new();
    for ty in AbuseType::ALL {
        let k = per_type_kappa(selection, ty)?;
        if k.degenerate {
            degenerate_types.push(ty.as_str().to_string());
        } else {
            live.push(k.kappa_overall);
        }
        per_type.insert(
            ty.as_str().to_string(),
            TypeKappa {
                kappa: k.kappa_overall,
                degenerate: k.degenerate,
            },
        );
    }
    let macro_kappa = (!live.is_empty()).then(|| live.iter().sum::<f64>() / live.len() as f64);
    Ok(TypeAgreement {
        per_type,
        macro_kappa,
        degenerate_types,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    ContainAbuse,
    TypeOfAbuse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    InsufficientData,
}

/// One (variable, cohort) cell of the agreement table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementCell {
    pub status: CellStatus,
    pub kappa: Option<f64>,
    pub kappa_degenerate: bool,
    /// Absent for the abuse types, where ICC is not defined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icc: Option<IccCell>,
    pub n_tweets: usize,
    pub n_dropped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IccCell {
    /// `None` when degenerate or when fewer than two tweets were kept.
    pub value: Option<f64>,
    pub degenerate: bool,
}

impl AgreementCell {
    fn insufficient(with_icc: bool, n_dropped: usize) -> Self {
        AgreementCell {
            status: CellStatus::InsufficientData,
            kappa: None,
            kappa_degenerate: false,
            icc: with_icc.then_some(IccCell {
                value: None,
                degenerate: false,
            }),
            n_tweets: 0,
            n_dropped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub variable: Variable,
    pub cohorts: BTreeMap<Cohort, AgreementCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub n_target: usize,
    pub seed: u64,
    pub weighted: bool,
    pub rows: Vec<AgreementRow>,
    pub type_breakdown: BTreeMap<Cohort, TypeAgreement>,
    pub notes: Vec<String>,
}

/// Per-cohort working data behind the contain-abuse row.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortAgreement {
    pub counts: Vec<AnnotationCounts>,
    pub kappa: Option<KappaResult>,
    pub icc: Option<IccResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementAnalysis {
    pub report: AgreementReport,
    pub contain_abuse: BTreeMap<Cohort, CohortAgreement>,
}

#[derive(Debug, Clone, Copy)]
pub struct AgreementOptions<'a> {
    pub n_target: usize,
    pub seed: u64,
    /// Importance weights for the weighted kappa variant.
    pub weights: Option<&'a WeightAssignment>,
}

fn check_groups(groups: &BTreeMap<String, Vec<Annotation>>) -> Result<()> {
    groups.values().try_for_each(|g| tally_counts(g).map(|_| ()))
}

/// Agreement for every cohort on the contain-abuse answer (kappa and ICC)
/// and the abuse types (per-type kappa, macro-averaged).
pub fn agreement_report(annotations: &[Annotation], opts: AgreementOptions<'_>) -> Result<AgreementAnalysis> {
    let mut abuse_row = BTreeMap::new();
    let mut type_row = BTreeMap::new();
    let mut type_breakdown = BTreeMap::new();
    let mut details = BTreeMap::new();

    for cohort in Cohort::ALL {
        let groups = group_by_tweet(annotations, cohort);
        check_groups(&groups)?;
        let purpose = format!("select_raters/{cohort}/contain_abuse");
        let sel = select_fixed_n(&groups, opts.n_target, opts.seed, &purpose)?;
        let counts: Vec<AnnotationCounts> = sel
            .items
            .iter()
            .map(|(g, anns)| AnnotationCounts::from_labels(g.clone(), anns.iter().map(|a| a.contain_abuse)))
            .collect();
        if counts.is_empty() {
            abuse_row.insert(cohort, AgreementCell::insufficient(true, sel.dropped));
            details.insert(
                cohort,
                CohortAgreement {
                    counts,
                    kappa: None,
                    icc: None,
                },
            );
        } else {
            let kappa = match opts.weights {
                None => fleiss_kappa(&counts)?,
                Some(w) => {
                    let ws = counts
                        .iter()
                        .map(|c| w.get(&c.tweet_guid).ok_or_else(|| Error::MissingWeight { guid: c.tweet_guid.clone() }))
                        .collect::<Result<Vec<_>>>()?;
                    fleiss_kappa_weighted(&counts, &ws)?
                }
            };
            let icc = if counts.len() >= 2 {
                let matrix: Vec<Vec<u8>> = counts.iter().map(AnnotationCounts::ordinal_row).collect();
                Some(icc_1k(&matrix)?)
            } else {
                None
            };
            abuse_row.insert(
                cohort,
                AgreementCell {
                    status: CellStatus::Ok,
                    kappa: Some(kappa.kappa_overall),
                    kappa_degenerate: kappa.degenerate,
                    icc: Some(IccCell {
                        value: icc.as_ref().and_then(|i| i.icc),
                        degenerate: icc.as_ref().is_some_and(|i| i.degenerate),
                    }),
                    n_tweets: counts.len(),
                    n_dropped: sel.dropped,
                },
            );
            details.insert(
                cohort,
                CohortAgreement {
                    counts,
                    kappa: Some(kappa),
                    icc,
                },
            );
        }

        // abuse types: only annotations that answered something other than No
        let positive: Vec<Annotation> = annotations
            .iter()
            .filter(|a| a.cohort == cohort && a.contain_abuse != ContainAbuse::No)
            .cloned()
            .collect();
        let groups = group_by_tweet(&positive, cohort);
        let purpose = format!("select_raters/{cohort}/type_of_abuse");
        let sel = select_fixed_n(&groups, opts.n_target, opts.seed, &purpose)?;
        if sel.items.is_empty() {
            type_row.insert(cohort, AgreementCell::insufficient(false, sel.dropped));
            continue;
        }
        let types = type_agreement(&sel.items)?;
        type_row.insert(
            cohort,
            AgreementCell {
                status: if types.macro_kappa.is_some() {
                    CellStatus::Ok
                } else {
                    CellStatus::InsufficientData
                },
                kappa: types.macro_kappa,
                kappa_degenerate: types.macro_kappa.is_none(),
                icc: None,
                n_tweets: sel.items.len(),
                n_dropped: sel.dropped,
            },
        );
        type_breakdown.insert(cohort, types);
    }

    let mut notes = vec![
        format!(
            "tweets with fewer than {n} annotations are dropped; tweets with more are reduced to {n} randomly chosen raters",
            n = opts.n_target
        ),
        "class rates p_c are pooled over the selected annotations only".to_string(),
        "type_of_abuse kappa is the mean of per-type binary (marked / not marked) kappas over tweets with at least n_target non-No annotations; types where every rater agrees trivially are excluded from the mean".to_string(),
    ];
    if opts.weights.is_some() {
        notes.push("kappa is importance-weighted; ICC is unweighted".to_string());
    }
    Ok(AgreementAnalysis {
        report: AgreementReport {
            n_target: opts.n_target,
            seed: opts.seed,
            weighted: opts.weights.is_some(),
            rows: vec![
                AgreementRow {
                    variable: Variable::ContainAbuse,
                    cohorts: abuse_row,
                },
                AgreementRow {
                    variable: Variable::TypeOfAbuse,
                    cohorts: type_row,
                },
            ],
            type_breakdown,
            notes,
        },
        contain_abuse: details,
    })
}

/// Per-tweet kappa dump, header `guid,kappa_t`.
pub fn write_tweet_kappas<W: std::io::Write>(writer: W, rows: &[TweetKappa]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["guid", "kappa_t"])?;
    for r in rows {
        w.write_record([r.guid.as_str(), &r.kappa.to_string()])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn counts(rows: &[[u32; 3]]) -> Vec<AnnotationCounts> {
        rows.iter()
            .enumerate()
            .map(|(i, c)| AnnotationCounts::new(format!("t{i}"), *c))
            .collect()
    }

    /// Reference computation from the textbook pair-counting definition:
    /// observed agreement is the share of agreeing ordered rater pairs,
    /// expected agreement the chance two random annotations coincide.
    fn reference_kappa(rows: &[[u32; 3]]) -> f64 {
        let n = rows[0].iter().sum::<u32>() as f64;
        let t = rows.len() as f64;
        let mut pooled = [0.0; 3];
        let mut observed = 0.0;
        for r in rows {
            let votes: Vec<usize> = (0..3).flat_map(|c| std::iter::repeat_n(c, r[c] as usize)).collect();
            let mut agree = 0.0;
            for i in 0..votes.len() {
                for j in 0..votes.len() {
                    if i != j && votes[i] == votes[j] {
                        agree += 1.0;
                    }
                }
                pooled[votes[i]] += 1.0;
            }
            observed += agree / (n * (n - 1.0));
        }
        let total = t * n;
        let expected: f64 = pooled.iter().map(|c| (c / total) * (c / total)).sum();
        (observed / t - expected) / (1.0 - expected)
    }

    #[test]
    fn worked_kappa() {
        let rows = [[3, 0, 0], [0, 3, 0], [1, 1, 1], [2, 1, 0]];
        let k = fleiss_kappa(&counts(&rows)).unwrap();
        assert!((k.kappa_overall - 22.0 / 82.0).abs() < 1e-15);
        assert!((k.kappa_overall - 0.268293).abs() < 1e-6);
        assert!((reference_kappa(&rows) - k.kappa_overall).abs() < 1e-12);
        assert!((k.chance_agreement - 62.0 / 144.0).abs() < 1e-15);
        assert!((k.per_class_chance["no"] - 0.5).abs() < 1e-15);
        let sum: f64 = k.per_class.values().sum();
        assert!((sum - k.kappa_overall).abs() < 1e-12);
        assert!(!k.degenerate);
        assert_eq!(k.n_tweets, 4);
        assert_eq!(k.n_raters, 3);
    }

    #[test]
    fn perfect_two_class_agreement() {
        let k = fleiss_kappa(&counts(&[[3, 0, 0], [0, 0, 3], [3, 0, 0], [0, 0, 3]])).unwrap();
        assert_eq!(k.kappa_overall, 1.0);
        assert!(k.per_tweet.iter().all(|t| t.kappa == 1.0));
    }

    #[test]
    fn uniform_split_gives_minus_half() {
        let k = fleiss_kappa(&counts(&[[1, 1, 1], [1, 1, 1]])).unwrap();
        for t in &k.per_tweet {
            assert!((t.kappa + 0.5).abs() < 1e-15);
        }
        assert!((reference_kappa(&[[1, 1, 1], [1, 1, 1]]) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_single_class() {
        let k = fleiss_kappa(&counts(&[[3, 0, 0], [3, 0, 0]])).unwrap();
        assert!(k.degenerate);
        assert_eq!(k.kappa_overall, 1.0);
        assert!(k.warning.is_some());
    }

    #[test]
    fn kappa_errors() {
        assert!(matches!(fleiss_kappa(&[]), Err(Error::Empty(_))));
        assert!(matches!(
            fleiss_kappa(&counts(&[[3, 0, 0], [1, 1, 0]])),
            Err(Error::MixedRaterCount { .. })
        ));
        assert!(fleiss_kappa(&counts(&[[1, 0, 0]])).is_err());
    }

    #[test]
    fn weighted_kappa_with_unit_weights_matches() {
        let c = counts(&[[3, 0, 0], [0, 3, 0], [1, 1, 1], [2, 1, 0]]);
        let a = fleiss_kappa(&c).unwrap();
        let b = fleiss_kappa_weighted(&c, &[1.0; 4]).unwrap();
        assert!((a.kappa_overall - b.kappa_overall).abs() < 1e-12);
        let s = fleiss_kappa_weighted(&c, &[3.0; 4]).unwrap();
        assert!((a.kappa_overall - s.kappa_overall).abs() < 1e-12);
        assert!(fleiss_kappa_weighted(&c, &[1.0; 3]).is_err());
    }

    #[test]
    fn icc_worked_cases() {
        let r = icc_1k(&[vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        assert_eq!(r.v_w, 1.0);
        assert_eq!(r.v_b, 0.0);
        assert_eq!(r.icc, Some(-0.5));

        let r = icc_1k(&[vec![0, 0, 0], vec![2, 2, 2]]).unwrap();
        assert_eq!(r.v_w, 0.0);
        assert_eq!(r.icc, Some(1.0));

        let r = icc_1k(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.icc, None);
    }

    #[test]
    fn icc_errors() {
        assert!(matches!(icc_1k(&[vec![0, 1], vec![0, 1, 2]]), Err(Error::RaggedRows { row: 1, .. })));
        assert!(matches!(
            icc_1k(&[vec![0, 3, 1], vec![0, 1, 2]]),
            Err(Error::OrdinalOutOfRange { row: 0, value: 3 })
        ));
        assert!(icc_1k(&[vec![0, 1, 2]]).is_err());
    }

    #[test]
    fn per_type_single_tweet() {
        let mk = |rater: &str, marked: bool| Annotation {
            tweet_guid: "t".into(),
            rater_id: rater.into(),
            cohort: Cohort::Crowd,
            contain_abuse: ContainAbuse::Abusive,
            types: if marked {
                BTreeSet::from([AbuseType::Racism])
            } else {
                BTreeSet::from([AbuseType::Other])
            },
            medium: None,
        };
        let sel = vec![("t".to_string(), vec![mk("a", true), mk("b", true), mk("c", false)])];
        let k = per_type_kappa(&sel, AbuseType::Racism).unwrap();
        // (1/3 - (4/9 + 1/9)) / (1 - 5/9)
        assert!((k.per_tweet[0].kappa + 0.5).abs() < 1e-12);

        let all = vec![("t".to_string(), vec![mk("a", true), mk("b", true), mk("c", true)])];
        let k = per_type_kappa(&all, AbuseType::Racism).unwrap();
        assert!(k.degenerate);
        assert_eq!(k.kappa_overall, 1.0);
    }

    #[test]
    fn select_raters_contract() {
        let input = vec![
            AnnotationCounts::new("five", [2, 2, 1]),
            AnnotationCounts::new("two", [1, 1, 0]),
            AnnotationCounts::new("three", [0, 1, 2]),
        ];
        let s = select_raters(&input, 3, 11).unwrap();
        assert_eq!(s.dropped, 1);
        assert_eq!(s.subsampled, 1);
        assert_eq!(s.counts.len(), 2);
        assert!(s.counts.iter().all(|c| c.n() == 3));
        let five = s.counts.iter().find(|c| c.tweet_guid == "five").unwrap();
        assert!(five.counts.iter().zip([2, 2, 1]).all(|(got, had)| *got <= had));
        let three = s.counts.iter().find(|c| c.tweet_guid == "three").unwrap();
        assert_eq!(three.counts, [0, 1, 2]);
        assert_eq!(select_raters(&input, 3, 11).unwrap(), s);
        assert!(select_raters(&input, 1, 11).is_err());
        assert_eq!(select_raters(&[], 3, 1).unwrap().counts.len(), 0);
    }

    #[test]
    fn selection_is_stable_when_tweets_are_added() {
        let mut groups: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        groups.insert("a".into(), (0..9).collect());
        let before = select_fixed_n(&groups, 3, 5, "p").unwrap();
        groups.insert("b".into(), (0..7).collect());
        groups.insert("0".into(), (0..7).collect());
        let after = select_fixed_n(&groups, 3, 5, "p").unwrap();
        let pick = |s: &FixedNSelection<u32>| s.items.iter().find(|(g, _)| g == "a").unwrap().1.clone();
        assert_eq!(pick(&before), pick(&after));
    }
}
