//! Importance-weighted binary evaluation of scoring classifiers: PR curves,
//! the best F1 over thresholds, average precision and comparison rows.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rayon::slice::ParallelSliceMut;
use serde::{Deserialize, Serialize};

use crate::annotation::{AggregatedLabel, ContainAbuse, Label, LabelMode};
use crate::corpus_io::{column_positions, csv_line, csv_reader, open, source_name, write_file, Cohort, ScoreKind, ScoreTable};
use crate::error::{Error, Result};
use crate::weights::WeightAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub tau: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    /// One point per distinct score, by descending threshold.
    pub points: Vec<PrPoint>,
    pub total_positive_weight: f64,
    pub total_weight: f64,
}

/// Weighted precision and recall at every distinct score.
///
/// Every labeled guid needs a score (and a weight, when weights are given).
/// Scored guids without a label are ignored.
pub fn pr_curve(scores: &ScoreTable, labels: &BTreeMap<String, bool>, weights: Option<&WeightAssignment>) -> Result<PrCurve> {
    let mut items = Vec::with_capacity(labels.len());
    for (guid, &y) in labels {
        let s = scores.get(guid).ok_or_else(|| Error::GuidMismatch { guid: guid.clone() })?;
        let w = match weights {
            None => 1.0,
            Some(ws) => ws.get(guid).ok_or_else(|| Error::MissingWeight { guid: guid.clone() })?,
        };
        items.push((s, y, w));
    }
    // labels iterate in guid order, so the sort is deterministic
    items.par_sort_by(|a, b| b.0.total_cmp(&a.0));

    let total_positive_weight: f64 = items.iter().filter(|i| i.1).map(|i| i.2).sum();
    let total_weight: f64 = items.iter().map(|i| i.2).sum();
    if total_positive_weight <= 0.0 {
        return Err(Error::NoPositives);
    }
    let mut points = Vec::new();
    let (mut tp, mut kept) = (0.0, 0.0);
    let mut i = 0;
    while i < items.len() {
        let tau = items[i].0;
        while i < items.len() && items[i].0 == tau {
            let (_, y, w) = items[i];
            kept += w;
            if y {
                tp += w;
            }
            i += 1;
        }
        if kept > 0.0 {
            points.push(PrPoint {
                tau,
                precision: tp / kept,
                recall: tp / total_positive_weight,
            });
        }
    }
    Ok(PrCurve {
        points,
        total_positive_weight,
        total_weight,
    })
}

pub fn f1(precision: f64, recall: f64) -> Option<f64> {
    let s = precision + recall;
    (s > 0.0).then(|| 2.0 * precision * recall / s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Star {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub tau: f64,
}

/// Best F1 over the curve. Ties keep the higher threshold.
pub fn f1_star(curve: &PrCurve) -> Result<F1Star> {
    if curve.points.is_empty() {
        return Err(Error::Empty("PR curve"));
    }
    let mut best: Option<F1Star> = None;
    for p in &curve.points {
        let Some(f) = f1(p.precision, p.recall) else { continue };
        if best.is_none_or(|b| f > b.f1) {
            best = Some(F1Star {
                f1: f,
                precision: p.precision,
                recall: p.recall,
                tau: p.tau,
            });
        }
    }
    best.ok_or(Error::NoDefinedF1)
}

/// Step-interpolated area under the curve: `Σ (R_k − R_{k−1}) P_k`.
pub fn average_precision(curve: &PrCurve) -> Result<f64> {
    if curve.points.is_empty() {
        return Err(Error::Empty("PR curve"));
    }
    let mut prev = 0.0;
    let mut ap = 0.0;
    for p in &curve.points {
        ap += (p.recall - prev) * p.precision;
        prev = p.recall;
    }
    Ok(ap)
}

/// How three-class reference verdicts become binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflationMode {
    /// Problematic and Abusive are both positive.
    #[default]
    BinaryConflated,
    /// Only an Abusive majority is positive.
    ThreeClass,
}

/// Binary reference labels for one cohort out of aggregated verdicts.
/// `exact_n` keeps only tweets with exactly that many raters.
pub fn reference_labels(
    rows: &[AggregatedLabel],
    cohort: Cohort,
    mode: ConflationMode,
    exact_n: Option<u32>,
) -> Result<BTreeMap<String, bool>> {
    let wanted = match mode {
        ConflationMode::BinaryConflated => LabelMode::BinaryConflated,
        ConflationMode::ThreeClass => LabelMode::ThreeClass,
    };
    let mut out = BTreeMap::new();
    for r in rows {
        if r.cohort != cohort || r.mode != wanted || exact_n.is_some_and(|n| r.n != n) {
            continue;
        }
        let positive = match r.parsed_label()? {
            Label::Binary(b) => b,
            Label::Class(c) => c == ContainAbuse::Abusive,
        };
        if out.insert(r.guid.clone(), positive).is_some() {
            return Err(Error::Duplicate {
                what: "reference label",
                id: r.guid.clone(),
            });
        }
    }
    Ok(out)
}

/// The crowd's positive-vote share used as a classifier score.
pub fn crowd_scores(rows: &[AggregatedLabel], exact_n: Option<u32>) -> Result<ScoreTable> {
    let mut table = ScoreTable::new("crowd", ScoreKind::Probability);
    for r in rows {
        if r.cohort == Cohort::Crowd && r.mode == LabelMode::BinaryConflated && exact_n.is_none_or(|n| r.n == n) {
            table.insert(r.guid.clone(), r.crowd_score)?;
        }
    }
    Ok(table)
}

/// One classifier-versus-reference comparison row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier_name: String,
    pub reference_cohort: Cohort,
    pub precision_at_f1star: f64,
    pub recall_at_f1star: f64,
    pub f1_star: f64,
    pub average_precision: f64,
    pub threshold_star: f64,
    pub weighted: bool,
    pub n_evaluated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub curve: PrCurve,
}

/// Score `scores` against `reference` on the guids present in both.
pub fn evaluate_classifier(
    scores: &ScoreTable,
    reference: &BTreeMap<String, bool>,
    reference_cohort: Cohort,
    weights: Option<&WeightAssignment>,
) -> Result<Evaluation> {
    let common: BTreeMap<String, bool> = reference
        .iter()
        .filter(|(g, _)| scores.get(g).is_some())
        .map(|(g, y)| (g.clone(), *y))
        .collect();
    if common.is_empty() {
        return Err(Error::EmptyIntersection {
            classifier: scores.classifier_name().to_string(),
        });
    }
    let curve = pr_curve(scores, &common, weights)?;
    let best = f1_star(&curve)?;
    let ap = average_precision(&curve)?;
    Ok(Evaluation {
        report: EvalReport {
            classifier_name: scores.classifier_name().to_string(),
            reference_cohort,
            precision_at_f1star: best.precision,
            recall_at_f1star: best.recall,
            f1_star: best.f1,
            average_precision: ap,
            threshold_star: best.tau,
            weighted: weights.is_some(),
            n_evaluated: common.len(),
        },
        curve,
    })
}

/// `pr_curve.csv` with header `tau,precision,recall`.
pub fn write_pr_curve<W: Write>(writer: W, curve: &PrCurve) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["tau", "precision", "recall"])?;
    for p in &curve.points {
        w.write_record([p.tau.to_string(), p.precision.to_string(), p.recall.to_string()])?;
    }
    w.flush()
}

pub fn save_pr_curve(path: &Path, curve: &PrCurve) -> Result<()> {
    write_file(path, |w| write_pr_curve(w, curve))
}

/// The points of a `pr_curve.csv`. Weight totals are not stored and come
/// back as NaN.
pub fn read_pr_curve<R: Read>(reader: R, source: &str) -> Result<PrCurve> {
    let mut rdr = csv_reader(reader);
    let pos = column_positions(&mut rdr, source, &["tau", "precision", "recall"])?;
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(source, 0, e))?;
        let line = csv_line(&record);
        let num = |i: usize| -> Result<f64> {
            let s = record.get(pos[i]).unwrap_or("");
            s.parse().map_err(|e| Error::parse(source, line, format!("{s:?}: {e}")))
        };
        let p = PrPoint {
            tau: num(0)?,
            precision: num(1)?,
            recall: num(2)?,
        };
        if !(0.0..=1.0).contains(&p.precision) || !(0.0..=1.0).contains(&p.recall) {
            return Err(Error::parse(source, line, "precision and recall must lie in [0, 1]"));
        }
        points.push(p);
    }
    Ok(PrCurve {
        points,
        total_positive_weight: f64::NAN,
        total_weight: f64::NAN,
    })
}

pub fn load_pr_curve(path: &Path) -> Result<PrCurve> {
    read_pr_curve(open(path)?, &source_name(path))
}

pub fn write_eval_reports<W: Write>(writer: W, reports: &[EvalReport]) -> std::io::Result<()> {
    let mut writer = writer;
    serde_json::to_writer_pretty(&mut writer, reports)?;
    writer.write_all(b"\n")?;
    writer.flush()
}
