use std::collections::BTreeMap;

use serde::Serialize;
use tg_core::annotation::load_aggregated_labels;
use tg_core::corpus_io::load_scores;
use tg_core::evaluation::{crowd_scores, evaluate_classifier, reference_labels, write_pr_curve, ConflationMode};
use tg_core::{Cohort, EvalReport, ScoreTable, WeightAssignment};

use super::Context;
use crate::error::CliResult;
use crate::run::Recorder;
use crate::svg;

#[derive(Serialize)]
struct EvalDocument {
    conflation_mode: ConflationMode,
    crowd_raters: Option<u32>,
    /// Which of the two variants to read first.
    primary: &'static str,
    rows: Vec<EvalReport>,
}

fn emit(
    rec: &mut Recorder,
    rows: &mut Vec<EvalReport>,
    scores: &ScoreTable,
    reference: &BTreeMap<String, bool>,
    cohort: Cohort,
    weights: Option<&WeightAssignment>,
) -> CliResult<()> {
    let ev = evaluate_classifier(scores, reference, cohort, weights)?;
    let stem = format!(
        "pr_curve_{}_vs_{cohort}_{}",
        scores.classifier_name(),
        if weights.is_some() { "weighted" } else { "unweighted" }
    );
    rec.with(&format!("{stem}.csv"), |w| write_pr_curve(w, &ev.curve))?;
    let title = format!("{} vs {cohort} labels", scores.classifier_name());
    let doc = svg::pr_curve(&ev.curve.points, &title, &rec.svg_comment());
    rec.bytes(&format!("{stem}.svg"), doc.as_bytes())?;
    rows.push(ev.report);
    Ok(())
}

pub fn evaluate(ctx: &Context) -> CliResult<()> {
    let labels_path = ctx.input_or_output(&ctx.config.paths.aggregated_labels, "aggregate", "aggregated_labels.csv");
    let labels = load_aggregated_labels(&labels_path)?;
    let mode = ctx.config.conflation_mode;
    let crowd_n = ctx.config.evaluation.crowd_raters;
    let references = [
        (Cohort::Crowd, reference_labels(&labels, Cohort::Crowd, mode, crowd_n)?),
        (Cohort::Expert, reference_labels(&labels, Cohort::Expert, mode, None)?),
    ];
    let weights = if ctx.config.paths.weights.is_some() || ctx.weights_path().exists() {
        Some(ctx.load_weights()?)
    } else {
        None
    };
    let variants: Vec<Option<&WeightAssignment>> = match &weights {
        Some(w) => vec![Some(w), None],
        None => vec![None],
    };

    let mut rec = ctx.recorder("evaluate");
    let mut rows = Vec::new();
    for (name, path) in &ctx.config.paths.scores {
        let scores = load_scores(&ctx.resolve(path), name, ctx.config.evaluation.score_kind)?;
        for (cohort, reference) in &references {
            if reference.is_empty() {
                continue;
            }
            for w in &variants {
                emit(&mut rec, &mut rows, &scores, reference, *cohort, *w)?;
            }
        }
    }
    let crowd = crowd_scores(&labels, crowd_n)?;
    let (_, expert) = &references[1];
    if !crowd.is_empty() && !expert.is_empty() {
        for w in &variants {
            emit(&mut rec, &mut rows, &crowd, expert, Cohort::Expert, *w)?;
        }
    }
    rec.json(
        "eval_report.json",
        &EvalDocument {
            conflation_mode: mode,
            crowd_raters: crowd_n,
            primary: if weights.is_some() { "weighted" } else { "unweighted" },
            rows,
        },
    )?;
    rec.finish()
}
