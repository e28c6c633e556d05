use std::collections::BTreeMap;

use serde::Serialize;
use tg_core::annotation::{aggregate_labels, summarize, write_aggregated_labels, CohortSummary};
use tg_core::corpus_io::{cohort_counts, write_scores};
use tg_core::evaluation::crowd_scores;
use tg_core::{Cohort, ConflationOrder};

use super::Context;
use crate::error::CliResult;

#[derive(Serialize)]
struct AnnotationReport {
    conflation_order: ConflationOrder,
    raw_counts: BTreeMap<Cohort, usize>,
    cohorts: BTreeMap<Cohort, CohortSummary>,
}

pub(super) fn conflation_order(ctx: &Context) -> ConflationOrder {
    if ctx.config.compat.vote_then_conflate {
        ConflationOrder::VoteThenConflate
    } else {
        ConflationOrder::ConflateThenVote
    }
}

pub fn aggregate(ctx: &Context) -> CliResult<()> {
    let raw = ctx.raw_annotations()?;
    let raw_counts = cohort_counts(&raw);
    let anns = tg_core::annotation::validate_all(&raw, &ctx.media()?)?;
    let order = conflation_order(ctx);
    let rows = aggregate_labels(&anns, order)?;
    let scores = crowd_scores(&rows, None)?;

    let mut rec = ctx.recorder("aggregate");
    rec.with("aggregated_labels.csv", |w| write_aggregated_labels(w, &rows))?;
    rec.with("crowd_scores.csv", |w| write_scores(w, &scores))?;
    rec.json(
        "annotation_summary.json",
        &AnnotationReport {
            conflation_order: order,
            raw_counts,
            cohorts: summarize(&anns),
        },
    )?;
    rec.finish()
}
