use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;
use tg_core::corpus_io;
use tg_core::weights::{estimate_weight_tables, importance_weights, weighted_expectation, write_weights, FlagRateEstimator};

use super::Context;
use crate::error::CliResult;

#[derive(Serialize)]
struct CellWeight {
    day: NaiveDate,
    k: u8,
    weight: f64,
    n_study: u64,
}

#[derive(Serialize)]
struct WeightSummary {
    estimator: FlagRateEstimator,
    n: usize,
    weight_sum: f64,
    effective_sample_size: f64,
    /// Self-normalized mean of the constant 1; always exactly 1.
    unit_mean: f64,
    min_weight: f64,
    max_weight: f64,
    cells: Vec<CellWeight>,
}

pub fn weigh(ctx: &Context) -> CliResult<()> {
    let (c, volumes, window) = ctx.corpus()?;
    let a_path = ctx.input_or_output(&ctx.config.paths.study_set, "sample", "A.jsonl");
    let a = corpus_io::load_tweets(&a_path, window)?;
    let estimator = if ctx.config.compat.eq19_as_printed {
        FlagRateEstimator::AsPrinted
    } else {
        FlagRateEstimator::Conditional
    };
    let tables = estimate_weight_tables(&c, &a, &volumes, estimator)?;
    let weights = importance_weights(&a, &tables)?;

    let ones: BTreeMap<String, f64> = a.iter().map(|r| (r.guid.clone(), 1.0)).collect();
    let unit = weighted_expectation(&ones, &weights)?;
    let mut cells = Vec::new();
    for (day, cell) in &tables.counts.study {
        for k in [false, true] {
            if let Some(w) = tables.cell_weight(k, *day) {
                cells.push(CellWeight {
                    day: *day,
                    k: k as u8,
                    weight: w,
                    n_study: cell.get(k),
                });
            }
        }
    }
    let ws = weights.entries().iter().map(|e| e.weight);
    let summary = WeightSummary {
        estimator,
        n: weights.len(),
        weight_sum: unit.weight_sum,
        effective_sample_size: unit.effective_sample_size,
        unit_mean: unit.estimate,
        min_weight: ws.clone().fold(f64::INFINITY, f64::min),
        max_weight: ws.fold(0.0, f64::max),
        cells,
    };

    let mut rec = ctx.recorder("weigh");
    rec.json("weight_tables.json", &tables)?;
    rec.with("weights.csv", |w| write_weights(w, &weights))?;
    rec.json("weight_summary.json", &summary)?;
    rec.finish()
}
