use std::collections::BTreeMap;

use clap::ValueEnum;
use serde::Serialize;
use tg_core::agreement::{fleiss_kappa, icc_1k, select_fixed_n};
use tg_core::annotation::group_by_tweet;
use tg_core::simplex::{class_distribution, simplex_points, simulate_chance, simulate_perfect, write_simplex_points};
use tg_core::{AnnotationCounts, Cohort};

use super::Context;
use crate::error::CliResult;
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    Perfect,
    Chance,
}

impl SimKind {
    fn as_str(self) -> &'static str {
        match self {
            SimKind::Perfect => "perfect",
            SimKind::Chance => "chance",
        }
    }
}

#[derive(Serialize)]
struct Baseline {
    kappa: f64,
    kappa_degenerate: bool,
    icc: Option<f64>,
    icc_degenerate: bool,
    pooled_frequencies: [f64; 3],
}

#[derive(Serialize)]
struct SimulationReport {
    p: [f64; 3],
    p_source: &'static str,
    n_tweets: usize,
    n_raters: u32,
    results: BTreeMap<SimKind, Baseline>,
}

/// Pooled crowd class rates over tweets reduced to exactly `n` raters.
fn estimate_p(ctx: &Context, n: u32, seed: u64) -> CliResult<[f64; 3]> {
    let anns = ctx.annotations()?;
    let groups = group_by_tweet(&anns, Cohort::Crowd);
    let sel = select_fixed_n(&groups, n as usize, seed, "simulate/estimate_p")?;
    let counts: Vec<AnnotationCounts> = sel
        .items
        .iter()
        .map(|(g, a)| AnnotationCounts::from_labels(g.clone(), a.iter().map(|x| x.contain_abuse)))
        .collect();
    Ok(class_distribution(&counts)?)
}

pub fn simulate(ctx: &Context, kinds: &[SimKind]) -> CliResult<()> {
    let seed = ctx.require_seed("simulate")?;
    let cfg = &ctx.config.simulate;
    let (p, p_source) = match cfg.p {
        Some(p) => (p, "config"),
        None => (estimate_p(ctx, cfg.n_raters, seed)?, "crowd_annotations"),
    };
    let kinds: Vec<SimKind> = if kinds.is_empty() {
        vec![SimKind::Perfect, SimKind::Chance]
    } else {
        let mut k = kinds.to_vec();
        k.sort();
        k.dedup();
        k
    };

    let mut rec = ctx.recorder("simulate");
    let mut results = BTreeMap::new();
    for kind in kinds {
        let counts = match kind {
            SimKind::Perfect => simulate_perfect(p, cfg.n_tweets, cfg.n_raters, seed)?,
            SimKind::Chance => simulate_chance(p, cfg.n_tweets, cfg.n_raters, seed)?,
        };
        let kappa = fleiss_kappa(&counts)?;
        let matrix: Vec<Vec<u8>> = counts.iter().map(AnnotationCounts::ordinal_row).collect();
        let icc = icc_1k(&matrix)?;
        results.insert(
            kind,
            Baseline {
                kappa: kappa.kappa_overall,
                kappa_degenerate: kappa.degenerate,
                icc: icc.icc,
                icc_degenerate: icc.degenerate,
                pooled_frequencies: class_distribution(&counts)?,
            },
        );
        let points = simplex_points(&counts, cfg.jitter, seed)?;
        let name = kind.as_str();
        rec.with(&format!("simplex_points_{name}.csv"), |w| write_simplex_points(w, &points))?;
        let title = format!("simulated {name} agreement, N = {}", cfg.n_raters);
        let doc = svg::simplex(&points, &title, &rec.svg_comment());
        rec.bytes(&format!("simplex_{name}.svg"), doc.as_bytes())?;
    }
    rec.json(
        "simulation_report.json",
        &SimulationReport {
            p,
            p_source,
            n_tweets: cfg.n_tweets,
            n_raters: cfg.n_raters,
            results,
        },
    )?;
    rec.finish()
}
