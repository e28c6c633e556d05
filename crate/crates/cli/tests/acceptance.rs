//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so every line is printed whether it passes or not.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tg_core::agreement::{fleiss_kappa, icc_1k};
use tg_core::annotation::{majority_label, three_class_majority};
use tg_core::evaluation::{average_precision, f1_star, pr_curve, PrPoint};
use tg_core::sampling::{build_study_set, enrich, stratified_daily_sample};
use tg_core::simplex::{to_simplex, VERTICES};
use tg_core::synthetic::{generate_world, WorldConfig};
use tg_core::weights::{
    estimate_weight_tables, importance_weights, load_weights, weighted_expectation, FlagRateEstimator, WeightEntry,
};
use tg_core::{
    AnnotationCounts, ConflationOrder, ContainAbuse, Label, LabelMode, ScoreKind, ScoreTable, TweetRecord,
    VolumeTable, WeightAssignment,
};

use common::{ok, read_json, run_pipeline, snapshot, tg};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn day(n: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2017, 1, n).unwrap()
}

fn simulate(dir: &Path, kind: &str, p: &str, seed: u64) -> (serde_json::Value, Duration, bool) {
    std::fs::write(dir.join("config.json"), r#"{"paths": {}}"#).unwrap();
    let p = format!("simulate.p={p}");
    let seed = seed.to_string();
    let args = [
        "simulate",
        kind,
        "--config",
        "config.json",
        "--seed",
        &seed,
        "--set",
        &p,
        "--set",
        "simulate.n_tweets=10000",
        "--set",
        "simulate.n_raters=3",
    ];
    let t0 = Instant::now();
    let out = tg(dir, &args, None);
    let elapsed = t0.elapsed();
    if !ok(&out) {
        return (serde_json::Value::Null, elapsed, false);
    }
    let report = read_json(&dir.join("out/simulate/simulation_report.json"));
    (report["results"][kind].clone(), elapsed, true)
}

fn chance_calibration() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (r, elapsed, ran) = simulate(dir.path(), "chance", "[0.5,0.3,0.2]", 2017);
    if !ran {
        return outcome(false, "simulate chance failed");
    }
    let kappa = r["kappa"].as_f64().unwrap_or(f64::NAN);
    let icc = r["icc"].as_f64().unwrap_or(f64::NAN);
    let pass = kappa.abs() < 0.03 && icc.abs() < 0.03 && elapsed < Duration::from_secs(5);
    outcome(pass, format!("kappa={kappa:.5} icc={icc:.5} runtime={:.2}s", elapsed.as_secs_f64()))
}

fn perfect_limit() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (r, _, ran) = simulate(dir.path(), "perfect", "[0.5,0.3,0.2]", 2017);
    if !ran {
        return outcome(false, "simulate perfect failed");
    }
    let kappa = r["kappa"].as_f64();
    let icc = r["icc"].as_f64();
    outcome(
        kappa == Some(1.0) && icc == Some(1.0) && r["kappa_degenerate"] == false,
        format!("kappa={kappa:?} icc={icc:?}"),
    )
}

/// Fleiss kappa by pair enumeration: expand each tweet into its vote list
/// and count the ordered pairs of distinct raters that agree.
fn kappa_by_pairs(tweets: &[[u32; 3]]) -> f64 {
    let votes: Vec<Vec<usize>> = tweets
        .iter()
        .map(|c| (0..3).flat_map(|k| std::iter::repeat_n(k, c[k] as usize)).collect())
        .collect();
    let all: Vec<usize> = votes.iter().flatten().copied().collect();
    let p: Vec<f64> = (0..3)
        .map(|k| all.iter().filter(|&&v| v == k).count() as f64 / all.len() as f64)
        .collect();
    let pe: f64 = p.iter().map(|x| x * x).sum();
    let per_tweet: Vec<f64> = votes
        .iter()
        .map(|v| {
            let n = v.len();
            let mut agree = 0usize;
            for i in 0..n {
                for j in 0..n {
                    if i != j && v[i] == v[j] {
                        agree += 1;
                    }
                }
            }
            let po = agree as f64 / (n * (n - 1)) as f64;
            (po - pe) / (1.0 - pe)
        })
        .collect();
    per_tweet.iter().sum::<f64>() / per_tweet.len() as f64
}

fn kappa_oracle() -> Outcome {
    let tweets = [[3, 0, 0], [0, 3, 0], [1, 1, 1], [2, 1, 0]];
    let counts: Vec<AnnotationCounts> = tweets
        .iter()
        .enumerate()
        .map(|(i, c)| AnnotationCounts::new(format!("t{i}"), *c))
        .collect();
    let got = match fleiss_kappa(&counts) {
        Ok(k) => k.kappa_overall,
        Err(e) => return outcome(false, e.to_string()),
    };
    let reference = kappa_by_pairs(&tweets);
    outcome(
        (got - 0.268293).abs() < 1e-6 && (got - reference).abs() < 1e-12,
        format!("kappa={got:.9} reference={reference:.9}"),
    )
}

fn icc_oracle() -> Outcome {
    let a = icc_1k(&[vec![0, 1, 2], vec![0, 1, 2]]).map(|r| r.icc);
    let b = icc_1k(&[vec![0, 0, 0], vec![2, 2, 2]]).map(|r| r.icc);
    let c = icc_1k(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]);
    let degenerate = c.as_ref().is_ok_and(|r| r.degenerate && r.icc.is_none());
    let pass = matches!(a, Ok(Some(v)) if v == -0.5) && matches!(b, Ok(Some(v)) if v == 1.0) && degenerate;
    outcome(pass, format!("{a:?} {b:?} constant-degenerate={degenerate}"))
}

fn records(prefix: &str, d: NaiveDate, n: usize, flagged: usize) -> Vec<TweetRecord> {
    (0..n)
        .map(|i| TweetRecord::new(format!("{prefix}-{d}-{i}"), d, i < flagged))
        .collect()
}

fn weights_oracle() -> Outcome {
    // cell weights on the hand-counted two-day corpus
    let mut c = records("c", day(1), 10, 2);
    c.extend(records("c", day(2), 10, 5));
    let a: Vec<TweetRecord> = c
        .iter()
        .filter(|r| {
            let i: usize = r.guid.rsplit('-').next().unwrap().parse().unwrap();
            if r.day == day(1) {
                i <= 3
            } else {
                matches!(i, 0 | 1 | 2 | 5)
            }
        })
        .cloned()
        .collect();
    let volumes = VolumeTable::new(BTreeMap::from([(day(1), 100), (day(2), 300)])).unwrap();
    let tables = estimate_weight_tables(&c, &a, &volumes, FlagRateEstimator::Conditional).unwrap();
    let w = importance_weights(&a, &tables).unwrap();
    let cell = |k: bool, d: NaiveDate| {
        let ws: Vec<f64> = w.entries().iter().filter(|e| (e.k == 1) == k && e.day == d).map(|e| e.weight).collect();
        ws.windows(2).all(|p| p[0] == p[1]).then(|| ws[0])
    };
    let got = [cell(true, day(1)), cell(false, day(1)), cell(true, day(2)), cell(false, day(2))];
    let exact = got == [Some(0.2), Some(0.8), Some(1.0), Some(3.0)];

    // prevalence recovery on an enriched study set
    let world = generate_world(&WorldConfig {
        start: day(1),
        days: 10,
        records_per_day: 10_000,
        volume_factor: (20, 200),
        flag_rate: 0.1,
        flag_rate_spread: 0.0,
        positive_given_flag: 0.7,
        positive_given_unflagged: 1.0 / 30.0,
        abusive_share: 0.5,
        seed: 11,
    })
    .unwrap();
    let truth = world.population_prevalence();
    let b = stratified_daily_sample(&world.corpus, &world.volumes, 5000, 11).unwrap();
    let f = enrich(&world.corpus, &b.members, 5000, 11).unwrap();
    let study = build_study_set(&b, &f, 11).unwrap().members;
    let tables = estimate_weight_tables(&world.corpus, &study, &world.volumes, FlagRateEstimator::Conditional).unwrap();
    let weights = importance_weights(&study, &tables).unwrap();
    let values: BTreeMap<String, f64> = study
        .iter()
        .map(|r| (r.guid.clone(), world.is_positive(&r.guid) as u8 as f64))
        .collect();
    let est = weighted_expectation(&values, &weights).unwrap().estimate;
    // delta-method standard error of the self-normalized estimator
    let (mut sq, mut sum) = (0.0, 0.0);
    for (g, v) in &values {
        let wi = weights.get(g).unwrap();
        sq += wi * wi * (v - est) * (v - est);
        sum += wi;
    }
    let se = sq.sqrt() / sum;
    let unweighted = values.values().sum::<f64>() / values.len() as f64;
    let recovered = (est - truth).abs() < 3.0 * se;
    let biased = (unweighted - truth).abs() > 0.15;
    outcome(
        exact && recovered && biased,
        format!(
            "cells={got:?} truth={truth:.4} weighted={est:.4} se={se:.4} unweighted={unweighted:.4} |A|={}",
            study.len()
        ),
    )
}

fn ones_identity(w: &WeightAssignment) -> bool {
    let ones: BTreeMap<String, f64> = w.entries().iter().map(|e| (e.guid.clone(), 1.0)).collect();
    weighted_expectation(&ones, w).is_ok_and(|e| e.estimate == 1.0)
}

fn self_normalization(synthetic_weights: Option<&WeightAssignment>) -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut checked = 0;
    let mut all = true;
    for _ in 0..200 {
        let n = rng.random_range(1..=500);
        let entries = (0..n)
            .map(|i| WeightEntry {
                guid: format!("g{i}"),
                k: rng.random_range(0..=1),
                day: day(1),
                weight: rng.random_range(1e-6..1e3),
            })
            .collect();
        all &= ones_identity(&WeightAssignment::new(entries).unwrap());
        checked += 1;
    }
    match synthetic_weights {
        Some(w) => {
            all &= ones_identity(w);
            checked += 1;
        }
        None => all = false,
    }
    outcome(all, format!("{checked} weight sets, including the synthetic fixture"))
}

/// Precision and recall at every distinct threshold by direct summation.
fn brute_force_points(items: &[(f64, bool, f64)]) -> Vec<PrPoint> {
    let mut taus: Vec<f64> = items.iter().map(|i| i.0).collect();
    taus.sort_by(|a, b| b.total_cmp(a));
    taus.dedup();
    let pos: f64 = items.iter().filter(|i| i.1).map(|i| i.2).sum();
    taus.into_iter()
        .map(|tau| {
            let kept: f64 = items.iter().filter(|i| i.0 >= tau).map(|i| i.2).sum();
            let tp: f64 = items.iter().filter(|i| i.0 >= tau && i.1).map(|i| i.2).sum();
            PrPoint {
                tau,
                precision: tp / kept,
                recall: tp / pos,
            }
        })
        .collect()
}

fn brute_force_metrics(points: &[PrPoint]) -> (f64, f64) {
    let mut best = f64::NEG_INFINITY;
    for p in points {
        if p.precision + p.recall > 0.0 {
            best = best.max(2.0 * p.precision * p.recall / (p.precision + p.recall));
        }
    }
    let mut ap = 0.0;
    for (i, p) in points.iter().enumerate() {
        let prev = if i == 0 { 0.0 } else { points[i - 1].recall };
        ap += (p.recall - prev) * p.precision;
    }
    (best, ap)
}

fn instance(items: &[(f64, bool, f64)]) -> (ScoreTable, BTreeMap<String, bool>, WeightAssignment) {
    let scores = ScoreTable::from_pairs(
        "random",
        ScoreKind::Probability,
        items.iter().enumerate().map(|(i, it)| (format!("t{i:03}"), it.0)),
    )
    .unwrap();
    let labels = items.iter().enumerate().map(|(i, it)| (format!("t{i:03}"), it.1)).collect();
    let weights = WeightAssignment::new(
        items
            .iter()
            .enumerate()
            .map(|(i, it)| WeightEntry {
                guid: format!("t{i:03}"),
                k: 0,
                day: day(1),
                weight: it.2,
            })
            .collect(),
    )
    .unwrap();
    (scores, labels, weights)
}

fn metric_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut matched = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=200);
        // coarse scores force ties; integer weights keep every sum exact
        let mut items: Vec<(f64, bool, f64)> = (0..n)
            .map(|_| {
                (
                    rng.random_range(0..=20) as f64 / 20.0,
                    rng.random_bool(0.4),
                    rng.random_range(1..=9) as f64,
                )
            })
            .collect();
        items[0].1 = true;
        let (scores, labels, weights) = instance(&items);
        let Ok(curve) = pr_curve(&scores, &labels, Some(&weights)) else { continue };
        let expected = brute_force_points(&items);
        let (f1, ap) = brute_force_metrics(&expected);
        if curve.points == expected
            && f1_star(&curve).is_ok_and(|b| b.f1 == f1)
            && average_precision(&curve).is_ok_and(|a| a == ap)
        {
            matched += 1;
        }
    }

    let worked = [(0.9, true, 1.0), (0.8, false, 1.0), (0.7, true, 1.0), (0.1, false, 1.0)];
    let (scores, labels, _) = instance(&worked);
    let curve = pr_curve(&scores, &labels, None).unwrap();
    let best = f1_star(&curve).unwrap();
    let ap = average_precision(&curve).unwrap();
    let example = (best.f1 - 0.8).abs() < 1e-12 && best.tau == 0.7 && (ap - 5.0 / 6.0).abs() < 1e-12;
    outcome(
        matched == 200 && example,
        format!("{matched}/200 exact; worked example F1*={} at tau={} AP={ap}", best.f1, best.tau),
    )
}

fn aggregation_exhaustive() -> Outcome {
    let mut triples = Vec::new();
    for a0 in 0..=3u32 {
        for a1 in 0..=3 - a0 {
            triples.push([a0, a1, 3 - a0 - a1]);
        }
    }
    let mut wrong = Vec::new();
    let mut diverging = Vec::new();
    for t in &triples {
        let c = AnnotationCounts::new("t", *t);
        // documented outcomes: strict plurality, (1,1,1) to the median
        let class = match *t {
            [1, 1, 1] => ContainAbuse::Problematic,
            _ => ContainAbuse::ALL[(0..3).max_by_key(|&k| t[k]).unwrap()],
        };
        let binary = t[1] + t[2] > t[0];
        let three = majority_label(&c, LabelMode::ThreeClass, ConflationOrder::ConflateThenVote).unwrap();
        let ctv = majority_label(&c, LabelMode::BinaryConflated, ConflationOrder::ConflateThenVote).unwrap();
        let vtc = majority_label(&c, LabelMode::BinaryConflated, ConflationOrder::VoteThenConflate).unwrap();
        if three != Label::Class(class) || three_class_majority(&c).unwrap() != class || ctv != Label::Binary(binary) {
            wrong.push(*t);
        }
        if ctv != vtc {
            diverging.push(*t);
        }
    }
    let pass = triples.len() == 10 && wrong.is_empty() && diverging.iter().all(|t| *t == [1, 1, 1]);
    outcome(
        pass,
        format!("{} triples, mismatches {wrong:?}, order divergence at {diverging:?}", triples.len()),
    )
}

fn report_shape(out: &Path) -> Outcome {
    let agree = read_json(&out.join("agree/agreement_report.json"));
    let eval = read_json(&out.join("evaluate/eval_report.json"));
    let mut problems = Vec::new();

    let rows = agree["rows"].as_array().cloned().unwrap_or_default();
    let variables: Vec<&str> = rows.iter().filter_map(|r| r["variable"].as_str()).collect();
    if variables != ["contain_abuse", "type_of_abuse"] {
        problems.push(format!("variables {variables:?}"));
    }
    for r in &rows {
        let ordinal = r["variable"] == "contain_abuse";
        for cohort in ["crowd", "expert"] {
            let cell = &r["cohorts"][cohort];
            if !cell["kappa"].is_number() {
                problems.push(format!("{} {cohort}: no kappa", r["variable"]));
            }
            if ordinal != cell.get("icc").is_some() {
                problems.push(format!("{} {cohort}: icc presence", r["variable"]));
            }
        }
    }

    let eval_rows = eval["rows"].as_array().cloned().unwrap_or_default();
    let metrics = ["precision_at_f1star", "recall_at_f1star", "f1_star", "average_precision"];
    for r in &eval_rows {
        if !metrics.iter().all(|m| r[m].is_number()) {
            problems.push(format!("row {} lacks a metric", r["classifier_name"]));
        }
    }
    let classifiers: std::collections::BTreeSet<&str> =
        eval_rows.iter().filter_map(|r| r["classifier_name"].as_str()).collect();
    let crowd_vs_expert = eval_rows
        .iter()
        .any(|r| r["classifier_name"] == "crowd" && r["reference_cohort"] == "expert");
    if !crowd_vs_expert {
        problems.push("no crowd-vs-expert row".into());
    }
    outcome(
        problems.is_empty() && classifiers.len() >= 3,
        format!(
            "{} agreement rows, {} evaluation rows over {classifiers:?}; {problems:?}",
            rows.len(),
            eval_rows.len()
        ),
    )
}

fn determinism(reference: &Path) -> Outcome {
    let base = snapshot(reference);
    let mut runs = Vec::new();
    for threads in [Some(1), Some(8)] {
        let dir = tempfile::tempdir().unwrap();
        if !run_pipeline(dir.path(), 7, threads) {
            return outcome(false, format!("pipeline failed with TG_THREADS={threads:?}"));
        }
        runs.push((threads, snapshot(dir.path())));
    }
    let mut differing = Vec::new();
    for (threads, files) in &runs {
        if files.keys().ne(base.keys()) {
            differing.push(format!("file set differs with TG_THREADS={threads:?}"));
            continue;
        }
        for (path, bytes) in files {
            if base[path] != *bytes {
                differing.push(format!("{} with TG_THREADS={threads:?}", path.display()));
            }
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} files compared over 3 runs; differing {differing:?}", base.len()),
    )
}

fn simplex_geometry() -> Outcome {
    let mut worst: f64 = 0.0;
    for (k, v) in VERTICES.iter().enumerate() {
        let mut counts = [0; 3];
        counts[k] = 3;
        let p = to_simplex(&AnnotationCounts::new("c", counts), 0.0, 0).unwrap();
        worst = worst.max((p.x - v.0).abs()).max((p.y - v.1).abs());
    }
    let c = to_simplex(&AnnotationCounts::new("m", [1, 1, 1]), 0.0, 0).unwrap();
    let centroid = (0.5, 3f64.sqrt() / 6.0);
    let off = (c.x - centroid.0).abs().max((c.y - centroid.1).abs());
    outcome(
        worst <= 1e-12 && off <= 1e-12,
        format!("corner error {worst:e}, centroid ({}, {}) error {off:e}", c.x, c.y),
    )
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let pipeline = tempfile::tempdir().unwrap();
    let pipeline_ok = run_pipeline(pipeline.path(), 7, None);
    let out = pipeline.path().join("out");
    let synthetic_weights = load_weights(&out.join("weigh/weights.csv")).ok();

    let checks: Vec<(&str, Check)> = vec![
        ("chance-agreement calibration", Box::new(chance_calibration)),
        ("perfect-agreement limit", Box::new(perfect_limit)),
        ("kappa hand oracle", Box::new(kappa_oracle)),
        ("ICC hand oracle", Box::new(icc_oracle)),
        ("importance-weight oracle", Box::new(weights_oracle)),
        ("self-normalization identity", Box::new(|| self_normalization(synthetic_weights.as_ref()))),
        ("metric oracle equivalence", Box::new(metric_oracle)),
        ("aggregation exhaustiveness", Box::new(aggregation_exhaustive)),
        (
            "report-shape parity",
            Box::new(|| {
                if pipeline_ok {
                    report_shape(&out)
                } else {
                    outcome(false, "fixture pipeline failed")
                }
            }),
        ),
        (
            "determinism",
            Box::new(|| {
                if pipeline_ok {
                    determinism(pipeline.path())
                } else {
                    outcome(false, "fixture pipeline failed")
                }
            }),
        ),
        ("simplex geometry", Box::new(simplex_geometry)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
