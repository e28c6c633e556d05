//! Seeded inputs shared by the benchmarks.

use chrono::NaiveDate;
use tg_core::simplex::simulate_chance;
use tg_core::synthetic::{generate_world, World, WorldConfig};
use tg_core::weights::WeightEntry;
use tg_core::{AnnotationCounts, ScoreKind, ScoreTable, WeightAssignment};

pub fn chance_counts(n_tweets: usize, n_raters: u32) -> Vec<AnnotationCounts> {
    simulate_chance([0.5, 0.3, 0.2], n_tweets, n_raters, 1).expect("valid rates")
}

pub fn world(days: u32, records_per_day: usize) -> World {
    generate_world(&WorldConfig {
        start: NaiveDate::from_ymd_opt(2017, 6, 1).unwrap(),
        days,
        records_per_day,
        volume_factor: (50, 400),
        flag_rate: 0.12,
        flag_rate_spread: 0.4,
        positive_given_flag: 0.6,
        positive_given_unflagged: 0.04,
        abusive_share: 0.5,
        seed: 1,
    })
    .expect("valid world")
}

/// Scores, labels and weights for `n` tweets, with a deterministic mix of
/// ties and labels.
pub fn scored(n: usize) -> (ScoreTable, std::collections::BTreeMap<String, bool>, WeightAssignment) {
    let id = |i: usize| format!("t{i:07}");
    let score = |i: usize| ((i * 7919) % 1000) as f64 / 1000.0;
    let scores = ScoreTable::from_pairs("bench", ScoreKind::Probability, (0..n).map(|i| (id(i), score(i))))
        .expect("scores in range");
    let labels = (0..n).map(|i| (id(i), (i * 31) % 7 < 2 || score(i) > 0.8)).collect();
    let day = NaiveDate::from_ymd_opt(2017, 6, 1).unwrap();
    let weights = WeightAssignment::new(
        (0..n)
            .map(|i| WeightEntry {
                guid: id(i),
                k: (i % 5 == 0) as u8,
                day,
                weight: 0.25 + (i % 11) as f64,
            })
            .collect(),
    )
    .expect("positive weights");
    (scores, labels, weights)
}
