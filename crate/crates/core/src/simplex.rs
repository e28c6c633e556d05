//! Annotation counts as points of the 2-simplex, plus simulated
//! perfect-agreement and chance-only baselines.
//!
//! The triangle is fixed: `No = (0, 0)`, `Problematic = (1, 0)`,
//! `Abusive = (1/2, √3/2)`.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationCounts;
use crate::corpus_io::{column_positions, csv_line, csv_reader, open, source_name, write_file};
use crate::error::{Error, Result};
use crate::rng::{substream, Stream};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

pub const VERTICES: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (0.5, SQRT3_2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    pub id: String,
    pub counts: [u32; 3],
    pub barycentric: [f64; 3],
    pub x: f64,
    pub y: f64,
    pub jittered: Option<(f64, f64)>,
}

pub fn cartesian(b: [f64; 3]) -> (f64, f64) {
    (b[1] + 0.5 * b[2], SQRT3_2 * b[2])
}

/// Closed-triangle membership, with `tol` slack on every edge.
pub fn in_triangle(x: f64, y: f64, tol: f64) -> bool {
    y >= -tol && SQRT3_2 * x - 0.5 * y >= -tol && SQRT3_2 * (1.0 - x) - 0.5 * y >= -tol
}

fn nearest_on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (a.0 + t * dx, a.1 + t * dy)
}

/// Euclidean projection onto the triangle.
pub fn clip_to_triangle(x: f64, y: f64) -> (f64, f64) {
    if in_triangle(x, y, 0.0) {
        return (x, y);
    }
    let dist = |q: (f64, f64)| (q.0 - x).powi(2) + (q.1 - y).powi(2);
    (0..3)
        .map(|i| nearest_on_segment((x, y), VERTICES[i], VERTICES[(i + 1) % 3]))
        .min_by(|a, b| dist(*a).total_cmp(&dist(*b)))
        .expect("three edges")
}

fn disc_offset(rng: &mut Stream, radius: f64) -> (f64, f64) {
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    let r = radius * rng.random::<f64>().sqrt();
    (r * theta.cos(), r * theta.sin())
}

/// Place one tweet's counts in the triangle. A positive `jitter` adds a
/// uniform offset from the disc of that radius, drawn from the `(seed, id)`
/// stream, and clips the result back onto the triangle.
pub fn to_simplex(counts: &AnnotationCounts, jitter: f64, seed: u64) -> Result<SimplexPoint> {
    if !(jitter.is_finite() && jitter >= 0.0) {
        return Err(Error::InvalidArgument(format!("jitter magnitude must be finite and >= 0, got {jitter}")));
    }
    let n = counts.n();
    if n == 0 {
        return Err(Error::InvalidArgument(format!("tweet {} has no annotations", counts.tweet_guid)));
    }
    let barycentric = counts.counts.map(|a| a as f64 / n as f64);
    let (x, y) = cartesian(barycentric);
    let jittered = (jitter > 0.0).then(|| {
        let mut rng = substream(seed, "jitter", &counts.tweet_guid);
        let (dx, dy) = disc_offset(&mut rng, jitter);
        clip_to_triangle(x + dx, y + dy)
    });
    Ok(SimplexPoint {
        id: counts.tweet_guid.clone(),
        counts: counts.counts,
        barycentric,
        x,
        y,
        jittered,
    })
}

pub fn simplex_points(counts: &[AnnotationCounts], jitter: f64, seed: u64) -> Result<Vec<SimplexPoint>> {
    counts.par_iter().map(|c| to_simplex(c, jitter, seed)).collect()
}

/// Pooled class frequencies of a set of tweets.
pub fn class_distribution(counts: &[AnnotationCounts]) -> Result<[f64; 3]> {
    let mut totals = [0u64; 3];
    for c in counts {
        for (t, a) in totals.iter_mut().zip(c.counts) {
            *t += a as u64;
        }
    }
    let all: u64 = totals.iter().sum();
    if all == 0 {
        return Err(Error::Empty("annotation counts"));
    }
    Ok(totals.map(|t| t as f64 / all as f64))
}

fn check_distribution(p: [f64; 3]) -> Result<()> {
    if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("{p:?} has a negative or non-finite entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("{p:?} sums to {sum}")));
    }
    Ok(())
}

/// Inverse-CDF draw of one class. Zero-probability classes are never
/// returned, even when rounding leaves the cumulative sum short of 1.
fn draw_class(rng: &mut Stream, p: &[f64; 3]) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last = 0;
    for (c, &pc) in p.iter().enumerate() {
        if pc == 0.0 {
            continue;
        }
        cum += pc;
        last = c;
        if u < cum {
            return c;
        }
    }
    last
}

fn simulate<F>(kind: &str, p: [f64; 3], n_tweets: usize, n_raters: u32, seed: u64, draw: F) -> Result<Vec<AnnotationCounts>>
where
    F: Fn(&mut Stream) -> [u32; 3] + Sync,
{
    check_distribution(p)?;
    if n_tweets == 0 {
        return Err(Error::InvalidArgument("n_tweets must be at least 1".into()));
    }
    if n_raters == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let purpose = format!("simulate_{kind}");
    Ok((1..=n_tweets)
        .into_par_iter()
        .map(|i| {
            let id = format!("sim-{kind}-{i:06}");
            let mut rng = substream(seed, &purpose, &id);
            let counts = draw(&mut rng);
            AnnotationCounts::new(id, counts)
        })
        .collect())
}

/// Every tweet draws one class from `p` and all `n_raters` votes go to it.
pub fn simulate_perfect(p: [f64; 3], n_tweets: usize, n_raters: u32, seed: u64) -> Result<Vec<AnnotationCounts>> {
    simulate("perfect", p, n_tweets, n_raters, seed, |rng| {
        let mut counts = [0; 3];
        counts[draw_class(rng, &p)] = n_raters;
        counts
    })
}

/// Every tweet's counts are `Multinomial(n_raters, p)`, one inverse-CDF
/// draw per vote.
pub fn simulate_chance(p: [f64; 3], n_tweets: usize, n_raters: u32, seed: u64) -> Result<Vec<AnnotationCounts>> {
    simulate("chance", p, n_tweets, n_raters, seed, |rng| {
        let mut counts = [0; 3];
        for _ in 0..n_raters {
            counts[draw_class(rng, &p)] += 1;
        }
        counts
    })
}

const SIMPLEX_COLUMNS: [&str; 8] = ["id", "x", "y", "x_jittered", "y_jittered", "a_no", "a_pr", "a_ab"];

/// `simplex_points.csv`; jitter columns are empty for unjittered points.
pub fn write_simplex_points<W: Write>(writer: W, points: &[SimplexPoint]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SIMPLEX_COLUMNS)?;
    for p in points {
        let (jx, jy) = p
            .jittered
            .map_or((String::new(), String::new()), |(x, y)| (x.to_string(), y.to_string()));
        w.write_record([
            p.id.clone(),
            p.x.to_string(),
            p.y.to_string(),
            jx,
            jy,
            p.counts[0].to_string(),
            p.counts[1].to_string(),
            p.counts[2].to_string(),
        ])?;
    }
    w.flush()
}

pub fn save_simplex_points(path: &Path, points: &[SimplexPoint]) -> Result<()> {
    write_file(path, |w| write_simplex_points(w, points))
}

/// Reads a simplex CSV. Columns are matched by name; the coordinates are
/// recomputed from the counts and must agree with the stored ones.
pub fn read_simplex_points<R: Read>(reader: R, source: &str) -> Result<Vec<SimplexPoint>> {
    let mut rdr = csv_reader(reader);
    let pos = column_positions(&mut rdr, source, &SIMPLEX_COLUMNS)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(source, 0, e))?;
        let line = csv_line(&record);
        let field = |i: usize| record.get(pos[i]).unwrap_or("");
        let real = |i: usize| -> Result<Option<f64>> {
            let s = field(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|e| Error::parse(source, line, format!("column {}: {s:?}: {e}", SIMPLEX_COLUMNS[i])))
        };
        let count = |i: usize| -> Result<u32> {
            field(i)
                .parse()
                .map_err(|e| Error::parse(source, line, format!("column {}: {:?}: {e}", SIMPLEX_COLUMNS[i], field(i))))
        };
        let counts = AnnotationCounts::new(field(0), [count(5)?, count(6)?, count(7)?]);
        let mut point = to_simplex(&counts, 0.0, 0).map_err(|e| Error::parse(source, line, e))?;
        let (x, y) = (real(1)?, real(2)?);
        match (x, y) {
            (Some(x), Some(y)) if (x - point.x).abs() <= 1e-9 && (y - point.y).abs() <= 1e-9 => {}
            _ => return Err(Error::parse(source, line, "x,y do not match the counts")),
        }
        point.jittered = match (real(3)?, real(4)?) {
            (Some(x), Some(y)) if in_triangle(x, y, 1e-9) => Some((x, y)),
            (None, None) => None,
            _ => return Err(Error::parse(source, line, "jittered point missing or outside the triangle")),
        };
        out.push(point);
    }
    Ok(out)
}

pub fn load_simplex_points(path: &Path) -> Result<Vec<SimplexPoint>> {
    read_simplex_points(open(path)?, &source_name(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agreement::fleiss_kappa;

    fn ac(c: [u32; 3]) -> AnnotationCounts {
        AnnotationCounts::new("t", c)
    }

    #[test]
    fn corners_and_centroid() {
        for (i, c) in [[3, 0, 0], [0, 3, 0], [0, 0, 3]].into_iter().enumerate() {
            let p = to_simplex(&ac(c), 0.0, 1).unwrap();
            assert!((p.x - VERTICES[i].0).abs() <= 1e-12 && (p.y - VERTICES[i].1).abs() <= 1e-12);
        }
        let p = to_simplex(&ac([1, 1, 1]), 0.0, 1).unwrap();
        assert!((p.x - 0.5).abs() <= 1e-12);
        assert!((p.y - 3f64.sqrt() / 6.0).abs() <= 1e-12);
        assert!((p.y - 0.28868).abs() < 1e-5);
        let q = to_simplex(&ac([2, 2, 2]), 0.0, 1).unwrap();
        assert_eq!((p.x, p.y, p.barycentric), (q.x, q.y, q.barycentric));
        assert!(to_simplex(&ac([0, 0, 0]), 0.0, 1).is_err());
    }

    #[test]
    fn jitter_stays_inside_and_zero_is_identity() {
        for i in 0..2000 {
            let c = AnnotationCounts::new(format!("g{i}"), [[3, 0, 0], [0, 3, 0], [0, 0, 3], [1, 2, 0]][i % 4]);
            let p = to_simplex(&c, 0.2, 9).unwrap();
            let (x, y) = p.jittered.unwrap();
            assert!(in_triangle(x, y, 1e-12), "{x},{y}");
            assert!(((x - p.x).powi(2) + (y - p.y).powi(2)).sqrt() <= 0.2 + 1e-12);
            let q = to_simplex(&c, 0.0, 9).unwrap();
            assert_eq!(q.jittered, None);
            assert_eq!((q.x, q.y), (p.x, p.y));
        }
    }

    #[test]
    fn projection_lands_on_nearest_edge() {
        assert_eq!(clip_to_triangle(0.5, -1.0), (0.5, 0.0));
        assert_eq!(clip_to_triangle(-1.0, -1.0), (0.0, 0.0));
        assert_eq!(clip_to_triangle(0.3, 0.2), (0.3, 0.2));
        let (x, y) = clip_to_triangle(0.5, 2.0);
        assert!((x - 0.5).abs() < 1e-12 && (y - SQRT3_2).abs() < 1e-12);
    }

    #[test]
    fn perfect_baseline() {
        let c = simulate_perfect([1.0, 0.0, 0.0], 5, 3, 1).unwrap();
        assert!(c.iter().all(|c| c.counts == [3, 0, 0]));
        let c = simulate_perfect([0.5, 0.3, 0.2], 500, 3, 1).unwrap();
        assert!(c.iter().all(|c| c.counts.iter().filter(|&&a| a > 0).count() == 1));
        assert_eq!(fleiss_kappa(&c).unwrap().kappa_overall, 1.0);
    }

    #[test]
    fn chance_baseline() {
        let c = simulate_chance([1.0, 0.0, 0.0], 20, 3, 2).unwrap();
        assert!(c.iter().all(|c| c.counts == [3, 0, 0]));
        let c = simulate_chance([0.5, 0.3, 0.2], 10_000, 3, 2).unwrap();
        assert!(fleiss_kappa(&c).unwrap().kappa_overall.abs() < 0.03);
        assert_eq!(c[0].tweet_guid, "sim-chance-000001");
    }

    #[test]
    fn invalid_distributions_rejected() {
        for p in [[0.5, 0.5, 0.5], [-0.1, 0.6, 0.5], [f64::NAN, 0.5, 0.5]] {
            assert!(matches!(simulate_chance(p, 3, 3, 1), Err(Error::InvalidDistribution(_))));
        }
        assert!(simulate_perfect([0.5, 0.5, 0.0], 0, 3, 1).is_err());
    }

    #[test]
    fn zero_probability_class_never_drawn() {
        let c = simulate_chance([0.0, 0.7, 0.3], 2000, 3, 4).unwrap();
        assert!(c.iter().all(|c| c.counts[0] == 0));
    }

    #[test]
    fn csv_round_trip_and_missing_column() {
        let counts = vec![
            AnnotationCounts::new("a", [3, 0, 0]),
            AnnotationCounts::new("b", [1, 1, 1]),
            AnnotationCounts::new("c", [0, 2, 1]),
        ];
        for jitter in [0.0, 0.05] {
            let pts = simplex_points(&counts, jitter, 3).unwrap();
            let mut buf = Vec::new();
            write_simplex_points(&mut buf, &pts).unwrap();
            assert_eq!(read_simplex_points(&buf[..], "mem").unwrap(), pts);
        }
        let bad = "id,x,x_jittered,y_jittered,a_no,a_pr,a_ab\n";
        match read_simplex_points(bad.as_bytes(), "mem") {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "y"),
            other => panic!("{other:?}"),
        }
    }
}
