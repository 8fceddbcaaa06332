//! Sampled return statistics for measure-preserving maps, and strong
//! connectivity of the transition graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

use crate::chaingraph::{MorsePartition, TransitionGraph};
use crate::error::RecurrenceError;
use crate::grid::Point;
use crate::mapdef::MapInstance;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBucket {
    /// Inclusive iteration range.
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub n_points: usize,
    pub n_iters: usize,
    pub delta: f64,
    pub seed: u64,
    /// Fraction of sampled points with some iterate `1..=n_iters` within `delta` of the start.
    pub returned_fraction: f64,
    /// First-return times in power-of-two buckets `[2^j, 2^(j+1) - 1]`.
    pub return_time_histogram: Vec<HistogramBucket>,
    pub warnings: Vec<String>,
}

impl RecurrenceReport {
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bucket_lo,bucket_hi,count\n");
        for b in &self.return_time_histogram {
            let _ = writeln!(out, "{},{},{}", b.lo, b.hi, b.count);
        }
        out
    }
}

fn first_return(
    map: &MapInstance,
    start: &Point,
    n_iters: usize,
    delta: f64,
) -> Result<Option<usize>, RecurrenceError> {
    let dom = map.domain();
    let mut x = start.clone();
    for k in 1..=n_iters {
        x = map.eval(&x)?;
        if dom.metric_unchecked(&x, start) < delta {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Samples `n_points` uniform starting points and records each one's first
/// return within `delta`. Points are drawn sequentially from the seeded stream,
/// so the report does not depend on how orbits are scheduled.
pub fn simulate_returns(
    map: &MapInstance,
    n_points: usize,
    n_iters: usize,
    delta: f64,
    seed: u64,
) -> Result<RecurrenceReport, RecurrenceError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(RecurrenceError::BadDelta(delta));
    }
    let dom = map.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Point> = (0..n_points)
        .map(|_| {
            Point(
                dom.bounds()
                    .iter()
                    .map(|&(lo, hi)| rng.gen_range(lo..hi))
                    .collect(),
            )
        })
        .collect();

    #[cfg(feature = "parallel")]
    let returns: Vec<Result<Option<usize>, RecurrenceError>> = {
        use rayon::prelude::*;
        starts
            .par_iter()
            .map(|p| first_return(map, p, n_iters, delta))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let returns: Vec<Result<Option<usize>, RecurrenceError>> = starts
        .iter()
        .map(|p| first_return(map, p, n_iters, delta))
        .collect();
    let returns = returns.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut buckets: Vec<usize> = Vec::new();
    let mut returned = 0;
    for t in returns.iter().flatten() {
        returned += 1;
        let j = (usize::BITS - 1 - t.leading_zeros()) as usize;
        if buckets.len() <= j {
            buckets.resize(j + 1, 0);
        }
        buckets[j] += 1;
    }
    let return_time_histogram = buckets
        .into_iter()
        .enumerate()
        .map(|(j, count)| HistogramBucket {
            lo: 1 << j,
            hi: (1 << (j + 1)) - 1,
            count,
        })
        .collect();

    let mut warnings = Vec::new();
    if !map.preserves_lebesgue() {
        warnings.push(format!(
            "map {} is not known to preserve Lebesgue measure; recurrence of almost every point is not guaranteed",
            map.spec()
        ));
    }
    Ok(RecurrenceReport {
        n_points,
        n_iters,
        delta,
        seed,
        returned_fraction: if n_points == 0 {
            0.0
        } else {
            returned as f64 / n_points as f64
        },
        return_time_histogram,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectivityReport {
    pub strongly_connected: bool,
    /// `(x, y)` with no ε-chain from `x` to `y`: `x` from a sink component,
    /// `y` from a source component.
    pub witness: Option<(usize, usize)>,
}

/// Whether the graph is a single cycle-bearing strongly connected component.
pub fn connectivity_check(graph: &TransitionGraph) -> ConnectivityReport {
    let p = MorsePartition::new(graph);
    let comps = p.components();
    if comps.len() == 1 && comps[0].has_cycle {
        return ConnectivityReport {
            strongly_connected: true,
            witness: None,
        };
    }
    let order = p.topological_order();
    let witness = match (order.first(), order.last()) {
        (Some(&src), Some(&sink)) if src != sink => Some((comps[sink].cells[0], comps[src].cells[0])),
        // one component without a cycle: a lone cell cannot reach itself
        (Some(&only), _) => Some((comps[only].cells[0], comps[only].cells[0])),
        _ => None,
    };
    ConnectivityReport {
        strongly_connected: false,
        witness,
    }
}
