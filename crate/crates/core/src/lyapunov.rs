//! Lyapunov functions on the cell graph.
//!
//! Each non-trivial attractor-repeller pair gets a function that is 0 on the
//! attractor, 1 on the repeller and non-increasing along edges. Weighting the
//! n-th of `k` such functions by `2/3^n` gives a complete Lyapunov function
//! whose values on recurrent cells have ternary digits 0 and 2 only.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::chaingraph::{MorsePartition, TransitionGraph};
use crate::conley::{verify_separation, AttractorFamily, AttractorPair, FamilyKind};
use crate::error::LyapunovError;
use crate::grid::{CellId, Grid, Point};

/// A pair's Lyapunov function, one value in `[0, 1]` per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFunction {
    pub values: Vec<f64>,
    /// 1-based position among the family's coded pairs (0 when standalone).
    pub pair_index: usize,
}

/// `d(c, A) / (d(c, A) + d(c, A*))` with distances between cell centers.
pub fn pair_g0(grid: &Grid, pair: &AttractorPair) -> Result<Vec<f64>, LyapunovError> {
    if pair.attractor.is_empty() || pair.repeller.is_empty() {
        return Err(LyapunovError::TrivialPair);
    }
    let dom = grid.domain();
    let centers: Vec<Point> = (0..grid.num_cells())
        .map(|c| grid.cell_center(CellId(c)))
        .collect();
    let dist_to = |c: usize, set: &crate::cellset::CellSet| {
        set.iter()
            .map(|s| dom.metric_unchecked(&centers[c], &centers[s]))
            .fold(f64::INFINITY, f64::min)
    };
    Ok((0..grid.num_cells())
        .map(|c| {
            if pair.attractor.contains(c) {
                0.0
            } else if pair.repeller.contains(c) {
                1.0
            } else {
                let da = dist_to(c, &pair.attractor);
                let dr = dist_to(c, &pair.repeller);
                da / (da + dr)
            }
        })
        .collect())
}

/// `g₁(c) = max g₀` over `c` and everything reachable from it.
pub fn pair_g1(partition: &MorsePartition, g0: &[f64]) -> Vec<f64> {
    let comps = partition.components();
    let mut comp_max = vec![0.0f64; comps.len()];
    for &i in partition.topological_order().iter().rev() {
        let own = comps[i].cells.iter().map(|&c| g0[c]).fold(0.0, f64::max);
        comp_max[i] = partition.condensation()[i]
            .iter()
            .map(|&s| comp_max[s])
            .fold(own, f64::max);
    }
    (0..g0.len())
        .map(|c| comp_max[partition.component_of(c)])
        .collect()
}

/// The pair's Lyapunov function: clamped to 0 on `A` and 1 on `A*`, elsewhere
/// the fixpoint of `g(c) = (g₁(c) + max g(successors)) / 2`.
pub fn pair_lyapunov(
    graph: &TransitionGraph,
    partition: &MorsePartition,
    pair: &AttractorPair,
    grid: &Grid,
) -> Result<PairFunction, LyapunovError> {
    if pair.trivial {
        return Err(LyapunovError::TrivialPair);
    }
    let g0 = pair_g0(grid, pair)?;
    let g1 = pair_g1(partition, &g0);
    let comps = partition.components();
    let mut values = vec![0.0f64; graph.num_cells()];
    for &i in partition.topological_order().iter().rev() {
        let comp = &comps[i];
        for &c in &comp.cells {
            values[c] = if pair.attractor.contains(c) {
                0.0
            } else if pair.repeller.contains(c) {
                1.0
            } else if comp.has_cycle {
                g1[c]
            } else {
                let next = graph.successors(c).iter().map(|&s| values[s]).fold(0.0, f64::max);
                0.5 * (g1[c] + next)
            };
        }
    }
    Ok(PairFunction {
        values,
        pair_index: 0,
    })
}

/// An exact critical value `num / den` with its floating approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValue {
    #[serde(serialize_with = "big_as_number")]
    pub num: BigUint,
    #[serde(serialize_with = "big_as_number")]
    pub den: BigUint,
    pub value: f64,
    /// Morse node attaining this value.
    pub morse_node: usize,
}

/// Integers that fit in `u64` serialize as JSON numbers, larger ones as decimal strings.
fn big_as_number<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(x) => s.serialize_u64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompleteLyapunov {
    pub values: Vec<f64>,
    /// Number of coded (non-trivial) pairs; recurrent values are `numerator / 3^k`.
    pub k: usize,
    /// Weight of the topological-rank term on transient cells, `3^-(k+1)`.
    pub eta: f64,
    pub family_kind: FamilyKind,
    /// Exact numerator over `3^k` of each Morse node's value.
    pub node_numerators: Vec<BigUint>,
    /// Distinct values on recurrent cells, ascending.
    pub critical_values: Vec<CriticalValue>,
    pub pair_functions: Vec<PairFunction>,
}

impl CompleteLyapunov {
    pub fn denominator(&self) -> BigUint {
        BigUint::from(3u32).pow(self.k as u32)
    }
}

fn reduced(num: &BigUint, k: usize) -> (BigUint, BigUint) {
    let three = BigUint::from(3u32);
    let mut num = num.clone();
    let mut k = k;
    if num.is_zero() {
        return (num, BigUint::from(1u32));
    }
    while k > 0 && (&num % &three).is_zero() {
        num /= &three;
        k -= 1;
    }
    (num, three.pow(k as u32))
}

fn big_to_f64(num: &BigUint, k: usize) -> f64 {
    // numerator < 3^k, so scale digit by digit to stay in range
    let digits = num.to_radix_le(3);
    digits
        .iter()
        .enumerate()
        .map(|(i, &d)| d as f64 * 3f64.powi(i as i32 - k as i32))
        .sum()
}

/// Assembles `Σ 2gₙ/3ⁿ` over the family's non-trivial pairs. Transient cells
/// also get `η·h(c)`, with `h` the normalized reverse topological rank of the
/// cell's component, which makes the decrease strict across every edge.
pub fn complete_lyapunov(
    graph: &TransitionGraph,
    partition: &MorsePartition,
    family: &AttractorFamily,
    grid: &Grid,
) -> Result<CompleteLyapunov, LyapunovError> {
    let sep = verify_separation(partition, family);
    if !sep.holds {
        let (a, b) = sep
            .unseparated
            .first()
            .copied()
            .or_else(|| sep.split_nodes.first().map(|&(_, n)| (n, n)))
            .expect("failed separation has a witness");
        return Err(LyapunovError::NotSeparated(a, b));
    }
    let coded = family.coded_pairs();
    let k = coded.len();
    let pair_functions = coded
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            pair_lyapunov(graph, partition, pair, grid).map(|mut f| {
                f.pair_index = i + 1;
                f
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let m = partition.num_morse_nodes();
    let node_numerators: Vec<BigUint> = (0..m)
        .map(|node| {
            let cells = partition.morse_cells(node);
            coded.iter().fold(BigUint::zero(), |acc, pair| {
                let digit = if pair.repels(cells) { 2u32 } else { 0 };
                acc * 3u32 + digit
            })
        })
        .collect();
    let node_values: Vec<f64> = node_numerators.iter().map(|n| big_to_f64(n, k)).collect();

    let eta = 3f64.powi(-(k as i32 + 1));
    let weights: Vec<f64> = (1..=k).map(|n| 2.0 * 3f64.powi(-(n as i32))).collect();
    let num_components = partition.components().len() as f64;
    let values: Vec<f64> = (0..graph.num_cells())
        .map(|c| match partition.morse_node_of(c) {
            Some(node) => node_values[node],
            None => {
                let sum: f64 = pair_functions
                    .iter()
                    .zip(&weights)
                    .map(|(f, w)| w * f.values[c])
                    .sum();
                let rank = partition.topological_rank(partition.component_of(c)) as f64;
                sum + eta * (num_components - rank) / num_components
            }
        })
        .collect();

    let mut critical_values: Vec<CriticalValue> = (0..m)
        .map(|node| {
            let (num, den) = reduced(&node_numerators[node], k);
            CriticalValue {
                num,
                den,
                value: node_values[node],
                morse_node: node,
            }
        })
        .collect();
    critical_values.sort_by(|a, b| {
        (&node_numerators[a.morse_node], a.morse_node).cmp(&(&node_numerators[b.morse_node], b.morse_node))
    });
    critical_values.dedup_by(|b, a| node_numerators[a.morse_node] == node_numerators[b.morse_node]);

    Ok(CompleteLyapunov {
        values,
        k,
        eta,
        family_kind: family.kind,
        node_numerators,
        critical_values,
        pair_functions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompleteReport {
    /// Strict decrease along every edge out of a transient cell.
    pub strict_decrease: ConditionReport,
    /// Equal recurrent values exactly on shared Morse nodes.
    pub separates_components: ConditionReport,
    /// Every critical value has ternary digits 0 and 2 only (witness: node, digit position).
    pub cantor_digits: ConditionReport,
    pub critical_value_count: usize,
    /// Largest value jump between consecutive cell indices; reported only.
    pub max_adjacent_jump: f64,
}

impl CompleteReport {
    pub fn all_hold(&self) -> bool {
        self.strict_decrease.holds && self.separates_components.holds && self.cantor_digits.holds
    }
}

/// Checks the three defining conditions of a complete Lyapunov function on the graph.
pub fn verify_complete(
    graph: &TransitionGraph,
    partition: &MorsePartition,
    lyap: &CompleteLyapunov,
) -> CompleteReport {
    let v = &lyap.values;

    let strict_witness = graph
        .edges()
        .find(|&(a, b)| !partition.is_recurrent(a) && !(v[b] < v[a]));
    let strict_decrease = ConditionReport {
        holds: strict_witness.is_none(),
        witness: strict_witness,
    };

    // one representative per node; values must agree within a node, exact
    // numerators must differ across nodes, and so must their floats
    let m = partition.num_morse_nodes();
    let mut sep_witness = None;
    'outer: for node in 0..m {
        let cells = partition.morse_cells(node);
        let rep = cells[0];
        if let Some(&c) = cells.iter().find(|&&c| v[c] != v[rep]) {
            sep_witness = Some((rep, c));
            break;
        }
        for other in node + 1..m {
            let orep = partition.morse_cells(other)[0];
            if lyap.node_numerators[node] == lyap.node_numerators[other] || v[rep] == v[orep] {
                sep_witness = Some((rep, orep));
                break 'outer;
            }
        }
    }
    let separates_components = ConditionReport {
        holds: sep_witness.is_none(),
        witness: sep_witness,
    };

    let bound = lyap.denominator();
    let mut digit_witness = None;
    for (node, num) in lyap.node_numerators.iter().enumerate() {
        if num >= &bound {
            digit_witness = Some((node, lyap.k));
            break;
        }
        let digits = num.to_radix_le(3);
        if let Some(pos) = digits.iter().position(|&d| d == 1) {
            // position counted from the most significant of the k digits
            digit_witness = Some((node, lyap.k - pos));
            break;
        }
    }
    let cantor_digits = ConditionReport {
        holds: digit_witness.is_none(),
        witness: digit_witness,
    };

    let max_adjacent_jump = v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);

    CompleteReport {
        strict_decrease,
        separates_components,
        cantor_digits,
        critical_value_count: lyap.critical_values.len(),
        max_adjacent_jump,
    }
}
