#![allow(dead_code)]

use conley_core::{MorsePartition, TransitionGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random total graph on `10..=max_cells` cells with local back edges, so
/// that it has a handful of cycles and a non-trivial condensation.
pub fn random_graph(seed: u64, max_cells: usize) -> TransitionGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(10..=max_cells);
    let succ = (0..n)
        .map(|i| {
            let deg = rng.gen_range(1..=3);
            (0..deg)
                .map(|_| {
                    if rng.gen_bool(0.7) {
                        rng.gen_range(i..(i + 6).min(n))
                    } else {
                        rng.gen_range(i.saturating_sub(3)..=i)
                    }
                })
                .collect()
        })
        .collect();
    TransitionGraph::from_adjacency(succ).unwrap()
}

/// The first `count` random graphs (from consecutive seeds) with at most `max_nodes` Morse nodes.
pub fn random_graphs(count: usize, max_cells: usize, max_nodes: usize) -> Vec<TransitionGraph> {
    (0u64..)
        .map(|s| random_graph(s, max_cells))
        .filter(|g| MorsePartition::new(g).num_morse_nodes() <= max_nodes)
        .take(count)
        .collect()
}

/// `reach[a][b]`: a path of length ≥ 1 from `a` to `b`, by repeated squaring-free closure.
pub fn brute_reach(succ: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = succ.len();
    let mut r = vec![vec![false; n]; n];
    for (a, s) in succ.iter().enumerate() {
        for &b in s {
            r[a][b] = true;
        }
    }
    for k in 0..n {
        for a in 0..n {
            if r[a][k] {
                for b in 0..n {
                    if r[k][b] {
                        r[a][b] = true;
                    }
                }
            }
        }
    }
    r
}

pub fn brute_recurrent(succ: &[Vec<usize>]) -> Vec<usize> {
    let r = brute_reach(succ);
    (0..succ.len()).filter(|&c| r[c][c]).collect()
}

/// Cells with an infinite forward path that stays inside `allowed`.
pub fn brute_kernel(succ: &[Vec<usize>], allowed: &[bool]) -> Vec<usize> {
    let restricted: Vec<Vec<usize>> = succ
        .iter()
        .enumerate()
        .map(|(a, s)| {
            if allowed[a] {
                s.iter().copied().filter(|&b| allowed[b]).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let r = brute_reach(&restricted);
    let on_cycle: Vec<usize> = (0..succ.len()).filter(|&c| r[c][c]).collect();
    (0..succ.len())
        .filter(|&c| allowed[c] && on_cycle.iter().any(|&z| z == c || r[c][z]))
        .collect()
}
