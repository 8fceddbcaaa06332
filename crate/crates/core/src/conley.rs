//! Combinatorial attractors, their dual repellers, and checks of the
//! attractor-repeller structure theorems on the finite model.
//!
//! An attractor is generated by a *downset* of Morse nodes: a set closed under
//! reachability in the Morse order. Its cells are the downset's Morse nodes
//! together with everything reachable from them, so it is out-closed. The dual
//! repeller is the largest subset of the complement in which every cell keeps a
//! successor, i.e. the cells that can follow an infinite path avoiding the
//! attractor.

use serde::Serialize;
use std::collections::VecDeque;

use crate::cellset::CellSet;
use crate::chaingraph::{forward_closure, MorsePartition, TransitionGraph};
use crate::error::ConleyError;

/// Default bound on the Morse node count for full lattice enumeration.
pub const DEFAULT_LATTICE_CAP: usize = 15;
/// Hard limit on full lattice enumeration regardless of the requested cap.
pub const MAX_LATTICE_NODES: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorPair {
    pub attractor: CellSet,
    pub repeller: CellSet,
    /// Sorted Morse node ids generating the attractor.
    pub downset: Vec<usize>,
    /// Empty attractor or empty repeller.
    pub trivial: bool,
}

impl AttractorPair {
    /// Whether every cell of `cells` lies in the attractor.
    pub fn attracts(&self, cells: &[usize]) -> bool {
        cells.iter().all(|&c| self.attractor.contains(c))
    }

    pub fn repels(&self, cells: &[usize]) -> bool {
        cells.iter().all(|&c| self.repeller.contains(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// One attractor per Morse node: the node and everything below it.
    Canonical,
    /// Every downset of the Morse order, trivial pairs included.
    FullLattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorFamily {
    pub kind: FamilyKind,
    pub pairs: Vec<AttractorPair>,
}

impl AttractorFamily {
    /// Non-trivial pairs in family order; their positions give the digit
    /// indices `1..=k` of the Lyapunov coding.
    pub fn coded_pairs(&self) -> Vec<&AttractorPair> {
        self.pairs.iter().filter(|p| !p.trivial).collect()
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            kind: self.kind,
            pairs: self
                .pairs
                .iter()
                .enumerate()
                .map(|(i, p)| PairSummary {
                    index: i + 1,
                    downset: p.downset.clone(),
                    attractor_size: p.attractor.len(),
                    repeller_size: p.repeller.len(),
                    trivial: p.trivial,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub index: usize,
    pub downset: Vec<usize>,
    pub attractor_size: usize,
    pub repeller_size: usize,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub kind: FamilyKind,
    pub pairs: Vec<PairSummary>,
}

/// Largest subset of `allowed` in which every cell has a successor inside the
/// subset. Computed by repeatedly trimming cells with no remaining successor.
pub fn invariant_kernel(graph: &TransitionGraph, allowed: &CellSet) -> CellSet {
    let n = graph.num_cells();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut live = vec![0usize; n];
    for (a, b) in graph.edges() {
        if allowed.contains(a) && allowed.contains(b) {
            preds[b].push(a);
            live[a] += 1;
        }
    }
    let mut kept = allowed.clone();
    let mut queue: VecDeque<usize> = allowed.iter().filter(|&c| live[c] == 0).collect();
    for &c in &queue {
        kept.remove(c);
    }
    while let Some(c) = queue.pop_front() {
        for &p in &preds[c] {
            if kept.contains(p) {
                live[p] -= 1;
                if live[p] == 0 {
                    kept.remove(p);
                    queue.push_back(p);
                }
            }
        }
    }
    kept
}

/// Dual repeller of an out-closed cell set.
pub fn dual_repeller(graph: &TransitionGraph, attractor: &CellSet) -> CellSet {
    invariant_kernel(graph, &attractor.complement())
}

fn check_downset(partition: &MorsePartition, downset: &[usize]) -> Result<(), ConleyError> {
    let m = partition.num_morse_nodes();
    if let Some(&bad) = downset.iter().find(|&&d| d >= m) {
        return Err(ConleyError::UnknownMorseNode(bad));
    }
    for &d in downset {
        for r in partition.morse_reachable(d) {
            if !downset.contains(&r) {
                return Err(ConleyError::DownsetNotClosed { from: d, missing: r });
            }
        }
    }
    Ok(())
}

/// The attractor generated by a reachability-closed set of Morse nodes, with its dual repeller.
pub fn attractor_from_downset(
    graph: &TransitionGraph,
    partition: &MorsePartition,
    downset: &[usize],
) -> Result<AttractorPair, ConleyError> {
    let mut downset = downset.to_vec();
    downset.sort_unstable();
    downset.dedup();
    check_downset(partition, &downset)?;
    Ok(pair_unchecked(graph, partition, downset))
}

fn pair_unchecked(graph: &TransitionGraph, partition: &MorsePartition, downset: Vec<usize>) -> AttractorPair {
    let seeds = downset
        .iter()
        .flat_map(|&d| partition.morse_cells(d).iter().copied());
    let attractor = forward_closure(graph.adjacency(), seeds, None);
    let repeller = dual_repeller(graph, &attractor);
    let trivial = attractor.is_empty() || repeller.is_empty();
    AttractorPair {
        attractor,
        repeller,
        downset,
        trivial,
    }
}

fn sort_pairs(pairs: &mut [AttractorPair]) {
    pairs.sort_by(|a, b| {
        (a.attractor.len(), a.attractor.min(), &a.downset).cmp(&(
            b.attractor.len(),
            b.attractor.min(),
            &b.downset,
        ))
    });
}

/// One attractor per Morse node (the node plus all nodes below it), trivial ones dropped.
pub fn canonical_family(graph: &TransitionGraph, partition: &MorsePartition) -> AttractorFamily {
    let mut downsets: Vec<Vec<usize>> = (0..partition.num_morse_nodes())
        .map(|m| {
            let mut d = partition.morse_reachable(m);
            d.push(m);
            d.sort_unstable();
            d
        })
        .collect();
    downsets.sort();
    downsets.dedup();
    let mut pairs: Vec<AttractorPair> = downsets
        .into_iter()
        .map(|d| pair_unchecked(graph, partition, d))
        .filter(|p| !p.trivial)
        .collect();
    sort_pairs(&mut pairs);
    AttractorFamily {
        kind: FamilyKind::Canonical,
        pairs,
    }
}

/// Every downset of the Morse order, enumerated exhaustively.
pub fn full_lattice(
    graph: &TransitionGraph,
    partition: &MorsePartition,
    cap: usize,
) -> Result<AttractorFamily, ConleyError> {
    let m = partition.num_morse_nodes();
    let cap = cap.min(MAX_LATTICE_NODES);
    if m > cap {
        return Err(ConleyError::CapExceeded { count: m, cap });
    }
    let below: Vec<u64> = (0..m)
        .map(|i| {
            partition
                .morse_reachable(i)
                .into_iter()
                .fold(0u64, |acc, j| acc | (1 << j))
        })
        .collect();
    let mut pairs = Vec::new();
    for mask in 0u64..(1u64 << m) {
        let closed = (0..m).all(|i| mask & (1 << i) == 0 || below[i] & !mask == 0);
        if closed {
            let downset: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
            pairs.push(pair_unchecked(graph, partition, downset));
        }
    }
    sort_pairs(&mut pairs);
    Ok(AttractorFamily {
        kind: FamilyKind::FullLattice,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaDualReport {
    /// Recurrent cells equal the intersection of all `A ∪ A*`.
    pub holds: bool,
    /// Recurrent cells are contained in the intersection.
    pub easy_inclusion: bool,
    pub recurrent: CellSet,
    pub intersection: CellSet,
    /// Cells in the intersection that are not recurrent.
    pub witnesses: Vec<usize>,
    /// Recurrent cells missing from the intersection; always empty unless a
    /// pair is malformed.
    pub violations: Vec<usize>,
}

/// Compares the recurrent cells with `⋂ (A ∪ A*)` over the family.
pub fn verify_lemma_dual(
    graph: &TransitionGraph,
    partition: &MorsePartition,
    family: &AttractorFamily,
) -> LemmaDualReport {
    let n = graph.num_cells();
    let mut intersection = CellSet::full(n);
    for p in &family.pairs {
        intersection.intersect_with(&p.attractor.union(&p.repeller));
    }
    let recurrent = partition.recurrent_cells().clone();
    let witnesses = intersection.difference(&recurrent).to_vec();
    let violations = recurrent.difference(&intersection).to_vec();
    LemmaDualReport {
        holds: witnesses.is_empty() && violations.is_empty(),
        easy_inclusion: violations.is_empty(),
        recurrent,
        intersection,
        witnesses,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub holds: bool,
    pub pairs_checked: usize,
    /// Pairs of distinct Morse nodes no family member separates.
    pub unseparated: Vec<(usize, usize)>,
    /// `(pair index, Morse node)` where the node is not wholly inside `A` or `A*`.
    pub split_nodes: Vec<(usize, usize)>,
}

/// Checks that every two distinct Morse nodes are separated by some pair (one
/// inside `A`, the other inside `A*`) and that no pair splits a single node.
pub fn verify_separation(partition: &MorsePartition, family: &AttractorFamily) -> SeparationReport {
    let m = partition.num_morse_nodes();
    // side[p][i]: Some(false) if node i ⊆ A_p, Some(true) if ⊆ A*_p
    let mut split_nodes = Vec::new();
    let side: Vec<Vec<Option<bool>>> = family
        .pairs
        .iter()
        .enumerate()
        .map(|(pi, pair)| {
            (0..m)
                .map(|i| {
                    let cells = partition.morse_cells(i);
                    if pair.attracts(cells) {
                        Some(false)
                    } else if pair.repels(cells) {
                        Some(true)
                    } else {
                        split_nodes.push((pi + 1, i));
                        None
                    }
                })
                .collect()
        })
        .collect();
    let mut unseparated = Vec::new();
    let mut pairs_checked = 0;
    for i in 0..m {
        for j in i + 1..m {
            pairs_checked += 1;
            let separated = side.iter().any(|s| match (s[i], s[j]) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            });
            if !separated {
                unseparated.push((i, j));
            }
        }
    }
    SeparationReport {
        holds: unseparated.is_empty() && split_nodes.is_empty(),
        pairs_checked,
        unseparated,
        split_nodes,
    }
}
