//! The ε-chain transition graph over grid cells, and the structure read off
//! it: reachability, the recurrent cells, and the chain-transitive components
//! (Morse nodes) with their reachability order.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::cellset::CellSet;
use crate::error::{GraphError, GridError, MapError};
use crate::grid::{CellId, Grid};
use crate::mapdef::MapInstance;

/// How an ε-step between two cells is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMode {
    /// `c → c′` iff `d(f(center c), center c′) < ε`.
    #[default]
    Center,
    /// `c → c′` iff the box of `c′` meets the ball around `f(center c)` fattened by
    /// the Lipschitz bound; covers every ε-step from any point of `c`.
    Outer,
}

impl fmt::Display for EdgeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeMode::Center => "center",
            EdgeMode::Outer => "outer",
        })
    }
}

impl FromStr for EdgeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "center" => Ok(EdgeMode::Center),
            "outer" => Ok(EdgeMode::Outer),
            other => Err(format!("unknown edge mode `{other}` (expected center or outer)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphParams {
    pub epsilon: f64,
    pub mode: EdgeMode,
}

/// Directed graph on cells `0..num_cells` with sorted, duplicate-free successor lists.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph {
    succ: Vec<Vec<usize>>,
    params: Option<GraphParams>,
}

impl TransitionGraph {
    /// Builds a graph from explicit successor lists, sorting and deduplicating them.
    pub fn from_adjacency(mut succ: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let n = succ.len();
        for (cell, list) in succ.iter_mut().enumerate() {
            if let Some(&bad) = list.iter().find(|&&s| s >= n) {
                return Err(GraphError::SuccessorOutOfRange {
                    cell,
                    succ: bad,
                    num_cells: n,
                });
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(TransitionGraph { succ, params: None })
    }

    pub fn num_cells(&self) -> usize {
        self.succ.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, c: usize) -> &[usize] {
        &self.succ[c]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.succ
    }

    pub fn params(&self) -> Option<GraphParams> {
        self.params
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.succ[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().map(move |&b| (a, b)))
    }

    /// True when every cell has at least one successor.
    pub fn is_total(&self) -> bool {
        self.succ.iter().all(|l| !l.is_empty())
    }

    /// Cells reachable from `from` by a path of length ≥ 1.
    pub fn reachable(&self, from: CellId) -> CellSet {
        self.reachable_from_set(&CellSet::from_cells(self.num_cells(), [from.0]))
    }

    /// Cells reachable by a path of length ≥ 1 from some cell of `sources`.
    pub fn reachable_from_set(&self, sources: &CellSet) -> CellSet {
        let starts = sources.iter().flat_map(|c| self.succ[c].iter().copied());
        forward_closure(&self.succ, starts, None)
    }

    /// Cells lying on a cycle.
    pub fn chain_recurrent_cells(&self) -> CellSet {
        MorsePartition::new(self).recurrent_cells().clone()
    }

    /// The same cells with every edge reversed.
    pub fn transpose(&self) -> TransitionGraph {
        let mut rev = vec![Vec::new(); self.num_cells()];
        for (a, b) in self.edges() {
            rev[b].push(a);
        }
        // pushing in increasing `a` keeps every list sorted
        TransitionGraph {
            succ: rev,
            params: self.params,
        }
    }

    /// Edge list as CSV with a `src,dst` header.
    pub fn to_edge_csv(&self) -> String {
        let mut out = String::from("src,dst\n");
        for (a, b) in self.edges() {
            let _ = writeln!(out, "{a},{b}");
        }
        out
    }
}

/// Breadth-first closure from `starts` (inclusive), optionally confined to `allowed`.
pub(crate) fn forward_closure(
    succ: &[Vec<usize>],
    starts: impl IntoIterator<Item = usize>,
    allowed: Option<&CellSet>,
) -> CellSet {
    let n = succ.len();
    let mut seen = CellSet::empty(n);
    let mut queue = VecDeque::new();
    let ok = |c: usize| allowed.is_none_or(|a| a.contains(c));
    for s in starts {
        if ok(s) && seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(c) = queue.pop_front() {
        for &d in &succ[c] {
            if ok(d) && seen.insert(d) {
                queue.push_back(d);
            }
        }
    }
    seen
}

/// Builds the ε-chain transition graph of `map` on `grid`.
///
/// In center mode the cell containing `f(center c)` is always a successor of
/// `c`, so every cell has out-degree at least one even when `ε` is below half
/// the cell diameter.
pub fn build_graph(
    grid: &Grid,
    map: &MapInstance,
    epsilon: f64,
    mode: EdgeMode,
) -> Result<TransitionGraph, GraphError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GraphError::BadEpsilon(epsilon));
    }
    if map.domain().dim() != grid.domain().dim() {
        return Err(MapError::Grid(GridError::DimensionMismatch {
            expected: grid.domain().dim(),
            found: map.domain().dim(),
        })
        .into());
    }
    let diam = grid.cell_diameter();
    let outer_radius = epsilon + map.lipschitz_bound() * diam / 2.0 + diam / 2.0;
    let cell_successors = |c: usize| -> Result<Vec<usize>, GraphError> {
        let image = map.eval(&grid.cell_center(CellId(c)))?;
        let cells = match mode {
            EdgeMode::Center => {
                let home = grid
                    .cell_of(&image)
                    .map_err(|e| GraphError::Map(MapError::OutsideDomain(e)))?;
                let mut v: Vec<usize> = grid
                    .ball_cells(&image, epsilon)
                    .into_iter()
                    .filter(|&d| grid.domain().metric_unchecked(&image, &grid.cell_center(d)) < epsilon)
                    .map(|d| d.0)
                    .collect();
                if let Err(at) = v.binary_search(&home.0) {
                    v.insert(at, home.0);
                }
                v
            }
            EdgeMode::Outer => grid
                .ball_cells(&image, outer_radius)
                .into_iter()
                .map(|d| d.0)
                .collect(),
        };
        Ok(cells)
    };

    let n = grid.num_cells();
    #[cfg(feature = "parallel")]
    let per_cell: Vec<Result<Vec<usize>, GraphError>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(cell_successors).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_cell: Vec<Result<Vec<usize>, GraphError>> = (0..n).map(cell_successors).collect();

    let succ = per_cell.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(TransitionGraph {
        succ,
        params: Some(GraphParams { epsilon, mode }),
    })
}

/// Strongly connected components by iterative Tarjan. Components come out in
/// reverse topological order of the condensation (sinks first).
pub fn tarjan_scc(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next = 0usize;
    let mut out = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if let Some(&w) = succ[v].get(top.1) {
                top.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub cells: Vec<usize>,
    /// Size ≥ 2, or a single cell with a self-loop.
    pub has_cycle: bool,
}

/// SCC decomposition with the Morse nodes (cycle-bearing components) singled out.
///
/// Components and Morse nodes are both numbered in increasing order of their
/// smallest cell.
#[derive(Debug, Clone)]
pub struct MorsePartition {
    component_of: Vec<usize>,
    components: Vec<Component>,
    condensation: Vec<Vec<usize>>,
    topo_order: Vec<usize>,
    topo_rank: Vec<usize>,
    morse_components: Vec<usize>,
    morse_of_component: Vec<Option<usize>>,
    /// For each Morse node, the Morse nodes reachable from it (excluding itself).
    morse_reach: Vec<FixedBitSet>,
    morse_edges: Vec<(usize, usize)>,
    recurrent: CellSet,
}

impl MorsePartition {
    pub fn new(graph: &TransitionGraph) -> Self {
        let n = graph.num_cells();
        let mut comps = tarjan_scc(graph.adjacency());
        comps.sort_unstable_by_key(|c| c[0]);

        let mut component_of = vec![0usize; n];
        for (i, comp) in comps.iter().enumerate() {
            for &c in comp {
                component_of[c] = i;
            }
        }
        let components: Vec<Component> = comps
            .into_iter()
            .map(|cells| {
                let has_cycle = cells.len() > 1 || graph.has_edge(cells[0], cells[0]);
                Component { cells, has_cycle }
            })
            .collect();
        let k = components.len();

        let mut condensation = vec![Vec::new(); k];
        for (a, b) in graph.edges() {
            let (ca, cb) = (component_of[a], component_of[b]);
            if ca != cb {
                condensation[ca].push(cb);
            }
        }
        for list in &mut condensation {
            list.sort_unstable();
            list.dedup();
        }

        // Kahn's algorithm, smallest id first among ready components
        let mut indeg = vec![0usize; k];
        for list in &condensation {
            for &b in list {
                indeg[b] += 1;
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> = (0..k).filter(|&i| indeg[i] == 0).map(Reverse).collect();
        let mut topo_order = Vec::with_capacity(k);
        while let Some(Reverse(i)) = ready.pop() {
            topo_order.push(i);
            for &b in &condensation[i] {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(Reverse(b));
                }
            }
        }
        debug_assert_eq!(topo_order.len(), k, "condensation must be acyclic");
        let mut topo_rank = vec![0usize; k];
        for (r, &i) in topo_order.iter().enumerate() {
            topo_rank[i] = r;
        }

        let mut morse_components = Vec::new();
        let mut morse_of_component = vec![None; k];
        for (i, comp) in components.iter().enumerate() {
            if comp.has_cycle {
                morse_of_component[i] = Some(morse_components.len());
                morse_components.push(i);
            }
        }
        let m = morse_components.len();

        // omega[i]: Morse nodes reachable from component i, itself included;
        // first_hit[i]: Morse nodes reachable from i through transient components only
        let mut omega = vec![FixedBitSet::with_capacity(m); k];
        let mut first_hit = vec![FixedBitSet::with_capacity(m); k];
        for &i in topo_order.iter().rev() {
            let mut om = FixedBitSet::with_capacity(m);
            let mut fh = FixedBitSet::with_capacity(m);
            for &s in &condensation[i] {
                om.union_with(&omega[s]);
                match morse_of_component[s] {
                    Some(ms) => fh.insert(ms),
                    None => fh.union_with(&first_hit[s]),
                }
            }
            if let Some(mi) = morse_of_component[i] {
                om.insert(mi);
            }
            omega[i] = om;
            first_hit[i] = fh;
        }
        let mut morse_reach = Vec::with_capacity(m);
        let mut morse_edges = Vec::new();
        for (mi, &ci) in morse_components.iter().enumerate() {
            let mut strict = FixedBitSet::with_capacity(m);
            for &s in &condensation[ci] {
                strict.union_with(&omega[s]);
            }
            morse_reach.push(strict);
            for mj in first_hit[ci].ones() {
                morse_edges.push((mi, mj));
            }
        }

        let recurrent = CellSet::from_cells(
            n,
            morse_components
                .iter()
                .flat_map(|&ci| components[ci].cells.iter().copied()),
        );

        MorsePartition {
            component_of,
            components,
            condensation,
            topo_order,
            topo_rank,
            morse_components,
            morse_of_component,
            morse_reach,
            morse_edges,
            recurrent,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.component_of.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_of(&self, c: usize) -> usize {
        self.component_of[c]
    }

    /// Condensation successors of a component.
    pub fn condensation(&self) -> &[Vec<usize>] {
        &self.condensation
    }

    /// Components in topological order: sources first, attractor-most last.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo_order
    }

    pub fn topological_rank(&self, component: usize) -> usize {
        self.topo_rank[component]
    }

    pub fn num_morse_nodes(&self) -> usize {
        self.morse_components.len()
    }

    pub fn morse_cells(&self, node: usize) -> &[usize] {
        &self.components[self.morse_components[node]].cells
    }

    pub fn morse_cell_set(&self, node: usize) -> CellSet {
        CellSet::from_cells(self.num_cells(), self.morse_cells(node).iter().copied())
    }

    pub fn morse_nodes(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.num_morse_nodes()).map(|i| self.morse_cells(i))
    }

    pub fn morse_node_of(&self, c: usize) -> Option<usize> {
        self.morse_of_component[self.component_of[c]]
    }

    pub fn morse_component(&self, node: usize) -> usize {
        self.morse_components[node]
    }

    /// Whether Morse node `to` is reachable from `from` (strictly, `from ≠ to`).
    pub fn morse_reaches(&self, from: usize, to: usize) -> bool {
        self.morse_reach[from].contains(to)
    }

    pub fn morse_reachable(&self, from: usize) -> Vec<usize> {
        self.morse_reach[from].ones().collect()
    }

    /// Edges of the Morse graph: `(i, j)` when node `j` is reachable from node
    /// `i` through transient cells only.
    pub fn morse_edges(&self) -> &[(usize, usize)] {
        &self.morse_edges
    }

    /// Morse nodes in topological order (repeller-most first).
    pub fn morse_order(&self) -> Vec<usize> {
        self.topo_order
            .iter()
            .filter_map(|&ci| self.morse_of_component[ci])
            .collect()
    }

    pub fn recurrent_cells(&self) -> &CellSet {
        &self.recurrent
    }

    pub fn transient_cells(&self) -> CellSet {
        self.recurrent.complement()
    }

    pub fn is_recurrent(&self, c: usize) -> bool {
        self.recurrent.contains(c)
    }

    /// Morse nodes reachable from `c` (including its own node if recurrent);
    /// the combinatorial ω-limit of `c`.
    pub fn omega_nodes(&self, c: CellId) -> Vec<usize> {
        let k = self.components.len();
        let start = self.component_of[c.0];
        let mut seen = vec![false; k];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(i) = queue.pop_front() {
            if let Some(m) = self.morse_of_component[i] {
                out.push(m);
            }
            for &s in &self.condensation[i] {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Morse graph in DOT format; nodes labeled with id and cell count.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph morse {\n");
        for i in 0..self.num_morse_nodes() {
            let _ = writeln!(
                out,
                "  m{i} [label=\"M{i} ({} cells)\"];",
                self.morse_cells(i).len()
            );
        }
        for &(a, b) in &self.morse_edges {
            let _ = writeln!(out, "  m{a} -> m{b};");
        }
        out.push_str("}\n");
        out
    }
}

/// Cells on a cycle, via SCCs.
pub fn chain_recurrent_cells(graph: &TransitionGraph) -> CellSet {
    graph.chain_recurrent_cells()
}

pub fn morse_partition(graph: &TransitionGraph) -> MorsePartition {
    MorsePartition::new(graph)
}
