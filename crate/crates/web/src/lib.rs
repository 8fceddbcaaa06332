//! WebAssembly bindings for the demo page in `www/`. Every export takes plain
//! numbers and strings and returns a JSON string; the `*_json` functions do the
//! work and are usable natively.

use conley_core::conley::canonical_family;
use conley_core::recurrence::simulate_returns;
use conley_core::{
    build_graph, complete_lyapunov, verify_complete, Domain, EdgeMode, Grid, MapInstance, MorsePartition,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid the page may request; keeps a click responsive.
pub const MAX_CELLS: usize = 1 << 14;

fn demo_map(map: &str, param: f64) -> Result<MapInstance, String> {
    let m = match map.trim() {
        "identity" => Ok(MapInstance::identity(Domain::circle())),
        "rotation" => MapInstance::rotation(param),
        "northsouth" => MapInstance::northsouth(param),
        "cat" => Ok(MapInstance::cat()),
        text => MapInstance::custom(text, Domain::circle()),
    };
    m.map_err(|e| e.to_string())
}

fn grid_for(map: &MapInstance, cells: usize) -> Result<Grid, String> {
    let dim = map.domain().dim();
    if cells < 2 || cells.pow(dim as u32) > MAX_CELLS {
        return Err(format!("grid must have between 2 and {MAX_CELLS} cells"));
    }
    Grid::new(map.domain().clone(), vec![cells; dim]).map_err(|e| e.to_string())
}

fn mode_of(mode: &str) -> Result<EdgeMode, String> {
    mode.parse()
}

#[derive(Serialize)]
struct Fraction {
    num: String,
    den: String,
    value: f64,
}

#[derive(Serialize)]
struct Profile {
    map: String,
    cells: usize,
    edges: usize,
    /// Lyapunov value per cell.
    values: Vec<f64>,
    /// Morse node per cell, -1 for transient cells.
    morse_node: Vec<i64>,
    morse_sizes: Vec<usize>,
    morse_edges: Vec<[usize; 2]>,
    critical_values: Vec<Fraction>,
    checks_hold: bool,
}

/// Morse decomposition and complete Lyapunov function of a map at step `epsilon_cells` cell widths.
pub fn lyapunov_profile_json(
    map: &str,
    param: f64,
    cells: usize,
    epsilon_cells: f64,
    mode: &str,
) -> Result<String, String> {
    let map = demo_map(map, param)?;
    let grid = grid_for(&map, cells)?;
    let graph = build_graph(&grid, &map, epsilon_cells * grid.cell_width(0), mode_of(mode)?)
        .map_err(|e| e.to_string())?;
    let partition = MorsePartition::new(&graph);
    let family = canonical_family(&graph, &partition);
    let lyap = complete_lyapunov(&graph, &partition, &family, &grid).map_err(|e| e.to_string())?;
    let report = verify_complete(&graph, &partition, &lyap);
    let profile = Profile {
        map: map.spec().to_string(),
        cells: grid.num_cells(),
        edges: graph.edge_count(),
        morse_node: (0..grid.num_cells())
            .map(|c| partition.morse_node_of(c).map_or(-1, |n| n as i64))
            .collect(),
        morse_sizes: partition.morse_nodes().map(|m| m.len()).collect(),
        morse_edges: partition.morse_edges().iter().map(|&(a, b)| [a, b]).collect(),
        critical_values: lyap
            .critical_values
            .iter()
            .map(|cv| Fraction {
                num: cv.num.to_string(),
                den: cv.den.to_string(),
                value: cv.value,
            })
            .collect(),
        values: lyap.values,
        checks_hold: report.all_hold(),
    };
    Ok(serde_json::to_string(&profile).expect("profile serializes"))
}

#[derive(Serialize)]
struct SweepRow {
    epsilon_cells: f64,
    edges: usize,
    recurrent_cells: usize,
    morse_nodes: usize,
}

/// Graph statistics for each step in `epsilon_cells` (comma-separated, in cell widths).
pub fn epsilon_sweep_json(
    map: &str,
    param: f64,
    cells: usize,
    epsilon_cells: &str,
    mode: &str,
) -> Result<String, String> {
    let map = demo_map(map, param)?;
    let grid = grid_for(&map, cells)?;
    let mode = mode_of(mode)?;
    let rows = epsilon_cells
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let k: f64 = s.trim().parse().map_err(|_| format!("invalid step `{s}`"))?;
            let g = build_graph(&grid, &map, k * grid.cell_width(0), mode).map_err(|e| e.to_string())?;
            let p = MorsePartition::new(&g);
            Ok(SweepRow {
                epsilon_cells: k,
                edges: g.edge_count(),
                recurrent_cells: p.recurrent_cells().len(),
                morse_nodes: p.num_morse_nodes(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(serde_json::to_string(&rows).expect("rows serialize"))
}

/// Sampled first-return statistics.
pub fn return_histogram_json(
    map: &str,
    param: f64,
    points: usize,
    iters: usize,
    delta: f64,
    seed: u32,
) -> Result<String, String> {
    let map = demo_map(map, param)?;
    if points.saturating_mul(iters) > 50_000_000 {
        return Err("points × iterations is limited to 5e7 in the browser".into());
    }
    let report = simulate_returns(&map, points, iters, delta, seed as u64).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[wasm_bindgen]
pub fn lyapunov_profile(
    map: &str,
    param: f64,
    cells: usize,
    epsilon_cells: f64,
    mode: &str,
) -> Result<String, JsValue> {
    lyapunov_profile_json(map, param, cells, epsilon_cells, mode).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn epsilon_sweep(
    map: &str,
    param: f64,
    cells: usize,
    epsilon_cells: &str,
    mode: &str,
) -> Result<String, JsValue> {
    epsilon_sweep_json(map, param, cells, epsilon_cells, mode).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn return_histogram(
    map: &str,
    param: f64,
    points: usize,
    iters: usize,
    delta: f64,
    seed: u32,
) -> Result<String, JsValue> {
    return_histogram_json(map, param, points, iters, delta, seed).map_err(|e| JsValue::from_str(&e))
}
