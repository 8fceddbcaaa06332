use std::fmt::Write as _;

use clap::Args;
use conley_core::{build_graph, MorsePartition};
use serde::Serialize;

use crate::config::{parse_positive, GridArgs, MapArgs, OutputArgs};
use crate::{ensure_dir, write_file, CliError, Outcome};

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Ascending, comma-separated; ratios such as 2/1024 are accepted.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_positive)]
    pub epsilons: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub edges: usize,
    pub recurrent_cells: usize,
    pub morse_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Edge and recurrent-cell counts never decrease as epsilon grows.
    pub monotone: bool,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,edges,recurrent_cells,morse_nodes\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.epsilon, r.edges, r.recurrent_cells, r.morse_nodes
            );
        }
        out
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(SweepTable, Outcome), CliError> {
    if args.epsilons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("--epsilons must be strictly ascending".into()));
    }
    let map = args.map.build()?;
    let grid = args.grid.build(map.domain())?;
    let rows = args
        .epsilons
        .iter()
        .map(|&epsilon| {
            let g = build_graph(&grid, &map, epsilon, args.grid.mode)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let p = MorsePartition::new(&g);
            Ok(SweepRow {
                epsilon,
                edges: g.edge_count(),
                recurrent_cells: p.recurrent_cells().len(),
                morse_nodes: p.num_morse_nodes(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].edges >= w[0].edges && w[1].recurrent_cells >= w[0].recurrent_cells);
    let table = SweepTable { rows, monotone };

    let dir = &args.output.out;
    ensure_dir(dir)?;
    write_file(dir, "sweep.csv", &table.to_csv())?;

    let mut summary = table.to_csv();
    if !monotone {
        summary.push_str("error: edge or recurrent-cell counts decreased as epsilon grew\n");
    }
    Ok((
        table.clone(),
        Outcome {
            ok: monotone,
            summary,
        },
    ))
}
