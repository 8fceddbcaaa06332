use std::fmt::Write as _;

use clap::Args;
use conley_core::recurrence::{connectivity_check, simulate_returns, ConnectivityReport, RecurrenceReport};
use conley_core::{build_graph, EdgeMode};
use serde::Serialize;

use crate::config::{parse_number, parse_positive, Format, GridArgs, MapArgs, OutputArgs};
use crate::{ensure_dir, write_file, CliError, Outcome};

#[derive(Debug, Clone, Args)]
pub struct RecurrenceArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Number of sampled starting points.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// Iterations per point.
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    /// Return radius.
    #[arg(long, default_value = "0.05", value_parser = parse_positive)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fail (exit 1) when the returned fraction is below this.
    #[arg(long, value_parser = parse_number)]
    pub min_fraction: Option<f64>,
    /// Also build the transition graph and test strong connectivity.
    #[arg(long)]
    pub connectivity: bool,
    /// Fail (exit 1) unless the graph is strongly connected; implies --connectivity.
    #[arg(long)]
    pub require_connected: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Chain step for the connectivity graph; defaults to twice the cell diameter.
    #[arg(long, value_parser = parse_positive)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv")]
    pub format: Vec<Format>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectivitySummary {
    pub subdivisions: Vec<usize>,
    pub epsilon: f64,
    pub mode: EdgeMode,
    pub edges: usize,
    #[serde(flatten)]
    pub report: ConnectivityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceBundle {
    pub map: String,
    pub recurrence: RecurrenceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connectivity: Option<ConnectivitySummary>,
    pub min_fraction: Option<f64>,
    pub thresholds_met: bool,
}

pub fn cmd_recurrence(args: &RecurrenceArgs) -> Result<(RecurrenceBundle, Outcome), CliError> {
    let map = args.map.build()?;
    let report = simulate_returns(&map, args.points, args.iters, args.delta, args.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let connectivity = if args.connectivity || args.require_connected {
        let grid = args.grid.build(map.domain())?;
        let epsilon = args.epsilon.unwrap_or(2.0 * grid.cell_diameter());
        let graph =
            build_graph(&grid, &map, epsilon, args.grid.mode).map_err(|e| CliError::Config(e.to_string()))?;
        Some(ConnectivitySummary {
            subdivisions: grid.subdivisions().to_vec(),
            epsilon,
            mode: args.grid.mode,
            edges: graph.edge_count(),
            report: connectivity_check(&graph),
        })
    } else {
        None
    };
    let fraction_ok = args.min_fraction.is_none_or(|m| report.returned_fraction >= m);
    let connected_ok =
        !args.require_connected || connectivity.as_ref().is_some_and(|c| c.report.strongly_connected);
    let bundle = RecurrenceBundle {
        map: map.spec().to_string(),
        recurrence: report,
        connectivity,
        min_fraction: args.min_fraction,
        thresholds_met: fraction_ok && connected_ok,
    };

    let dir = &args.output.out;
    ensure_dir(dir)?;
    if args.format.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&bundle).expect("report serializes");
        write_file(dir, "recurrence.json", &(json + "\n"))?;
    }
    if args.format.contains(&Format::Csv) {
        write_file(
            dir,
            "recurrence_histogram.csv",
            &bundle.recurrence.histogram_csv(),
        )?;
    }

    let r = &bundle.recurrence;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{}: {} of {} points returned within {} in {} iterations (fraction {})",
        bundle.map,
        r.return_time_histogram.iter().map(|b| b.count).sum::<usize>(),
        r.n_points,
        r.delta,
        r.n_iters,
        r.returned_fraction
    );
    for w in &r.warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    if let Some(c) = &bundle.connectivity {
        match c.report.witness {
            None => {
                let _ = writeln!(summary, "strongly connected at epsilon {}", c.epsilon);
            }
            Some((x, y)) => {
                let _ = writeln!(
                    summary,
                    "not strongly connected at epsilon {}: no chain from cell {x} to cell {y}",
                    c.epsilon
                );
            }
        }
    }
    Ok((
        bundle.clone(),
        Outcome {
            ok: bundle.thresholds_met,
            summary,
        },
    ))
}
