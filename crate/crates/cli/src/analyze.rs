use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use clap::Args;
use conley_core::conley::{FamilySummary, SeparationReport};
use conley_core::lyapunov::{CompleteReport, CriticalValue};
use conley_core::{
    build_graph, canonical_family, complete_lyapunov, full_lattice, verify_complete, verify_lemma_dual,
    verify_separation, ConleyError, EdgeMode, LyapunovError, MorsePartition,
};
use serde::Serialize;

use crate::config::{parse_positive, Format, GridArgs, MapArgs, OutputArgs};
use crate::{ensure_dir, write_file, CliError, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyChoice {
    /// One attractor per Morse node.
    Canonical,
    /// Every downset of the Morse order.
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Chain step size; accepts ratios such as 2/1024.
    #[arg(long, value_parser = parse_positive)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "canonical")]
    pub family: FamilyChoice,
    /// Largest Morse node count for which the full lattice is enumerated.
    #[arg(long, default_value_t = conley_core::conley::DEFAULT_LATTICE_CAP)]
    pub cap: usize,
    /// Output files to write.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv,dot")]
    pub format: Vec<Format>,
    /// Recorded in the bundle; the analysis itself draws no random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record stage durations in the bundle (makes it run-dependent).
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub subdivisions: Vec<usize>,
    pub cells: usize,
    pub cell_diameter: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub edges: usize,
    pub recurrent_cells: usize,
    pub transient_cells: usize,
    pub components: usize,
    pub lipschitz_bound: f64,
    pub lipschitz_rigorous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseNodeSummary {
    pub id: usize,
    pub size: usize,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSummary {
    /// Number of coded attractor-repeller pairs.
    pub k: usize,
    pub eta: f64,
    pub critical_values: Vec<CriticalValue>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaDualSummary {
    pub holds: bool,
    pub easy_inclusion: bool,
    pub witnesses: Vec<usize>,
    pub violations: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Checks {
    pub complete: CompleteReport,
    pub separation: SeparationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma_dual: Option<LemmaDualSummary>,
    /// Morse node sizes plus transient cells add up to the cell count.
    pub counts_consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisBundle {
    pub map: String,
    pub seed: u64,
    pub grid: GridSummary,
    pub epsilon: f64,
    pub mode: EdgeMode,
    pub graph: GraphSummary,
    pub morse_nodes: Vec<MorseNodeSummary>,
    /// Morse graph edges `[from, to]`.
    pub condensation_edges: Vec<[usize; 2]>,
    pub attractors: FamilySummary,
    pub lyapunov: LyapunovSummary,
    pub checks: Checks,
    /// Stage durations in milliseconds; empty unless requested.
    pub timings: BTreeMap<String, f64>,
}

impl AnalysisBundle {
    pub fn all_checks_hold(&self) -> bool {
        let c = &self.checks;
        c.complete.all_hold()
            && c.separation.holds
            && c.counts_consistent
            && c.lemma_dual.as_ref().is_none_or(|l| l.holds)
    }
}

fn ratio(cv: &CriticalValue) -> String {
    if cv.den == 1u32.into() {
        cv.num.to_string()
    } else {
        format!("{}/{}", cv.num, cv.den)
    }
}

fn lyapunov_csv(values: &[f64], partition: &MorsePartition) -> String {
    let mut out = String::from("cell,value,recurrent,morse_node\n");
    for (c, v) in values.iter().enumerate() {
        let node = partition.morse_node_of(c);
        let _ = writeln!(
            out,
            "{c},{v},{},{}",
            node.is_some(),
            node.map(|n| n.to_string()).unwrap_or_default()
        );
    }
    out
}

/// Runs the full pipeline and writes the requested files. Verification
/// failures are reported through `Outcome::ok`, not as errors.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(AnalysisBundle, Outcome), CliError> {
    if args.cap == 0 {
        return Err(CliError::Config("--cap must be at least 1".into()));
    }
    let map = args.map.build()?;
    let grid = args.grid.build(map.domain())?;
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str| {
        if args.timings {
            timings.insert(name.to_string(), clock.elapsed().as_secs_f64() * 1e3);
        }
        clock = Instant::now();
    };

    let graph = build_graph(&grid, &map, args.epsilon, args.grid.mode)
        .map_err(|e| CliError::Config(e.to_string()))?;
    lap("graph");
    let partition = MorsePartition::new(&graph);
    lap("morse");
    let family = match args.family {
        FamilyChoice::Canonical => canonical_family(&graph, &partition),
        FamilyChoice::Full => full_lattice(&graph, &partition, args.cap).map_err(|e| match e {
            ConleyError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            other => CliError::Config(other.to_string()),
        })?,
    };
    lap("family");
    let lyap = complete_lyapunov(&graph, &partition, &family, &grid).map_err(|e| match e {
        LyapunovError::NotSeparated(..) => CliError::Verification(e.to_string()),
        other => CliError::Config(other.to_string()),
    })?;
    lap("lyapunov");
    let complete = verify_complete(&graph, &partition, &lyap);
    let separation = verify_separation(&partition, &family);
    let lemma_dual = (args.family == FamilyChoice::Full).then(|| {
        let r = verify_lemma_dual(&graph, &partition, &family);
        LemmaDualSummary {
            holds: r.holds,
            easy_inclusion: r.easy_inclusion,
            witnesses: r.witnesses,
            violations: r.violations,
        }
    });
    lap("verify");

    let transient = partition.transient_cells().len();
    let morse_nodes: Vec<MorseNodeSummary> = partition
        .morse_nodes()
        .enumerate()
        .map(|(id, cells)| MorseNodeSummary {
            id,
            size: cells.len(),
            cells: cells.to_vec(),
        })
        .collect();
    let counts_consistent = morse_nodes.iter().map(|m| m.size).sum::<usize>() + transient == grid.num_cells();

    let bundle = AnalysisBundle {
        map: map.spec().to_string(),
        seed: args.seed,
        grid: GridSummary {
            subdivisions: grid.subdivisions().to_vec(),
            cells: grid.num_cells(),
            cell_diameter: grid.cell_diameter(),
        },
        epsilon: args.epsilon,
        mode: args.grid.mode,
        graph: GraphSummary {
            edges: graph.edge_count(),
            recurrent_cells: partition.recurrent_cells().len(),
            transient_cells: transient,
            components: partition.components().len(),
            lipschitz_bound: map.lipschitz_bound(),
            lipschitz_rigorous: map.lipschitz_is_rigorous(),
        },
        morse_nodes,
        condensation_edges: partition.morse_edges().iter().map(|&(a, b)| [a, b]).collect(),
        attractors: family.summary(),
        lyapunov: LyapunovSummary {
            k: lyap.k,
            eta: lyap.eta,
            critical_values: lyap.critical_values.clone(),
        },
        checks: Checks {
            complete,
            separation,
            lemma_dual,
            counts_consistent,
        },
        timings: BTreeMap::new(),
    };

    let dir = &args.output.out;
    ensure_dir(dir)?;
    if args.format.contains(&Format::Csv) {
        write_file(dir, "lyapunov.csv", &lyapunov_csv(&lyap.values, &partition))?;
    }
    if args.format.contains(&Format::Dot) {
        write_file(dir, "condensation.dot", &partition.to_dot())?;
    }
    lap("write");
    let mut bundle = bundle;
    bundle.timings = timings;
    if args.format.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&bundle).expect("bundle serializes");
        write_file(dir, "bundle.json", &(json + "\n"))?;
    }

    let ok = bundle.all_checks_hold();
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{}: {} cells, {} edges ({} mode, epsilon {})",
        bundle.map, bundle.grid.cells, bundle.graph.edges, bundle.mode, bundle.epsilon
    );
    let _ = writeln!(
        summary,
        "morse nodes: {}, recurrent cells: {}, non-trivial attractors: {}",
        bundle.morse_nodes.len(),
        bundle.graph.recurrent_cells,
        bundle.attractors.pairs.iter().filter(|p| !p.trivial).count()
    );
    let values: Vec<String> = bundle.lyapunov.critical_values.iter().map(ratio).collect();
    let _ = writeln!(summary, "critical values: {}", values.join(", "));
    let c = &bundle.checks;
    let flag = |b: bool| if b { "ok" } else { "FAILED" };
    let _ = writeln!(
        summary,
        "checks: strict decrease {}, distinct node values {}, cantor digits {}, family separates nodes {}{}",
        flag(c.complete.strict_decrease.holds),
        flag(c.complete.separates_components.holds),
        flag(c.complete.cantor_digits.holds),
        flag(c.separation.holds),
        c.lemma_dual
            .as_ref()
            .map(|l| format!(", recurrent set recovered {}", flag(l.holds)))
            .unwrap_or_default()
    );
    Ok((bundle, Outcome { ok, summary }))
}
