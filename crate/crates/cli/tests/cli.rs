use std::path::Path;

use conley_cli::run;
use serde_json::Value;

fn conley(args: &[&str], out: &Path) -> i32 {
    let mut v: Vec<String> = std::iter::once("conley")
        .chain(args.iter().copied())
        .map(String::from)
        .collect();
    v.push("--out".into());
    v.push(out.display().to_string());
    run(v)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn northsouth_bundle_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "analyze",
            "--map",
            "northsouth",
            "--a",
            "0.1",
            "--grid",
            "1024",
            "--epsilon",
            "0.00195",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let b = read_json(&dir.path().join("bundle.json"));
    for key in [
        "grid",
        "epsilon",
        "mode",
        "morse_nodes",
        "condensation_edges",
        "attractors",
        "lyapunov",
        "checks",
        "timings",
    ] {
        assert!(b.get(key).is_some(), "missing {key}");
    }
    assert_eq!(b["timings"], serde_json::json!({}));
    assert_eq!(b["mode"], "center");
    let nodes = b["morse_nodes"].as_array().unwrap();
    let holds = |c: usize| {
        nodes
            .iter()
            .any(|n| n["cells"].as_array().unwrap().contains(&Value::from(c)))
    };
    assert!(holds(0) && holds(512));
    let total: u64 = nodes.iter().map(|n| n["size"].as_u64().unwrap()).sum::<u64>()
        + b["graph"]["transient_cells"].as_u64().unwrap();
    assert_eq!(total, 1024);
    let cvs = b["lyapunov"]["critical_values"].as_array().unwrap();
    assert_eq!(cvs[0]["num"], 0);
    assert_eq!(cvs[0]["den"], 1);
    assert_eq!(b["checks"]["complete"]["strict_decrease"]["holds"], true);

    let csv = std::fs::read_to_string(dir.path().join("lyapunov.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("cell,value,recurrent,morse_node"));
    assert_eq!(lines.count(), 1024);
    let dot = std::fs::read_to_string(dir.path().join("condensation.dot")).unwrap();
    assert!(dot.starts_with("digraph morse {"));
}

#[test]
fn rotation_is_one_node() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "analyze",
            "--map",
            "rotation",
            "--alpha",
            "0.618034",
            "--grid",
            "512",
            "--epsilon",
            "0.0039",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let b = read_json(&dir.path().join("bundle.json"));
    let nodes = b["morse_nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 1);
    assert_eq!(nodes[0]["size"], 512);
    assert_eq!(b["attractors"]["pairs"].as_array().unwrap().len(), 0);
    let cvs = b["lyapunov"]["critical_values"].as_array().unwrap();
    assert_eq!(cvs.len(), 1);
    assert_eq!(cvs[0]["value"], 0.0);
}

#[test]
fn parse_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        conley(&["analyze", "--map", "x1 +", "--epsilon", "0.01"], dir.path()),
        2
    );
    assert!(!dir.path().join("bundle.json").exists());
    assert_eq!(
        conley(&["analyze", "--map", "rotation", "--epsilon", "-1"], dir.path()),
        2
    );
    assert_eq!(
        conley(
            &[
                "analyze",
                "--map",
                "cat",
                "--grid",
                "8",
                "--epsilon",
                "0.1",
                "--mode",
                "sideways"
            ],
            dir.path()
        ),
        2
    );
    assert_eq!(
        conley(
            &[
                "analyze",
                "--map",
                "northsouth",
                "--a",
                "0.5",
                "--epsilon",
                "0.01"
            ],
            dir.path()
        ),
        2
    );
    assert_eq!(
        conley(
            &["analyze", "--map", "cat", "--grid", "8x8x8", "--epsilon", "0.1"],
            dir.path()
        ),
        2
    );
}

#[test]
fn lattice_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "analyze",
            "--map",
            "northsouth",
            "--epsilon",
            "8/1024",
            "--family",
            "full",
            "--cap",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(code, 3);
}

#[test]
fn full_family_reports_recovered_recurrent_set() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "analyze",
            "--map",
            "northsouth",
            "--grid",
            "256",
            "--epsilon",
            "2/256",
            "--family",
            "full",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let b = read_json(&dir.path().join("bundle.json"));
    assert_eq!(b["attractors"]["kind"], "full_lattice");
    assert_eq!(b["checks"]["lemma_dual"]["holds"], true);
}

#[test]
fn formats_select_files() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "analyze",
            "--map",
            "identity",
            "--grid",
            "16",
            "--epsilon",
            "0.1",
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert!(dir.path().join("lyapunov.csv").exists());
    assert!(!dir.path().join("bundle.json").exists());
    assert!(!dir.path().join("condensation.dot").exists());
}

#[test]
fn custom_map_on_torus() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "analyze",
            "--map",
            "2*x1 + x2; x1 + x2",
            "--dim",
            "2",
            "--grid",
            "16",
            "--epsilon",
            "0.2",
            "--mode",
            "outer",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let b = read_json(&dir.path().join("bundle.json"));
    assert_eq!(b["graph"]["lipschitz_rigorous"], false);
    assert_eq!(b["morse_nodes"].as_array().unwrap().len(), 1);
}

#[test]
fn timings_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "analyze",
            "--map",
            "identity",
            "--grid",
            "16",
            "--epsilon",
            "0.1",
            "--timings",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let b = read_json(&dir.path().join("bundle.json"));
    assert!(b["timings"]["graph"].is_number());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "map = northsouth\na = 0.1\ngrid = 128\nepsilon = 0.5\n").unwrap();
    let code = conley(
        &["analyze", "--config", cfg.to_str().unwrap(), "--epsilon", "2/128"],
        dir.path(),
    );
    assert_eq!(code, 0);
    let b = read_json(&dir.path().join("bundle.json"));
    assert_eq!(b["epsilon"], 2.0 / 128.0);
    assert_eq!(b["grid"]["cells"], 128);

    std::fs::write(&cfg, "map northsouth\n").unwrap();
    assert_eq!(
        conley(
            &["analyze", "--config", cfg.to_str().unwrap(), "--epsilon", "0.1"],
            dir.path()
        ),
        2
    );
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(
        conley(
            &[
                "analyze",
                "--config",
                cfg.to_str().unwrap(),
                "--map",
                "cat",
                "--epsilon",
                "0.1"
            ],
            dir.path()
        ),
        2
    );
}

#[test]
fn recurrence_identity_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "recurrence",
            "--map",
            "identity",
            "--points",
            "10",
            "--iters",
            "1",
            "--delta",
            "0.001",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let r = read_json(&dir.path().join("recurrence.json"));
    assert_eq!(r["recurrence"]["returned_fraction"], 1.0);
    let csv = std::fs::read_to_string(dir.path().join("recurrence_histogram.csv")).unwrap();
    assert_eq!(csv, "bucket_lo,bucket_hi,count\n1,1,10\n");

    let code = conley(
        &[
            "recurrence",
            "--map",
            "northsouth",
            "--points",
            "50",
            "--iters",
            "20",
            "--delta",
            "0.001",
            "--min-fraction",
            "0.99",
        ],
        dir.path(),
    );
    assert_eq!(code, 1);
    let r = read_json(&dir.path().join("recurrence.json"));
    assert_eq!(r["thresholds_met"], false);
    assert_eq!(r["recurrence"]["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn cat_map_returns() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "recurrence",
            "--map",
            "cat",
            "--points",
            "1000",
            "--iters",
            "10000",
            "--delta",
            "0.05",
            "--seed",
            "7",
            "--min-fraction",
            "0.99",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let r = read_json(&dir.path().join("recurrence.json"));
    assert!(r["recurrence"]["returned_fraction"].as_f64().unwrap() >= 0.99);
}

#[test]
fn northsouth_connectivity_witness() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "recurrence",
            "--map",
            "northsouth",
            "--connectivity",
            "--points",
            "10",
            "--iters",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let r = read_json(&dir.path().join("recurrence.json"));
    assert_eq!(r["connectivity"]["strongly_connected"], false);
    assert_eq!(r["connectivity"]["witness"].as_array().unwrap().len(), 2);
    let code = conley(
        &[
            "recurrence",
            "--map",
            "northsouth",
            "--require-connected",
            "--points",
            "10",
            "--iters",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(code, 1);
    let code = conley(
        &[
            "recurrence",
            "--map",
            "rotation",
            "--require-connected",
            "--grid",
            "256",
            "--points",
            "10",
            "--iters",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
}

#[test]
fn sweep_rows_and_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let code = conley(
        &[
            "sweep",
            "--map",
            "northsouth",
            "--epsilons",
            "1/1024,2/1024,4/1024,8/1024",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert!(w[1][1] >= w[0][1] && w[1][2] >= w[0][2]);
    }
    assert_eq!(
        conley(
            &["sweep", "--map", "identity", "--grid", "32", "--epsilons", "0.1"],
            dir.path()
        ),
        0
    );
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",32,1"));
    assert_eq!(
        conley(
            &["sweep", "--map", "identity", "--epsilons", "0.2,0.1"],
            dir.path()
        ),
        2
    );
}

#[test]
fn identity_sweep_keeps_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        conley(
            &[
                "sweep",
                "--map",
                "identity",
                "--grid",
                "64",
                "--epsilons",
                "0.01,0.02,0.1"
            ],
            dir.path()
        ),
        0
    );
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("64")));
}

#[test]
fn same_config_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "analyze",
        "--map",
        "cat",
        "--grid",
        "16",
        "--epsilon",
        "0.15",
        "--mode",
        "outer",
    ];
    assert_eq!(conley(&args, a.path()), 0);
    assert_eq!(conley(&args, b.path()), 0);
    for f in ["bundle.json", "lyapunov.csv", "condensation.dot"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
}
