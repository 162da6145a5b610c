//! End-to-end runs of the `multiflow` binary on the bundled configs.

use std::path::{Path, PathBuf};
use std::process::Command;

use multiflow::core::dynamics::box_hausdorff;
use multiflow::core::IntervalVector;
use multiflow::export::{graph_from_bytes, parse_boxset, parse_edge_list};
use multiflow::SystemConfig;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn multiflow(args: &[&str], out: &Path) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_multiflow"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    (
        o.status.code().expect("exit code"),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "report.json")).unwrap()
}

#[test]
fn decompose_switching_system() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = config("switching.toml");
    let (code, stdout, _) = multiflow(&["decompose", "--config", cfg_path.to_str().unwrap()], dir.path());
    assert_eq!(code, 0, "{stdout}");
    let cfg = SystemConfig::parse(&std::fs::read_to_string(&cfg_path).unwrap()).unwrap();
    let grid = &cfg.grid;
    let set = |f: &str| parse_boxset(&read(dir.path(), f), grid).unwrap();
    let (s, a, r, c) = (set("S.cells"), set("A.cells"), set("R.cells"), set("C.cells"));
    assert_eq!(a.union(&r).union(&c), s);
    assert!(a.intersection(&r).is_empty() && a.intersection(&c).is_empty() && r.intersection(&c).is_empty());
    let cells = |lo: f64, hi: f64| grid.cells_overlapping(&IntervalVector::from_bounds(&[lo], &[hi]).unwrap());
    let h = grid.min_width();
    assert!(box_hausdorff(grid, &r, &cells(-1.0, 0.0)).unwrap() <= 2.0 * h);
    // A hugs the right end; see the README for why it is wider than two cells
    assert!(a.contains(127) && a.is_subset(&cells(0.85, 1.0)));
    assert_eq!(report(dir.path())["decomposition"]["k_star"], 1);
}

#[test]
fn saddle_node_sweep_continues_to_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = config("saddle_node.toml");
    let (code, stdout, _) = multiflow(&["sweep", "--config", cfg_path.to_str().unwrap()], dir.path());
    assert_eq!(code, 0, "{stdout}");
    let cfg = SystemConfig::parse(&std::fs::read_to_string(&cfg_path).unwrap()).unwrap();
    let s0 = parse_boxset(&read(dir.path(), "S_0.cells"), &cfg.grid).unwrap();
    let s1 = parse_boxset(&read(dir.path(), "S_4.cells"), &cfg.grid).unwrap();
    assert!(s0.contains(63) || s0.contains(64));
    assert!(s1.is_empty());
    let table = read(dir.path(), "sweep.table");
    assert_eq!(table.lines().count(), 6);
    assert!(table.lines().skip(1).all(|l| l.contains(" pass ")));
    let rep = report(dir.path());
    assert_eq!(rep["sweep"]["verified"], serde_json::json!([0.0, 1.0]));
}

#[test]
fn continue_on_saddle_node_reports_empty_continuation() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = multiflow(&["continue", "--config", config("saddle_node.toml").to_str().unwrap()], dir.path());
    assert_eq!(code, 0, "{stdout}");
    let rep = report(dir.path());
    let records = rep["sweep"]["records"].as_array().unwrap();
    assert_eq!(records[0]["status"], "decomposed");
    assert!(records[1..].iter().all(|r| r["status"] == "continued-to-empty"));
    assert_eq!(rep["sweep"]["semicontinuity"], true);
}

#[test]
fn constant_drift_has_empty_invariant_set() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = multiflow(&["invariant", "--config", config("constant.toml").to_str().unwrap()], dir.path());
    assert_eq!(code, 0);
    assert_eq!(read(dir.path(), "S.cells"), "# grid 32\n");
    let edges = parse_edge_list(&read(dir.path(), "graph.edges")).unwrap();
    assert_eq!(edges.cells, 32);
    assert!(!edges.exits.is_empty());
}

#[test]
fn failed_certificate_exits_with_two() {
    // the full domain is not isolating: its invariant part touches the edge
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = multiflow(&["isolate", "--config", config("switching.toml").to_str().unwrap()], dir.path());
    assert_eq!(code, 2, "{stdout}");
    assert_eq!(report(dir.path())["certified"], false);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[system]\ndomain = [[0.0, 1.0]]\n[[system.piece]]\nrhs = [\"1 + * x1\"]\n[grid]\nsubdivisions = [4]\n").unwrap();
    let (code, _, stderr) = multiflow(&["build-map", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(code, 1);
    assert!(stderr.contains("line 4, column 13"), "{stderr}");
    let (code, _, _) = multiflow(&["decompose", "--config", config("constant.toml").to_str().unwrap()], dir.path());
    assert_eq!(code, 1, "decompose needs U");
    let (code, _, _) = multiflow(&["nonsense", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(code, 1);
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("saddle_node.toml");
    let args = ["build-map", "--config", cfg.to_str().unwrap()];
    let (code, _, _) = multiflow(&[&args[..], &["--grid", "16", "--tau", "0.125", "--lambda", "0.5"]].concat(), dir.path());
    assert_eq!(code, 0);
    let g = graph_from_bytes(&std::fs::read(dir.path().join("graph.bin")).unwrap()).unwrap();
    assert_eq!(g.grid().cell_count(), 16);
    assert_eq!(g.tau(), 0.125);
    assert_eq!(g.params().lambda.lo(), 0.5);
    let (code, _, _) = multiflow(&[&args[..], &["--lambda", "-0.5"]].concat(), dir.path());
    assert_eq!(code, 1, "lambda outside the declared family");
}

#[test]
fn exports_do_not_depend_on_thread_count() {
    let one = tempfile::tempdir().unwrap();
    let four = tempfile::tempdir().unwrap();
    let cfg = config("limit_cycle.toml");
    let base = ["continue", "--config", cfg.to_str().unwrap(), "--grid", "32,32"];
    // too coarse to certify; the outputs must still agree
    let a = multiflow(&[&base[..], &["--threads", "1"]].concat(), one.path()).0;
    let b = multiflow(&[&base[..], &["--threads", "4"]].concat(), four.path()).0;
    assert_eq!((a, b), (2, 2));
    let mut names: Vec<_> = std::fs::read_dir(one.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names.iter().filter(|n| n.to_str() != Some("summary.txt")) {
        let a = std::fs::read(one.path().join(name)).unwrap();
        let b = std::fs::read(four.path().join(name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
}

#[test]
fn bundled_configs_round_trip() {
    for entry in std::fs::read_dir(config("")).unwrap() {
        let path = entry.unwrap().path();
        let cfg = SystemConfig::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(SystemConfig::parse(&cfg.to_toml()).unwrap(), cfg, "{}", path.display());
    }
}
