use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "instance_id,heuristic,tau_s,weight,best_known,rel_err_pct,generations,pop_size,ls_time_s,elapsed_s";

fn mapbench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mapbench"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_prints_one_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = mapbench(&["solve", "--family", "cq", "--s", "3", "--n", "10", "--tau", "0.3", "--virtual-clock"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], HEADER);
    assert!(lines[1].starts_with("3cq10-1,gk,0.3,"));
}

#[test]
fn virtual_clock_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve", "--family", "r", "--s", "4", "--n", "8", "--index", "3", "--tau", "0.5", "--virtual-clock", "--seed-override", "17"];
    let a = mapbench(&args, dir.path());
    let b = mapbench(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = mapbench(&["solve", "--family", "r", "--s", "4", "--n", "8", "--index", "3", "--tau", "0.5", "--virtual-clock", "--seed-override", "18"], dir.path());
    assert!(other.status.success());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "--family", "xx", "--s", "3", "--n", "5"],
        vec!["solve", "--family", "r", "--s", "3", "--n", "5", "--heuristic", "hl"],
        vec!["solve", "--family", "r", "--s", "3", "--n", "5", "--tau", "0"],
        vec!["bench", "--heuristics", "gk,nope", "--families", "r", "--s", "3", "--n", "5", "--indices", "1"],
        vec!["frobnicate"],
    ] {
        let out = mapbench(&args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    // The unknown heuristic is rejected before any run touches the store.
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn corrupt_store_is_an_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bk.json"), r#"{"3r5-1": {"weight": 4.0}}"#).unwrap();
    let out = mapbench(&["solve", "--family", "r", "--s", "3", "--n", "5", "--store", "bk.json", "--virtual-clock"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_writes_readable_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out = mapbench(&["gen", "--families", "r,ge", "--s", "3", "--n", "6", "--indices", "1-2", "--out", "inst"], dir.path());
    assert!(out.status.success());
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("inst"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["3ge6-1.map", "3ge6-2.map", "3r6-1.map", "3r6-2.map"]);
    let text = std::fs::read_to_string(dir.path().join("inst/3r6-1.map")).unwrap();
    assert!(text.starts_with("MAP r 3 6 10\n"));
    map_memetic::instances::read_instance(&text).unwrap();
}

#[test]
fn bench_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = mapbench(
        &[
            "bench", "--families", "r,cq", "--s", "3", "--n", "6", "--indices", "1-2", "--budgets", "0.1,0.2",
            "--heuristics", "gk,2opt", "--virtual-clock",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(results.lines().next().unwrap(), HEADER);
    assert_eq!(results.lines().count(), 1 + 4 * 2 * 2);
    let store = std::fs::read_to_string(dir.path().join("best_known.json")).unwrap();
    assert!(store.contains("\"3r6-1\""));

    let out = mapbench(&["report", "--csv", "table.csv"], dir.path());
    assert!(out.status.success());
    let table = stdout(&out);
    for label in ["3r6-1", "All avg.", "Random avg.", "Clique avg.", "3-AP avg."] {
        assert!(table.contains(label), "{label} missing from\n{table}");
    }
    assert!(std::fs::read_to_string(dir.path().join("table.csv")).unwrap().starts_with("row,heuristic,tau_s,mean_rel_err_pct,best\n"));
}

#[test]
fn tune_collects_then_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "tune", "--cache", "cache", "--families", "r", "--s", "3", "--n", "5", "--indices", "1", "--budgets", "0.02",
        "--pop-sizes", "2,3", "--reps", "1", "--grid", "a=0.08,b=0.35,c=0.85",
    ];
    let out = mapbench(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("a = 0.08, b = 0.35, c = 0.85"));
    let errors = std::fs::read_to_string(dir.path().join("cache/errors.csv")).unwrap();
    assert_eq!(errors.lines().next().unwrap(), "instance_id,tau_s,m,rep,weight");
    assert_eq!(errors.lines().count(), 3);
    let again = mapbench(&args, dir.path());
    assert_eq!(again.stdout, out.stdout);
}
