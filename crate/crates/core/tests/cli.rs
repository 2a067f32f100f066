use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn linreach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linreach")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, v: Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

fn run_cmd(cmd: &str, cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    linreach(&args)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn double_integrator(dir: &Path, out: &str) -> PathBuf {
    write_config(
        dir,
        "di.json",
        json!({
            "builtin": "double_integrator", "tf": 1.0, "scheme": "heun",
            "levels": 8, "substeps": 25, "directions": 256, "allow_coarse_directions": true,
            "oracle": "double_integrator", "out": out
        }),
    )
}

// x' = u1 only: the fronts are segments and the rank condition fails.
fn segment_system(dir: &Path) -> PathBuf {
    let sys = json!({
        "A": [[0.0, 0.0], [0.0, 0.0]],
        "B": [[1.0], [0.0]],
        "U": {"dim": 1, "vertices": [[-1.0], [1.0]]},
        "S": {"dim": 2, "vertices": [[0.0, 0.0]]},
        "t0": 0.0, "tf": 1.0
    });
    let p = dir.join("segment_system.json");
    fs::write(&p, sys.to_string()).unwrap();
    p
}

#[test]
fn reach_writes_every_front_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sp.json",
        json!({"builtin": "scalar_product", "tf": 0.5, "scheme": "euler", "levels": 5, "substeps": 2, "out": "o"}),
    );
    let o = run_cmd("reach", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = tmp.path().join("o");
    for i in 0..=5 {
        assert!(out.join(format!("front_{i:03}.csv")).exists());
    }
    assert!(!out.join("front_006.csv").exists());
    let mut rdr = csv::Reader::from_path(out.join("front_005.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["level", "t", "dir_index", "lx", "ly", "px", "py"]
    );
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let px: f64 = rec[5].parse().unwrap();
        let py: f64 = rec[6].parse().unwrap();
        assert!((px.abs() - 0.5).abs() < 1e-12 && (py.abs() - 0.5).abs() < 1e-12);
    }
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["h"], json!(0.05));
    assert!((m["dt"].as_f64().unwrap() - 0.1).abs() < 1e-15);
    assert!(m["density_eps"].as_f64().unwrap() > 0.0);
    assert!(m["created_unix"].as_u64().is_some());
}

#[test]
fn missing_system_file_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json!({"system": "absent_system.json"}));
    let o = run_cmd("reach", &cfg, &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent_system.json"), "{}", stderr(&o));
}

#[test]
fn budget_overrun_reports_the_requested_size() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({"builtin": "rotation", "levels": 100, "substeps": 100, "directions": 20000,
               "allow_coarse_directions": true, "out": "o"}),
    );
    let o = run_cmd("reach", &cfg, &[]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("200000000"), "{}", stderr(&o));
}

#[test]
fn coarse_direction_counts_need_an_explicit_opt_in() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({"builtin": "rotation", "scheme": "euler", "levels": 2, "substeps": 10, "out": "o"}),
    );
    let o = run_cmd("reach", &cfg, &["--dirs", "16"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--allow-coarse-directions"));
    let o = run_cmd("reach", &cfg, &["--dirs", "16", "--allow-coarse-directions"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // Default is ceil(pi / h) for a first-order scheme.
    let o = run_cmd("reach", &cfg, &[]);
    assert_eq!(code(&o), 0);
    let m = read_json(&tmp.path().join("o/manifest.json"));
    assert_eq!(m["directions"], json!(63));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&linreach(&["simulate"])), 2);
    assert_eq!(code(&linreach(&["reach"])), 2);
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json!({"builtin": "rotation", "sheme": "heun"}));
    assert_eq!(code(&run_cmd("reach", &cfg, &[])), 2);
}

#[test]
fn mintime_with_oracle_stays_within_two_dt() {
    let tmp = TempDir::new().unwrap();
    let cfg = double_integrator(tmp.path(), "o");
    let o = run_cmd("mintime", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&tmp.path().join("o/error_report.json"));
    let sup = r["sup_error_empirical"].as_f64().unwrap();
    assert!(sup <= r["bound_two_dt"].as_f64().unwrap());
    assert!(sup <= r["bound_general"].as_f64().unwrap());
    let off = fs::read_to_string(tmp.path().join("o/mesh.off")).unwrap();
    assert!(off.starts_with("OFF\n"));
    let samples = fs::read_to_string(tmp.path().join("o/samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 501);
}

#[test]
fn mintime_without_oracle_omits_the_empirical_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({"builtin": "rotation", "scheme": "euler", "levels": 4, "substeps": 5, "out": "o"}),
    );
    let o = run_cmd("mintime", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&tmp.path().join("o/error_report.json"));
    assert!(r.get("sup_error_empirical").is_none());
    assert!(r["bound_general"].as_f64().unwrap() > 0.0);
    assert!(r["bound_two_dt"].as_f64().unwrap() > 0.0);
}

#[test]
fn degenerate_fronts_are_a_structural_error() {
    let tmp = TempDir::new().unwrap();
    segment_system(tmp.path());
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({"system": "segment_system.json", "scheme": "euler", "levels": 1, "substeps": 10,
               "directions": 32, "allow_coarse_directions": true, "out": "o"}),
    );
    let o = run_cmd("mintime", &cfg, &[]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("band"), "{}", stderr(&o));
}

#[test]
fn trajectory_report_on_the_double_integrator() {
    let tmp = TempDir::new().unwrap();
    let cfg = double_integrator(tmp.path(), "o");
    for k in ["0", "37", "200"] {
        let o = run_cmd("trajectory", &cfg, &["--direction", k]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let r = read_json(&tmp.path().join("o/trajectory_report.json"));
        assert_eq!(r["pmp_check"], json!(true));
        let diam = r["front_diameter"].as_f64().unwrap();
        assert!(r["endpoint_defect"].as_f64().unwrap() <= 1e-8 * diam);
        assert!(r["switch_counts"][0].as_u64().unwrap() <= 1);
    }
    let csv = fs::read_to_string(tmp.path().join("o/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x1,x2,u1,eta1,eta2");
    assert_eq!(csv.lines().count(), 1 + 201);

    let o = run_cmd("trajectory", &cfg, &["--direction", "256"]);
    assert_eq!(code(&o), 2);
    let o = run_cmd("trajectory", &cfg, &["--level", "9"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn trajectory_warns_when_the_rank_condition_fails() {
    let tmp = TempDir::new().unwrap();
    segment_system(tmp.path());
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({"system": "segment_system.json", "scheme": "euler", "levels": 2, "substeps": 5,
               "directions": 16, "allow_coarse_directions": true, "out": "o"}),
    );
    let o = run_cmd("trajectory", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("not guaranteed"), "{}", stderr(&o));
    let r = read_json(&tmp.path().join("o/trajectory_report.json"));
    assert_eq!(r["normal"], json!(false));
}

#[test]
fn trajectory_rejects_time_varying_systems() {
    let tmp = TempDir::new().unwrap();
    let sys = json!({
        "A": {"times": [0.0, 1.0], "values": [[[0.0, 1.0], [0.0, 0.0]], [[0.0, 2.0], [0.0, 0.0]]]},
        "B": [[0.0], [1.0]],
        "U": {"dim": 1, "vertices": [[-1.0], [1.0]]},
        "S": {"dim": 2, "vertices": [[0.0, 0.0]]},
        "t0": 0.0, "tf": 1.0
    });
    fs::write(tmp.path().join("tv.json"), sys.to_string()).unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({"system": "tv.json", "levels": 2, "substeps": 5, "directions": 64,
               "allow_coarse_directions": true, "out": "o"}),
    );
    assert_eq!(code(&run_cmd("reach", &cfg, &[])), 0);
    let o = run_cmd("trajectory", &cfg, &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("constant"), "{}", stderr(&o));
}

#[test]
fn study_reports_first_order_for_euler() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({"builtin": "rotation", "scheme": "euler", "levels": 1, "directions": 1024,
               "allow_coarse_directions": true, "out": "o",
               "study": {"substeps": [10, 20, 40, 80], "reference": 320}}),
    );
    let o = run_cmd("study", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("EOC"));
    let mut rdr = csv::Reader::from_path(tmp.path().join("o/study.csv")).unwrap();
    let eocs: Vec<f64> = rdr
        .records()
        .skip(1)
        .map(|r| r.unwrap()[5].parse().unwrap())
        .collect();
    assert_eq!(eocs.len(), 3);
    assert!(eocs.iter().all(|e| (0.7..=1.3).contains(e)), "{eocs:?}");
}

#[test]
fn study_needs_three_rungs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({"builtin": "rotation", "out": "o", "study": {"substeps": [10, 20]}}),
    );
    assert_eq!(code(&run_cmd("study", &cfg, &[])), 2);
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let cfg = double_integrator(tmp.path(), "o");
    let dirs = ["a", "b", "c"];
    for (i, d) in dirs.iter().enumerate() {
        let out = tmp.path().join(d);
        let mut extra = vec!["--out", out.to_str().unwrap()];
        if i == 2 {
            extra.push("--sequential");
        }
        assert_eq!(code(&run_cmd("mintime", &cfg, &extra)), 0);
        assert_eq!(code(&run_cmd("reach", &cfg, &extra)), 0);
    }
    let a = data_files(&tmp.path().join("a"));
    assert!(a.len() > 5);
    assert_eq!(a, data_files(&tmp.path().join("b")));
    assert_eq!(a, data_files(&tmp.path().join("c")));
}
