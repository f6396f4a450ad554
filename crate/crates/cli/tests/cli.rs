use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dframes(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dframes"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SIMILITUDE_1D: &str = r#"{"family":"similitude","dim":1}"#;

#[test]
fn embed_index_similitude_plane() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("embed");
    let res = dframes(
        &out,
        &[
            "embed",
            "index",
            "--group",
            r#"{"family":"similitude","dim":2}"#,
            "--weights",
            r#"{"beta":4,"s":0}"#,
        ],
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = read_json(&out.join("embedding.json"));
    assert_eq!(report["index_ell"], 12);
    assert_eq!(report["moment_order_t"], 16);
    let stdout: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(stdout["index_ell"], 12);

    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "embed index");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"], serde_json::json!(["embedding.json"]));
}

#[test]
fn phi_compute_on_empty_grid_fails_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("phi");
    let grid = r#"{"axes":[{"lo":0.5,"hi":2,"n":0}]}"#;
    let res = dframes(&out, &["phi", "compute", "--group", SIMILITUDE_1D, "--ell", "3", "--grid", grid]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("empty"));
    assert!(!out.exists());
}

#[test]
fn schema_errors_name_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let res = dframes(
        &out,
        &["embed", "index", "--group", r#"{"family":"hyperbolic","dim":2}"#, "--weights", "{}"],
    );
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("--group"));
    assert!(!out.exists());
}

#[test]
fn phi_compute_writes_one_row_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("phi");
    let grid = r#"{"axes":[{"lo":0.5,"hi":2,"n":3,"log":true}]}"#;
    let res = dframes(&out, &["phi", "compute", "--group", SIMILITUDE_1D, "--ell", "3", "--grid", grid]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("phi.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param0,phi,error");
    assert_eq!(lines.len(), 4);
}

fn pipeline(root: &Path, workers: &str) {
    let run = |name: &str, args: &[&str]| {
        let mut full = vec!["--workers", workers];
        full.extend_from_slice(args);
        let res = dframes(&root.join(name), &full);
        assert!(res.status.success(), "{name}: {}", String::from_utf8_lossy(&res.stderr));
    };
    let p = |name: &str, file: &str| root.join(name).join(file).to_string_lossy().into_owned();
    let grid = r#"{"origin":[-2],"spacing":[0.25],"extents":[16]}"#;
    run(
        "atom",
        &[
            "atom",
            "build",
            "--group",
            SIMILITUDE_1D,
            "--t",
            "2",
            "--grid",
            r#"{"origin":[-4],"spacing":[0.03125],"extents":[256]}"#,
        ],
    );
    run(
        "set",
        &[
            "sample",
            "build-thm12",
            "--group",
            SIMILITUDE_1D,
            "--delta1",
            "0.25",
            "--delta2",
            "0.25",
            "--j-min",
            "1",
            "--j-max",
            "3",
            "--window",
            "4",
        ],
    );
    run(
        "frame",
        &[
            "frame",
            "bounds",
            "--atom",
            &p("atom", "atom.bin"),
            "--set",
            &p("set", "set.jsonl"),
            "--grid",
            grid,
            "--band",
            r#"{"min_orbit_distance":0.25,"max_frequency":0.75}"#,
            "--method",
            "gram",
        ],
    );
    let frame = root.join("frame").to_string_lossy().into_owned();
    run("signal", &["frame", "random-signal", "--frame", &frame, "--seed", "5"]);
    run(
        "rec",
        &["frame", "reconstruct", "--frame", &frame, "--signal", &p("signal", "signal.bin")],
    );
    run(
        "en",
        &[
            "approx",
            "en-curve",
            "--frame",
            &frame,
            "--signal",
            &p("signal", "signal.bin"),
            "--nmax",
            "6",
        ],
    );
}

#[test]
fn pipeline_is_reproducible_across_runs_and_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    pipeline(&a, "1");
    pipeline(&b, "2");

    let bounds = fs::read_to_string(a.join("frame/bounds.csv")).unwrap();
    let ratio: f64 = bounds.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!(ratio.is_finite() && ratio >= 1.0);
    let rec = fs::read_to_string(a.join("rec/reconstruct.csv")).unwrap();
    let err: f64 = rec.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(err < 1e-8);

    for (dir, file) in [
        ("atom", "atom.bin"),
        ("set", "set.jsonl"),
        ("frame", "report.json"),
        ("signal", "signal.bin"),
        ("rec", "reconstruction.bin"),
        ("en", "en_curve.csv"),
        ("en", "en_summary.json"),
    ] {
        let x = fs::read(a.join(dir).join(file)).unwrap();
        let y = fs::read(b.join(dir).join(file)).unwrap();
        assert!(x == y, "{dir}/{file} differs between runs");
    }

    let (ma, mb) = (read_json(&a.join("en/manifest.json")), read_json(&b.join("en/manifest.json")));
    for key in ["command", "outputs", "tolerances", "versions"] {
        assert_eq!(ma[key], mb[key], "manifest field {key}");
    }
    assert_eq!(ma["workers"], 1);
    assert_eq!(mb["workers"], 2);
}
