use std::process::{Command, Output};

use serde_json::Value;

fn invpair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invpair"))
        .args(args)
        .current_dir(std::env::temp_dir())
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn matrix(v: &Value) -> Vec<Vec<(f64, f64)>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|e| (e[0].as_f64().unwrap(), e[1].as_f64().unwrap()))
                .collect()
        })
        .collect()
}

fn max_err(got: &[Vec<(f64, f64)>], want: &[&[f64]]) -> f64 {
    assert_eq!(got.len(), want.len());
    got.iter()
        .zip(want)
        .flat_map(|(g, w)| {
            assert_eq!(g.len(), w.len());
            g.iter()
                .zip(w.iter())
                .map(|(&(re, im), &x)| (re - x).hypot(im))
        })
        .fold(0.0, f64::max)
}

const SS_PAIR: &[&str] = &[
    "pair",
    "ss_2x2.json",
    "--center",
    "1,0",
    "--radius",
    "0.5",
    "--m",
    "3",
    "--nodes",
    "64",
    "--probe-file",
    "ss_2x2.probe.json",
];

#[test]
fn pair_reproduces_the_small_example() {
    let v = json_of(&invpair(SS_PAIR));
    let x = matrix(&v["x"]);
    let s = matrix(&v["s"]);
    assert!(max_err(&x, &[&[0.0, -1.0, -2.0], &[1.0, 1.0, 3.0]]) <= 1e-8);
    assert!(max_err(&s, &[&[0.0, 0.0, 1.0], &[1.0, 0.0, -3.0], &[0.0, 1.0, 3.0]]) <= 1e-8);
    assert!(v["relative_residual"].as_f64().unwrap() <= 1e-8);
    let eig = v["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 1);
    assert_eq!(eig[0]["multiplicity"], 3);
}

#[test]
fn count_is_three() {
    let v = json_of(&invpair(&[
        "count",
        "ss_2x2.json",
        "--center",
        "1,0",
        "--radius",
        "0.5",
    ]));
    assert_eq!(v["count"], 3);
    assert!(v["quality"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn count_csv() {
    let out = invpair(&[
        "count",
        "ss_2x2.json",
        "--center",
        "1,0",
        "--radius",
        "0.5",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("count,raw,quality,warning"));
    assert!(lines.next().unwrap().starts_with("3,3+"));
}

#[test]
fn json_output_is_deterministic() {
    let a = invpair(SS_PAIR);
    let b = invpair(SS_PAIR);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let args = [
        "moments",
        "diag_4x4.json",
        "--center",
        "0.75,0",
        "--radius",
        "0.5",
        "--m",
        "4",
        "--seed",
        "3",
    ];
    assert_eq!(invpair(&args).stdout, invpair(&args).stdout);
}

#[test]
fn timings_appear_only_on_request() {
    let base = [
        "refine",
        "ss_2x2.json",
        "--center",
        "1,0",
        "--radius",
        "0.5",
        "--m",
        "3",
    ];
    let plain = String::from_utf8(invpair(&base).stdout).unwrap();
    assert!(!plain.contains("wall_time") && !plain.contains("elapsed_seconds"));
    let mut with = base.to_vec();
    with.push("--timings");
    let timed = json_of(&invpair(&with));
    assert!(timed["report"]["wall_time"].is_number());
    assert!(timed["elapsed_seconds"].is_number());
}

#[test]
fn moments_of_the_diagonal_example() {
    let v = json_of(&invpair(&[
        "moments",
        "diag_4x4.json",
        "--center",
        "0.75,0",
        "--radius",
        "0.5",
        "--m",
        "4",
        "--probe-file",
        "diag_4x4.probe.json",
    ]));
    let want = [
        -3.0,
        -7.0,
        -9.0,
        -10.5,
        -12.0,
        -109.0 / 8.0,
        -123.0 / 8.0,
        -551.0 / 32.0,
    ];
    let mu = v["moments"].as_array().unwrap();
    assert_eq!(mu.len(), 8);
    for (m, w) in mu.iter().zip(want) {
        assert!((m[0].as_f64().unwrap() - w).abs() <= 1e-8);
        assert!(m[1].as_f64().unwrap().abs() <= 1e-8);
    }
}

#[test]
fn block_pair_of_the_jordan_example() {
    let v = json_of(&invpair(&[
        "block-pair",
        "jordan_3x3.json",
        "--center",
        "1,0",
        "--radius",
        "0.1",
        "--m",
        "5",
        "--probe-file",
        "jordan_3x3.probe.json",
    ]));
    let eig = v["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 1);
    assert_eq!(eig[0]["multiplicity"], 5);
    assert!(v["relative_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn refine_csv_is_plot_ready() {
    let out = invpair(&[
        "refine",
        "ss_2x2.json",
        "--center",
        "1,0",
        "--radius",
        "0.5",
        "--m",
        "3",
        "--seed",
        "5",
        "--no-line-search",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("iteration,relative_residual,log10_relative_residual,step_length")
    );
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], i.to_string());
        let r: f64 = cells[1].parse().unwrap();
        let l: f64 = cells[2].parse().unwrap();
        assert!((r.log10() - l).abs() < 1e-12);
        if i > 0 {
            assert_eq!(cells[3], "1");
        }
    }
}

#[test]
fn refine_a_perturbed_pair_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("start.json");
    std::fs::write(
        &path,
        r#"{"x": [[[0.01, 0], [-1, 0], [-2, 0]], [[1, 0], [1.02, 0], [3, 0]]],
            "s": [[[0, 0], [0, 0], [1, 0]], [[1, 0], [0, 0], [-3, 0]], [[0, 0], [1, 0], [3.01, 0]]]}"#,
    )
    .unwrap();
    let v = json_of(&invpair(&[
        "refine",
        "ss_2x2.json",
        "--pair-file",
        path.to_str().unwrap(),
    ]));
    assert_eq!(v["mode"], "pair");
    assert_eq!(v["report"]["converged"], true);
    let hist = v["report"]["residual_history"].as_array().unwrap();
    assert!(hist.last().unwrap().as_f64().unwrap() < 1e-12);

    let out = path.with_file_name("out.csv");
    let r = invpair(&[
        "refine",
        "ss_2x2.json",
        "--pair-file",
        path.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success() && r.stdout.is_empty());
    assert!(std::fs::read_to_string(&out)
        .unwrap()
        .starts_with("iteration,"));
}

#[test]
fn conditioning_of_an_exact_solvent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, r#"{"s": [[[1, 0], [0, 0]], [[0, 0], [2, 0]]]}"#).unwrap();
    let p = path.to_str().unwrap();
    let b = json_of(&invpair(&["berr", "solvent_2x2.json", "--pair-file", p]));
    assert_eq!(b["mode"], "solvent");
    assert!(b["eta"].as_f64().unwrap() <= 1e-14);
    let k = json_of(&invpair(&["cond", "solvent_2x2.json", "--pair-file", p]));
    assert!(k["kappa"].as_f64().unwrap().is_finite());
}

#[test]
fn enumerate_and_triangular() {
    let v = json_of(&invpair(&["enumerate", "solvent_2x2.json"]));
    assert_eq!(v["solvents"].as_array().unwrap().len(), 5);
    assert_eq!(v["rejected"].as_array().unwrap().len(), 1);
    let t = json_of(&invpair(&["triangular", "triangular_3x3.json"]));
    let kinds: Vec<&str> = t["branches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["none", "affine"]);
}

#[test]
fn solvent_from_an_extracted_pair() {
    let v = json_of(&invpair(&[
        "solvent",
        "solvent_2x2.json",
        "--center",
        "1.5,0",
        "--radius",
        "1",
    ]));
    assert_eq!(v["certified"], true);
    assert!(max_err(&matrix(&v["s"]), &[&[1.0, 0.0], &[0.0, 2.0]]) <= 1e-8);
}

#[test]
fn bench_meets_the_line_search_claim() {
    let v = json_of(&invpair(&["bench", "--seed", "7"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 30);
    assert!(v["line_search_win_rate"].as_f64().unwrap() >= 0.8);
    assert!(rows.iter().all(|r| r.get("plain_time").is_none()));
    let frozen: Value = serde_json::from_str(invpair_cli::fixtures::BENCH_SEED7).unwrap();
    for (r, f) in rows.iter().zip(frozen["rows"].as_array().unwrap()) {
        assert_eq!(r["problem"], f["problem"]);
        assert_eq!(r["plain_iterations"], f["plain_iterations"]);
        assert_eq!(r["line_search_iterations"], f["line_search_iterations"]);
    }
}

#[test]
fn bench_verify_passes() {
    let out = invpair(&["bench", "--verify"]);
    let v = json_of(&out);
    let checks = v["verification"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["ok"] == true), "{checks:?}");
}

#[test]
fn bench_verify_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let (_, text) = invpair_cli::fixtures::EXPECTED[1];
    std::fs::write(
        dir.path().join("ss_2x2.json"),
        text.replace("\"expect\": 3", "\"expect\": 2"),
    )
    .unwrap();
    let out = invpair(&[
        "bench",
        "--verify",
        "--expected",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("verification mismatch") && err.contains("ss_2x2 count"),
        "{err}"
    );
    // the report is still written
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["verification"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["ok"] == false));
}

#[test]
fn empty_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, "").unwrap();
    let out = invpair(&[
        "count",
        path.to_str().unwrap(),
        "--center",
        "0",
        "--radius",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("empty file") && err.contains(":1:1"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn truncated_coeffs_is_a_shape_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "degree": 2, "coeffs": [
            [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
            [[[-2, 0], [0, 0]], [[2, 0], [-1, 0]]]]}"#,
    )
    .unwrap();
    let out = invpair(&[
        "count",
        path.to_str().unwrap(),
        "--center",
        "1",
        "--radius",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coeffs: expected degree + 1 = 3"));
}

#[test]
fn exit_codes() {
    assert_eq!(
        invpair(&["count", "ss_2x2.json", "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(invpair(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        invpair(&["count", "ss_2x2.json", "--radius", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        invpair(&["count", "ss_2x2.json", "--center", "0", "--radius", "-2"])
            .status
            .code(),
        Some(1)
    );
    // eigenvalue 1 sits on this circle
    let on = invpair(&["count", "ss_2x2.json", "--center", "0,0", "--radius", "1"]);
    assert_eq!(on.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&on.stderr).starts_with("invpair: numerical failure"));
    // the dense 3x3 is not upper triangular
    assert_eq!(
        invpair(&["triangular", "family_3x3.json"]).status.code(),
        Some(2)
    );
    assert_eq!(invpair(&["--help"]).status.code(), Some(0));
}
