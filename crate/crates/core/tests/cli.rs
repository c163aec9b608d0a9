use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tvsbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvsbm"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = tvsbm(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn lines(p: &Path) -> usize {
    fs::read_to_string(p).unwrap().lines().count()
}

fn simulate(dir: &Path, example: &str, n: &str, seed: &str) {
    ok(&[
        "simulate",
        "--example",
        example,
        "--n-subjects",
        n,
        "--seed",
        seed,
        "--out",
        s(dir),
    ]);
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn simulate_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "600", "7");
    assert_eq!(lines(&d.join("subjects.csv")), 601);
    assert_eq!(lines(&d.join("communities.csv")), 76);
    let subjects = fs::read_to_string(d.join("subjects.csv")).unwrap();
    assert!(subjects.starts_with("subject_id,time\n"));
    let edges = fs::read_to_string(d.join("edges.csv")).unwrap();
    assert!(edges.starts_with("subject_id,node_a,node_b\n"));
    for row in edges.lines().skip(1).take(1000) {
        let f: Vec<&str> = row.split(',').collect();
        assert!(f[1].parse::<usize>().unwrap() < f[2].parse::<usize>().unwrap());
    }
    let truth = json(&d.join("truth.json"));
    assert_eq!(truth["format_version"], 1);
    assert_eq!(truth["scenario"]["seed"], 7);
    let text = fs::read_to_string(d.join("truth.json")).unwrap();
    let at = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    let order = [
        "format_version",
        "rng_algorithm",
        "level_defaults",
        "example",
        "scenario",
    ]
    .map(at);
    assert!(order.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    simulate(&a, "B", "50", "11");
    simulate(&b, "B", "50", "11");
    for f in ["subjects.csv", "edges.csv", "communities.csv", "truth.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let c = dir.path().join("c");
    simulate(&c, "B", "50", "12");
    assert_ne!(
        fs::read(a.join("edges.csv")).unwrap(),
        fs::read(c.join("edges.csv")).unwrap()
    );
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = tvsbm(&[
        "simulate",
        "--example",
        "A",
        "--n-subjects",
        "0",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(
        tvsbm(&[
            "simulate",
            "--example",
            "Z",
            "--n-subjects",
            "3",
            "--out",
            "x"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(tvsbm(&["fit", "--intervals", "3"]).status.code(), Some(1));
    assert_eq!(tvsbm(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tvsbm(&["--help"]).status.code(), Some(0));
}

#[test]
fn fit_eval_and_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "600", "7");
    let fit = dir.path().join("fit.json");
    ok(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "20",
        "--shape",
        "unimodal",
        "--out",
        s(&fit),
    ]);
    let a = json(&fit);
    assert_eq!(a["format_version"], 1);
    for rec in a["block_fits"].as_array().unwrap() {
        assert_eq!(rec["bic_trace"].as_array().unwrap().len(), 20);
        assert!(rec["df"].as_u64().unwrap() <= 20);
        assert_eq!(rec["shape"], "unimodal");
    }
    for key in ["theta_unconstrained", "theta_shape", "theta_fused"] {
        let cols = a[key].as_array().unwrap();
        assert_eq!(cols.len(), 3);
        assert!(cols.iter().all(|c| c.as_array().unwrap().len() == 20));
    }

    let out = ok(&[
        "eval",
        "--fit",
        s(&fit),
        "--truth",
        s(&d.join("truth.json")),
    ]);
    let report = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = report.lines().collect();
    assert_eq!(rows[0], "block,stage,relative_error");
    assert_eq!(rows.len() - 1, 3 * 3);
    for r in &rows[1..] {
        let e: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(e.is_finite() && e >= 0.0);
    }
    let out = ok(&[
        "eval",
        "--fit",
        s(&fit),
        "--truth",
        s(&d.join("truth.json")),
        "--scale",
        "logit",
    ]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 10);

    let curves = dir.path().join("curves.csv");
    ok(&[
        "export-curves",
        "--fit",
        s(&fit),
        "--grid",
        "2",
        "--out",
        s(&curves),
    ]);
    assert_eq!(lines(&curves), 1 + 2 * 3 * 3);
}

#[test]
fn export_curves_values() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "200", "3");
    let fit = dir.path().join("fit.json");
    ok(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "20",
        "--out",
        s(&fit),
    ]);
    let curves = dir.path().join("curves.csv");
    ok(&[
        "export-curves",
        "--fit",
        s(&fit),
        "--grid",
        "1001",
        "--out",
        s(&curves),
    ]);
    let artifact = tvsbm::io::read_fit(&fit).unwrap();
    let text = fs::read_to_string(&curves).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("t,block,stage,theta,probability"));
    let mut n = 0;
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        let t: f64 = f[0].parse().unwrap();
        let theta: f64 = f[3].parse().unwrap();
        let prob: f64 = f[4].parse().unwrap();
        assert!((prob - 1.0 / (1.0 + (-theta).exp())).abs() <= 1e-12);
        let p = artifact.blocks.iter().position(|b| b == f[1]).unwrap();
        let stage = tvsbm::io::Stage::ALL
            .into_iter()
            .find(|st| st.name() == f[2])
            .unwrap();
        let col = &artifact.stage(stage)[p];
        assert_eq!(theta, artifact.step_function(stage, p).unwrap().eval(t));
        // grid points either side of the 0.5 boundary take their own interval's level
        if f[0] == "0.499" {
            assert_eq!(theta, col[9]);
        }
        if f[0] == "0.501" {
            assert_eq!(theta, col[10]);
        }
        n += 1;
    }
    assert_eq!(n, 1001 * 9);
}

#[test]
fn fit_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "150", "5");
    let (f1, f2) = (dir.path().join("f1.json"), dir.path().join("f2.json"));
    ok(&["fit", "--data", s(&d), "--intervals", "10", "--out", s(&f1)]);
    ok(&["fit", "--data", s(&d), "--intervals", "10", "--out", s(&f2)]);
    assert_eq!(fs::read(&f1).unwrap(), fs::read(&f2).unwrap());
}

#[test]
fn empty_interval_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "20", "1");
    let out = tvsbm(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "20",
        "--out",
        s(&dir.path().join("f.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--partition equal-count"));
    ok(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "5",
        "--partition",
        "equal-count",
        "--out",
        s(&dir.path().join("f.json")),
    ]);
}

#[test]
fn malformed_input_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "10", "1");
    let edges = d.join("edges.csv");
    let mut text = fs::read_to_string(&edges).unwrap();
    let bad_line = text.lines().count() + 1;
    text.push_str("sub0001,3,999\n");
    fs::write(&edges, text).unwrap();
    let out = tvsbm(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "2",
        "--out",
        s(&dir.path().join("f.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains(&format!("edges.csv:{bad_line}")), "{msg}");
    assert!(msg.contains("999"));

    simulate(&d, "A", "10", "1");
    let subjects = d.join("subjects.csv");
    let text = fs::read_to_string(&subjects)
        .unwrap()
        .replacen("sub0003,0.", "sub0003,x0.", 1);
    fs::write(&subjects, text).unwrap();
    let out = tvsbm(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "2",
        "--out",
        s(&dir.path().join("f.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("subjects.csv:4"));
}

#[test]
fn strict_non_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "B", "300", "2");
    let f = dir.path().join("f.json");
    let out = tvsbm(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "10",
        "--max-iters",
        "1",
        "--tol",
        "1e-12",
        "--strict",
        "--out",
        s(&f),
    ]);
    assert_eq!(out.status.code(), Some(3));
    // the artifact is still written for inspection
    assert!(f.exists());
    ok(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "10",
        "--max-iters",
        "1",
        "--tol",
        "1e-12",
        "--out",
        s(&f),
    ]);
}

#[test]
fn quad_points_do_not_matter_without_random_effects() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    let sc = serde_json::json!({
        "community_sizes": [20, 10],
        "connectivity": [
            {"kind": "step", "breakpoints": [0.4], "levels": [0.2, 0.4]},
            {"kind": "step", "breakpoints": [], "levels": [0.1]},
            {"kind": "step", "breakpoints": [0.2, 0.6], "levels": [0.3, 0.45, 0.6]}
        ],
        "sigma": {"kind": "step", "breakpoints": [], "levels": [0.0]},
        "n_subjects": 200,
        "seed": 9
    });
    fs::write(&scenario, sc.to_string()).unwrap();
    let d = dir.path().join("d");
    ok(&["simulate", "--scenario", s(&scenario), "--out", s(&d)]);
    assert_eq!(json(&d.join("truth.json"))["example"], Value::Null);
    let (f1, f5) = (dir.path().join("f1.json"), dir.path().join("f5.json"));
    ok(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "5",
        "--quad-points",
        "1",
        "--out",
        s(&f1),
    ]);
    ok(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "5",
        "--quad-points",
        "5",
        "--out",
        s(&f5),
    ]);
    let (a, b) = (json(&f1), json(&f5));
    for key in ["theta_unconstrained", "theta_shape", "theta_fused"] {
        for (ca, cb) in a[key]
            .as_array()
            .unwrap()
            .iter()
            .zip(b[key].as_array().unwrap())
        {
            for (x, y) in ca.as_array().unwrap().iter().zip(cb.as_array().unwrap()) {
                let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                assert!((x - y).abs() < 1e-3, "{key}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn auto_shape_picks_the_better_projection() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "600", "4");
    let f = dir.path().join("f.json");
    ok(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "20",
        "--shape",
        "auto",
        "--out",
        s(&f),
    ]);
    let a = tvsbm::io::read_fit(&f).unwrap();
    use tvsbm::shape::{inverse_unimodal_project, sse, unimodal_project};
    for (p, rec) in a.block_fits.iter().enumerate() {
        let raw = &a.theta_unconstrained[p];
        let uni = sse(&unimodal_project(raw).1, raw);
        let inv = sse(&inverse_unimodal_project(raw).1, raw);
        let chosen = sse(&a.theta_shape[p], raw);
        assert!(chosen <= uni.min(inv) + 1e-12, "block {}", rec.block);
        assert!(matches!(
            rec.shape,
            tvsbm::ShapeConstraint::Unimodal | tvsbm::ShapeConstraint::InverseUnimodal
        ));
    }
}

#[test]
fn truth_as_its_own_estimate_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "100", "1");
    let f = dir.path().join("f.json");
    ok(&["fit", "--data", s(&d), "--intervals", "10", "--out", s(&f)]);
    let mut a = json(&f);
    let truth = tvsbm::io::read_truth(&d.join("truth.json")).unwrap();
    for p in 0..3 {
        let levels: Vec<f64> = (0..10)
            .map(|s| {
                let q = truth.scenario.connectivity[p].eval((s as f64 + 0.5) / 10.0);
                (q / (1.0 - q)).ln()
            })
            .collect();
        for key in ["theta_unconstrained", "theta_shape", "theta_fused"] {
            a[key][p] = serde_json::json!(levels);
        }
        a["block_fits"][p]["b"] = 10.into();
    }
    fs::write(&f, serde_json::to_string(&a).unwrap()).unwrap();
    let out = ok(&["eval", "--fit", s(&f), "--truth", s(&d.join("truth.json"))]);
    for row in String::from_utf8(out.stdout).unwrap().lines().skip(1) {
        let e: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(e < 1e-28, "{row}");
    }
}

#[test]
fn tampered_fit_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "100", "1");
    let f = dir.path().join("f.json");
    ok(&[
        "fit",
        "--data",
        s(&d),
        "--intervals",
        "5",
        "--shape",
        "increasing",
        "--out",
        s(&f),
    ]);
    let mut a = json(&f);
    a["theta_fused"][0] = serde_json::json!([0.0, -1.0, 0.0, 0.0, 0.0]);
    fs::write(&f, serde_json::to_string(&a).unwrap()).unwrap();
    let out = tvsbm(&[
        "export-curves",
        "--fit",
        s(&f),
        "--grid",
        "5",
        "--out",
        s(&dir.path().join("c.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not increasing"));

    a["theta_fused"][0] = serde_json::json!([0.0, 1.0, 2.0, 3.0, 4.0]);
    a["block_fits"][0]["b"] = 2.into();
    fs::write(&f, serde_json::to_string(&a).unwrap()).unwrap();
    let out = tvsbm(&[
        "export-curves",
        "--fit",
        s(&f),
        "--grid",
        "5",
        "--out",
        s(&dir.path().join("c.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceed"));
}

#[test]
fn eval_rejects_mismatched_communities() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "60", "1");
    let f = dir.path().join("f.json");
    ok(&["fit", "--data", s(&d), "--intervals", "3", "--out", s(&f)]);
    let mut t = json(&d.join("truth.json"));
    t["scenario"]["community_sizes"] = serde_json::json!([75]);
    t["scenario"]["connectivity"] =
        serde_json::json!([{"kind": "step", "breakpoints": [], "levels": [0.2]}]);
    let tp = dir.path().join("t.json");
    fs::write(&tp, t.to_string()).unwrap();
    let out = tvsbm(&["eval", "--fit", s(&f), "--truth", s(&tp)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("communities"));
}

#[test]
fn times_outside_unit_interval_are_rescaled() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("a");
    simulate(&d, "A", "40", "1");
    let subjects = d.join("subjects.csv");
    let text = fs::read_to_string(&subjects).unwrap();
    let mut out = String::from("subject_id,time\n");
    for row in text.lines().skip(1) {
        let (id, t) = row.split_once(',').unwrap();
        out.push_str(&format!(
            "{id},{}\n",
            20.0 + 60.0 * t.parse::<f64>().unwrap()
        ));
    }
    fs::write(&subjects, out).unwrap();
    let f = dir.path().join("f.json");
    ok(&["fit", "--data", s(&d), "--intervals", "2", "--out", s(&f)]);
    let a = json(&f);
    let min = a["time_scale"]["min"].as_f64().unwrap();
    let max = a["time_scale"]["max"].as_f64().unwrap();
    assert!(min >= 20.0 && max <= 80.0 && min < max);
}
