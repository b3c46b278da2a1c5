use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sigkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigkit"))
        .args(args)
        .env_remove("SIGKIT_JOBS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sigkit(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn sig_of_a_single_increment() {
    let dir = TempDir::new().unwrap();
    let csv = write(dir.path(), "x.csv", "t,x\n0,0\n1,1\n");
    let out = ok(&["--no-manifest", "sig", s(&csv), "--time-augment", "--depth", "2"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["d"], 2);
    assert_eq!(floats(&v["levels"][1]), vec![1.0, 1.0]);
    assert_eq!(floats(&v["levels"][2]), vec![0.5; 4]);
    // every float carries 17 significant digits
    assert!(out.contains("5.0000000000000000e-1"));
}

#[test]
fn sig_output_round_trips() {
    let dir = TempDir::new().unwrap();
    let csv = write(dir.path(), "x.csv", "0.1,0.7\n-0.35,1.2\n0.9,0.0333\n");
    let dense = ok(&["--no-manifest", "sig", s(&csv), "--depth", "4"]);
    let t: sigkit::tensor::TruncatedTensor = serde_json::from_str(&dense).unwrap();
    let x = sigkit::Path::from_series(&sigkit::io::read_series(&csv).unwrap(), false, false).unwrap();
    assert_eq!(&t, sigkit::signature(&x, 4).unwrap().tensor());

    let log = ok(&["--no-manifest", "sig", s(&csv), "--depth", "3", "--log"]);
    let lie: sigkit::LieElement = serde_json::from_str(&log).unwrap();
    assert_eq!(lie, sigkit::log_signature(&x, 3).unwrap());

    let words: Value = serde_json::from_str(&ok(&["--no-manifest", "sig", s(&csv), "--depth", "2", "--format", "words"])).unwrap();
    assert_eq!(words["coefficients"][""], 1.0);
    assert_eq!(words["coefficients"]["1,2"].as_f64().unwrap(), t.word_coeff(&sigkit::tensor::Word::new(vec![1, 2])).unwrap());
}

#[test]
fn pde_kernel_on_unit_lines() {
    let dir = TempDir::new().unwrap();
    let line = write(dir.path(), "line.csv", "t,x\n0,0\n1,1\n");
    let grid = dir.path().join("grid.csv");
    let out = ok(&[
        "--no-manifest", "kernel", s(&line), s(&line), "--method", "pde", "--lambda", "6", "--grid", s(&grid),
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.2796).abs() <= 1e-3);
    let table = fs::read_to_string(grid).unwrap();
    assert!(table.starts_with("p,q,value\n"));
    assert_eq!(table.lines().count(), 1 + 65 * 65);
}

#[test]
fn exit_codes() {
    assert_eq!(sigkit(&["sig", "--bogus"]).status.code(), Some(1));
    assert_eq!(sigkit(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sigkit(&["--help"]).status.code(), Some(0));
    assert_eq!(sigkit(&["--version"]).status.code(), Some(0));
    assert_eq!(sigkit(&["sig", "/nonexistent.csv", "--depth", "2"]).status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.csv", "0,1\n1,\n");
    let out = sigkit(&["sig", s(&bad), "--depth", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    // a singular ridge system is a numerical failure
    let samples = dir.path().join("s");
    fs::create_dir(&samples).unwrap();
    for i in 0..3 {
        write(&samples, &format!("p{i}.csv"), "0,0\n1,1\n");
    }
    let targets = write(dir.path(), "y.csv", "y\n1\n2\n3\n");
    let out = sigkit(&[
        "fit", s(&samples), "--targets", s(&targets), "--method", "truncated", "--depth", "2",
        "--reg-lambda", "1e-300",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn manifest_records_inputs() {
    let dir = TempDir::new().unwrap();
    let csv = write(dir.path(), "x.csv", "0,0\n1,2\n");
    let manifest = dir.path().join("run.json");
    ok(&["sig", s(&csv), "--depth", "2", "--manifest", s(&manifest)]);
    let m: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "sig");
    assert_eq!(m["config"]["sig"]["depth"], 2);
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(m["version"].is_string() && m["wall_clock_seconds"].is_number());
}

fn brownian_sample(dir: &Path, name: &str, n: u64, offset: u64) -> PathBuf {
    let d = dir.join(name);
    fs::create_dir(&d).unwrap();
    for i in 0..n {
        let f = d.join(format!("p{i:02}.csv"));
        ok(&[
            "--no-manifest", "brownian", "--dim", "2", "--steps", "10", "--h", "0.1", "--seed",
            &(offset + i).to_string(), "-o", s(&f),
        ]);
    }
    d
}

#[test]
fn gram_mmd_and_jobs() {
    let dir = TempDir::new().unwrap();
    let x = brownian_sample(dir.path(), "x", 6, 0);
    let y = brownian_sample(dir.path(), "y", 6, 100);
    let common = ["--method", "weighted-mc", "--phi", "sqrt-exp", "--samples", "20", "--seed", "3", "--lambda", "2"];
    let mut one = vec!["--no-manifest", "gram", s(&x), "--jobs", "1"];
    one.extend(common);
    let mut four = vec!["--no-manifest", "gram", s(&x), "--jobs", "4"];
    four.extend(common);
    let (a, b) = (ok(&one), ok(&four));
    assert_eq!(a, b);
    assert!(a.starts_with("row,col,value\np00,p00,"));
    assert_eq!(a.lines().count(), 1 + 36);

    let report: Value = serde_json::from_str(&ok(&[
        "--no-manifest", "mmd-test", s(&x), s(&y), "--method", "truncated", "--depth", "3",
    ]))
    .unwrap();
    assert_eq!(report["m"], 6);
    let (stat, thr) = (report["mmd_sq"].as_f64().unwrap(), report["threshold"].as_f64().unwrap());
    assert_eq!(report["decision"] == "reject", stat >= thr);

    let list = write(dir.path(), "list.txt", "# two paths\nx/p00.csv\n\nx/p01.csv\n");
    let json: Value = serde_json::from_str(&ok(&[
        "--no-manifest", "gram", s(&list), "--method", "pde", "--format", "json",
    ]))
    .unwrap();
    assert_eq!(json["row_ids"], serde_json::json!(["p00", "p01"]));
}

#[test]
fn fit_and_predict() {
    let dir = TempDir::new().unwrap();
    let x = brownian_sample(dir.path(), "train", 12, 0);
    let mut targets = String::from("y\n");
    for i in 0..12 {
        let csv = fs::read_to_string(x.join(format!("p{i:02}.csv"))).unwrap();
        let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        targets.push_str(&format!("{}\n", last[1] - 2.0 * last[2]));
    }
    let y = write(dir.path(), "y.csv", &targets);
    for (kind, extra) in [("signature", vec!["--depth", "1"]), ("ridge", vec!["--depth", "1", "--reg-lambda", "1e-9"])] {
        let model = dir.path().join(format!("{kind}.json"));
        let mut args = vec!["--no-manifest", "fit", s(&x), "--targets", s(&y), "--model", kind, "-o", s(&model)];
        args.extend(extra);
        ok(&args);
        let pred = ok(&["--no-manifest", "predict", s(&x), "--model", s(&model)]);
        let rows: Vec<&str> = pred.lines().collect();
        assert_eq!(rows[0], "id,y1");
        for (row, want) in rows[1..].iter().zip(targets.lines().skip(1)) {
            let got: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
            let want: f64 = want.parse().unwrap();
            assert!((got - want).abs() < 1e-5, "{kind}: {got} vs {want}");
        }
    }
}

#[test]
fn solve_adjoint_and_order() {
    let dir = TempDir::new().unwrap();
    let drv = dir.path().join("bm.csv");
    ok(&["--no-manifest", "brownian", "--dim", "2", "--steps", "64", "--h", "0.015625", "--seed", "4", "-o", s(&drv)]);
    let problem = write(
        dir.path(),
        "ball.json",
        r#"{"fields":{"builtin":"rolling_ball"},"driver":"bm.csv","method":"logode","N":2}"#,
    );
    let grad = dir.path().join("grad.json");
    let traj = ok(&["--no-manifest", "solve", s(&problem), "--adjoint", "1,0,0", "--adjoint-output", s(&grad)]);
    let lines: Vec<&str> = traj.lines().collect();
    assert_eq!(lines[0], "t,y1,y2,y3");
    assert_eq!(lines.len(), 66);
    for l in &lines[1..] {
        let v: Vec<f64> = l.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert!((v.iter().map(|a| a * a).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
    }
    let g: Value = serde_json::from_str(&fs::read_to_string(grad).unwrap()).unwrap();
    assert_eq!(floats(&g["gradient"]).len(), 3);

    // smooth driver: log-ODE at depth 2 converges at about third order or better
    let mut smooth = String::new();
    for i in 0..=256 {
        let t = i as f64 / 256.0;
        smooth.push_str(&format!("{},{}\n", (3.0 * t).sin(), (2.0 * t).cos() - 1.0));
    }
    let smooth = write(dir.path(), "smooth.csv", &smooth);
    let table = dir.path().join("order.csv");
    let report: Value = serde_json::from_str(&ok(&[
        "--no-manifest", "order", s(&problem), "--driver", s(&smooth), "--steps", "4,8,16,32", "--table",
        s(&table),
    ]))
    .unwrap();
    assert!(report["slope"].as_f64().unwrap() > 2.5, "{report}");
    assert!(fs::read_to_string(table).unwrap().starts_with("steps,step_size,error\n"));
    assert_eq!(sigkit(&["order", s(&problem), "--steps", "3,5,7"]).status.code(), Some(2));
}

#[test]
fn brownian_is_seeded() {
    let a = ok(&["--no-manifest", "brownian", "--dim", "2", "--steps", "5", "--rho", "-0.5", "--seed", "9"]);
    let b = ok(&["--no-manifest", "brownian", "--dim", "2", "--steps", "5", "--rho", "-0.5", "--seed", "9"]);
    assert_eq!(a, b);
    assert_eq!(a.lines().next(), Some("t,x1,x2"));
    assert_eq!(sigkit(&["brownian", "--dim", "3", "--steps", "5", "--rho", "0.5"]).status.code(), Some(2));
}
