use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use minphase::fixtures::{TABLE1_GAMMA, TABLE2_GAMMA_PSD, TABLE2_OFFSET};
use minphase::taps::{parse_taps, read_taps};
use minphase::{design_minphase, DesignOptions, Offset, Scaling};
use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn minphase(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minphase"))
        .args(args)
        .current_dir(dir)
        .env_remove("MINPHASE_GRID")
        .output()
        .unwrap()
}

fn run_ok(dir: &Path, args: &[&str]) {
    let out = minphase(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn taps(path: &Path) -> Vec<f64> {
    read_taps(path).unwrap().taps
}

/// Rows of a CSV with a header, all cells numeric except `true`/`false`.
fn csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| match c {
                    "true" => 1.0,
                    "false" => 0.0,
                    _ => c.parse().unwrap(),
                })
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn design_matches_library() {
    let tmp = TempDir::new().unwrap();
    let proto = fixture("table2_g.txt");
    run_ok(
        tmp.path(),
        &[
            "design",
            "--prototype",
            proto.to_str().unwrap(),
            "--epsilon",
            "1.16e-13",
            "--q",
            "250",
            "--scale",
            "0.75",
        ],
    );
    let g = read_taps(&proto).unwrap().into_prototype().unwrap();
    let opts = DesignOptions {
        offset: Offset::Fixed(TABLE2_OFFSET),
        scaling: Scaling::Fixed(0.75),
        ..DesignOptions::with_padding(250)
    };
    let d = design_minphase(&g, &opts).unwrap();
    assert_eq!(taps(&tmp.path().join("c.txt")), d.c.taps());
    let report = json(&tmp.path().join("report.json"));
    assert_eq!(report["lift"]["scale"], 0.75);
    assert_eq!(report["residual"]["E_L2"].as_f64().unwrap(), d.residual.e_l2);
    assert!(d.residual.e_l2 <= 1e-14);
    assert_eq!(report["manifest"], "manifest.json");

    let (header, rows) = csv(&tmp.path().join("response.csv"));
    assert_eq!(header, "omega,c_magnitude,lifted_amplitude");
    assert_eq!(rows.len(), 4096);
    for r in &rows {
        assert!((r[1] * r[1] - r[2]).abs() <= 1e-10, "{r:?}");
    }
}

#[test]
fn design_auto_offset_on_five_taps() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &[
            "design",
            "--prototype",
            fixture("table1_g.txt").to_str().unwrap(),
            "--epsilon",
            "auto",
        ],
    );
    let report = json(&tmp.path().join("report.json"));
    assert!(report["residual"]["E_L2"].as_f64().unwrap() <= 1e-14);
    assert!((report["lift"]["gamma_psd"].as_f64().unwrap() - TABLE1_GAMMA).abs() <= 1e-12);
    assert_eq!(taps(&tmp.path().join("c.txt")).len(), 3);
}

#[test]
fn design_identity() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &["design", "--prototype", fixture("identity.txt").to_str().unwrap()],
    );
    assert_eq!(taps(&tmp.path().join("c.txt")), vec![1.0]);
    assert_eq!(json(&tmp.path().join("report.json"))["lift"]["gamma_psd"], 0.0);
}

#[test]
fn transform_outputs() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &[
            "transform",
            "--fir",
            fixture("rand10_seed42.txt").to_str().unwrap(),
            "--mmse",
        ],
    );
    let report = json(&tmp.path().join("report.json"));
    let e = report["residual"]["E_L2"].as_f64().unwrap();
    assert!(e <= 1e-14);
    let e_mmse = report["mmse"]["residual"]["E_L2"].as_f64().unwrap();
    assert!(e_mmse / e >= 1e6);
    assert_eq!(report["zeros"].as_array().unwrap().len(), 9);
    assert!(report["zeros"]
        .as_array()
        .unwrap()
        .iter()
        .all(|z| z["modulus"].as_f64().unwrap() < 1.0));
    assert_eq!(taps(&tmp.path().join("c.txt")).len(), 10);
    assert_eq!(taps(&tmp.path().join("c_mmse.txt")).len(), 10);
    assert_eq!(
        taps(&tmp.path().join("f.txt")).len(),
        report["f_taps"].as_array().unwrap().len()
    );
    let manifest = json(&tmp.path().join("manifest.json"));
    assert_eq!(manifest["config"]["mmse"]["taps"], 100);
}

#[test]
fn transform_keeps_minimum_phase_input() {
    let tmp = TempDir::new().unwrap();
    let input = fixture("minphase_already.txt");
    run_ok(tmp.path(), &["transform", "--fir", input.to_str().unwrap()]);
    let c = taps(&tmp.path().join("c.txt"));
    let h = taps(&input);
    assert!(c.iter().zip(&h).all(|(a, b)| (a - b).abs() <= 1e-10), "{c:?}");
    assert!(!tmp.path().join("c_mmse.txt").exists());
}

#[test]
fn sweep_shows_waterfall() {
    let tmp = TempDir::new().unwrap();
    let proto = fixture("table2_g.txt");
    run_ok(
        tmp.path(),
        &[
            "sweep",
            "--prototype",
            proto.to_str().unwrap(),
            "--offsets",
            "logrange -1e-8:1e-3:50",
            "--q",
            "250",
        ],
    );
    let (header, rows) = csv(&tmp.path().join("waterfall.csv"));
    assert_eq!(header, "gamma,offset,E_L2,converged");
    assert_eq!(rows.len(), 50);
    assert!(rows.windows(2).all(|w| w[0][1] < w[1][1]));
    // the deepest offset; offsets near −1e-16 sit inside the measurement
    // resolution of γ_psd and factor normally
    let below = rows[0][2];
    assert_eq!(rows[0][1], -1e-8);
    let above = rows.iter().filter(|r| r[1] > 0.0).map(|r| r[2]).fold(0.0, f64::max);
    assert!(below / above >= 1e5, "below {below:e} above {above:e}");
}

#[test]
fn sweep_single_and_empty() {
    let tmp = TempDir::new().unwrap();
    let proto = fixture("table2_g.txt");
    run_ok(
        tmp.path(),
        &[
            "sweep",
            "--prototype",
            proto.to_str().unwrap(),
            "--offsets",
            "1.16e-13",
            "--q",
            "250",
        ],
    );
    let (_, rows) = csv(&tmp.path().join("waterfall.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0][2] <= 1e-14);
    assert_eq!(rows[0][3], 1.0);

    let empty = TempDir::new().unwrap();
    run_ok(
        empty.path(),
        &["sweep", "--prototype", proto.to_str().unwrap(), "--offsets", ""],
    );
    assert_eq!(
        fs::read_to_string(empty.path().join("waterfall.csv")).unwrap(),
        "gamma,offset,E_L2,converged\n"
    );
}

#[test]
fn sweep_reads_offset_file_and_ignores_jobs() {
    let tmp = TempDir::new().unwrap();
    let proto = fixture("table2_g.txt");
    let list = tmp.path().join("offsets.txt");
    fs::write(&list, "# offsets\n1e-10\n-1e-9, 1e-12\n").unwrap();
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let out = tmp.path().join(format!("j{jobs}"));
        run_ok(
            tmp.path(),
            &[
                "sweep",
                "--prototype",
                proto.to_str().unwrap(),
                "--offsets",
                list.to_str().unwrap(),
                "--jobs",
                jobs,
                "--out",
                out.to_str().unwrap(),
            ],
        );
        outputs.push(fs::read(out.join("waterfall.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let (_, rows) = csv(&tmp.path().join("j1/waterfall.csv"));
    assert_eq!(rows.iter().map(|r| r[1]).collect::<Vec<_>>(), vec![-1e-9, 1e-12, 1e-10]);
}

#[test]
fn analyze_eigen_sweep() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &[
            "analyze",
            "--prototype",
            fixture("table1_g.txt").to_str().unwrap(),
            "--eig-sweep",
            "5:500:20",
        ],
    );
    let (header, rows) = csv(&tmp.path().join("eig_sweep.csv"));
    assert_eq!(header, "Q,lambda_min");
    let last = rows.last().unwrap();
    assert_eq!(last[0], 500.0);
    assert!((last[1].abs() - TABLE1_GAMMA).abs() <= 1e-6);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] + 1e-14));
}

#[test]
fn analyze_response_minimum() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &[
            "analyze",
            "--prototype",
            fixture("table2_g.txt").to_str().unwrap(),
            "--response",
        ],
    );
    let a = json(&tmp.path().join("analysis.json"));
    let min = a["min_amplitude"]["value"].as_f64().unwrap();
    assert!((min + TABLE2_GAMMA_PSD).abs() <= 1e-12, "{min:e}");
    let (header, rows) = csv(&tmp.path().join("response.csv"));
    assert_eq!(header, "omega,amplitude");
    assert!(rows.iter().all(|r| r[1] >= min - 1e-15));
}

#[test]
fn analyze_identity_zeros() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &[
            "analyze",
            "--prototype",
            fixture("identity.txt").to_str().unwrap(),
            "--zeros",
        ],
    );
    assert_eq!(json(&tmp.path().join("zeros.json"))["zeros"], Value::Array(vec![]));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let proto = fixture("table1_g.txt");
    let proto = proto.to_str().unwrap();
    assert_eq!(code(&minphase(dir, &["--help"])), 0);
    assert_eq!(code(&minphase(dir, &[])), 1);
    assert_eq!(code(&minphase(dir, &["design"])), 1);
    assert_eq!(code(&minphase(dir, &["design", "--prototype", proto, "--bogus"])), 1);
    assert_eq!(
        code(&minphase(dir, &["design", "--prototype", proto, "--epsilon", "soon"])),
        1
    );
    assert_eq!(
        code(&minphase(
            dir,
            &["sweep", "--prototype", proto, "--offsets", "logrange 1:0:3"]
        )),
        1
    );
    assert_eq!(code(&minphase(dir, &["transform", "--fir", proto, "--sigma2", "1"])), 1);

    fs::write(dir.join("bad.txt"), "1\nfoo\n").unwrap();
    let out = minphase(dir, &["analyze", "--prototype", "bad.txt"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(code(&minphase(dir, &["analyze", "--prototype", "missing.txt"])), 2);
    fs::write(dir.join("asym.txt"), "1\n2\n3\n").unwrap();
    assert_eq!(code(&minphase(dir, &["design", "--prototype", "asym.txt"])), 2);

    fs::write(dir.join("circle.txt"), "1\n1\n").unwrap();
    let out = minphase(dir, &["transform", "--fir", "circle.txt"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unit circle"));

    // far below the waterfall point the design cannot converge
    let out = minphase(dir, &["design", "--prototype", proto, "--epsilon", "-1e-4"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let proto = fixture("table2_g.txt");
    for run in ["a", "b"] {
        run_ok(
            tmp.path(),
            &[
                "design",
                "--prototype",
                proto.to_str().unwrap(),
                "--epsilon",
                "auto",
                "--out",
                run,
            ],
        );
    }
    for name in ["c.txt", "report.json", "response.csv", "manifest.json"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(name)).unwrap(),
            fs::read(tmp.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    let manifest = json(&tmp.path().join("a/manifest.json"));
    assert_eq!(manifest["command"], "design");
    assert_eq!(
        manifest["outputs"],
        serde_json::json!(["c.txt", "report.json", "response.csv"])
    );
    // tap files name the manifest in a comment and still parse
    let c = fs::read_to_string(tmp.path().join("a/c.txt")).unwrap();
    assert!(c.starts_with("# manifest.json\n"));
    assert_eq!(parse_taps(&c).unwrap().taps.len(), 13);
}

#[test]
fn config_precedence() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let proto = fixture("table1_g.txt");
    let proto = proto.to_str().unwrap();
    fs::write(
        dir.join("minphase.cfg"),
        "q = 40\ngrid = 512\n[solver]\nmax_iterations = 150\n",
    )
    .unwrap();

    run_ok(dir, &["design", "--prototype", proto, "--out", "file"]);
    let m = json(&dir.join("file/manifest.json"));
    assert_eq!(m["config"]["padding"], 40);
    assert_eq!(m["config"]["grid"], 512);
    assert_eq!(m["config"]["solver"]["max_iterations"], 150);
    assert_eq!(m["config"]["config_file"], "minphase.cfg");

    run_ok(
        dir,
        &[
            "design",
            "--prototype",
            proto,
            "--q",
            "60",
            "--grid",
            "256",
            "--out",
            "flags",
        ],
    );
    let m = json(&dir.join("flags/manifest.json"));
    assert_eq!(m["config"]["padding"], 60);
    assert_eq!(m["config"]["grid"], 256);

    // the environment only replaces the built-in grid default
    let out = Command::new(env!("CARGO_BIN_EXE_minphase"))
        .args(["analyze", "--prototype", proto, "--out", "env"])
        .current_dir(dir)
        .env("MINPHASE_GRID", "1000")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json(&dir.join("env/manifest.json"))["config"]["grid"], 512);
    fs::remove_file(dir.join("minphase.cfg")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_minphase"))
        .args(["analyze", "--prototype", proto, "--out", "env2"])
        .current_dir(dir)
        .env("MINPHASE_GRID", "1000")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json(&dir.join("env2/manifest.json"))["config"]["grid"], 1000);

    fs::write(dir.join("broken.cfg"), "q = \"many\"\n").unwrap();
    assert_eq!(
        code(&minphase(
            dir,
            &["--config", "broken.cfg", "design", "--prototype", proto]
        )),
        1
    );
}
