use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TWO_PART: &str = r#"[[0,1],[2,"2*pi"]]"#;
const CIRCLE: &str = r#"[[0,"2*pi"]]"#;

fn mexp(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mexp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MEXP_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_column(path: &Path, col: usize) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

fn assert_headers(dir: &Path) {
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|x| x == "csv") {
            let text = fs::read_to_string(&p).unwrap();
            let first = text.lines().next().unwrap();
            assert!(first.chars().next().unwrap().is_alphabetic(), "{} lacks a header", p.display());
        }
    }
}

#[test]
fn spectrum_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = mexp(&["spectrum", "--spectrum", "[[1,2],[3,6]]"], dir.path());
    assert_eq!(code(&o), 0);
    let m = manifest(dir.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["report"]["measure"], 4.0);
    assert_eq!(m["report"]["gaps"], serde_json::json!([[2.0, 3.0]]));
    assert_eq!(m["report"]["min_reducing_N"], 2);

    let o = mexp(&["spectrum", "--spectrum", CIRCLE], dir.path());
    assert_eq!(code(&o), 0);
    let m = manifest(dir.path());
    assert!((m["report"]["measure"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(m["report"]["gaps"], serde_json::json!([]));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = mexp(&["spectrum", "--spectrum", "[[0,2],[1,3]]"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("overlap"));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "error");
    assert_eq!(m["exit_code"], 2);

    assert_eq!(code(&mexp(&["basis", "--spectrum", CIRCLE, "--trunc", "10"], dir.path())), 2);
    assert_eq!(code(&mexp(&["spectrum", "--spectrum", "[[0,\"2*tau\"]]"], dir.path())), 2);
    assert_eq!(code(&mexp(&["bogus-command"], dir.path())), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_mexp"))
        .args(["spectrum", "--spectrum", CIRCLE, "--out"])
        .arg(dir.path())
        .env("MEXP_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn basis_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = mexp(&["basis", "--spectrum", TWO_PART, "--trunc", "300"], dir.path());
    assert_eq!(code(&o), 0);
    for f in ["gamma.json", "genfun.json", "density.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let gamma: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gamma.json")).unwrap()).unwrap();
    let pts = gamma["points"].as_array().unwrap();
    assert!(pts.iter().all(|p| p[0].as_f64().unwrap().fract() == 0.0 && p[1] == 0.0));
    let ratios = csv_column(&dir.path().join("density.csv"), 5);
    assert!((ratios.last().unwrap() - 1.0).abs() < 0.05);
    assert_headers(dir.path());

    let o = mexp(&["basis", "--spectrum", CIRCLE, "--trunc", "50"], dir.path());
    assert_eq!(code(&o), 0);
    let gamma: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gamma.json")).unwrap()).unwrap();
    let xs: Vec<f64> = gamma["points"].as_array().unwrap().iter().map(|p| p[0].as_f64().unwrap()).collect();
    let ints: Vec<f64> = (-50..=50).map(|k| k as f64).collect();
    assert!(ints.iter().all(|k| xs.contains(k)));
}

#[test]
fn four_intervals_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = mexp(&["basis", "--spectrum", "[[0,0.5],[1,1.5],[2,2.5],[3,3.5]]"], dir.path());
    assert_eq!(code(&o), 3);
    assert_eq!(manifest(dir.path())["exit_code"], 3);
}

#[test]
fn verify_integers() {
    let dir = tempfile::tempdir().unwrap();
    let o = mexp(&["verify", "--spectrum", CIRCLE], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = csv_column(&dir.path().join("residuals.csv"), 2);
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
    for f in ["bounds.csv", "biorth_check.csv", "residuals.csv"] {
        assert!(dir.path().join(f).exists());
    }
    assert_headers(dir.path());
}

#[test]
fn verify_two_intervals_reports_defect() {
    let dir = tempfile::tempdir().unwrap();
    let o = mexp(&["verify", "--spectrum", TWO_PART], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let defect = manifest(dir.path())["report"]["biorthogonality_defect"].as_f64().unwrap();
    assert!(defect <= 1e-8);
}

#[test]
fn duplicated_frequency_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let freqs = dir.path().join("dup.json");
    fs::write(&freqs, "[-2, -1, 0, 1, 1, 2, 3]").unwrap();
    let o = mexp(
        &["verify", "--spectrum", CIRCLE, "--freqs", freqs.to_str().unwrap(), "--window", "7"],
        dir.path(),
    );
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ill-conditioned"));
}

#[test]
fn strict_tolerance_reports_first_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = mexp(&["verify", "--spectrum", TWO_PART, "--tol-residual", "1e-6"], dir.path());
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual_final"));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = ["genfun-eval", "--spectrum", TWO_PART, "--seed", "7", "--count", "20"];
    assert_eq!(code(&mexp(&args, a.path())), 0);
    assert_eq!(code(&mexp(&args, b.path())), 0);
    let read = |d: &Path| fs::read(d.join("genfun_eval.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let other = ["genfun-eval", "--spectrum", TWO_PART, "--seed", "8", "--count", "20"];
    assert_eq!(code(&mexp(&other, c.path())), 0);
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str, dir: &Path| {
        let o = Command::new(env!("CARGO_BIN_EXE_mexp"))
            .args(["gram-bounds", "--spectrum", TWO_PART, "--windows", "40,80", "--out"])
            .arg(dir)
            .env("MEXP_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        fs::read(dir.join("bounds.csv")).unwrap()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run("1", a.path()), run("3", b.path()));
}

#[test]
fn remaining_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["genfun-eval", "--spectrum", CIRCLE, "--z", "0.5,0"],
        &["genfun-check", "--spectrum", CIRCLE],
        &["gram-bounds", "--spectrum", TWO_PART],
        &["dual", "--spectrum", TWO_PART, "--window", "60"],
        &["biorth", "--spectrum", TWO_PART],
        &["density", "--spectrum", TWO_PART, "--radius", "50,100"],
    ];
    for args in cases {
        let o = mexp(args, dir.path());
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(manifest(dir.path())["command"], args[0]);
    }
    let g = csv_column(&dir.path().join("genfun_eval.csv"), 4);
    assert!((g[0] - 1.0 / std::f64::consts::PI).abs() < 1e-9);
    assert!(dir.path().join("biorth.json").exists() && dir.path().join("s_trace.csv").exists());
    assert_headers(dir.path());
}
