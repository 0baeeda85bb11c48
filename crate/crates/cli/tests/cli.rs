use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use microcavity_cli::output::{encode_jsa, sha256_hex};
use microcavity_core::{FrequencyGrid, JsaMatrix};
use num_complex::Complex64;

const BIN: &str = env!("CARGO_BIN_EXE_microcavity");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    run(&all)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Digest of every data file, skipping the manifest.
fn digests(dir: &Path) -> Vec<(String, String)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file() && p.file_name().unwrap() != "manifest.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                sha256_hex(&fs::read(&p).unwrap()),
            )
        })
        .collect();
    v.sort();
    v
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn success_writes_manifest_with_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), &["--grid-points", "41", "jsa"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    let listed: Vec<(String, String)> = files
        .iter()
        .map(|f| {
            (
                f["path"].as_str().unwrap().to_string(),
                f["sha256"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(listed, digests(tmp.path()));
    for name in ["jsa.bin", "jsa.json", "jsa_abs.csv", "resolved.toml"] {
        assert!(listed.iter().any(|(p, _)| p == name), "{name} missing");
    }
    assert!(manifest["started"].is_string() && manifest["version"].is_string());
}

#[test]
fn config_errors_exit_2_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");

    fs::write(&bad, "[mirror]\nrho2 = 0.95\n[grating]\nkappa = = 2\n").unwrap();
    let o = run_in(
        tmp.path(),
        &["--config", bad.to_str().unwrap(), "dbr-spectrum"],
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    fs::write(&bad, "[grating]\nkapa = 2\n").unwrap();
    let o = run_in(
        tmp.path(),
        &["--config", bad.to_str().unwrap(), "dbr-spectrum"],
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("kapa"), "{}", stderr(&o));

    let o = run_in(tmp.path(), &["--set", "mirror.rho2=1.0", "cavity-spectrum"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mirror.rho2"));

    let o = run_in(
        tmp.path(),
        &["--set", "grating.length=4 parsecs", "cavity-spectrum"],
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("parsecs"));

    let o = run_in(tmp.path(), &["--config", "/nonexistent/x.toml", "jsa"]);
    assert_eq!(code(&o), 2);

    let o = run_in(tmp.path(), &["--workers", "0", "jsa"]);
    assert_eq!(code(&o), 2);

    let o = run_in(
        tmp.path(),
        &["sweep", "--param", "mirror.nothing", "--values", "1"],
    );
    assert_eq!(code(&o), 2);

    let o = run_in(tmp.path(), &["frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let g = FrequencyGrid::default_band(4).unwrap();
    let zero = JsaMatrix::from_values(g, g, vec![Complex64::new(0.0, 0.0); 16]).unwrap();
    let path = tmp.path().join("zero.bin");
    fs::write(&path, encode_jsa(&zero)).unwrap();
    let o = run_in(
        &tmp.path().join("out"),
        &["schmidt", "--matrix", path.to_str().unwrap()],
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("zero norm"));
}

#[test]
fn reruns_and_worker_counts_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut all = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let dir = tmp.path().join(name);
        let o = run_in(
            &dir,
            &["--grid-points", "61", "--workers", workers, "schmidt"],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        all.push(digests(&dir));
    }
    assert_eq!(all[0], all[1]);
    assert_eq!(all[0], all[2]);
}

#[test]
fn resolved_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let single = configs().join("single_grating.toml");
    let o = run_in(
        &first,
        &[
            "--config",
            single.to_str().unwrap(),
            "--set",
            "scan.points=501",
            "cavity-spectrum",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let second = tmp.path().join("second");
    let resolved = first.join("resolved.toml");
    let o = run_in(
        &second,
        &["--config", resolved.to_str().unwrap(), "cavity-spectrum"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(digests(&first), digests(&second));
}

#[test]
fn schmidt_from_stored_matrix_matches_direct_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (j, s1, s2) = (
        tmp.path().join("j"),
        tmp.path().join("s1"),
        tmp.path().join("s2"),
    );
    assert_eq!(code(&run_in(&j, &["--grid-points", "51", "jsa"])), 0);
    assert_eq!(code(&run_in(&s1, &["--grid-points", "51", "schmidt"])), 0);
    let bin = j.join("jsa.bin");
    assert_eq!(
        code(&run_in(
            &s2,
            &[
                "--grid-points",
                "51",
                "schmidt",
                "--matrix",
                bin.to_str().unwrap()
            ]
        )),
        0
    );
    assert_eq!(digests(&s1), digests(&s2));
}

#[test]
fn metrics_json_has_exact_reciprocal_purity() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run_in(tmp.path(), &["--grid-points", "75", "schmidt"])),
        0
    );
    let m: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("schmidt_metrics.json")).unwrap())
            .unwrap();
    let p = m["purity"].as_f64().unwrap();
    let k = m["cooperativity"].as_f64().unwrap();
    assert_eq!(p * k, 1.0);
    let (header, lambdas) = read_csv(&tmp.path().join("schmidt_lambdas.csv"));
    assert_eq!(header, ["j", "lambda"]);
    assert_eq!(lambdas[0][0], 1.0);
    let total: f64 =
        lambdas.iter().map(|r| r[1]).sum::<f64>() + m["discarded_weight"].as_f64().unwrap();
    assert!((total - 1.0).abs() < 1e-12);
    for j in 1..=4 {
        let (h, rows) = read_csv(&tmp.path().join(format!("schmidt_mode_{j}.csv")));
        assert_eq!(h, ["omega", "re_psi", "im_psi", "abs_psi2"]);
        assert_eq!(rows.len(), 75);
    }
}

#[test]
fn empty_sweep_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), &["sweep", "--param", "rho2", "--values", ""]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(tmp.path().join("sweep.csv")).unwrap(),
        "value,lambda_1,entropy_bits,cooperativity\n"
    );
}

#[test]
fn sweep_rows_follow_value_list() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(
        tmp.path(),
        &[
            "--grid-points",
            "61",
            "sweep",
            "--param",
            "kappa",
            "--values",
            "2/mm,0",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = read_csv(&tmp.path().join("sweep.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[1][0]), (2e3, 0.0));
    // Gratings off leaves a far more mixed state.
    assert!(rows[0][1] > rows[1][1]);
    assert!(rows[1][3] > rows[0][3]);
}

#[test]
fn trivial_spectra() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(
        tmp.path(),
        &[
            "--set",
            "grating.kappa=0",
            "--set",
            "mirror.rho2=0",
            "--set",
            "scan.points=101",
            "dbr-spectrum",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = read_csv(&tmp.path().join("dbr_spectrum.csv"));
    assert_eq!(header, ["k", "abs_r2", "abs_t2"]);
    assert!(rows
        .iter()
        .all(|r| r[1] == 0.0 && (r[2] - 1.0).abs() < 1e-15));

    let o = run_in(
        tmp.path(),
        &[
            "--set",
            "grating.kappa=0",
            "--set",
            "mirror.rho2=0",
            "--set",
            "scan.points=101",
            "cavity-spectrum",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = read_csv(&tmp.path().join("cavity_spectrum.csv"));
    assert_eq!(header, ["k", "abs_R2", "abs_A2_2"]);
    assert!(rows
        .iter()
        .all(|r| r[1] == 0.0 && (r[2] - 1.0).abs() < 1e-15));
}

#[test]
fn bragg_centre_reflectivity_from_scan() {
    let tmp = tempfile::tempdir().unwrap();
    let single = configs().join("single_grating.toml");
    let o = run_in(
        tmp.path(),
        &["--config", single.to_str().unwrap(), "dbr-spectrum"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = read_csv(&tmp.path().join("dbr_spectrum.csv"));
    let centre = &rows[rows.len() / 2];
    assert!(
        (centre[1] - 4f64.tanh().powi(2)).abs() < 1e-9,
        "{}",
        centre[1]
    );
    let k0 = 2.0 * std::f64::consts::PI / 800e-9;
    // Plateau above 0.9 across the central part of the stop band |k - K/2| < κ/2.
    for r in rows.iter().filter(|r| (r[0] - k0).abs() < 500.0) {
        assert!(r[1] > 0.9, "{r:?}");
    }
}

#[test]
fn shipped_default_config_equals_builtin_defaults() {
    let text = fs::read_to_string(configs().join("default.toml")).unwrap();
    let cfg = microcavity_cli::config::load(&text, &[]).unwrap();
    assert_eq!(cfg, microcavity_cli::ScenarioConfig::default());
}
