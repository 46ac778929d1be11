use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use seamqec_core::report::{read_fig3_csv, read_rates_csv, read_sweep_csv, read_threshold_csv, Manifest};

fn seamqec(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seamqec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SEAMQEC_SEED")
        .env_remove("SEAMQEC_WORKERS")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> Manifest {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn rates_for_one_cavity_design() {
    let dir = tempfile::tempdir().unwrap();
    let o = seamqec(dir.path(), &["rates", "--design", "single_cavity", "--L", "20", "--N", "160"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rates_csv(fs::File::open(dir.path().join("rates.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r.design, "single_cavity");
    assert!((r.tau_bell_us - 1.0).abs() < 1e-9);
    assert!((r.cycle_time_us - 40.0).abs() < 1e-9);
    assert!((r.gate_time_us - 800.0).abs() < 1e-9);
    assert!((r.p_aa - 0.1).abs() < 1e-12);
    let m = manifest(dir.path());
    assert_eq!(m.command, "rates");
    assert_eq!(m.outputs, vec!["rates.csv", "corners.csv"]);
    assert_eq!(m.config["distance"], 20);
    assert_eq!(m.config_hash.len(), 64);
}

#[test]
fn unknown_design_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = seamqec(dir.path(), &["rates", "--design", "mirror"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"model": {"kind": "family", "family": "bulk"}, "eps_grid": [{"eps_cx": "high"}]}"#);
    let o = seamqec(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("eps_grid[0].eps_cx"), "{err}");

    let cfg = write_config(dir.path(), r#"{"n": [1], "colour": "red"}"#);
    let o = seamqec(dir.path(), &["rates", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = seamqec(dir.path(), &["threshold"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn derive_noise_lists_exact_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let o = seamqec(dir.path(), &["derive-noise"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("noise.csv")).unwrap();
    assert!(text.starts_with("preset,coefficients,quantity,eps_bell,eps_cx,eps_m\n"));
    assert!(text.contains("bulk,table_rounded,p,0,2,0\n"));
    assert!(text.contains("bulk,exact_counting,p,0,32/15,0\n"));
    assert!(text.contains("small_modules,exact_counting,q,32/15,64/15,5\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
}

const SMALL_SWEEP: &str = r#"{
    "model": {"kind": "family", "family": "combined"},
    "eps_grid": [{"eps_ryd": 0.004, "eps_bell": 0.032, "eps_m": 0.004}, {"eps_ryd": 0.008, "eps_bell": 0.064, "eps_m": 0.008}],
    "distances": [3, 5],
    "budget": {"min_shots": 500, "max_shots": 2000, "target_relative_halfwidth": 0.2}
}"#;

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(seamqec(&a, &["sweep", "--config", &cfg, "--seed", "5"]).status.success());
    assert!(seamqec(&b, &["sweep", "--config", &cfg, "--seed", "5", "--workers", "2"]).status.success());
    let text_a = fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(text_a, fs::read(b.join("sweep.csv")).unwrap());
    let sweep = read_sweep_csv(text_a.as_slice()).unwrap();
    assert_eq!(sweep.rows.len(), 4);
    assert!(sweep.rows.iter().all(|r| r.spec.rounds() == r.spec.distance));
    assert_eq!(manifest(&a).seed, Some(5));
    assert_eq!(manifest(&b).workers, 2);
    assert_eq!(manifest(&a).config_hash, manifest(&b).config_hash);
}

#[test]
fn seed_and_workers_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let o = Command::new(env!("CARGO_BIN_EXE_seamqec"))
        .args(["sweep", "--config", &cfg, "--out"])
        .arg(dir.path())
        .env("SEAMQEC_SEED", "123")
        .env("SEAMQEC_WORKERS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let m = manifest(dir.path());
    assert_eq!((m.seed, m.workers), (Some(123), 1));
}

#[test]
fn missing_seed_is_drawn_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    assert!(seamqec(dir.path(), &["sweep", "--config", &cfg]).status.success());
    assert!(manifest(dir.path()).seed.is_some());
}

#[test]
fn json_format_writes_arrays() {
    let dir = tempfile::tempdir().unwrap();
    assert!(seamqec(dir.path(), &["fig3", "--format", "json"]).status.success());
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fig3.json")).unwrap()).unwrap();
    assert!(rows.as_array().unwrap().len() > 30);
    assert!((rows[0]["required_rate_per_us"].as_f64().unwrap() - 0.02).abs() < 1e-12);
}

#[test]
fn fig3_table_and_corners() {
    let dir = tempfile::tempdir().unwrap();
    assert!(seamqec(dir.path(), &["fig3"]).status.success());
    let rows = read_fig3_csv(fs::File::open(dir.path().join("fig3.csv")).unwrap()).unwrap();
    for design in ["lens", "single_cavity", "cavity_array"] {
        assert!(rows.iter().any(|r| r.design == design));
    }
    assert!(rows.iter().all(|r| (r.required_rate_per_us - 0.02).abs() < 1e-12));
    let corners = fs::read_to_string(dir.path().join("fig3_corners.csv")).unwrap();
    assert!(corners.starts_with("design,corner_n,cap_per_us\n"));
    assert!(corners.contains("single_cavity,160"));
    assert!(corners.contains("cavity_array,85.8"));
}

#[test]
fn threshold_without_crossing_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "model": {"kind": "uniform_pq"},
            "rays": [{"direction": {"eps_cx": 1, "eps_bell": 0, "eps_m": 0}, "grid": [0.002, 0.004]}],
            "distances": [3, 5, 7],
            "budget": {"min_shots": 3000, "max_shots": 3000, "target_relative_halfwidth": 0}
        }"#,
    );
    let o = seamqec(dir.path(), &["threshold", "--config", &cfg, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_threshold_csv(fs::File::open(dir.path().join("threshold.csv")).unwrap()).unwrap();
    assert_eq!(rows[0].t_th, None);
    assert_ne!(rows[0].status, "ok");
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn threshold_preset_finds_the_bulk_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let o = seamqec(dir.path(), &["threshold", "--preset", "bulk", "--shots", "4000", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_threshold_csv(fs::File::open(dir.path().join("threshold.csv")).unwrap()).unwrap();
    let t = rows[0].eps_ryd_th.unwrap();
    // Few shots, so a loose window around 1.3%.
    assert!((0.011..0.015).contains(&t), "{t}");
    let line = fs::read_to_string(dir.path().join("small_modules_line.csv")).unwrap();
    assert!(line.starts_with("eps_ryd,eps_bell\n0.0,0.02\n"));
    let m = manifest(dir.path());
    assert_eq!(m.config["budget"]["min_shots"], 4000);
    assert_eq!(m.outputs, vec!["threshold.csv", "sweep.csv", "small_modules_line.csv"]);
}

#[test]
fn decode_check_on_sampled_and_dumped_shots() {
    let dir = tempfile::tempdir().unwrap();
    let o = seamqec(dir.path(), &["decode-check", "--shots", "300", "--seed", "4", "--write-dump"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path());
    assert_eq!(m.summary["disagree"], 0);
    assert!(m.summary["checked"].as_u64().unwrap() > 250);

    let dump = dir.path().join("shots.jsonl");
    let replay = dir.path().join("replay");
    let o = seamqec(&replay, &["decode-check", "--dump", dump.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(manifest(&replay).summary["replay_mismatches"], 0);
    assert_eq!(manifest(&replay).seed, Some(4));

    // A shot whose events no longer match its seed is reported.
    let text = fs::read_to_string(&dump).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut shot: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    shot["true_logical_flip"] = serde_json::Value::Bool(!shot["true_logical_flip"].as_bool().unwrap());
    lines[1] = shot.to_string();
    fs::write(&dump, lines.join("\n")).unwrap();
    let o = seamqec(&replay, &["decode-check", "--dump", dump.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}
