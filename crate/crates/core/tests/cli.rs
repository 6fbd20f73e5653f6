use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use cryoqc::cli;
use cryoqc::config::GlobalConfig;

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.json")
}

fn run(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cryoqc").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, out, String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_slice(&out).unwrap()
}

fn error_json(err: &str) -> Value {
    serde_json::from_str(err.lines().last().unwrap()).unwrap()
}

fn subcommands(image: &str) -> Vec<Vec<String>> {
    let cases: Vec<Vec<&str>> = vec![
        vec!["assemble", "script1_pulse_x"],
        vec!["disassemble", image],
        vec!["budget"],
        vec!["phases"],
        vec!["pulse", "--sel1", "2", "--sel2", "9", "--combine", "or"],
        vec!["vdac-ramp", "--target-v", "0.2"],
        vec!["noise-injector"],
        vec!["noise-injector", "--spectrum"],
        vec!["noise-detector"],
        vec!["noise-detector", "--spectrum"],
        vec!["thermal"],
        vec!["thermal-scale", "--multipliers", "1,2,10"],
        vec!["experiment", "--trials", "300"],
        vec!["bias-scan", "--trials", "10"],
        vec!["acf", "--trials", "300", "--max-lag", "5"],
        vec!["config"],
        vec!["reproduce", "4f"],
        vec!["reproduce", "5g"],
        vec!["reproduce", "6d"],
        vec!["reproduce", "7d"],
        vec!["reproduce", "8c"],
        vec!["reproduce", "8d"],
        vec!["reproduce", "9"],
    ];
    cases
        .into_iter()
        .map(|c| c.into_iter().map(String::from).collect())
        .collect()
}

fn write_image(dir: &Path) -> String {
    let image = dir.join("s1.bin");
    let (code, _, err) = run(&["assemble", "script1_pulse_x", "--image", image.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    image.to_str().unwrap().to_string()
}

#[test]
fn every_subcommand_renders_both_formats_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let image = write_image(dir.path());
    for (i, case) in subcommands(&image).into_iter().enumerate() {
        for fmt in ["json", "csv"] {
            let mut read = Vec::new();
            for rep in 0..2 {
                let path = dir.path().join(format!("{i}_{fmt}_{rep}"));
                let mut args: Vec<&str> = case.iter().map(String::as_str).collect();
                args.extend(["--format", fmt, "--out", path.to_str().unwrap()]);
                let (code, out, err) = run(&args);
                assert_eq!(code, 0, "{args:?}: {err}");
                assert!(out.is_empty(), "{args:?} wrote to stdout despite --out");
                read.push(std::fs::read(&path).unwrap());
            }
            assert!(!read[0].is_empty(), "{case:?} {fmt}");
            assert_eq!(read[0], read[1], "{case:?} {fmt} not reproducible");
            if fmt == "json" {
                serde_json::from_slice::<Value>(&read[0]).unwrap();
            } else {
                let mut rdr = csv::Reader::from_reader(read[0].as_slice());
                assert!(!rdr.headers().unwrap().is_empty());
                for rec in rdr.records() {
                    rec.unwrap();
                }
            }
        }
    }
}

#[test]
fn memory_budgets() {
    let v = run_json(&["reproduce", "6d"]);
    let bits: Vec<u64> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["utilization_bits"].as_u64().unwrap())
        .collect();
    assert_eq!(bits, [1088, 1088, 896, 1024]);
    assert_eq!(run_json(&["budget"]), v);
}

#[test]
fn image_disassembles_to_the_source_script() {
    let dir = tempfile::tempdir().unwrap();
    let image = write_image(dir.path());
    assert_eq!(std::fs::metadata(&image).unwrap().len(), 4096);
    let (code, out, err) = run(&["disassemble", &image]);
    assert_eq!(code, 0, "{err}");
    let listing = String::from_utf8(out).unwrap();
    let script = dir.path().join("round.txt");
    let text = serde_json::from_str::<Value>(&listing)
        .ok()
        .and_then(|v| v["script"].as_str().map(String::from))
        .unwrap_or(listing);
    std::fs::write(&script, text).unwrap();
    let again = dir.path().join("again.bin");
    let (code, _, err) = run(&["assemble", script.to_str().unwrap(), "--image", again.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read(&image).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn bundled_config_reproduces_headline_numbers() {
    let cfg = default_config();
    let cfg = cfg.to_str().unwrap();
    let inj = run_json(&["noise-injector", "--config", cfg]);
    let v = inj["total_rms_v"].as_f64().unwrap();
    assert!((v - 27.35e-6).abs() < 0.1e-6, "{v}");
    let th = run_json(&["thermal", "--config", cfg]);
    let w = th["total_w"].as_f64().unwrap();
    assert!((w - 20.95e-3).abs() < 0.05e-3, "{w}");
}

#[test]
fn bundled_config_equals_defaults() {
    let on_disk = GlobalConfig::load(&default_config()).unwrap();
    assert_eq!(on_disk, GlobalConfig::default());
    assert_eq!(run_json(&["config"]), serde_json::from_str::<Value>(&GlobalConfig::default().to_json()).unwrap());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"schema_version":"1","thermal":{"bogus":1}}"#).unwrap();
    let schema = dir.path().join("schema.json");
    std::fs::write(&schema, r#"{"schema_version":"7"}"#).unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    let missing = dir.path().join("missing.json");
    for p in [&unknown, &schema, &broken, &missing] {
        let (code, out, err) = run(&["thermal", "--config", p.to_str().unwrap()]);
        assert_eq!(code, 1, "{}", p.display());
        assert!(out.is_empty());
        let e = error_json(&err);
        assert_eq!(e["error"], "config");
        assert_eq!(e["exit_code"], 1);
    }
}

#[test]
fn validation_errors_exit_two() {
    for args in [
        vec!["pulse", "--sel1", "99"],
        vec!["pulse", "--leaf", "8"],
        vec!["vdac-ramp", "--target-v", "0.6"],
        vec!["experiment", "--step-v", "-1", "--trials", "0"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 2, "{args:?}");
        assert_eq!(error_json(&err)["exit_code"], 2);
    }
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert_eq!(error_json(&err)["error"], "usage");
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cryoqc");
    let ok = Command::new(bin).args(["budget", "--format", "csv"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("script,vectors,utilization_bits"));
    let bad = Command::new(bin).args(["pulse", "--sel1", "99"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let e = error_json(std::str::from_utf8(&bad.stderr).unwrap());
    assert_eq!(e["error"], "validation");
    let cfg = Command::new(bin).args(["thermal", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(cfg.status.code(), Some(1));
}

#[test]
fn help_lists_every_subcommand() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    for sub in [
        "assemble", "disassemble", "budget", "phases", "pulse", "vdac-ramp", "noise-injector",
        "noise-detector", "thermal", "thermal-scale", "experiment", "bias-scan", "acf", "config",
        "reproduce",
    ] {
        assert!(text.contains(sub), "{sub}");
    }
    for flag in ["--config", "--format", "--out"] {
        assert!(text.contains(flag), "{flag}");
    }
}

#[test]
fn acf_reads_an_experiment_series() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.csv");
    let (code, _, err) = run(&["experiment", "--trials", "2000", "--format", "csv", "--out", series.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let from_file = run_json(&["acf", "--input", series.to_str().unwrap(), "--max-lag", "4"]);
    let fresh = run_json(&["acf", "--trials", "2000", "--max-lag", "4"]);
    assert_eq!(from_file, fresh);
}
