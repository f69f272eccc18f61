use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn qdrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdrt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// File name → contents, manifests excluded (they carry a timestamp and
/// the output directory).
fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.file_name().unwrap().to_str().unwrap().starts_with("manifest-"))
        .map(|p| (p.file_name().unwrap().to_str().unwrap().to_string(), fs::read(&p).unwrap()))
        .collect()
}

fn schema_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn validate(def: &str, doc: &Value) {
    let root: Value = serde_json::from_str(&fs::read_to_string(schema_root().join("qdrt.schema.json")).unwrap()).unwrap();
    let schema = json!({ "$defs": root["$defs"], "$ref": format!("#/$defs/{def}") });
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{def}: {errors:#?}");
}

fn validate_csv(path: &Path) {
    let spec: Value = serde_json::from_str(&fs::read_to_string(schema_root().join("csv-columns.json")).unwrap()).unwrap();
    let name = path.file_name().unwrap().to_str().unwrap();
    let kind = if name.starts_with("rcs_") {
        "rcs_<obj>.csv"
    } else if name.ends_with("_path_loss.csv") {
        "<stem>_path_loss.csv"
    } else if name.ends_with("_excess_delay.csv") {
        "<stem>_excess_delay.csv"
    } else if name.ends_with("_summary.csv") {
        "<obj>_<mode>_summary.csv"
    } else {
        panic!("undocumented CSV {name}")
    };
    let entry = spec["files"].as_array().unwrap().iter().find(|f| f["pattern"] == kind).unwrap();
    let cols: Vec<(&str, &str)> = entry["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c[0].as_str().unwrap(), c[1].as_str().unwrap()))
        .collect();
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, cols.iter().map(|c| c.0).collect::<Vec<_>>(), "{name}");
    for rec in r.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), cols.len());
        for (cell, (col, ty)) in rec.iter().zip(&cols) {
            let ok = match *ty {
                "integer" => cell.parse::<u64>().is_ok(),
                "number" => cell.parse::<f64>().is_ok_and(f64::is_finite),
                "optional_number" => cell.is_empty() || cell.parse::<f64>().is_ok_and(f64::is_finite),
                other => panic!("unknown column type {other}"),
            };
            assert!(ok, "{name}: column {col} has bad cell {cell:?}");
        }
    }
}

fn validate_dir(dir: &Path) {
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_str().unwrap().to_string();
        if name.ends_with(".csv") {
            validate_csv(&p);
            continue;
        }
        let doc: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        let def = if name.starts_with("manifest-") {
            "manifest"
        } else if name.starts_with("rcs_") {
            "rcs_fit"
        } else if name.starts_with("compare_") {
            "compare"
        } else if name.ends_with("_quasi_law.json") {
            "quasi_law"
        } else if name.ends_with("_fit.json") {
            "run_fit"
        } else {
            panic!("undocumented JSON {name}")
        };
        validate(def, &doc);
    }
}

#[test]
fn default_scene_round_trips_through_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qdrt(&["default-scene"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let scene: toml::Value = toml::from_str(&text).unwrap();
    assert_eq!(scene["frequency_hz"].as_float(), Some(60e9));
    validate("scene", &serde_json::to_value(&scene).unwrap());

    let cfg = tmp.path().join("scene.toml");
    fs::write(&cfg, &text).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let base = ["rcs-dataset", "--object", "car", "--count", "300", "--seed", "4"];
    assert_eq!(code(&qdrt(&[&base[..], &["--out-dir", s(&a)]].concat())), 0);
    assert_eq!(code(&qdrt(&[&base[..], &["--out-dir", s(&b), "--config", s(&cfg)]].concat())), 0);
    assert_eq!(artifacts(&a), artifacts(&b));
}

#[test]
fn rcs_dataset_reports_reference_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let base = ["rcs-dataset", "--object", "pedestrian", "--count", "400"];
    let out = qdrt(&[&base[..], &["--out-dir", s(&a)]].concat());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("reference 6.17 / 3.9"));
    assert_eq!(code(&qdrt(&[&base[..], &["--out-dir", s(&b)]].concat())), 0);
    assert_eq!(
        fs::read(a.join("rcs_pedestrian.csv")).unwrap(),
        fs::read(b.join("rcs_pedestrian.csv")).unwrap()
    );
    let doc: Value = serde_json::from_str(&fs::read_to_string(a.join("rcs_pedestrian_fit.json")).unwrap()).unwrap();
    assert_eq!(doc["reference"], json!({ "mu": 6.17, "s": 3.9 }));
    assert_eq!(doc["fit"]["family"], "logistic");
    validate_dir(&a);
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = s(tmp.path());
    assert_eq!(code(&qdrt(&["rcs-dataset", "--object", "pedestrian", "--count", "0", "--out-dir", o])), 2);
    assert_eq!(code(&qdrt(&["rcs-dataset", "--count", "10", "--out-dir", o])), 2);
    assert_eq!(code(&qdrt(&["run", "--object", "car", "--n-max", "11", "--out-dir", o])), 2);
    assert_eq!(code(&qdrt(&["compare", "--object", "car", "--alpha", "1.5", "--out-dir", o])), 2);
    assert_eq!(code(&qdrt(&["--threads", "0", "default-scene"])), 2);
}

#[test]
fn missing_config_is_a_runtime_error() {
    let out = qdrt(&["rcs-dataset", "--object", "car", "--config", "/nonexistent/scene.toml"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/scene.toml"));
}

#[test]
fn single_replication_refuses_fits() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qdrt(&[
        "run", "--object", "pedestrian", "--n-min", "1", "--n-max", "2", "--replications", "1", "--out-dir",
        s(tmp.path()),
    ]);
    assert_eq!(code(&out), 0);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fit refused"), "{err}");
    for n in 1..=2 {
        assert!(tmp.path().join(format!("pedestrian_deterministic_n{n:02}_path_loss.csv")).exists());
    }
    validate_dir(tmp.path());
}

#[test]
fn quasi_run_writes_per_n_files_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qdrt(&[
        "run", "--object", "car", "--mode", "quasi", "--n-min", "1", "--n-max", "3", "--replications", "60",
        "--law-samples", "300", "--permutations", "99", "--out-dir", s(tmp.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(tmp.path().join("car_quasi_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    validate_dir(tmp.path());
}

#[test]
fn mis_specified_law_fails_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qdrt(&[
        "compare", "--object", "pedestrian", "--replications", "200", "--permutations", "199", "--law-samples",
        "300", "--mu-shift", "20", "--placements", "independent", "--out-dir", s(tmp.path()),
    ]);
    assert_eq!(code(&out), 1);
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("compare_pedestrian_n05.json")).unwrap()).unwrap();
    assert_eq!(doc["passed"], false);
    assert_eq!(doc["path_loss"]["decision"], "reject");
    assert_eq!(doc["quasi_law"]["mu_shift"], 20.0);
    validate_dir(tmp.path());
}

#[test]
fn replay_is_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let out = qdrt(&[
        "--threads", "1", "compare", "--object", "car", "--replications", "80", "--permutations", "99",
        "--law-samples", "200", "--seed", "9", "--out-dir", s(&first),
    ]);
    assert!(code(&out) <= 1);
    let manifest = first.join("manifest-compare.json");
    for threads in ["2", "5"] {
        let again = tmp.path().join(format!("t{threads}"));
        let r = qdrt(&["--threads", threads, "replay", s(&manifest), "--out-dir", s(&again)]);
        assert_eq!(code(&r), code(&out));
        assert_eq!(artifacts(&first), artifacts(&again), "threads = {threads}");
    }
    validate_dir(&first);
}

#[test]
fn replay_rejects_a_corrupt_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("manifest-run.json");
    fs::write(&bad, "{\"schema_version\": 99}").unwrap();
    assert_eq!(code(&qdrt(&["replay", s(&bad)])), 3);
}

#[test]
fn schemas_reject_malformed_documents() {
    let root: Value = serde_json::from_str(&fs::read_to_string(schema_root().join("qdrt.schema.json")).unwrap()).unwrap();
    let check = |def: &str, doc: Value| {
        let schema = json!({ "$defs": root["$defs"], "$ref": format!("#/$defs/{def}") });
        jsonschema::validator_for(&schema).unwrap().is_valid(&doc)
    };
    let gof = json!({ "T": 0.1, "p_value": 0.5, "p_value_asymptotic": 0.5, "n_permutations": 9, "alpha": 0.01, "decision": "pass" });
    assert!(check("gof", gof.clone()));
    let mut bad = gof.clone();
    bad["decision"] = json!("maybe");
    assert!(!check("gof", bad));
    let mut bad = gof;
    bad["p_value"] = json!(0.0);
    assert!(!check("gof", bad));
    let fit = json!({ "family": "weibull", "params": { "mu": 1.0, "s": 2.0 }, "loglik": -1.0, "n": 10 });
    assert!(!check("fit", fit));
}
