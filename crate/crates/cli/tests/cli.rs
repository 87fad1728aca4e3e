use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clusterlab"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_CENSUS: &str = r#"
kind = "census"
seed = 21

[model]
p = 0.4

[geometry]
side = [96]
margin = 4

[sampling]
replicates = 6
"#;

#[test]
fn shipped_configs_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = run(&["validate", "--config", path.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

#[test]
fn verify_r1_pair_succeeds() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = configs_dir().join("verify_r1.toml");
    let o = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = read_json(&out.join("verify.json"));
    assert_eq!(v["pass"], true);
    assert!(v["max_rel_error"].as_f64().unwrap() < 1e-10);
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["kind"], "verify");
    assert!(m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f == "verify.csv"));
}

#[test]
fn failed_check_keeps_outputs_and_exits_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "strict.toml",
        "kind = \"verify\"\n[patterns]\nbuiltin = \"r1_pair\"\n[verify]\nn = [10]\np = [0.3]\ntolerance = 0.0\n",
    );
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let v = read_json(&out.join("verify.json"));
    if v["max_rel_error"].as_f64().unwrap() > 0.0 {
        assert_eq!(o.status.code(), Some(2));
        assert_eq!(v["pass"], false);
    } else {
        assert_eq!(o.status.code(), Some(0));
    }
}

#[test]
fn missing_pattern_file_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "kind = \"verify\"\n[patterns]\np = \"nope.pat\"\np_prime = \"also_nope.pat\"\n[verify]\nn = [9]\np = [0.3]\n",
    );
    for cmd in ["validate", "run"] {
        let o = run(&[cmd, "--config", &cfg]);
        assert_eq!(o.status.code(), Some(1));
        let e = stderr(&o);
        assert!(e.contains("patterns.p:"), "{e}");
        assert!(e.contains("patterns.p_prime:"), "{e}");
    }
}

#[test]
fn negative_seed_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &SMALL_CENSUS.replace("seed = 21", "seed = -1"),
    );
    let o = run(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("1 problem(s)") && e.contains("seed:"), "{e}");

    let good = write_config(tmp.path(), "g.toml", SMALL_CENSUS);
    let out = tmp.path().join("out");
    let o = run(&[
        "run",
        "--config",
        &good,
        "--seed",
        "-3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--seed"));
    assert!(!out.exists());
}

#[test]
fn pattern_and_model_q_must_agree() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("potts.model"),
        "model=potts\nq=3\nd=2\nbeta=0.3\n",
    )
    .unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "kind = \"patterns\"\n[model]\nfile = \"potts.model\"\n[geometry]\nside = [32]\n\
         [sampling]\nreplicates = 1\n[patterns]\nbuiltin = \"r1_pair\"\n[bins]\nlo = 5\nhi = 50\ncount = 2\n",
    );
    let o = run(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("1 problem(s)"), "{e}");
    assert!(
        e.contains("pattern q = 2 does not match model q = 3"),
        "{e}"
    );
}

#[test]
fn every_problem_is_reported() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "kind = \"census\"\nseed = -2\n[model]\np = 1.5\n[geometry]\nd = 4\nside = [0]\n[sampling]\nreplicates = 0\n",
    );
    let o = run(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    for field in [
        "seed:",
        "model.p:",
        "geometry.d:",
        "geometry.side:",
        "sampling.replicates:",
    ] {
        assert!(e.contains(field), "missing {field} in {e}");
    }
}

#[test]
fn unknown_key_reports_its_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "kind = \"exact\"\n\n[exact]\nn_max = 5\np = [0.3]\nbudgte = 4\n",
    );
    let o = run(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("line 6") && e.contains("budgte"), "{e}");
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(run(&["run"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

fn outputs_except_manifest(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_CENSUS);
    let mut runs = Vec::new();
    for (k, workers) in ["1", "1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("out{k}"));
        let o = run(&[
            "run",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        runs.push(outputs_except_manifest(&out));
    }
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);

    let other = tmp.path().join("other");
    run(&[
        "run",
        "--config",
        &cfg,
        "--out",
        other.to_str().unwrap(),
        "--seed",
        "22",
    ]);
    assert_ne!(runs[0], outputs_except_manifest(&other));
}

#[test]
fn runtime_failure_leaves_no_partial_output() {
    let tmp = TempDir::new().unwrap();
    // The first point succeeds and stages files; the second has no clusters.
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "kind = \"gumbel\"\n[gumbel]\np = [0.35, 0.0]\nn = [8]\nreplicates = 10\n",
    );
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let leftovers: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with(".clusterlab")
        })
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn manifest_records_seeds_and_inputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "g.toml",
        "kind = \"gumbel\"\nseed = 9\n[gumbel]\np = [0.35]\nn = [8, 12]\nreplicates = 40\nn_max = 60\n",
    );
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["master_seed"], 9);
    assert_eq!(m["seeds"].as_array().unwrap().len(), 2);
    assert_eq!(m["inputs"][0]["path"], cfg.as_str());
    for f in m["outputs"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).is_file());
    }
}
