use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn sloshlab(out: &Path, args: &[&str]) -> (i32, PathBuf) {
    let o = Command::new(env!("CARGO_BIN_EXE_sloshlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SLOSHLAB_THREADS", "2")
        .output()
        .unwrap();
    let dir = String::from_utf8(o.stdout).unwrap().trim().to_string();
    (o.status.code().unwrap(), PathBuf::from(dir))
}

fn lambdas(csv: &str) -> Vec<f64> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn solve_rectangle_sloshing() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, dir) = sloshlab(tmp.path(), &["solve", "--domain", "rect:pi,1,64,64", "--kind", "sn", "-k", "6"]);
    assert_eq!(code, 0);
    let l = lambdas(&fs::read_to_string(dir.join("spectrum.csv")).unwrap());
    assert_eq!(l.len(), 6);
    assert!((l[1] - 1f64.tanh()).abs() / 1f64.tanh() < 1e-3);
}

#[test]
fn solve_disk_steklov() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, dir) = sloshlab(tmp.path(), &["solve", "--domain", "disk:32,128", "--kind", "steklov", "-k", "7"]);
    assert_eq!(code, 0);
    let l = lambdas(&fs::read_to_string(dir.join("spectrum.csv")).unwrap());
    for (v, e) in l.iter().zip([0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]) {
        assert!((v - e).abs() < 1e-2 * e.max(1.0));
    }
}

#[test]
fn simplify_is_deterministic_and_simple() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simplify", "--domain", "disk:16,64", "--kind", "steklov", "-k", "7", "--eps", "0.05", "--side", "S", "--seed", "7"];
    let (c1, d1) = sloshlab(tmp.path(), &args);
    let (c2, d2) = sloshlab(tmp.path(), &args);
    assert_eq!((c1, c2), (0, 0));
    assert_ne!(d1, d2);
    let j1 = fs::read_to_string(d1.join("trace.json")).unwrap();
    assert_eq!(j1, fs::read_to_string(d2.join("trace.json")).unwrap());
    let v: serde_json::Value = serde_json::from_str(&j1).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["result"]["outcome"]["status"], "simple");
    assert!(v["result"]["final_gaps"].as_array().unwrap().iter().all(|g| g.as_f64().unwrap() >= 1e-4));
    for name in ["spectrum_before.csv", "spectrum_after.csv"] {
        let text = fs::read_to_string(d1.join(name)).unwrap();
        assert!(text.starts_with(&format!("# config_hash={}", v["config_hash"].as_str().unwrap())));
    }
}

#[test]
fn split_and_derivative_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, dir) = sloshlab(tmp.path(), &["split", "--domain", "disk:12,48", "--kind", "steklov", "-k", "4", "--seed", "7"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("split.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["verdict"], "split-confirmed");
    assert!(fs::read_to_string(dir.join("branch_fan.svg")).unwrap().contains("config_hash"));

    let (code, dir) = sloshlab(
        tmp.path(),
        &["derivative", "--domain", "disk:12,48", "--kind", "steklov", "-k", "4", "--field", "dilation", "--index", "2"],
    );
    assert_eq!(code, 0);
    let slopes = fs::read_to_string(dir.join("slopes.csv")).unwrap();
    assert_eq!(slopes.lines().count(), 4);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(sloshlab(tmp.path(), &["solve", "--domain", "rect:pi,1,8"]).0, 2);
    assert_eq!(sloshlab(tmp.path(), &["solve", "--domain", "disk:4,16", "--kind", "sd"]).0, 2);
    // a simple spectrum has no cluster to split
    assert_eq!(sloshlab(tmp.path(), &["split", "--domain", "rect:pi,1,16,8", "--kind", "sd", "-k", "3"]).0, 2);
    // interior fields cannot split: the no-candidate path
    let (code, dir) = sloshlab(
        tmp.path(),
        &["split", "--domain", "disk:8,32", "--kind", "steklov", "-k", "4", "--field", "interior:0.1,0,0.3,0.01,1,0"],
    );
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("split.json")).unwrap()).unwrap();
    assert_ne!(v["result"]["verdict"], "split-confirmed");
    let (code, _) = sloshlab(tmp.path(), &["simplify", "--domain", "disk:8,32", "--kind", "steklov", "-k", "3", "--eps", "1e-9"]);
    assert_eq!(code, 3);
}

#[test]
fn validate_half_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, dir) = sloshlab(tmp.path(), &["validate", "--domain", "halfdisk:8,32", "--kind", "sn", "-k", "3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("validate.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["passed"], true);
}
