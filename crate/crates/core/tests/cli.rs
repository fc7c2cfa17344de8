//! End-to-end runs of the `mptk` binary on small configurations.

use std::path::{Path, PathBuf};
use std::process::Command;

fn workdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("mptk-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn mptk(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mptk")).current_dir(dir).args(args).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn oracle_sphere_writes_records_with_provenance() {
    let d = workdir("oracle");
    std::fs::write(d.join("c.json"), r#"{"materials":[{"sigma":5.66e7,"mu_r":1.0}],"alpha":0.01,"frequencies_hz":[21.25,1e3]}"#).unwrap();
    let out = mptk(&d, &["oracle-sphere", "--config", "c.json", "--out", "o", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&d.join("o/oracle.json"));
    assert_eq!(v["provenance"]["seed"], 5);
    assert_eq!(v["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs[0]["M_re"][0][0].as_f64().unwrap() < 0.0);
    assert!(recs[0]["M_im"][0][0].as_f64().unwrap() > 0.0);
}

#[test]
fn invalid_config_exits_2_without_outputs() {
    let d = workdir("invalid");
    std::fs::write(d.join("unknown.json"), r#"{"alpha":0.01,"colour":"red"}"#).unwrap();
    std::fs::write(d.join("missing.json"), r#"{"alpha":0.01,"frequencies_hz":[1.0]}"#).unwrap();
    std::fs::write(d.join("negative.json"), r#"{"materials":[{"sigma":-1.0,"mu_r":1.0}],"alpha":0.01,"frequencies_hz":[1.0]}"#).unwrap();
    for (cmd, cfg) in [("oracle-sphere", "unknown.json"), ("mpt", "missing.json"), ("oracle-sphere", "negative.json")] {
        let out = mptk(&d, &[cmd, "--config", cfg, "--out", "o"]);
        assert_eq!(out.status.code(), Some(2), "{cfg}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!d.join("o").exists());
    }
    let out = mptk(&d, &["mpt", "--config", "does-not-exist.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn forward_and_locate_on_analytic_spheres() {
    let d = workdir("locate");
    let cfg = r#"{
      "objects": [
        {"z": [0.1, 0.1, -0.5], "alpha": 0.01, "mpt": {"kind": "sphere", "sigma": 5.96e7, "mu_r": 1.0}},
        {"z": [-0.3, 0.3, -0.5], "alpha": 0.01, "mpt": {"kind": "sphere", "sigma": 3.5e7, "mu_r": 1.0}}
      ],
      "frequencies_hz": [1e4],
      "background": {"kind": "uniform", "h": [0.0, 0.0, 1.0]},
      "probes": [[0.0, 0.0, 0.2], [0.5, 0.5, 0.2]],
      "coils": {"kind": "planar_grid", "n": 16, "half_width": 1.0, "height": 0.0, "moment": [0.0, 0.0, 1.0]},
      "grid": {"x_range": [-1.0, 1.0], "y_range": [-1.0, 1.0], "z": -0.5, "spacing": 0.05},
      "output_dir": "out"
    }"#;
    std::fs::write(d.join("c.json"), cfg).unwrap();
    let out = mptk(&d, &["forward", "--config", "c.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let field = std::fs::read_to_string(d.join("out/field.csv")).unwrap();
    assert!(field.starts_with("# mptk"));
    assert_eq!(field.lines().count(), 4);

    let out = mptk(&d, &["locate", "--config", "c.json", "--threads", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&d.join("out/locate.json"));
    assert_eq!(v["n_hat"], 2);
    let peaks = v["peaks"].as_array().unwrap();
    assert_eq!(peaks.len(), 2);
    let found: Vec<[f64; 2]> = peaks.iter().map(|p| [p["z"][0].as_f64().unwrap(), p["z"][1].as_f64().unwrap()]).collect();
    for truth in [[0.1, 0.1], [-0.3, 0.3]] {
        assert!(found.iter().any(|f| (f[0] - truth[0]).abs() < 1e-9 && (f[1] - truth[1]).abs() < 1e-9), "{found:?}");
    }
    assert_eq!(std::fs::read_to_string(d.join("out/music.csv")).unwrap().lines().count(), 2 + 41 * 41);
}

#[test]
fn too_many_objects_for_the_data_is_rejected() {
    let d = workdir("rank");
    let cfg = r#"{
      "objects": [{"z": [0.1, 0.1, -0.5], "alpha": 0.01, "mpt": {"kind": "sphere", "sigma": 5.96e7, "mu_r": 1.0}}],
      "frequencies_hz": [1e4],
      "coils": {"kind": "planar_grid", "n": 8, "half_width": 1.0, "height": 0.0, "moment": [0.0, 0.0, 1.0]},
      "grid": {"x_range": [-1.0, 1.0], "y_range": [-1.0, 1.0], "z": -0.5, "spacing": 0.1},
      "n_objects": 3
    }"#;
    std::fs::write(d.join("c.json"), cfg).unwrap();
    let out = mptk(&d, &["locate", "--config", "c.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.join("o").exists());
}

#[test]
fn mpt_then_classify_round_trip() {
    let d = workdir("classify");
    let cube = r#"{"kind":"boxes","boxes":[{"min":[-0.5,-0.5,-0.5],"max":[0.5,0.5,0.5],"tag":1}],"h":0.5,"growth":2.0}"#;
    let freqs = "[1e2, 1e3, 1e4, 1e5, 1e6]";
    let build = format!(
        r#"{{"candidates":[
            {{"name":"copper","mesh":{cube},"materials":[{{"sigma":5.96e7,"mu_r":1.0}}],"alpha":0.01}},
            {{"name":"steel","mesh":{cube},"materials":[{{"sigma":1.5e6,"mu_r":50.0}}],"alpha":0.01}}
          ],"frequencies_hz":{freqs},"truncation_factor":10}}"#
    );
    std::fs::write(d.join("build.json"), build).unwrap();
    let out = mptk(&d, &["classify", "build", "--config", "build.json", "--out", "."]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let target = format!(
        r#"{{"mesh":{cube},"materials":[{{"sigma":1.5e6,"mu_r":50.0}}],"alpha":0.01,"frequencies_hz":{freqs},"truncation_factor":10,"output_dir":"t"}}"#
    );
    std::fs::write(d.join("target.json"), target).unwrap();
    let out = mptk(&d, &["mpt", "--config", "target.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(d.join("t/spectra.csv")).unwrap().lines().count(), 7);

    std::fs::write(d.join("m.json"), r#"{"dictionary":"dictionary.json","target":{"records":"t/mpt.json"}}"#).unwrap();
    let out = mptk(&d, &["classify", "match", "--config", "m.json", "--out", "."]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&d.join("match.json"));
    assert_eq!(v["ranking"][0]["name"], "steel");
    assert!(v["ranking"][0]["distance"].as_f64().unwrap() < 1e-9);
}
