use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hdx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdx"))
        .args(args)
        .env_remove("HDX_SIZE_CAP")
        .output()
        .expect("hdx runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr carries a JSON error")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Builds a Conlon complex and returns its path.
fn conlon(dir: &Path, name: &str, t: u32, size: usize, seed: u64) -> PathBuf {
    let params = write(dir, &format!("{name}.params.json"), &format!(r#"{{"t":{t},"size":{size}}}"#));
    let out = dir.join(name);
    let o = hdx(&[
        "build",
        "--construction",
        "conlon",
        "--params",
        s(&params),
        "--seed",
        &seed.to_string(),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no {name} entry"))
}

#[test]
fn conlon_build_writes_complex_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out = conlon(dir.path(), "c.json", 6, 5, 1);
    let complex: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(complex["vertices"].as_array().unwrap().len(), 64);
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c.json.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["construction"], "conlon");
    assert_eq!(meta["seed"], 1);
    assert_eq!(meta["generators"][0].as_array().unwrap().len(), 5);
}

#[test]
fn builds_are_byte_identical_per_seed() {
    let dir = TempDir::new().unwrap();
    let a = conlon(dir.path(), "a.json", 6, 5, 3);
    let b = conlon(dir.path(), "b.json", 6, 5, 3);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn reports_are_deterministic_and_fingerprint_the_file() {
    let dir = TempDir::new().unwrap();
    let c = conlon(dir.path(), "c.json", 4, 5, 0);
    let args = ["verify", s(&c), "--checks", "cts,two-centers,lift,links", "--seed", "5"];
    let first = hdx(&args);
    let second = hdx(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let report = stdout_json(&first);
    assert_eq!(report["meta_matches"], true);
    assert_eq!(report["all_pass"], true);
}

#[test]
fn hpower_scales_vertices_and_triangles() {
    let dir = TempDir::new().unwrap();
    let mp = write(dir.path(), "m.json", r#"{"chi":3,"n":2}"#);
    let base = dir.path().join("k222.json");
    assert_eq!(
        code(&hdx(&["build", "--construction", "multipartite", "--params", s(&mp), "--out", s(&base)])),
        0
    );
    let hp = write(dir.path(), "h.json", r#"{"input":"k222.json"}"#);
    let out = dir.path().join("hp.json");
    assert_eq!(
        code(&hdx(&["build", "--construction", "hpower", "--params", s(&hp), "--out", s(&out)])),
        0
    );
    let a: Value = serde_json::from_slice(&fs::read(&base).unwrap()).unwrap();
    let b: Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    let count = |v: &Value, k: &str| v[k].as_array().unwrap().len();
    assert_eq!(count(&b, "vertices"), 2 * count(&a, "vertices"));
    assert_eq!(count(&b, "triangles"), 8 * count(&a, "triangles"));
    assert_eq!(b["coloring"]["chi"], 3);
}

#[test]
fn fault_injected_complex_fails_verification() {
    let dir = TempDir::new().unwrap();
    let c = conlon(dir.path(), "c.json", 6, 5, 1);
    let mut doc: Value = serde_json::from_slice(&fs::read(&c).unwrap()).unwrap();
    doc["triangles"].as_array_mut().unwrap().remove(0);
    let bad = write(dir.path(), "bad.json", &doc.to_string());
    let meta = dir.path().join("c.json.meta.json");
    let o = hdx(&["verify", s(&bad), "--meta", s(&meta), "--checks", "lift,links"]);
    assert_eq!(code(&o), 1);
    let report = stdout_json(&o);
    assert_eq!(report["meta_matches"], false);
    assert_eq!(check(&report, "lift")["status"], "fail");
    assert!(check(&report, "lift")["witness"].is_string());
    assert_eq!(check(&report, "links")["status"], "fail");
}

#[test]
fn inv_is_skipped_without_coloring() {
    let dir = TempDir::new().unwrap();
    let c = conlon(dir.path(), "c.json", 4, 5, 0);
    let o = hdx(&["verify", s(&c), "--checks", "inv"]);
    assert_eq!(code(&o), 0);
    let inv = check(&stdout_json(&o), "inv").clone();
    assert_eq!(inv["status"], "skipped");
    assert!(inv["reason"].as_str().unwrap().contains("coloring"));

    let mp = write(dir.path(), "m.json", r#"{"chi":3,"n":2}"#);
    let base = dir.path().join("k222.json");
    hdx(&["build", "--construction", "multipartite", "--params", s(&mp), "--out", s(&base)]);
    let o = hdx(&["verify", s(&base), "--checks", "inv,cts"]);
    assert_eq!(code(&o), 0);
    let report = stdout_json(&o);
    assert_eq!(check(&report, "inv")["status"], "pass");
    assert_eq!(check(&report, "cts")["status"], "skipped");
}

#[test]
fn walk_spectrum_of_a_single_triangle() {
    let dir = TempDir::new().unwrap();
    let t = write(dir.path(), "t.json", r#"{"vertices":["a","b","c"],"triangles":[[0,1,2]]}"#);
    let edges = dir.path().join("walk.tsv");
    let o = hdx(&["spectrum", s(&t), "--graph", "walk", "--edges", s(&edges)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["vertices"], 3);
    assert!((r["lambda_signed"]["value"].as_f64().unwrap() + 0.5).abs() < 1e-9);
    assert!((r["lambda_abs"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(r["lambda_abs"]["tolerance"], 1e-9);
    let tsv = fs::read_to_string(&edges).unwrap();
    assert_eq!(tsv.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn group_graph_spectra_match_closed_forms() {
    let dir = TempDir::new().unwrap();
    // |S| = 6: L is J(6,2) with lambda 1/4.
    let c6 = conlon(dir.path(), "c6.json", 5, 6, 1);
    let o = hdx(&["spectrum", s(&c6), "--graph", "L"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["vertices"], 15);
    assert!((r["lambda_abs"]["value"].as_f64().unwrap() - 0.25).abs() < 1e-9);

    // A Sidon set has distinct pairwise sums, so G_dual is 10-regular.
    let c5 = conlon(dir.path(), "c5.json", 4, 5, 0);
    let o = hdx(&["spectrum", s(&c5), "--graph", "dual"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["vertices"], 16);
    assert_eq!(r["degree"], 10);

    let o = hdx(&["spectrum", s(&c5), "--graph", "zigzag"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["vertices"], 160);
}

#[test]
fn bound_holds_on_a_conlon_instance() {
    let dir = TempDir::new().unwrap();
    let c = conlon(dir.path(), "c.json", 5, 6, 1);
    let o = hdx(&["spectrum", s(&c), "--bound"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b = &stdout_json(&o)["bound"];
    assert_eq!(b["holds"], true);
    assert!(b["margin"]["value"].as_f64().unwrap() > 0.0);
    let walk = b["lambda_walk"]["value"].as_f64().unwrap();
    assert!(walk <= b["bound"]["value"].as_f64().unwrap());
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = TempDir::new().unwrap();

    // 2: usage and input errors.
    let o = hdx(&["verify", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&o), 2);
    let err = stderr_json(&o);
    assert_eq!(err["error"], "io");
    assert!(err["message"].as_str().unwrap().contains("missing.json"));
    let c = conlon(dir.path(), "c.json", 4, 5, 0);
    assert_eq!(code(&hdx(&["verify", s(&c), "--checks", "nonsense"])), 2);
    let bad = write(dir.path(), "bad.json", r#"{"t":4,"size":5,"extra":1}"#);
    let o = hdx(&["build", "--construction", "conlon", "--params", s(&bad), "--out", s(&dir.path().join("x"))]);
    assert_eq!(code(&o), 2);

    // 3: infeasible requests and size caps.
    let p = write(dir.path(), "p.json", r#"{"t":3,"size":6}"#);
    let o = hdx(&["build", "--construction", "conlon", "--params", s(&p), "--out", s(&dir.path().join("y"))]);
    assert_eq!(code(&o), 3);
    assert_eq!(stderr_json(&o)["error"], "infeasible");
    let o = hdx(&["spectrum", s(&c), "--size-cap", "10"]);
    assert_eq!(code(&o), 3);
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("HDX_SIZE_CAP"));

    // 1: structural failures, here a disconnected walk graph.
    let split = conlon(dir.path(), "split.json", 6, 5, 1);
    let o = hdx(&["spectrum", s(&split)]);
    assert_eq!(code(&o), 1);
    assert_eq!(stderr_json(&o)["error"], "disconnected");

    // 0: success.
    assert_eq!(code(&hdx(&["spectrum", s(&c)])), 0);
}

#[test]
fn hdz_plus_builds_through_the_cli() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "hz.json",
        r#"{"base":{"chi":3,"n":2},"groups":[{"kind":"cyclic","params":{"m":11}},{"kind":"cyclic","params":{"m":13}},{"kind":"cyclic","params":{"m":17}}]}"#,
    );
    let out = dir.path().join("hz.out.json");
    let o = hdx(&["build", "--construction", "hdz-plus", "--params", s(&p), "--seed", "7", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = hdx(&["verify", s(&out)]);
    assert_eq!(code(&o), 0);
    let report = stdout_json(&o);
    assert_eq!(check(&report, "cts")["status"], "pass");
    assert_eq!(check(&report, "two-centers")["status"], "pass");
}

#[test]
fn conlon_build_verifies_cts_lift_and_transitivity() {
    let dir = TempDir::new().unwrap();
    let c = conlon(dir.path(), "c.json", 6, 5, 1);
    let o = hdx(&["verify", s(&c), "--checks", "cts,lift,transitivity"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = stdout_json(&o);
    for name in ["cts", "lift", "transitivity"] {
        assert_eq!(check(&report, name)["status"], "pass", "{name}");
    }
    assert_eq!(check(&report, "lift")["lemma"], "lemma:lift");
}

#[test]
fn build_output_is_canonical() {
    let dir = TempDir::new().unwrap();
    let c = conlon(dir.path(), "c.json", 6, 5, 1);
    let text = fs::read_to_string(&c).unwrap();
    let back = hdx_core::TwoComplex::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
}

#[test]
fn hdz_plus_rejects_mismatched_parameters() {
    let dir = TempDir::new().unwrap();
    // Two groups for a three-colored base.
    let p = write(
        dir.path(),
        "two.json",
        r#"{"base":{"chi":3,"n":2},"groups":[{"kind":"cyclic","params":{"m":11}},{"kind":"cyclic","params":{"m":13}}]}"#,
    );
    let out = dir.path().join("x.json");
    let o = hdx(&["build", "--construction", "hdz-plus", "--params", s(&p), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["error"], "parameter");
    // A generator list of odd length cannot be symmetric.
    let p = write(
        dir.path(),
        "odd.json",
        r#"{"base":{"chi":3,"n":2},"groups":[{"kind":"cyclic","params":{"m":11}},{"kind":"cyclic","params":{"m":13}},{"kind":"cyclic","params":{"m":17}}],"generators":[[1,2,3],[1,12,2,11],[1,16,2,15]]}"#,
    );
    let o = hdx(&["build", "--construction", "hdz-plus", "--params", s(&p), "--out", s(&out)]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}
