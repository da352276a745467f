use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_padic-confluence");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).env_remove("PADIC_CONFLUENCE_OUT").args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const EXP_SYSTEM: &str = r#"{ "p": 3, "region": { "kind": "disc", "radius": "0" }, "G": [[ ["1"] ]] }"#;

#[test]
fn deform_exp_then_both_confluence_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "exp.json", EXP_SYSTEM);
    let o = run(d, &["deform", "--system", "exp.json", "--q", "1+3^2", "--h", "0", "--order", "12", "--prec", "30", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let art: Value = serde_json::from_str(&std::fs::read_to_string(d.join("out/deform.json")).unwrap()).unwrap();
    assert_eq!(art["certificate"]["verdict"], "compatible");
    // exp(9T): v(9^k/k!) = 2k − v(k!)
    let coeffs = art["A"]["entries"][0][0]["coeffs"].as_array().unwrap();
    let vals: Vec<i64> = coeffs.iter().map(|c| c["v"].as_i64().unwrap()).collect();
    assert_eq!(&vals[..7], &[0, 2, 4, 5, 7, 9, 10]);

    let o = run(d, &["confluence", "--module", "out/deform.json", "--method", "limit", "--order", "4", "--prec", "30", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = json_out(&o);
    assert!(g["precision"].as_i64().unwrap() >= 6);
    assert_eq!(g["G"]["entries"][0][0]["coeffs"][0]["m"], "1");

    let o = run(d, &["confluence", "--module", "out/deform.json", "--method", "derivative", "--order", "6", "--prec", "30", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = json_out(&o);
    let coeffs = g["G"]["entries"][0][0]["coeffs"].as_array().unwrap();
    assert_eq!(coeffs[0]["m"], "1");
    assert!(coeffs[1..].iter().all(|c| c["v"] == "inf"));
}

#[test]
fn gamma_newton_vertices() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["gamma", "newton", "--p", "3", "--order", "200", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    let verts: Vec<(i64, String)> = v["newton_polygon"]["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| (x[0].as_i64().unwrap(), x[1].as_str().unwrap().to_string()))
        .collect();
    for want in [(2, "-1"), (6, "-2"), (18, "-3")] {
        assert!(verts.contains(&(want.0, want.1.to_string())), "{verts:?}");
    }
}

#[test]
fn text_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["gamma", "lvalues", "--p", "3", "--mmax", "3"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["1", "3", "-1", "-1", "true"]), "{s}");
    let o = run(tmp.path(), &["qcalc", "--p", "3", "--q", "1+3", "--n", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("[3]_q = 21\n"), "{}", stdout(&o));
    let o = run(tmp.path(), &["profile", "--p", "3", "--q", "4", "--h", "3", "--center", "2", "--from", "4", "--to", "-2", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_out(&o)["breakpoints"], serde_json::json!(["1"]));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "exp.json", EXP_SYSTEM);
    assert_eq!(code(&run(d, &["frobnicate"])), 2);
    assert_eq!(code(&run(d, &["deform", "--system", "exp.json", "--q", "1+3^"])), 2);
    assert_eq!(code(&run(d, &["deform", "--system", "missing.json", "--q", "10"])), 2);
    assert_eq!(code(&run(d, &["gamma", "taylor", "--p", "4"])), 2);
    assert_eq!(code(&run(d, &["gamma", "taylor", "--p", "3", "--order", "0"])), 2);
    // q = 2 has |q − 1| = 1
    assert_eq!(code(&run(d, &["deform", "--system", "exp.json", "--q", "2"])), 2);
    // a target the L-value table cannot certify
    let o = run(d, &["gamma", "sums", "--p", "5", "--target", "200"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconclusive"));
    assert_eq!(code(&run(d, &["gamma", "sums", "--p", "5", "--ell", "3"])), 0);
}

#[test]
fn malformed_json_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "bad.json", r#"{ "p": 3, "G": [[ ["1", "1/"] ]] }"#);
    let o = run(d, &["deform", "--system", "bad.json", "--q", "10"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("$.G[0][0][1]"));
}

#[test]
fn check_table_and_failure_code() {
    let tmp = tempfile::tempdir().unwrap();
    // too little precision for the p = 7 wedge of the Newton polygon
    let o = run(tmp.path(), &["check", "--prec", "6", "--order", "30"]);
    assert_eq!(code(&o), 1);
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| l.starts_with("criterion")).count(), 10);
    assert!(s.contains("FAIL"));
}

#[test]
fn config_file_env_dir_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "run.cfg", "# defaults\np = 5\nprec = 20\norder = 30\n");
    let runs: Vec<Value> = ["a", "b"]
        .iter()
        .map(|sub| {
            let o = Command::new(BIN)
                .current_dir(d)
                .env("PADIC_CONFLUENCE_OUT", d.join(sub))
                .args(["gamma", "taylor", "--config", "run.cfg"])
                .output()
                .unwrap();
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            serde_json::from_str(&std::fs::read_to_string(d.join(sub).join("gamma-taylor.manifest.json")).unwrap()).unwrap()
        })
        .collect();
    let a = std::fs::read(d.join("a/gamma-taylor.json")).unwrap();
    let b = std::fs::read(d.join("b/gamma-taylor.json")).unwrap();
    assert_eq!(a, b);
    let strip = |m: &Value| {
        let mut m = m.clone();
        m.as_object_mut().unwrap().remove("timings");
        m
    };
    assert_eq!(strip(&runs[0]), strip(&runs[1]));
    assert_eq!(runs[0]["parameters"]["p"], 5);
    assert_eq!(runs[0]["parameters"]["order"], 30);
    assert_eq!(runs[0]["status"], "ok");
    assert!(runs[0]["certified"]["certified_b"].as_i64().unwrap() >= 20);
}

#[test]
fn failed_runs_leave_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let o = run(d, &["gamma", "sums", "--p", "5", "--target", "200", "--out", "out"]);
    assert_eq!(code(&o), 3);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.join("out/gamma-sums.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "error");
    assert_eq!(m["error"]["kind"], "precision");
    assert_eq!(m["parameters"]["target"], 200);
}
