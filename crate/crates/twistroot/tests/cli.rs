use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_twistroot");

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(s) = stdin {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn roots_listing() {
    let o = run(&["roots", "--family", "Dm+1,n^2", "--m", "1", "--n", "1", "--depth", "2"], None);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["depth"], 2);
    let roots = v["roots"].as_array().unwrap();
    assert!(roots.iter().all(|r| r["weight"]["delta"].as_str().unwrap().parse::<i64>().unwrap().abs() <= 2));
    assert_eq!(roots.len(), 43);
}

#[test]
fn jacobi_on_q() {
    let o = run(&["jacobi", "--algebra", "q", "--window", "20"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["violations"], 0);
}

#[test]
fn worked_shadow_verifies() {
    let o = run(&["verify-main-i", "--in", &data("worked_shadow.json")], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn worked_shadow_pipeline() {
    let o = run(&["pipeline", "--in", &data("worked_shadow.json")], None);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["t_prime_finite"], true);
    assert_eq!(v["stages"].as_array().unwrap().len(), 3);
}

#[test]
fn saturation_outcomes() {
    let o = run(&["saturate", "--in", &data("lemma_contradiction.json")], None);
    assert_eq!(json(&o)["outcome"]["result"], "Contradiction");
    let o = run(&["saturate", "--in", &data("fixpoint_weyl_orbit.json")], None);
    assert_eq!(json(&o)["outcome"]["result"], "Consistent");
}

#[test]
fn malformed_input_exits_2() {
    let o = run(&["verify-main-i", "--family", "A2m-1,2n-1^2", "--m", "2", "--n", "1"], Some("{\"cosets\": [1]}"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cosets[0]"));
    let o = run(&["roots", "--family", "nope", "--m", "1", "--n", "1"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_verification_exits_1() {
    let o = run(&["loop"], Some("{\"diag\": [\"1\", \"2\", \"1\"]}"));
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["error"].as_str().unwrap().contains("automorphism"));
}

#[test]
fn output_is_deterministic() {
    let args = ["shadow-build", "--family", "A2m,2n^4", "--m", "2", "--n", "2", "--seed", "9"];
    let a = run(&args, None);
    let b = run(&args, None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("twistroot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("roots.json");
    let o = run(&["roots", "--family", "A2m,2n-1^2", "--m", "1", "--n", "1", "--depth", "1", "--out", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["depth"], 1);
    std::fs::remove_dir_all(&dir).unwrap();
}
