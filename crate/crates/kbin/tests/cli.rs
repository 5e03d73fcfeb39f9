//! Drives the `kbin` binary end to end.

use std::process::{Command, Output};

use serde_json::Value;

fn kbin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbin")).args(args).output().expect("kbin runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gen_then_pack_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratio.json");
    let out = kbin(&["gen", "--mode", "ratio1375"]);
    assert!(out.status.success());
    std::fs::write(&path, &out.stdout).unwrap();
    let p = path.to_str().unwrap();

    let packed = kbin(&["pack", "--algo", "ffk", "--k", "2", "--instance", p]);
    assert_eq!(json(&packed)["bins"].as_array().map(Vec::len), Some(11));
    assert!(String::from_utf8_lossy(&packed.stderr).contains("bins=11"));

    let exact = json(&kbin(&["exact", "--k", "2", "--instance", p]));
    assert_eq!(exact["count"], 8);
    assert_eq!(exact["proven"], true);

    let csv = kbin(&["pack", "--algo", "nfk", "--k", "1", "--instance", p, "--format", "csv"]);
    assert!(String::from_utf8_lossy(&csv.stdout).starts_with("bin,item,copy\n"));
}

#[test]
fn kopt_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    std::fs::write(&path, r#"{"capacity": 25, "items": [11, 12, 13]}"#).unwrap();
    let out = kbin(&["kopt", "--instance", path.to_str().unwrap(), "--kmax", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("k,opt,fraction,proven"));
    assert!(text.contains("2,3,2/3,true"));
}

#[test]
fn schedule_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = kbin(&[
        "schedule", "--households", "12", "--days", "7", "--k", "4", "--repeats", "2", "--format", "csv",
        "--tables", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("# ").count(), 3);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn failures_exit_with_one() {
    assert_eq!(kbin(&["pack", "--algo", "ffk", "--k", "2", "--instance", "/no/such/file"]).status.code(), Some(1));
    assert_eq!(kbin(&["pack", "--algo", "bogus"]).status.code(), Some(1));
    assert_eq!(kbin(&["--help"]).status.code(), Some(0));
}
