use std::process::{Command, Output};

use serde_json::Value;

fn sixops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sixops")).args(args).env_remove("SIXOPS_FIELD").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn cohomology_table() {
    let o = sixops(&["cohomology", "circle", "torus", "rp2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("S1, constant, Q, [1,1]"), "{s}");
    assert!(s.contains("T2, constant, Q, [1,2,1]"), "{s}");
    assert!(s.contains("RP2, constant, Q, [1]"), "{s}");
}

#[test]
fn field_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_sixops")).args(["cohomology", "rp2", "--cech"]).env("SIXOPS_FIELD", "fp:2").output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("[1,1,1]"), "{}", stdout(&o));
}

#[test]
fn verify_exit_status_and_json() {
    let args = ["verify", "--law", "projection-formula", "--map", "circle->pt", "--trials", "50", "--seed", "7", "--format", "json"];
    let o = sixops(&args);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["schema"], "sixops-report/1");
    let law = &doc["laws"][0];
    assert_eq!(law["law"], "projection-formula");
    assert_eq!(law["asserted_pass"], 50);
    assert_eq!(law["asserted_fail"], 0);
    assert_eq!(law["status"], "pass");
    assert_eq!(stdout(&sixops(&args)), stdout(&o));
}

#[test]
fn crafted_coarse_system_fails_validation() {
    let o = sixops(&["validate", "coarse-circle-crafted"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    assert_eq!(sixops(&["validate", "coarse-circle"]).status.code(), Some(0));
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(sixops(&["verify", "--law", "no-such-law"]).status.code(), Some(2));
    assert_eq!(sixops(&["cohomology", "no-such-model"]).status.code(), Some(2));
    assert_eq!(sixops(&["--field", "fp:4", "cohomology", "circle"]).status.code(), Some(2));
}

#[test]
fn rho_laws_on_a_star_site() {
    let o = sixops(&["rho", "laws", "coarse-circle", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("rho-adjunction"));
}

#[test]
fn interior_vertex_shriek() {
    let o = sixops(&["shriek", "v1->path"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("H^1=1"), "{}", stdout(&o));
}
