use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value, String) {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> (i32, Value, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qmclose"));
    cmd.args(args).env_remove("QMCLOSE_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json, String::from_utf8(out.stderr).unwrap())
}

#[test]
fn member_on_the_ball_emits_a_certificate() {
    let (code, j, _) = run(&["member", "--instance", "ball:2", "--poly", "1-x1", "--degree", "4"]);
    assert_eq!(code, 0);
    assert_eq!(j["schema"], "qmclose/1");
    assert_eq!(j["result"]["status"], "member");
    assert!(j["result"]["certificate"]["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(j["config"]["command"]["member"]["degree"], 4);
}

#[test]
fn couex_is_infeasible_at_six() {
    let (code, j, _) = run(&["member", "--instance", "couex", "--poly", "x", "--degree", "6"]);
    assert_eq!(code, 0);
    assert_eq!(j["result"]["status"], "infeasible_at_d");
    assert!(j["result"]["margin"].as_f64().unwrap() > 0.0);
    assert!(j["result"]["dual"]["values"].as_array().unwrap().len() > 1);
}

#[test]
fn appendix_report_has_no_discrepancies() {
    let (code, j, _) = run(&["appendix", "--n", "2", "--m", "4", "--samples", "200", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(j["result"]["discrepancies"].as_array().unwrap().len(), 0);
    assert_eq!(j["result"]["points"].as_array().unwrap().len(), 200);
    assert_eq!(j["passed"], true);
    let (_, c, _) = run(&["appendix", "--n", "2", "--m", "4", "--samples", "100", "--cone", "--summary"]);
    assert_eq!(c["passed"], true);
    assert_eq!(c["result"]["cone"], true);
    let (_, t, _) = run(&["appendix", "--n", "1", "--m", "3", "--samples", "100"]);
    assert_eq!(t["passed"], true);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["appendix", "--n", "3", "--m", "5", "--samples", "60", "--seed", "3"];
    let a = Command::new(env!("CARGO_BIN_EXE_qmclose")).args(args).output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_qmclose")).args(args).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let args = ["member", "--instance", "example-3-4:2:1/4", "--poly", "1 - x1", "--degree", "4"];
    let a = Command::new(env!("CARGO_BIN_EXE_qmclose")).args(args).output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_qmclose")).args(args).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_one() {
    let (code, _, err) = run(&["member", "--instance", "nope", "--poly", "x"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown instance"));
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["member", "--instance", "ball:2", "--poly", "1 - z"]).0, 1);
    assert_eq!(run(&["appendix", "--n", "2", "--m", "4", "--samples", "0"]).0, 1);
    let (code, _, err) = run_env(&["member", "--instance", "ball:2", "--poly", "1"], &[("QMCLOSE_TOL", "abc")]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn malformed_module_json_is_rejected() {
    let dir = std::env::temp_dir().join(format!("qmclose-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"vars":["x"],"kind":"qm","generators":[],"extra":1}"#).unwrap();
    assert_eq!(run(&["member", "--module", bad.to_str().unwrap(), "--poly", "x"]).0, 1);
    let good = dir.join("good.json");
    std::fs::write(
        &good,
        r#"{"vars":["x"],"kind":"qm","generators":[{"vars":["x"],"terms":[{"exps":[0],"num":1,"den":1},{"exps":[2],"num":-1,"den":1}]}]}"#,
    )
    .unwrap();
    let (code, j, err) = run(&["member", "--module", good.to_str().unwrap(), "--poly", "1 - x", "--degree", "2"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(j["result"]["status"], "member");
}

#[test]
fn basis_limit_exits_two() {
    let (code, _, err) = run(&["member", "--instance", "ball:3", "--poly", "1", "--degree", "30"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn tolerance_override_is_echoed() {
    let (code, j, _) = run_env(&["member", "--instance", "ball:2", "--poly", "1"], &[("QMCLOSE_TOL", "1e-7")]);
    assert_eq!(code, 0);
    assert_eq!(j["tol_env"], "1e-7");
    assert_eq!(j["options"]["sdp"]["tol_feas"], 1e-7);
}

#[test]
fn other_subcommands_run() {
    let (_, j, _) = run(&["stable", "--vars", "x,y", "--gens", "x", "--gens", "y"]);
    assert_eq!(j["result"]["status"], "stable");
    let (_, j, _) = run(&["stable", "--vars", "x,y", "--gens", "x", "--gens", "1 - x", "--gens", "y"]);
    assert_eq!(j["result"]["status"], "hypothesis_failed");
    let (_, j, _) = run(&["archimedean", "--instance", "ball:2", "--degree", "2"]);
    assert_eq!(j["result"]["status"], "archimedean_certified");
    assert_eq!(j["result"]["k"], "1");
    let (_, j, _) = run(&["fiber", "--instance", "example-3-4:2:1/4", "--coordinate", "x1", "--a", "0", "--b", "1"]);
    let fibers = j["result"]["fibers"].as_array().unwrap();
    assert_eq!(fibers.len(), 5);
    assert_eq!(fibers[0]["improper"], true);
    let (_, j, _) = run(&["moment-dual", "--instance", "ball:2", "--degree", "3", "--point", "0.5,0.25"]);
    assert_eq!(j["result"]["status"], "psd_pass");
    let (_, j, _) = run(&["moment-dual", "--instance", "ball:2", "--degree", "1", "--point", "2,0"]);
    assert_eq!(j["result"]["status"], "psd_fail");
    let (_, j, _) = run(&["support", "--vars", "x", "--gens", "x^2", "--gens", "-x^2", "--candidate", "x^2", "--candidate", "x"]);
    assert_eq!(j["result"]["certified_in_support"], serde_json::json!(["x^2"]));
    let (_, j, _) = run(&["closure-stable", "--vars", "x", "--gens", "x^2", "--radical", "x"]);
    assert_eq!(j["result"]["closure_module"]["generators"].as_array().unwrap().len(), 3);
    let (_, j, _) = run(&["seq-member", "--vars", "x", "--gens", "x^3", "--poly", "x", "--degree", "4"]);
    assert!(j["result"]["verdict"].is_string());
    let (_, j, _) = run(&["pos-semi", "--vars", "x", "--gens", "x", "--poly", "x^2", "--degree", "4"]);
    assert_eq!(j["result"]["status"], "member");
    let (_, j, _) = run(&["weak-closure", "--vars", "x", "--gens", "x^2", "--gens", "-x^2", "--poly", "x", "--grid", "3"]);
    assert_eq!(j["result"]["verdict"], "member_on_grid");
    let (_, j, _) = run(&["instances"]);
    assert!(j["instances"]["couex"]["generators"].is_array());
}
