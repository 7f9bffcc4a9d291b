use std::process::{Command, Output};

use serde_json::Value;

fn twsolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twsolve")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn solve_sww_reports_branch_and_warnings() {
    let o = twsolve(&["solve", "sww", "--method", "tanh"]);
    assert!(o.status.success());
    let v = json(&o);
    let b = &v["stages"]["branches"][0];
    assert_eq!(b["assignments"]["a_1"], "12*k*m/(c*p + c*q)");
    assert_eq!(b["constraints"][0], "-4*k^2*m + c + k = 0");
    let locs: Vec<&str> = v["warnings"].as_array().unwrap().iter().map(|w| w["location"].as_str().unwrap()).collect();
    assert!(locs.contains(&"§7"));
}

#[test]
fn solve_boussinesq_lists_both_a0_roots() {
    let v = json(&twsolve(&["solve", "boussinesq4"]));
    let roots: Vec<&str> = v["stages"]["refined_branches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["assignments"]["a_0"].as_str().unwrap())
        .collect();
    assert_eq!(roots, ["2*k^2", "2*k^2/3"]);
}

#[test]
fn fractional_kp_solve() {
    let v = json(&twsolve(&["solve", "kp", "--method", "subeq", "--alpha", "0.8", "--sigma", "-1"]));
    assert_eq!(v["key"], "kp_frac");
    let a = &v["stages"]["branches"][0]["assignments"];
    assert_eq!(a["a_2"], "-2*k_α^2");
    assert_eq!(a["a_0"], "(-8*k_α^4*σ - c_α*k_α + m_α^2)/(6*k_α^2)");
}

#[test]
fn verify_exit_codes() {
    let ok = twsolve(&["verify", "toy", "--params", "k=1,c=2"]);
    assert_eq!(ok.status.code(), Some(0));
    let v = json(&ok);
    assert_eq!(v["pass"], true);
    let fig5 = twsolve(&["verify", "boussinesq4", "--params", "c=1,k=1"]);
    assert_eq!(fig5.status.code(), Some(1));
    let v = json(&fig5);
    assert!(v["warnings"].as_array().unwrap().iter().any(|w| w["message"].as_str().unwrap().contains("constraint_violated")));
    let frac = twsolve(&["verify", "boussinesq4", "--method", "subeq", "--alpha", "0.8", "--sigma", "-1", "--params", "c=1,k=1"]);
    assert_eq!(frac.status.code(), Some(0));
    assert_eq!(json(&frac)["report_only"], true);
}

#[test]
fn errors_are_json_with_nonzero_exit() {
    let o = twsolve(&["solve", "kdv"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["stage"], "input");
    let o = twsolve(&["verify", "toy", "--branch", "7", "--params", "k=1,c=2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = twsolve(&["figure", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dsl_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("toy.pde");
    std::fs::write(&p, "pde mine vars(x,t) : u_xx = u*u_t\n").unwrap();
    let v = json(&twsolve(&["solve", p.to_str().unwrap()]));
    assert_eq!(v["key"], "mine");
    assert_eq!(v["stages"]["branches"][0]["assignments"]["a_1"], "-2*k^2/c");
}

#[test]
fn figure_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = twsolve(&["figure", "1", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 1 + 201 * 51);
    // x = 0, t = 5 → 2 tanh(15); x = 0, t = 0 → 0
    assert!(text.contains("\n0.000000000000e+00,0.000000000000e+00,0.000000000000e+00\n"));
}

#[test]
fn fractional_figure_has_alpha_column() {
    let o = twsolve(&["figure", "6", "--alpha", "0.9,1", "--x-grid", "-1:1:3", "--t-grid", "0:1:2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("alpha,x,t,u\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("Figure 6"));
}

#[test]
fn tabulate_mittag_leffler() {
    let o = twsolve(&["tabulate", "ml", "--alpha", "1", "--grid", "0:1:2"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, "x,ml\n0.000000000000e+00,1.000000000000e+00\n1.000000000000e+00,2.718281828459e+00\n");
}
