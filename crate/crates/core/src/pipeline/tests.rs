use super::*;

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn run(key: &str, method: Method, p: &[(&str, f64)]) -> SolveLog {
    let src = PdeSource::builtin(key, method).unwrap();
    solve(&src, &SolveOptions { method, params: params(p), ..Default::default() }).unwrap()
}

fn value(log: &SolveLog, id: &str, a: &str) -> String {
    log.branch(id).unwrap().branch.assignments[a].to_string()
}

#[test]
fn toy_branch_and_residual() {
    let log = run("toy", Method::Tanh, &[("k", 1.0), ("c", 2.0)]);
    assert_eq!(log.branches.len(), 1);
    assert_eq!(value(&log, "0", "a_0"), "0");
    assert_eq!(value(&log, "0", "a_1"), "-2*k^2/c");
    assert_eq!(log.branches[0].closure, Some(false));
    let tanh = &log.solutions[0];
    assert_eq!(tanh.residuals.len(), 1);
    assert!(tanh.passes(), "{:?}", tanh.residuals);
}

#[test]
fn sww_constraint_and_figure_one_parameters() {
    let log = run("sww", Method::Tanh, &[("p", 1.0), ("q", 1.0), ("m", 1.0), ("k", 1.0), ("c", 3.0)]);
    assert_eq!(value(&log, "0", "a_1"), "12*k*m/(c*p + c*q)");
    assert_eq!(log.branches[0].branch.constraints[0].to_string(), "-4*k^2*m + c + k");
    assert!(log.solutions[0].residuals[0].max_abs < 1e-9);
    assert!(log.warnings.iter().all(|w| w.location.starts_with('§')));
}

#[test]
fn kp_refined_branches_at_unit_parameters() {
    let log = run("kp", Method::Tanh, &[("k", 1.0), ("m", 1.0), ("c", 1.0)]);
    assert_eq!(log.refinements[0].a_form.to_string(), "4*k^4 - 8*a_0*k^2 + 3*a_0^2");
    assert_eq!(value(&log, "r0", "a_0"), "2*k^2");
    assert_eq!(value(&log, "r1", "a_0"), "2*k^2/3");
    for (id, c) in [("r0", -3.0), ("r1", 5.0)] {
        let opts = SolveOptions { params: params(&[("k", 1.0), ("m", 1.0), ("c", c)]), ..Default::default() };
        let reps = verify_branch(&log, id, &opts).unwrap();
        assert!(!reps[0].solution.constraint_violated);
        assert!(reps[0].passes(), "{id}: {:?}", reps[0].residuals);
    }
    // c = 1 satisfies neither relation
    assert!(log.warnings.iter().any(|w| w.location == "--params" && w.message.contains("branch r0")));
}

#[test]
fn boussinesq_physical_branch_and_negative_test() {
    let log = run("boussinesq4", Method::Tanh, &[("k", 1.0), ("c", 1.0)]);
    assert_eq!(value(&log, "0", "a_0"), "(8*k^4 + c^2 - k^2)/(6*k^2)");
    assert_eq!(value(&log, "0", "a_2"), "-2*k^2");
    let fig5 = log.solutions.iter().find(|s| s.branch == "0").unwrap();
    assert!(fig5.solution.constraint_violated);
    assert!(fig5.residuals[1].max_abs > 0.1);
    let spread = fig5.residuals[1].max_abs - fig5.residuals[1].mean_abs;
    assert!(spread < 1e-9, "closure residual is constant");

    let c = 5f64.sqrt();
    let opts = SolveOptions { params: params(&[("k", 1.0), ("c", c)]), ..Default::default() };
    let reps = verify_branch(&log, "r0", &opts).unwrap();
    assert!(reps[0].residuals.iter().all(|r| r.max_abs < 1e-10), "{:?}", reps[0].residuals);
}

#[test]
fn fractional_kp_matches_symbolic_form() {
    let log = run("kp", Method::Subeq, &[]);
    assert_eq!(log.key, "kp_frac");
    assert_eq!(value(&log, "0", "a_2"), "-2*k_α^2");
    assert_eq!(value(&log, "0", "a_0"), "(-8*k_α^4*σ - c_α*k_α + m_α^2)/(6*k_α^2)");
    assert!(log.warnings.iter().any(|w| w.location == "§10"));
}

#[test]
fn subeq_on_integer_definition_needs_sigma() {
    let def = crate::pde_ast::parse_pde("pde toy vars(x,t) : u_xx = u*u_t").unwrap();
    let src = PdeSource::custom(def);
    let e = solve(&src, &SolveOptions { method: Method::Subeq, ..Default::default() });
    assert!(matches!(e, Err(PipelineError::SigmaRequired)));
    let log = solve(&src, &SolveOptions { method: Method::Subeq, sigma: Some(-1.0), ..Default::default() }).unwrap();
    assert_eq!(value(&log, "0", "a_1"), "2*k^2/c");
}

#[test]
fn solve_log_json_is_stable() {
    let a = run("sww", Method::Tanh, &[("k", 1.0), ("m", 1.0), ("p", 1.0), ("q", 1.0), ("c", 3.0)]).to_json().to_string();
    let b = run("sww", Method::Tanh, &[("k", 1.0), ("m", 1.0), ("p", 1.0), ("q", 1.0), ("c", 3.0)]).to_json().to_string();
    assert_eq!(a, b);
    assert!(a.contains("\"max_abs\":"));
}

fn small() -> FigureOptions {
    FigureOptions { x: Mesh::new(-2.0, 2.0, 5), t: Mesh::new(0.0, 5.0, 3), ..Default::default() }
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn figure_one_is_two_tanh() {
    let f = figure_csv(1, &small()).unwrap();
    assert!(f.csv.starts_with("x,t,u\n"));
    assert!(f.warnings.is_empty());
    for r in rows(&f.csv) {
        assert!((r[2] - 2.0 * (3.0 * r[1] + r[0]).tanh()).abs() < 1e-11);
    }
}

#[test]
fn figure_five_uses_unrefined_a0() {
    let f = figure_csv(5, &small()).unwrap();
    for r in rows(&f.csv) {
        let th = (r[1] + r[0]).tanh();
        assert!((r[2] - (4.0 / 3.0 - 2.0 * th * th)).abs() < 1e-11);
    }
    assert_eq!(f.warnings[0].location, "Figure 5");
}

#[test]
fn figure_two_at_unit_order_equals_figure_one() {
    let one = rows(&figure_csv(1, &small()).unwrap().csv);
    let opts = FigureOptions { alphas: vec![1.0], ..small() };
    let two = rows(&figure_csv(2, &opts).unwrap().csv);
    assert_eq!(one.len(), two.len());
    for (a, b) in one.iter().zip(&two) {
        assert_eq!(b[0], 1.0);
        assert!((a[2] - b[3]).abs() < 1e-10);
    }
    let f3 = figure_csv(3, &small()).unwrap();
    assert!(f3.warnings[0].message.contains("c = 3.68"));
}

#[test]
fn tabulate_exp_and_poles() {
    let csv = tabulate_csv(TabulateFn::MittagLeffler, 1.0, &Mesh::new(0.0, 1.0, 3)).unwrap();
    let r = rows(&csv);
    assert!((r[2][1] - 1f64.exp()).abs() < 1e-13);
    let coth = tabulate_csv(TabulateFn::parse("coth").unwrap(), 0.5, &Mesh::new(0.0, 1.0, 2)).unwrap();
    assert!(coth.lines().nth(1).unwrap().ends_with(",nan"));
    assert!(Mesh::parse("1:0:3").is_err());
    assert_eq!(Mesh::parse("-1:1:3").unwrap().nodes(), vec![-1.0, 0.0, 1.0]);
}
