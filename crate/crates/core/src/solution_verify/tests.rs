use super::*;
use crate::pde_ast::parse_pde;
use crate::poly::RatFn;
use crate::scalar::int;
use crate::travelling_wave::{reduce, WaveFrame};

fn var(s: &str) -> Poly {
    Poly::var(s)
}

fn branch(assign: Vec<(&str, RatFn)>, constraints: Vec<Poly>) -> Branch {
    Branch {
        assignments: assign.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        constraints,
        denominators: Vec::new(),
        provenance: Vec::new(),
        free: Vec::new(),
    }
}

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `a_0 = 0`, `a_1 = −2k²/c`.
fn toy_branch() -> Branch {
    let a1 = RatFn::new(var("k").pow(2).scale(&int(-2)), var("c"));
    branch(vec![("a_0", RatFn::zero()), ("a_1", a1)], Vec::new())
}

#[test]
fn toy_solution_satisfies_pde() {
    let pde = parse_pde("pde toy vars(x,t) : u_xx = u*u_t").unwrap();
    let sols = construct_solutions(
        &toy_branch(),
        &SubEquationProfile::classical_tanh(),
        &params(&[("k", 1.0), ("c", 2.0)]),
        &ConstructOptions::default(),
    )
    .unwrap();
    assert_eq!(sols.len(), 2);
    assert_eq!(sols[0].coeffs, vec![0.0, -1.0]);
    let r = residual_pde(&sols[0], &pde, &Grid::default()).unwrap();
    assert!(r.max_abs < 1e-10, "{}", r.max_abs);
    assert!(r.excluded_points.is_empty());
    assert_eq!(r.points, 1001);
}

#[test]
fn coth_family_excludes_the_pole() {
    let pde = parse_pde("pde toy vars(x,t) : u_xx = u*u_t").unwrap();
    let sols = construct_solutions(
        &toy_branch(),
        &SubEquationProfile::classical_tanh(),
        &params(&[("k", 1.0), ("c", 2.0)]),
        &ConstructOptions::default(),
    )
    .unwrap();
    let r = residual_pde(&sols[1], &pde, &Grid::default()).unwrap();
    assert!(r.max_abs.is_finite() && r.max_abs < 1e-8, "{}", r.max_abs);
    assert!(!r.excluded_points.is_empty());
    assert!(r.excluded_points.iter().all(|x| x.abs() < 1e-2));
}

#[test]
fn violated_constraint_is_flagged() {
    // c + k − 4k²m
    let c = &(&var("c") + &var("k")) - &var("k").pow(2).mul_monomial(&crate::poly::Monomial::var("m")).scale(&int(4));
    let b = branch(vec![("a_1", RatFn::poly(var("k")))], vec![c]);
    let prof = SubEquationProfile::classical_tanh();
    let ok = construct_solutions(&b, &prof, &params(&[("k", 1.0), ("m", 1.0), ("c", 3.0)]), &Default::default()).unwrap();
    assert!(!ok[0].constraint_violated);
    let bad = construct_solutions(&b, &prof, &params(&[("k", 1.0), ("m", 1.0), ("c", 3.68)]), &Default::default()).unwrap();
    assert!(bad[0].constraint_violated);
}

#[test]
fn zero_denominator_is_rejected() {
    let b = toy_branch();
    let e = construct_solutions(&b, &SubEquationProfile::classical_tanh(), &params(&[("k", 1.0), ("c", 0.0)]), &Default::default());
    assert!(matches!(e, Err(VerifyError::DenominatorZero(_))));
}

#[test]
fn sigma_sign_selects_families() {
    let b = branch(vec![("a_1", RatFn::poly(Poly::one()))], Vec::new());
    let prof = SubEquationProfile::riccati(true);
    let kinds = |s: f64| {
        construct_solutions(&b, &prof, &params(&[("k", 1.0), ("c", 1.0), (SIGMA, s)]), &ConstructOptions::default())
            .unwrap()
            .iter()
            .map(|s| s.family.kind)
            .collect::<Vec<_>>()
    };
    assert_eq!(kinds(-1.0), vec![FamilyKind::Tanh, FamilyKind::Coth]);
    assert_eq!(kinds(2.0), vec![FamilyKind::Tan, FamilyKind::Cot]);
    assert_eq!(kinds(0.0), vec![FamilyKind::Rational]);
}

#[test]
fn rational_family_matches_formula() {
    let b = branch(vec![("a_0", RatFn::poly(Poly::int(2))), ("a_1", RatFn::poly(Poly::int(3)))], Vec::new());
    let opts = ConstructOptions { alpha: 0.6, omega: 0.5 };
    let s = construct_solutions(&b, &SubEquationProfile::riccati(true), &params(&[("k", 1.0), (SIGMA, 0.0)]), &opts)
        .unwrap()
        .remove(0);
    let xi = 1.7f64;
    let want = 2.0 + 3.0 * (-gamma(1.6f64) / (xi.powf(0.6) + 0.5));
    assert!((s.u_xi(xi).unwrap() - want).abs() < 1e-14);
}

#[test]
fn unit_order_generalized_tanh_is_classical() {
    let b = branch(vec![("a_1", RatFn::poly(Poly::one()))], Vec::new());
    let p = params(&[("k", 1.0), ("c", 1.0), (SIGMA, -1.0)]);
    let g = construct_solutions(&b, &SubEquationProfile::riccati(true), &p, &ConstructOptions::default()).unwrap();
    let c = construct_solutions(&b, &SubEquationProfile::riccati(false), &p, &ConstructOptions::default()).unwrap();
    assert_eq!(g[0].family.mode, FamilyMode::AlphaGeneralized);
    for i in 0..=40 {
        let xi = -4.0 + 0.2 * i as f64;
        assert!((g[0].u_xi(xi).unwrap() - c[0].u_xi(xi).unwrap()).abs() < 1e-12);
        assert!((c[0].u_xi(xi).unwrap() + xi.tanh()).abs() < 1e-15);
    }
}

#[test]
fn derivative_polys_follow_riccati() {
    // u = φ with φ' = σ + φ², σ = −1: u'' = 2φ(φ² − 1)
    let b = branch(vec![("a_1", RatFn::poly(Poly::one()))], Vec::new());
    let s = construct_solutions(&b, &SubEquationProfile::riccati(false), &params(&[(SIGMA, -1.0)]), &Default::default())
        .unwrap()
        .remove(0);
    let d = s.derivative_polys(2);
    assert_eq!(d[1], vec![-1.0, 0.0, 1.0]);
    assert_eq!(d[2], vec![0.0, -2.0, 0.0, 2.0]);
}

#[test]
fn classical_cot_poles_are_listed() {
    let b = branch(vec![("a_1", RatFn::poly(Poly::one()))], Vec::new());
    let s = construct_solutions(&b, &SubEquationProfile::riccati(false), &params(&[(SIGMA, 1.0)]), &Default::default())
        .unwrap();
    let cot = &s[1];
    assert_eq!(cot.family.kind, FamilyKind::Cot);
    let poles = cot.poles(-5.0, 5.0);
    assert_eq!(poles.len(), 3);
    assert!((poles[2] - std::f64::consts::PI).abs() < 1e-15);
    let tan = s[0].poles(-5.0, 5.0);
    assert_eq!(tan.len(), 4);
}

#[test]
fn generalized_cot_poles_are_located() {
    let b = branch(vec![("a_1", RatFn::poly(Poly::one()))], Vec::new());
    let opts = ConstructOptions { alpha: 0.9, omega: 0.0 };
    let s = construct_solutions(&b, &SubEquationProfile::riccati(true), &params(&[(SIGMA, 1.0)]), &opts).unwrap();
    let poles = s[1].poles(0.0, 4.0);
    assert!(poles.len() >= 2, "{poles:?}");
    for p in poles.iter().filter(|p| **p > 0.0) {
        let v = crate::special_fn::generalized_fn(GenFn::Sin, 0.9, *p).unwrap();
        assert!(v.abs() < 1e-9, "{p}: {v}");
    }
}

#[test]
fn fractional_residual_at_unit_order_is_exact() {
    let pde = parse_pde("pde toyf vars(x,t) frac(alpha) : u_x^a2 = u*u_t^a1").unwrap();
    let o = reduce(&pde, &WaveFrame::for_pde(&pde)).unwrap();
    // u = −(2k^α²/c^α)·tanh ξ in tanh form = (2k_α²/c_α)·Φ with Φ = −tanh ξ
    let a1 = RatFn::new(var("k_α").pow(2).scale(&int(2)), var("c_α"));
    let b = branch(vec![("a_0", RatFn::zero()), ("a_1", a1)], Vec::new());
    let p = params(&[("k", 1.0), ("c", 2.0), (SIGMA, -1.0)]);
    let s = construct_solutions(&b, &SubEquationProfile::riccati(true), &p, &ConstructOptions::default())
        .unwrap()
        .remove(0);
    let r = residual_fractional(&s, &o, &FractionalGrid::default()).unwrap();
    assert!(r.max_abs < 1e-12, "{}", r.max_abs);
    let full = residual_pde(&s, &pde, &Grid::default()).unwrap();
    assert!(full.max_abs < 1e-10, "{}", full.max_abs);

    let opts = ConstructOptions { alpha: 0.8, omega: 0.0 };
    let s8 = construct_solutions(&b, &SubEquationProfile::riccati(true), &p, &opts).unwrap().remove(0);
    let r8 = residual_fractional(&s8, &o, &FractionalGrid::default()).unwrap();
    assert!(r8.max_abs.is_finite());
    assert!(matches!(residual_pde(&s8, &pde, &Grid::default()), Err(VerifyError::NotClassical(_))));
    let probe = riccati_probe(&s8, &FractionalGrid::default()).unwrap();
    assert_eq!(probe.equation_form, EquationForm::FractionalRiccati);
    assert!(probe.max_abs.is_finite());
}

#[test]
fn alpha_limit_deviation_shrinks() {
    let b = branch(vec![("a_0", RatFn::poly(Poly::int(1))), ("a_1", RatFn::poly(var("k_α")))], Vec::new());
    let p = params(&[("k", 1.3), ("c", 1.0), (SIGMA, -1.0)]);
    let c = construct_solutions(&b, &SubEquationProfile::riccati(true), &p, &ConstructOptions::default())
        .unwrap()
        .remove(0);
    let devs = alpha_limit_check(&c, &b, &SubEquationProfile::riccati(true), &p, &[0.9, 0.99, 0.999, 1.0], &Grid::default())
        .unwrap();
    assert!(devs[0].max_deviation > devs[1].max_deviation);
    assert!(devs[1].max_deviation > devs[2].max_deviation);
    assert!(devs[3].max_deviation < 1e-10);
}

#[test]
fn report_json_uses_fixed_format() {
    let r = ResidualReport {
        max_abs: 0.25f64,
        mean_abs: 0.125,
        grid: "g".into(),
        points: 3,
        excluded_points: vec![0.0],
        equation_form: EquationForm::OriginalPde,
    };
    let s = r.to_json().to_string();
    assert!(s.contains("\"max_abs\":2.500000000000e-01"), "{s}");
    assert!(s.contains("\"equation_form\":\"original_pde\""));
}
