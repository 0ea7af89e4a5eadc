//! Residual evaluators against the catalog solutions: every identity a
//! genuine solution must satisfy, the special-case equation pairs, the
//! potential guards, and the negative controls proving the residuals are
//! actually sensitive to broken inputs.

use std::collections::BTreeMap;

use approx::assert_relative_eq;

use etlab_core::catalog;
use etlab_core::expr::ScalarExpression as E;
use etlab_core::parse::parse_expression;
use etlab_core::structures::{CaseTag, StructureEval};
use etlab_core::CoreError;

fn no_params() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

#[test]
fn all_catalog_solutions_pass_core_residuals() {
    for info in catalog::entries() {
        let target = catalog::build(info.name, &no_params()).unwrap();
        if !target.expect_solution {
            continue;
        }
        for p in catalog::target_points(&target, 20, 5) {
            let eval = StructureEval::new(&target.structure, &p, 6).unwrap();
            let principal = eval.residual_principal().unwrap().residual.relative();
            let trace = eval.residual_trace().unwrap().residual.relative();
            let grad_h = eval.residual_grad_h().unwrap().residual.relative();
            assert!(principal < 1e-8, "{}: principal {principal}", info.name);
            assert!(trace < 1e-8, "{}: trace {trace}", info.name);
            assert!(grad_h < 1e-8, "{}: grad_h {grad_h}", info.name);
        }
    }
}

#[test]
fn solutions_satisfy_all_lemma_residuals() {
    // the module's core soundness property: any structure passing the
    // defining pair also passes every derived lemma at its stage tolerance
    for name in ["schwarzschild_slice", "sphere_height", "example1", "miao_tam_ball"] {
        let target = catalog::build(name, &no_params()).unwrap();
        for p in catalog::target_points(&target, 8, 13) {
            let eval = StructureEval::new(&target.structure, &p, 6).unwrap();
            assert!(eval.residual_lemma_fc().unwrap().residual.relative() < 1e-8);
            assert!(eval.residual_lemma_bach().unwrap().residual.relative() < 1e-7);
            assert!(
                eval.residual_lemma_second_order()
                    .unwrap()
                    .residual
                    .relative()
                    < 1e-7
            );
            assert!(
                eval.residual_lemma_third_order()
                    .unwrap()
                    .residual
                    .relative()
                    < 1e-6,
                "{name}"
            );
        }
    }
}

#[test]
fn schwarzschild_multiple_radii() {
    let mut params = BTreeMap::new();
    params.insert("r_min".to_string(), 1.2);
    let target = catalog::build("schwarzschild_slice", &params).unwrap();
    for r in [1.5, 2.0, 3.0] {
        let p = vec![r, 0.3, -0.2, 0.1];
        let eval = StructureEval::new(&target.structure, &p, 6).unwrap();
        assert!(eval.residual_lemma_bach().unwrap().residual.relative() < 1e-7);
        let case = eval.special_case_residual().unwrap();
        assert!(case.principal.residual.relative() < 1e-8);
        assert!(case.trace.residual.relative() < 1e-8);
    }
}

#[test]
fn sphere_special_case_pair() {
    // static triple with positive cosmological constant: f Ric - Hess f
    // - (R f / (n-1)) g and lap f + R f / (n-1)
    let target = catalog::build("sphere_height", &no_params()).unwrap();
    let p = vec![0.7, 0.6, 0.8, 0.65];
    let eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    let case = eval.special_case_residual().unwrap();
    assert!(case.principal.residual.relative() < 1e-9);
    assert!(case.trace.residual.relative() < 1e-9);
    // h = n f is forced by the trace equation
    let expected_h = eval.expected_h_residual().unwrap().unwrap();
    assert!(expected_h.residual.relative() < 1e-9);
}

#[test]
fn cpe_sphere_own_equation_pair() {
    let target = catalog::build("cpe_sphere", &no_params()).unwrap();
    let p = vec![0.7, 0.6, 0.8, 0.65];
    let eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    let case = eval.special_case_residual().unwrap();
    assert!(
        case.principal.residual.relative() < 1e-9,
        "cpe tensor equation: {}",
        case.principal.residual.relative()
    );
    assert!(case.trace.residual.relative() < 1e-9);
}

#[test]
fn miao_tam_flat_ball_is_exact() {
    let target = catalog::build("miao_tam_ball", &no_params()).unwrap();
    let p = vec![0.5, 0.7, 0.9, 1.1];
    let eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    let case = eval.special_case_residual().unwrap();
    assert!(case.principal.residual.max_abs < 1e-12);
    assert!(case.trace.residual.max_abs < 1e-12);
    // h = (R f + 1)/(n-1) = 1/3 on the flat ball at n = 4
    assert_relative_eq!(eval.h_jet.value(), 1.0 / 3.0, epsilon = 1e-14);
}

#[test]
fn static_null_case_on_slice() {
    let target = catalog::build("schwarzschild_slice", &no_params()).unwrap();
    let p = vec![2.0, 0.3, -0.2, 0.1];
    let eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    let case = eval.special_case_residual().unwrap();
    // f Ric - Hess f and lap f both vanish for the static vacuum slice
    assert!(case.principal.residual.relative() < 1e-8);
    assert!(case.trace.value.abs() < 1e-8);
}

#[test]
fn perfect_fluid_coefficients_on_catalog() {
    // vacuum structures solve the fluid system with zero density and pressure
    let mut target = catalog::build("schwarzschild_slice", &no_params()).unwrap();
    target.structure.case_tag = CaseTag::PerfectFluid;
    let p = vec![2.0, 0.3, -0.2, 0.1];
    let eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    let fluid = eval.perfect_fluid_coefficients().unwrap();
    assert!(fluid.density.abs() < 1e-8);
    assert!(fluid.pressure.abs() < 1e-8);
    assert!(fluid.energy_condition);
    assert!(fluid.back_substitution < 1e-10);

    // sphere treated as a fluid: nonzero solution, verified by back-substitution
    let mut target = catalog::build("sphere_height", &no_params()).unwrap();
    target.structure.case_tag = CaseTag::PerfectFluid;
    let p = vec![0.7, 0.6, 0.8, 0.65];
    let eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    let fluid = eval.perfect_fluid_coefficients().unwrap();
    assert!(fluid.back_substitution < 1e-10);
    assert!((fluid.density - fluid.pressure).abs() > 1e-3);
}

#[test]
fn perfect_fluid_trace_switch_changes_solution() {
    let mut target = catalog::build("sphere_height", &no_params()).unwrap();
    target.structure.case_tag = CaseTag::PerfectFluid;
    let p = vec![0.7, 0.6, 0.8, 0.65];
    let mut eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    let plain = eval.perfect_fluid_coefficients().unwrap();
    eval.pfe_trace_times_f = true;
    let scaled = eval.perfect_fluid_coefficients().unwrap();
    // both variants back-substitute exactly into their own equations
    assert!(plain.back_substitution < 1e-10);
    assert!(scaled.back_substitution < 1e-10);
    assert!((plain.density - scaled.density).abs() > 1e-6);
}

#[test]
fn wrong_h_breaks_principal_visibly() {
    let target = catalog::build("schwarzschild_slice", &no_params()).unwrap();
    let mut s = target.structure.clone();
    s.h = E::constant(0.1);
    let eval = StructureEval::new(&s, &[2.0, 0.3, -0.2, 0.1], 2).unwrap();
    let rel = eval.residual_principal().unwrap().residual.relative();
    assert!(rel > 1e-2, "perturbed h went unnoticed: {rel}");
}

#[test]
fn nonsolution_potential_breaks_fc_lemma() {
    // a potential with a fiber component sees nonzero W grad f and T while
    // the Cotton tensor stays zero, so the lemma residual must light up
    let target = catalog::build("schwarzschild_slice", &no_params()).unwrap();
    let mut s = target.structure.clone();
    let names = s.chart.coord_names().to_vec();
    s.f = parse_expression("r + x1", &names).unwrap();
    let eval = StructureEval::new(&s, &[2.0, 0.3, -0.2, 0.1], 6).unwrap();
    let rel = eval.residual_lemma_fc().unwrap().residual.relative();
    assert!(rel > 1e-3, "broken potential went unnoticed: {rel}");
}

#[test]
fn potential_guard_skips_equator() {
    // the sphere height potential vanishes at |x| = 1
    let target = catalog::build("sphere_height", &no_params()).unwrap();
    let p = vec![0.5, 0.5, 0.5, 0.5];
    match StructureEval::new(&target.structure, &p, 2) {
        Err(CoreError::NearZeroPotential { .. }) => {}
        other => panic!(
            "expected the potential guard to fire, got {:?}",
            other.map(|_| ())
        ),
    }
}

#[test]
fn cpe_guard_uses_one_plus_f() {
    let target = catalog::build("cpe_sphere", &no_params()).unwrap();
    // at the equator f = 0 but 1 + f = 1: CPE evaluation must proceed
    let p = vec![0.5, 0.5, 0.5, 0.5];
    let eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    assert!(eval.special_case_residual().unwrap().principal.residual.relative() < 1e-9);
}

#[test]
fn second_order_lemma_names_required_depth() {
    let target = catalog::build("sphere_height", &no_params()).unwrap();
    let p = vec![0.7, 0.6, 0.8, 0.65];
    let eval = StructureEval::new(&target.structure, &p, 4).unwrap();
    match eval.residual_lemma_second_order() {
        Err(CoreError::OrderExhausted { required, .. }) => assert_eq!(required, 5),
        other => panic!("expected order exhaustion, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn example1_certifies_its_hypotheses() {
    // harmonic Weyl curvature and zero radial Weyl, across dimensions
    for n in [4.0, 5.0] {
        let mut params = BTreeMap::new();
        params.insert("n".to_string(), n);
        let target = catalog::build("example1", &params).unwrap();
        for p in catalog::target_points(&target, 6, 37) {
            let eval = StructureEval::new(&target.structure, &p, 6).unwrap();
            let bundle = &eval.bundle;
            let cotton = eval.cotton().unwrap().values();
            assert!(cotton.max_abs() < 1e-8, "cotton {}", cotton.max_abs());
            let d1 = bundle.div_weyl(1).unwrap().values();
            assert!(d1.max_abs() < 1e-8);
            let d4 = bundle.div_weyl(4).unwrap().values();
            assert!(d4.max_abs() < 1e-6, "div4 {}", d4.max_abs());
            let radial = bundle.radial_weyl(&eval.f_jet).unwrap().values();
            assert!(radial.max_abs() < 1e-9, "radial {}", radial.max_abs());
        }
    }
}

#[test]
fn example1_potential_from_profile_relation() {
    // u = sqrt(1 - r^(2-n)) matches the profile's f' at f = r
    for n in [4usize, 5, 6] {
        let mut params = BTreeMap::new();
        params.insert("n".to_string(), n as f64);
        let target = catalog::build("example1", &params).unwrap();
        let mut point = vec![2.0];
        point.extend(std::iter::repeat(0.1).take(n - 1));
        let u = target.structure.f.eval(&point).unwrap();
        let (_, _, f_prime) = catalog::example1_profile(n, 2.0).unwrap();
        assert_relative_eq!(u, f_prime, epsilon = 1e-14);
    }
}
