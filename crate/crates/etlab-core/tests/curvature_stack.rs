//! Integration tests for the curvature stack on catalog charts and on random
//! polynomial metrics, where Weyl, Cotton and Bach are all genuinely nonzero
//! and every classical identity must still close at roundoff level.

use std::collections::BTreeMap;

use approx::assert_relative_eq;
use rand::Rng;

use etlab_core::catalog;
use etlab_core::chart::MetricChart;
use etlab_core::expr::ScalarExpression as E;
use etlab_core::geometry::CurvatureBundle;
use etlab_core::jet::Jet;
use etlab_core::parse::parse_expression;
use etlab_core::sample::stream_rng;
use etlab_core::tensor::ComponentTensor;
use etlab_core::CoreError;

fn no_params() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

/// delta_ij plus small random quadratic perturbations: positive-definite on
/// the box, with nonzero Weyl, Cotton and Bach.
fn random_polynomial_metric(n: usize, seed: u64) -> MetricChart {
    let mut rng = stream_rng(seed, 0);
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut upper = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut expr = E::constant(if i == j { 1.0 } else { 0.0 });
            for a in 0..n {
                for b in a..n {
                    let c: f64 = rng.gen_range(-0.08..0.08);
                    expr = E::Add(
                        Box::new(expr),
                        Box::new(E::Mul(
                            Box::new(E::constant(c)),
                            Box::new(E::Mul(Box::new(E::var(a)), Box::new(E::var(b)))),
                        )),
                    );
                }
            }
            upper.push(((i, j), expr));
        }
    }
    MetricChart::from_upper_triangle(names, upper, vec![(-0.6, 0.6); n]).unwrap()
}

#[test]
fn sphere_scalar_curvature_is_n_n_minus_one() {
    for n in [4usize, 5, 6] {
        let chart = catalog::sphere_chart(n).unwrap();
        let point: Vec<f64> = (0..n).map(|i| 0.12 + 0.06 * i as f64).collect();
        let bundle = CurvatureBundle::new(&chart, &point, 2).unwrap();
        assert_relative_eq!(
            bundle.scalar.value(),
            (n * (n - 1)) as f64,
            epsilon = 1e-9
        );
    }
}

#[test]
fn sphere_weyl_and_cotton_vanish() {
    let chart = catalog::sphere_chart(4).unwrap();
    let bundle = CurvatureBundle::new(&chart, &[0.3, -0.2, 0.25, 0.1], 4).unwrap();
    let w = bundle.weyl().unwrap().tensor.values();
    assert!(w.max_abs() < 1e-10, "Weyl on S^4: {}", w.max_abs());
    let c = bundle.cotton().unwrap().values();
    assert!(c.max_abs() < 1e-10, "Cotton on S^4: {}", c.max_abs());
    let b = bundle.bach().unwrap().values();
    assert!(b.max_abs() < 1e-10, "Bach on S^4: {}", b.max_abs());
    for k in 1..=2 {
        assert!(bundle.div_weyl(k).unwrap().values().max_abs() < 1e-10);
    }
}

#[test]
fn flat_chart_curvature_objects_vanish() {
    let chart = MetricChart::diagonal(
        (1..=4).map(|i| format!("x{i}")).collect(),
        vec![E::constant(1.0); 4],
        vec![(-2.0, 2.0); 4],
    )
    .unwrap();
    let bundle = CurvatureBundle::new(&chart, &[0.3, 0.1, -0.4, 0.9], 6).unwrap();
    assert!(bundle.weyl().unwrap().tensor.values().max_abs() < 1e-14);
    assert!(bundle.cotton().unwrap().values().max_abs() < 1e-14);
    assert!(bundle.bach().unwrap().values().max_abs() < 1e-14);
    for k in 1..=4 {
        assert!(bundle.div_weyl(k).unwrap().values().max_abs() < 1e-14);
    }
    // any potential has zero radial Weyl on flat space
    let f = parse_expression("exp(x1) + x2*x3", &chart.coord_names().to_vec()).unwrap();
    let f_jet = f.lift(&[0.3, 0.1, -0.4, 0.9], 6).unwrap();
    assert!(bundle.radial_weyl(&f_jet).unwrap().values().max_abs() < 1e-14);
}

#[test]
fn bach_rejects_dimension_three() {
    let chart = MetricChart::diagonal(
        vec!["x".into(), "y".into(), "z".into()],
        vec![E::constant(1.0); 3],
        vec![(-1.0, 1.0); 3],
    )
    .unwrap();
    let bundle = CurvatureBundle::new(&chart, &[0.0, 0.0, 0.0], 4).unwrap();
    assert!(matches!(
        bundle.bach(),
        Err(CoreError::UnsupportedDimension { dim: 3, .. })
    ));
    assert!(matches!(
        bundle.div_weyl(1),
        Err(CoreError::UnsupportedDimension { dim: 3, .. })
    ));
    // weyl itself returns zeros with the degeneracy flag
    let w = bundle.weyl().unwrap();
    assert!(w.identically_zero_dim3);
    assert_eq!(w.tensor.values().max_abs(), 0.0);
}

#[test]
fn div_weyl_requires_depth() {
    let chart = catalog::sphere_chart(4).unwrap();
    let bundle = CurvatureBundle::new(&chart, &[0.3, -0.2, 0.25, 0.1], 4).unwrap();
    match bundle.div_weyl(4) {
        Err(CoreError::OrderExhausted {
            required,
            available,
            ..
        }) => {
            assert_eq!(required, 6);
            assert_eq!(available, 4);
        }
        other => panic!("expected order exhaustion, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn ricci_identity_on_catalog_charts() {
    // the commutation rule that pins the curvature sign, with a seeded cubic
    for name in ["flat_linear", "sphere_height", "schwarzschild_slice"] {
        let target = catalog::build(name, &no_params()).unwrap();
        let points = catalog::target_points(&target, 5, 23);
        for (i, p) in points.iter().enumerate() {
            let bundle = CurvatureBundle::new(&target.structure.chart, p, 4).unwrap();
            let mut rng = stream_rng(99, i as u64);
            let n = p.len();
            let vars: Vec<Jet> = (0..n).map(|v| Jet::variable(n, 4, v, p[v])).collect();
            let mut u = Jet::constant(n, 4, 0.0);
            for a in 0..n {
                for b in a..n {
                    for c in b..n {
                        let coeff: f64 = rng.gen_range(-1.0..1.0);
                        u = u
                            .add(
                                &vars[a]
                                    .mul(&vars[b])
                                    .unwrap()
                                    .mul(&vars[c])
                                    .unwrap()
                                    .scale(coeff),
                            )
                            .unwrap();
                    }
                }
            }
            let res = bundle.ricci_identity_residual(&u).unwrap();
            assert!(
                res.relative() < 1e-9,
                "{name}: commutation residual {} at {:?}",
                res.relative(),
                p
            );
        }
    }
}

#[test]
fn generic_metric_closes_all_identities() {
    // random quadratic-perturbation metrics: |W|, |C|, |B| are all O(0.1),
    // so these checks cannot pass vacuously
    for n in [4usize, 5] {
        let chart = random_polynomial_metric(n, 1234 + n as u64);
        let point: Vec<f64> = (0..n).map(|i| 0.1 + 0.07 * i as f64).collect();
        let bundle = CurvatureBundle::new(&chart, &point, 6).unwrap();
        let nf = n as f64;

        let w = bundle.weyl().unwrap().tensor.values();
        let c = bundle.cotton().unwrap().values();
        assert!(w.max_abs() > 1e-2, "perturbation too weak: |W| = {}", w.max_abs());
        assert!(c.max_abs() > 1e-3, "perturbation too weak: |C| = {}", c.max_abs());

        // Cotton is minus (n-2)/(n-3) times the Weyl divergence
        let d1 = bundle.div_weyl(1).unwrap().values();
        let rel = c.add(&d1.scale((nf - 2.0) / (nf - 3.0))).max_abs() / (1.0 + c.max_abs());
        assert!(rel < 1e-12, "cotton-weyl relation: {rel}");

        // both Bach routes agree, and Bach is symmetric trace-free
        let (b1, b2) = bundle.bach_pair().unwrap();
        let b1v = b1.values();
        assert!(b1v.max_abs() > 1e-3);
        let agree = b1v.sub(&b2.values()).max_abs() / (1.0 + b1v.max_abs());
        assert!(agree < 1e-12, "bach routes disagree: {agree}");

        let ginv = bundle.g_inv.values();
        let mut trace: f64 = 0.0;
        for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            trace = trace.max(w.contract(a, b, Some(&ginv)).unwrap().max_abs());
        }
        assert!(trace / (1.0 + w.max_abs()) < 1e-12, "weyl trace: {trace}");

        // divergence of Bach against the Cotton-Ricci coupling
        let div_b = {
            let d = bundle.cov_derivative(&b1).unwrap();
            bundle.contract_up(&d, 0, 2).unwrap().values()
        };
        let ric_up = bundle
            .ricci
            .values()
            .raise(0, &ginv)
            .unwrap()
            .raise(1, &ginv)
            .unwrap();
        let coeff = (nf - 4.0) / ((nf - 2.0) * (nf - 2.0));
        for i0 in 0..n {
            let mut cr = 0.0;
            for j in 0..n {
                for k in 0..n {
                    cr += c.get(&[i0, j, k]) * ric_up.get(&[j, k]);
                }
            }
            let v = (div_b.get(&[i0]) - coeff * cr).abs();
            assert!(v < 1e-12, "div bach residual {v} at n={n}");
        }
        if n == 4 {
            // in dimension four the coupling coefficient vanishes: divB = 0
            assert!(div_b.max_abs() < 1e-12);
        }

        // contracted second Bianchi
        let div_ric = {
            let d = bundle.cov_derivative(&bundle.ricci).unwrap();
            bundle.contract_up(&d, 0, 1).unwrap().values()
        };
        let dr = bundle.gradient(&bundle.scalar).unwrap().values();
        let bianchi = div_ric.sub(&dr.scale(0.5)).max_abs() / (1.0 + div_ric.max_abs());
        assert!(bianchi < 1e-12, "second bianchi: {bianchi}");
    }
}

#[test]
fn schwarzschild_slice_is_conformally_flat_but_curved() {
    // warped over a round fiber: rotationally symmetric, hence W = 0, while
    // Ricci stays genuinely nonzero
    let target = catalog::build("schwarzschild_slice", &no_params()).unwrap();
    let point = vec![2.0, 0.2, -0.1, 0.15];
    let bundle = CurvatureBundle::new(&target.structure.chart, &point, 6).unwrap();
    assert!(bundle.ricci.values().max_abs() > 1e-2);
    assert!(bundle.riemann.values().max_abs() > 1e-2);
    assert!(bundle.weyl().unwrap().tensor.values().max_abs() < 1e-12);
    assert!(bundle.cotton().unwrap().values().max_abs() < 1e-12);
    assert!(bundle.scalar.value().abs() < 1e-12);
}

#[test]
fn weyl_trace_free_on_noneinstein_warp() {
    // the one catalog metric with genuinely nonzero Weyl
    let target = catalog::build("warped_noneinstein", &no_params()).unwrap();
    let point = vec![1.2, 0.2, -0.3, 0.4, 0.1];
    let bundle = CurvatureBundle::new(&target.structure.chart, &point, 4).unwrap();
    let w = bundle.weyl().unwrap().tensor.values();
    assert!(w.max_abs() > 0.05, "|W| = {}", w.max_abs());
    let ginv = bundle.g_inv.values();
    let mut worst: f64 = 0.0;
    for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        worst = worst.max(w.contract(a, b, Some(&ginv)).unwrap().max_abs());
    }
    assert!(worst / (1.0 + w.max_abs()) < 1e-12);

    // pair-swap symmetry
    let n = 5;
    let mut swap: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    swap = swap.max((w.get(&[i, j, k, l]) - w.get(&[k, l, i, j])).abs());
                }
            }
        }
    }
    assert!(swap / (1.0 + w.max_abs()) < 1e-12);
}

#[test]
fn t_tensor_vanishes_on_einstein_metrics() {
    let chart = catalog::sphere_chart(4).unwrap();
    let names = chart.coord_names().to_vec();
    let point = [0.3, -0.2, 0.25, 0.1];
    let bundle = CurvatureBundle::new(&chart, &point, 4).unwrap();
    for expr in ["x1", "exp(x2)*x3", "1 + x1*x2 - x4^3"] {
        let f = parse_expression(expr, &names).unwrap().lift(&point, 4).unwrap();
        let t = bundle.t_tensor(&f).unwrap().values();
        let scale = bundle.ricci.values().max_abs();
        assert!(
            t.max_abs() / (1.0 + scale) < 1e-10,
            "T with f = {expr}: {}",
            t.max_abs()
        );
    }
    // constant potential kills T outright
    let f = Jet::constant(4, 4, 2.5);
    assert_eq!(bundle.t_tensor(&f).unwrap().values().max_abs(), 0.0);
}

#[test]
fn metric_compatibility_on_catalog() {
    for info in catalog::entries() {
        let target = catalog::build(info.name, &no_params()).unwrap();
        let points = catalog::target_points(&target, 5, 31);
        for p in &points {
            let bundle = CurvatureBundle::new(&target.structure.chart, p, 3).unwrap();
            let dg = bundle.cov_derivative(&bundle.g).unwrap().values();
            let rel = dg.max_abs() / (1.0 + bundle.g.values().max_abs());
            assert!(rel < 1e-10, "{}: cov-deriv g = {rel}", info.name);
        }
    }
}

#[test]
fn riemann_symmetries_tight_on_catalog() {
    for name in ["sphere_height", "schwarzschild_slice", "warped_noneinstein"] {
        let target = catalog::build(name, &no_params()).unwrap();
        for p in catalog::target_points(&target, 20, 17) {
            let bundle = CurvatureBundle::new(&target.structure.chart, &p, 2).unwrap();
            let rm = bundle.riemann.values();
            let n = bundle.dim;
            let scale = 1.0 + rm.max_abs();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = rm.get(&[i, j, k, l]);
                            assert!((v + rm.get(&[j, i, k, l])).abs() / scale < 1e-10);
                            assert!((v + rm.get(&[i, j, l, k])).abs() / scale < 1e-10);
                            assert!((v - rm.get(&[k, l, i, j])).abs() / scale < 1e-10);
                            assert!(
                                (v + rm.get(&[j, k, i, l]) + rm.get(&[k, i, j, l])).abs() / scale
                                    < 1e-10
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn cotton_divergence_identities() {
    // grad^i C[i,j,k] is symmetric and grad^i C[j,k,i] vanishes, also on a
    // metric where C itself is far from zero
    for (name, tol) in [
        ("schwarzschild_slice", 1e-8),
        ("sphere_height", 1e-8),
        ("warped_noneinstein", 1e-8),
    ] {
        let target = catalog::build(name, &no_params()).unwrap();
        for p in catalog::target_points(&target, 5, 41) {
            let bundle = CurvatureBundle::new(&target.structure.chart, &p, 6).unwrap();
            let cotton = bundle.cotton().unwrap();
            let d = bundle.cov_derivative(&cotton).unwrap();
            let first = bundle.contract_up(&d, 0, 1).unwrap().values();
            let n = bundle.dim;
            let mut asym: f64 = 0.0;
            for j in 0..n {
                for k in 0..n {
                    asym = asym.max((first.get(&[j, k]) - first.get(&[k, j])).abs());
                }
            }
            let scale = 1.0 + first.max_abs();
            assert!(asym / scale < tol, "{name}: div-cotton asymmetry {asym}");
            let last = bundle.contract_up(&d, 0, 3).unwrap().values();
            assert!(
                last.max_abs() / scale < tol,
                "{name}: div-cotton trace {}",
                last.max_abs()
            );
        }
    }
}

#[test]
fn jet_inverse_metric_identity_everywhere() {
    let target = catalog::build("warped_noneinstein", &no_params()).unwrap();
    let p = vec![1.0, 0.1, 0.2, -0.3, 0.4];
    let bundle = CurvatureBundle::new(&target.structure.chart, &p, 6).unwrap();
    let n = bundle.dim;
    for i in 0..n {
        for j in 0..n {
            let mut acc = Jet::constant(n, 6, 0.0);
            for k in 0..n {
                acc = acc
                    .add(&bundle.g.get(&[i, k]).mul(bundle.g_inv.get(&[k, j])).unwrap())
                    .unwrap();
            }
            let target_value = if i == j { 1.0 } else { 0.0 };
            let mut coeffs = acc.coeffs().to_vec();
            coeffs[0] -= target_value;
            let worst = coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(worst < 1e-11, "jet inverse drift {worst} at ({i},{j})");
        }
    }
}

#[test]
fn weyl_contraction_matches_bruteforce_trace() {
    // independent oracle for `contract`: explicit summation loops
    let target = catalog::build("warped_noneinstein", &no_params()).unwrap();
    let point = vec![1.2, 0.2, -0.3, 0.4, 0.1];
    let bundle = CurvatureBundle::new(&target.structure.chart, &point, 2).unwrap();
    let w = bundle.weyl().unwrap().tensor.values();
    let ginv = bundle.g_inv.values();
    let contracted = w.contract(0, 2, Some(&ginv)).unwrap();
    let n = bundle.dim;
    for j in 0..n {
        for l in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for k in 0..n {
                    acc += ginv.get(&[i, k]) * w.get(&[i, j, k, l]);
                }
            }
            assert_relative_eq!(acc, *contracted.get(&[j, l]), epsilon = 1e-13);
        }
    }
}

#[test]
fn polar_chart_flatness_via_tensor_api() {
    let chart = MetricChart::diagonal(
        vec!["r".into(), "theta".into()],
        vec![E::constant(1.0), E::PowInt(Box::new(E::var(0)), 2)],
        vec![(0.5, 5.0), (-3.0, 3.0)],
    )
    .unwrap();
    let bundle = CurvatureBundle::new(&chart, &[2.0, 0.7], 4).unwrap();
    let rm: ComponentTensor<f64> = bundle.riemann.values();
    assert!(rm.max_abs() < 1e-12);
    assert!(bundle.scalar.value().abs() < 1e-12);
}
