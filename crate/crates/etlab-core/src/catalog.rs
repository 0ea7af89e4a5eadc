//! Exact-solution catalog: flat space with a linear potential, round spheres
//! with the height potential, the static vacuum warped-product family in its
//! r-coordinate closed form, the Miao-Tam ball, and generic warped products
//! for the classification checks.
//!
//! The static family is deliberately built in the r-coordinate closed form
//! g = dr^2/(1 - r^(2-n)) + r^2 g_S rather than by integrating the profile
//! ODE: a numerically integrated profile cannot supply the exact order-6 jets
//! the curvature stack needs. The arclength parametrization survives in
//! [`example1_profile`], which reports t(r) by quadrature.

use std::collections::BTreeMap;

use crate::chart::MetricChart;
use crate::error::{CoreError, Result};
use crate::expr::ScalarExpression;
use crate::geometry::CurvatureBundle;
use crate::jet::Jet;
use crate::linalg::{cholesky_factor, jacobi_eigen, solve_lower, solve_lower_transpose};
use crate::parse::parse_expression;
use crate::quadrature::integrate;
use crate::residual::Residual;
use crate::sample::{sample_box, sample_direction, stream_rng};
use crate::structures::{CaseTag, EinsteinTypeStructure};

/// How to generate points sharing one level set of the potential.
#[derive(Debug, Clone, Copy)]
pub enum LevelSetStrategy {
    /// f depends on this coordinate only: pin it to the sample-box center.
    FixCoordinate(usize),
    /// f is radial in the chart: scale seeded directions to a fixed radius.
    FixRadius,
}

/// A warped product dr^2 b(r) + phi(r)^2 g_fiber with its assembled chart.
#[derive(Debug, Clone)]
pub struct WarpedProductChart {
    pub base_interval: (f64, f64),
    pub base_factor: ScalarExpression,
    pub warp: ScalarExpression,
    pub fiber: MetricChart,
    /// Ric_fiber = lambda * g_fiber when the fiber is Einstein.
    pub fiber_einstein_constant: Option<f64>,
    pub assembled: MetricChart,
}

impl WarpedProductChart {
    pub fn assemble(
        base_interval: (f64, f64),
        base_factor: ScalarExpression,
        warp: ScalarExpression,
        fiber: MetricChart,
        fiber_einstein_constant: Option<f64>,
    ) -> Result<WarpedProductChart> {
        let mut names = vec!["r".to_string()];
        names.extend(fiber.coord_names().iter().cloned());
        let mut domain = vec![base_interval];
        domain.extend(fiber.domain.iter().copied());
        let warp_sq = ScalarExpression::PowInt(Box::new(warp.clone()), 2);
        let fdim = fiber.dim();
        let mut upper = vec![((0usize, 0usize), base_factor.clone())];
        for a in 0..fdim {
            for b in a..fdim {
                let component = ScalarExpression::Mul(
                    Box::new(warp_sq.clone()),
                    Box::new(fiber.component(a, b).shift_vars(1)),
                );
                upper.push(((a + 1, b + 1), component));
            }
        }
        let assembled = MetricChart::from_upper_triangle(names, upper, domain)?;
        Ok(WarpedProductChart {
            base_interval,
            base_factor,
            warp,
            fiber,
            fiber_einstein_constant,
            assembled,
        })
    }

    /// |Ric_fiber - lambda g_fiber| at a fiber point, when lambda is declared.
    pub fn fiber_einstein_residual(&self, fiber_point: &[f64]) -> Result<Option<Residual>> {
        let Some(lambda) = self.fiber_einstein_constant else {
            return Ok(None);
        };
        let bundle = CurvatureBundle::new(&self.fiber, fiber_point, 2)?;
        let ric = bundle.ricci.values();
        let target = bundle.g.values().scale(lambda);
        let diff = ric.sub(&target);
        Ok(Some(Residual::from_tensor(
            &diff,
            &[ric.max_abs(), target.max_abs()],
        )))
    }
}

/// A catalog structure bundled with everything the verification suites need.
#[derive(Debug, Clone)]
pub struct VerificationTarget {
    pub name: String,
    pub structure: EinsteinTypeStructure,
    /// Sampling region, a sub-box of the chart domain chosen so guards
    /// (|f| > eps, positive-definiteness, horizon exclusion) hold.
    pub sample_box: Vec<(f64, f64)>,
    pub warped: Option<WarpedProductChart>,
    /// Passes the defining equation pair (and so all derived identities).
    pub expect_solution: bool,
    /// Cotton and every Weyl divergence vanish.
    pub expect_harmonic_weyl: bool,
    pub expect_zero_radial_weyl: bool,
    pub level_set: Option<LevelSetStrategy>,
    pub summary: String,
}

fn coords(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn sum_of_squares(names: &[String]) -> String {
    names
        .iter()
        .map(|c| format!("{c}^2"))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Unit round sphere S^n in the conformal chart g = 4/(1+|x|^2)^2 delta.
pub fn sphere_chart(n: usize) -> Result<MetricChart> {
    let names = coords("x", n);
    let conformal = format!("4/((1 + {})^2)", sum_of_squares(&names));
    let expr = parse_expression(&conformal, &names)?;
    MetricChart::diagonal(names, vec![expr; n], vec![(-3.0, 3.0); n])
}

/// Height potential on the sphere chart: (|x|^2 - 1)/(|x|^2 + 1).
fn sphere_height(names: &[String]) -> Result<ScalarExpression> {
    let ss = sum_of_squares(names);
    parse_expression(&format!("({ss} - 1)/(1 + {ss})"), names)
}

fn flat_chart(n: usize, half_width: f64) -> Result<MetricChart> {
    MetricChart::diagonal(
        coords("x", n),
        vec![ScalarExpression::constant(1.0); n],
        vec![(-half_width, half_width); n],
    )
}

/// Unit S^(n-1) fiber over r with base factor b(r) and warp phi(r) = r:
/// the closed-form static vacuum slice.
fn static_slice_chart(n: usize) -> Result<WarpedProductChart> {
    let r = vec!["r".to_string()];
    let base_factor = parse_expression(&format!("1/(1 - r^(-{}))", n - 2), &r)?;
    let warp = parse_expression("r", &r)?;
    let fiber = sphere_chart(n - 1)?;
    WarpedProductChart::assemble(
        (1.000001, 1.0e4),
        base_factor,
        warp,
        fiber,
        Some((n - 2) as f64),
    )
}

fn get_param(
    params: &BTreeMap<String, f64>,
    key: &str,
    default: f64,
    allowed: &[&str],
) -> Result<f64> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(CoreError::InvalidArgument(format!(
                "unknown parameter `{k}` (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(params.get(key).copied().unwrap_or(default))
}

fn dimension_param(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<usize> {
    let n = get_param(params, "n", 4.0, allowed)?;
    if n.fract() != 0.0 || !(4.0..=6.0).contains(&n) {
        return Err(CoreError::InvalidArgument(format!(
            "dimension n must be 4, 5 or 6, got {n}"
        )));
    }
    Ok(n as usize)
}

pub fn make_flat_linear(params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    let n = dimension_param(params, &["n"])?;
    let chart = flat_chart(n, 2.0)?;
    let names = chart.coord_names().to_vec();
    let f = parse_expression("x1", &names)?;
    let structure =
        EinsteinTypeStructure::new(chart, f, ScalarExpression::constant(0.0), CaseTag::StaticNullLambda);
    Ok(VerificationTarget {
        name: "flat_linear".into(),
        sample_box: vec![(0.2, 1.8), (-1.5, 1.5)]
            .into_iter()
            .chain(std::iter::repeat((-1.5, 1.5)))
            .take(n)
            .collect(),
        structure,
        warped: None,
        expect_solution: true,
        expect_harmonic_weyl: true,
        expect_zero_radial_weyl: true,
        level_set: Some(LevelSetStrategy::FixCoordinate(0)),
        summary: "flat space with a linear potential: the trivial static vacuum".into(),
    })
}

fn sphere_target(n: usize, case: CaseTag, name: &str, summary: &str) -> Result<VerificationTarget> {
    let chart = sphere_chart(n)?;
    let names = chart.coord_names().to_vec();
    let f = sphere_height(&names)?;
    // h = n f, forced by the trace of the defining pair on the unit sphere
    let ss = sum_of_squares(&names);
    let h = parse_expression(&format!("{n}*({ss} - 1)/(1 + {ss})"), &names)?;
    let structure = EinsteinTypeStructure::new(chart, f, h, case);
    Ok(VerificationTarget {
        name: name.into(),
        structure,
        sample_box: vec![(0.55, 0.9); n],
        warped: None,
        expect_solution: true,
        expect_harmonic_weyl: true,
        expect_zero_radial_weyl: true,
        level_set: Some(LevelSetStrategy::FixRadius),
        summary: summary.into(),
    })
}

pub fn make_sphere_height(params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    let n = dimension_param(params, &["n"])?;
    sphere_target(
        n,
        CaseTag::StaticNonNullLambda,
        "sphere_height",
        "unit round sphere with the height potential: static triple with positive cosmological constant",
    )
}

pub fn make_cpe_sphere(params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    let n = dimension_param(params, &["n"])?;
    sphere_target(
        n,
        CaseTag::Cpe,
        "cpe_sphere",
        "unit round sphere with the height potential as a critical-point-equation solution",
    )
}

fn slice_target(name: &str, params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    let allowed = ["n", "r_min", "r_max"];
    let n = dimension_param(params, &allowed)?;
    let r_min = get_param(params, "r_min", 1.3, &allowed)?;
    let r_max = get_param(params, "r_max", 4.0, &allowed)?;
    if !(1.0 < r_min && r_min < r_max) {
        return Err(CoreError::InvalidArgument(format!(
            "need 1 < r_min < r_max, got ({r_min}, {r_max})"
        )));
    }
    let warped = static_slice_chart(n)?;
    let chart = warped.assembled.clone();
    let names = chart.coord_names().to_vec();
    let f = parse_expression(&format!("sqrt(1 - r^(-{}))", n - 2), &names)?;
    let structure =
        EinsteinTypeStructure::new(chart, f, ScalarExpression::constant(0.0), CaseTag::StaticNullLambda);
    let mut sample = vec![(r_min, r_max)];
    sample.extend(std::iter::repeat((-0.8, 0.8)).take(n - 1));
    Ok(VerificationTarget {
        name: name.into(),
        structure,
        sample_box: sample,
        warped: Some(warped),
        expect_solution: true,
        expect_harmonic_weyl: true,
        expect_zero_radial_weyl: true,
        level_set: Some(LevelSetStrategy::FixCoordinate(0)),
        summary: "static vacuum slice over a unit-sphere fiber in the r-coordinate closed form"
            .into(),
    })
}

pub fn make_schwarzschild_slice(params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    slice_target("schwarzschild_slice", params)
}

pub fn make_example1(params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    let mut target = slice_target("example1", params)?;
    target.summary =
        "warped-product static vacuum family over an Einstein fiber, r-coordinate form with potential sqrt(1 - r^(2-n))"
            .into();
    Ok(target)
}

pub fn make_miao_tam_ball(params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    let n = dimension_param(params, &["n"])?;
    let chart = flat_chart(n, 2.0)?;
    let names = chart.coord_names().to_vec();
    let denom = 2 * (n - 1);
    let f = parse_expression(&format!("-({})/{denom}", sum_of_squares(&names)), &names)?;
    let h = ScalarExpression::constant(1.0 / (n as f64 - 1.0));
    let structure = EinsteinTypeStructure::new(chart, f, h, CaseTag::MiaoTam);
    Ok(VerificationTarget {
        name: "miao_tam_ball".into(),
        structure,
        sample_box: vec![(0.3, 1.2); n],
        warped: None,
        expect_solution: true,
        expect_harmonic_weyl: true,
        expect_zero_radial_weyl: true,
        level_set: Some(LevelSetStrategy::FixRadius),
        summary: "flat ball with the quadratic volume-critical potential".into(),
    })
}

pub fn make_warped_generic(params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    let n = dimension_param(params, &["n"])?;
    let r = vec!["r".to_string()];
    let warped = WarpedProductChart::assemble(
        (0.3, 3.0),
        ScalarExpression::constant(1.0),
        parse_expression("1 + 0.25*r^2", &r)?,
        sphere_chart(n - 1)?,
        Some((n - 2) as f64),
    )?;
    let chart = warped.assembled.clone();
    let names = chart.coord_names().to_vec();
    let f = parse_expression("r", &names)?;
    let structure =
        EinsteinTypeStructure::new(chart, f, ScalarExpression::constant(0.0), CaseTag::Generic);
    let mut sample = vec![(0.5, 2.0)];
    sample.extend(std::iter::repeat((-0.8, 0.8)).take(n - 1));
    Ok(VerificationTarget {
        name: "warped_generic".into(),
        structure,
        sample_box: sample,
        warped: Some(warped),
        expect_solution: false,
        expect_harmonic_weyl: false,
        expect_zero_radial_weyl: true,
        level_set: Some(LevelSetStrategy::FixCoordinate(0)),
        summary: "generic warp over a unit-sphere fiber with a radial potential (not a solution)"
            .into(),
    })
}

pub fn make_warped_noneinstein(params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    let allowed = ["ratio"];
    let ratio = get_param(params, "ratio", 1.5, &allowed)?;
    if ratio <= 0.0 || (ratio - 1.0).abs() < 0.05 {
        return Err(CoreError::InvalidArgument(format!(
            "fiber radius ratio must be positive and away from 1, got {ratio}"
        )));
    }
    // fiber = S^2(1) x S^2(ratio): Einstein on each factor, not jointly
    let names = vec![
        "u1".to_string(),
        "u2".to_string(),
        "v1".to_string(),
        "v2".to_string(),
    ];
    let first = parse_expression("4/((1 + u1^2 + u2^2)^2)", &names)?;
    let rr = format!("{:?}", ratio * ratio);
    let second = parse_expression(&format!("{rr}*4/((1 + v1^2 + v2^2)^2)"), &names)?;
    let fiber = MetricChart::diagonal(
        names,
        vec![first.clone(), first, second.clone(), second],
        vec![(-3.0, 3.0); 4],
    )?;
    let r = vec!["r".to_string()];
    let warped = WarpedProductChart::assemble(
        (0.3, 3.0),
        ScalarExpression::constant(1.0),
        parse_expression("1 + 0.25*r^2", &r)?,
        fiber,
        None,
    )?;
    let chart = warped.assembled.clone();
    let coord_names = chart.coord_names().to_vec();
    let f = parse_expression("r", &coord_names)?;
    let structure =
        EinsteinTypeStructure::new(chart, f, ScalarExpression::constant(0.0), CaseTag::Generic);
    let mut sample = vec![(0.5, 2.0)];
    sample.extend(std::iter::repeat((-0.8, 0.8)).take(4));
    Ok(VerificationTarget {
        name: "warped_noneinstein".into(),
        structure,
        sample_box: sample,
        warped: Some(warped),
        expect_solution: false,
        expect_harmonic_weyl: false,
        expect_zero_radial_weyl: false,
        level_set: Some(LevelSetStrategy::FixCoordinate(0)),
        summary: "warped product over the non-Einstein fiber S2(1) x S2(ratio), n = 5".into(),
    })
}

pub struct CatalogEntryInfo {
    pub name: &'static str,
    pub params: &'static [(&'static str, f64)],
    pub summary: &'static str,
}

pub fn entries() -> Vec<CatalogEntryInfo> {
    vec![
        CatalogEntryInfo {
            name: "flat_linear",
            params: &[("n", 4.0)],
            summary: "flat space, f = x1, h = 0 (trivial static vacuum)",
        },
        CatalogEntryInfo {
            name: "sphere_height",
            params: &[("n", 4.0)],
            summary: "unit sphere, height potential, h = n f (static, positive cosmological constant)",
        },
        CatalogEntryInfo {
            name: "cpe_sphere",
            params: &[("n", 4.0)],
            summary: "unit sphere, height potential, critical-point-equation pair",
        },
        CatalogEntryInfo {
            name: "schwarzschild_slice",
            params: &[("n", 4.0), ("r_min", 1.3), ("r_max", 4.0)],
            summary: "static vacuum slice g = dr^2/(1-r^(2-n)) + r^2 g_S, f = sqrt(1-r^(2-n))",
        },
        CatalogEntryInfo {
            name: "example1",
            params: &[("n", 4.0), ("r_min", 1.3), ("r_max", 4.0)],
            summary: "warped-product static vacuum family (same closed form, with profile reporting)",
        },
        CatalogEntryInfo {
            name: "miao_tam_ball",
            params: &[("n", 4.0)],
            summary: "flat ball, f = -|x|^2/(2(n-1)), h = 1/(n-1) (volume-critical)",
        },
        CatalogEntryInfo {
            name: "warped_generic",
            params: &[("n", 4.0)],
            summary: "generic warp over a unit-sphere fiber, f = r (classification checks)",
        },
        CatalogEntryInfo {
            name: "warped_noneinstein",
            params: &[("ratio", 1.5)],
            summary: "warp over S2(1) x S2(ratio): non-Einstein fiber control",
        },
    ]
}

pub fn build(name: &str, params: &BTreeMap<String, f64>) -> Result<VerificationTarget> {
    match name {
        "flat_linear" => make_flat_linear(params),
        "sphere_height" => make_sphere_height(params),
        "cpe_sphere" => make_cpe_sphere(params),
        "schwarzschild_slice" => make_schwarzschild_slice(params),
        "example1" => make_example1(params),
        "miao_tam_ball" => make_miao_tam_ball(params),
        "warped_generic" => make_warped_generic(params),
        "warped_noneinstein" => make_warped_noneinstein(params),
        other => Err(CoreError::UnknownCatalogEntry(other.to_string())),
    }
}

/// Sample points for the target, drawn from its sample box.
pub fn target_points(target: &VerificationTarget, count: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_box(&target.sample_box, count, seed)
}

/// Points sharing one level set of the potential, per the target's strategy.
pub fn level_set_points(
    target: &VerificationTarget,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let strategy = target.level_set.ok_or_else(|| {
        CoreError::InvalidArgument(format!(
            "no level-set strategy for `{}`",
            target.name
        ))
    })?;
    match strategy {
        LevelSetStrategy::FixCoordinate(c) => {
            let mut points = sample_box(&target.sample_box, count, seed);
            let (lo, hi) = target.sample_box[c];
            let fixed = 0.5 * (lo + hi);
            for p in &mut points {
                p[c] = fixed;
            }
            Ok(points)
        }
        LevelSetStrategy::FixRadius => {
            let n = target.sample_box.len();
            let center: Vec<f64> = target
                .sample_box
                .iter()
                .map(|&(lo, hi)| 0.5 * (lo + hi))
                .collect();
            let radius = center.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut rng = stream_rng(seed, 0x4C45_5645);
            Ok((0..count)
                .map(|_| {
                    sample_direction(n, &mut rng)
                        .into_iter()
                        .map(|u| radius * u)
                        .collect()
                })
                .collect())
        }
    }
}

/// Arclength profile of the static family: t(r) = integral from 1 to r of
/// du/sqrt(1 - u^(2-n)), f = r, f' = sqrt(1 - r^(2-n)). The endpoint
/// singularity at u = 1 is removed by u = 1 + s^2.
pub fn example1_profile(n: usize, r: f64) -> Result<(f64, f64, f64)> {
    if n < 4 {
        return Err(CoreError::UnsupportedDimension {
            dim: n,
            context: "example1 profile",
        });
    }
    if r <= 1.0 {
        return Err(CoreError::InvalidArgument(format!(
            "profile requires r > 1, got {r}"
        )));
    }
    let power = 2.0 - n as f64;
    // 1 - u^(2-n) evaluated without cancellation near u = 1
    let one_minus = |u: f64| -> f64 { -(power * u.ln()).exp_m1() };
    let integrand = |s: f64| -> f64 {
        if s == 0.0 {
            2.0 / ((n - 2) as f64).sqrt()
        } else {
            let u = 1.0 + s * s;
            2.0 * s / (-(power * (s * s).ln_1p()).exp_m1()).sqrt()
                .max(f64::MIN_POSITIVE)
                * {
                    let _ = u;
                    1.0
                }
        }
    };
    let upper = (r - 1.0).sqrt();
    let t = integrate(&integrand, 0.0, upper, 1e-13);
    let f_prime = one_minus(r).sqrt();
    Ok((t, r, f_prime))
}

/// Report from the Ricci-eigenvector check at a point.
#[derive(Debug, Clone)]
pub struct RicciEigenvectorReport {
    /// Ric(grad f) - kappa grad f with kappa the Rayleigh quotient.
    pub eigenvector: Residual,
    /// grad_j f (lambda_j + (n-1) lambda_i - R) over all i != j in the
    /// g-orthonormal eigenframe of Ric.
    pub frame_combination: Residual,
    pub cotton_relative: f64,
    pub radial_weyl_relative: f64,
}

pub fn check_ricci_eigenvector(
    structure: &EinsteinTypeStructure,
    point: &[f64],
    order: usize,
) -> Result<RicciEigenvectorReport> {
    let bundle = CurvatureBundle::new(&structure.chart, point, order.max(3))?;
    let f_jet = structure.f.lift(point, bundle.order)?;
    let n = bundle.dim;

    let df = bundle.gradient(&f_jet)?.values();
    let ginv = bundle.g_inv.values();
    let g = bundle.g.values();
    let df_up = df.raise(0, &ginv)?;
    let grad_norm_sq: f64 = (0..n).map(|i| df.get(&[i]) * df_up.get(&[i])).sum();
    if grad_norm_sq.sqrt() < 1e-8 {
        return Err(CoreError::CriticalPoint {
            value: grad_norm_sq.sqrt(),
            point: point.to_vec(),
        });
    }

    // preconditions, reported not enforced
    let cotton = bundle.cotton()?.values();
    let d_ricci = bundle.cov_derivative(&bundle.ricci)?.values();
    let cotton_relative = cotton.max_abs() / (1.0 + d_ricci.max_abs());
    let radial = bundle.radial_weyl(&f_jet)?.values();
    let w = bundle.weyl()?.tensor.values();
    let radial_weyl_relative =
        radial.max_abs() / (1.0 + w.max_abs() * df_up.max_abs());

    let ric = bundle.ricci.values();
    // Ric(grad f) in covariant components, and the Rayleigh quotient kappa
    let mut ric_grad = vec![0.0; n];
    for i in 0..n {
        for b in 0..n {
            ric_grad[i] += ric.get(&[i, b]) * df_up.get(&[b]);
        }
    }
    let quad: f64 = (0..n).map(|i| ric_grad[i] * df_up.get(&[i])).sum();
    let kappa = quad / grad_norm_sq;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let r = ric_grad[i] - kappa * df.get(&[i]);
        worst = worst.max(r.abs());
        scale = scale
            .max(ric_grad[i].abs())
            .max((kappa * df.get(&[i])).abs());
    }
    let eigenvector = Residual::new(worst, scale);

    // g-orthonormal eigenframe of Ric via the Cholesky-whitened problem
    // B = L^-1 Ric L^-T with g = L L^T; frame vectors are L^-T q_k
    let g_flat: Vec<f64> = (0..n * n).map(|f| *g.get(&[f / n, f % n])).collect();
    let l = cholesky_factor(&g_flat, n).ok_or_else(|| CoreError::NotPositiveDefinite {
        point: point.to_vec(),
    })?;
    let mut x = vec![0.0; n * n]; // X = L^-1 Ric, column by column
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| *ric.get(&[i, j])).collect();
        let solved = solve_lower(&l, n, &col);
        for i in 0..n {
            x[i * n + j] = solved[i];
        }
    }
    let mut b = vec![0.0; n * n]; // B = L^-1 X^T (columns of X^T are rows of X)
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| x[j * n + i]).collect();
        let solved = solve_lower(&l, n, &col);
        for i in 0..n {
            b[i * n + j] = solved[i];
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (b[i * n + j] + b[j * n + i]);
            b[i * n + j] = avg;
            b[j * n + i] = avg;
        }
    }
    let (lambdas, q) = jacobi_eigen(&b, n);
    let mut frame_df = vec![0.0; n];
    for k in 0..n {
        let q_col: Vec<f64> = (0..n).map(|i| q[i * n + k]).collect();
        let e_k = solve_lower_transpose(&l, n, &q_col);
        for i in 0..n {
            frame_df[k] += df.get(&[i]) * e_k[i];
        }
    }
    let r_scalar = bundle.scalar.value();
    let mut worst_c: f64 = 0.0;
    let mut scale_c: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let combo = lambdas[j] + (n as f64 - 1.0) * lambdas[i] - r_scalar;
            worst_c = worst_c.max((frame_df[j] * combo).abs());
            scale_c = scale_c.max(
                frame_df[j].abs()
                    * (lambdas[j].abs() + (n as f64 - 1.0) * lambdas[i].abs() + r_scalar.abs()),
            );
        }
    }
    Ok(RicciEigenvectorReport {
        eigenvector,
        frame_combination: Residual::new(worst_c, scale_c),
        cotton_relative,
        radial_weyl_relative,
    })
}

/// Report from the level-set check over a family of points sharing one
/// f-value.
#[derive(Debug, Clone)]
pub struct LevelSetReport {
    /// max - min of |grad f| across the points.
    pub spread: f64,
    pub gradient_norms: Vec<f64>,
    /// f Ric(e_a, e_1) - e_a(|grad f|^2)/2 - h e_a(f) in the adapted frame.
    pub identity: Residual,
}

pub fn check_level_set_gradient(
    structure: &EinsteinTypeStructure,
    points: &[Vec<f64>],
    order: usize,
) -> Result<LevelSetReport> {
    if points.is_empty() {
        return Err(CoreError::InvalidArgument(
            "level-set check needs at least one point".into(),
        ));
    }
    let f_values: Vec<f64> = points
        .iter()
        .map(|p| structure.f.eval(p))
        .collect::<Result<_>>()?;
    let f0 = f_values[0];
    for &v in &f_values {
        if (v - f0).abs() > 1e-10 {
            return Err(CoreError::InvalidArgument(format!(
                "points do not share a level set: f spans [{}, {}]",
                f_values.iter().cloned().fold(f64::INFINITY, f64::min),
                f_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )));
        }
    }

    let mut norms = Vec::with_capacity(points.len());
    let mut identity = Residual::zero();
    for p in points {
        let bundle = CurvatureBundle::new(&structure.chart, p, order.max(3))?;
        let n = bundle.dim;
        let f_jet = structure.f.lift(p, bundle.order)?;
        let h_val = structure.h.eval(p)?;
        let f_val = f_jet.value();

        let df_jets = bundle.gradient(&f_jet)?;
        let df = df_jets.values();
        let ginv = bundle.g_inv.values();
        let g = bundle.g.values();
        let df_up = df.raise(0, &ginv)?;
        let norm_sq: f64 = (0..n).map(|i| df.get(&[i]) * df_up.get(&[i])).sum();
        let norm = norm_sq.sqrt();
        if norm < 1e-8 {
            return Err(CoreError::CriticalPoint {
                value: norm,
                point: p.clone(),
            });
        }
        norms.push(norm);

        // |grad f|^2 as a jet field and its gradient
        let grad_sq_jet = {
            let order_m1 = bundle.order - 1;
            let ginv_j = bundle.g_inv.truncated(order_m1);
            let mut acc = Jet::constant(f_jet.num_vars(), order_m1, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let term = ginv_j
                        .get(&[i, j])
                        .mul(&f_jet.partial(i)?)?
                        .mul(&f_jet.partial(j)?)?;
                    acc = acc.add(&term)?;
                }
            }
            acc
        };
        let d_grad_sq = bundle.gradient(&grad_sq_jet)?.values();

        // adapted g-orthonormal frame: e_1 = grad f / |grad f|, rest by
        // Gram-Schmidt over the coordinate directions
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
        frame.push((0..n).map(|i| df_up.get(&[i]) / norm).collect());
        for c in 0..n {
            if frame.len() == n {
                break;
            }
            let mut v: Vec<f64> = (0..n).map(|i| if i == c { 1.0 } else { 0.0 }).collect();
            for e in &frame {
                let mut inner = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        inner += g.get(&[i, j]) * v[i] * e[j];
                    }
                }
                for i in 0..n {
                    v[i] -= inner * e[i];
                }
            }
            let mut vn = 0.0;
            for i in 0..n {
                for j in 0..n {
                    vn += g.get(&[i, j]) * v[i] * v[j];
                }
            }
            if vn > 1e-12 {
                let vn = vn.sqrt();
                frame.push(v.into_iter().map(|x| x / vn).collect());
            }
        }
        if frame.len() != n {
            return Err(CoreError::SingularSystem {
                context: "adapted frame",
            });
        }

        let ric = bundle.ricci.values();
        for e in frame.iter().skip(1) {
            let mut ric_a1 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    ric_a1 += ric.get(&[i, j]) * e[i] * frame[0][j];
                }
            }
            let ea_grad_sq: f64 = (0..n).map(|i| d_grad_sq.get(&[i]) * e[i]).sum();
            let ea_f: f64 = (0..n).map(|i| df.get(&[i]) * e[i]).sum();
            let value = f_val * ric_a1 - 0.5 * ea_grad_sq - h_val * ea_f;
            identity = identity.max(Residual::new(
                value.abs(),
                (f_val * ric_a1)
                    .abs()
                    .max((0.5 * ea_grad_sq).abs())
                    .max((h_val * ea_f).abs()),
            ));
        }
    }
    let spread = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - norms.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LevelSetReport {
        spread,
        gradient_norms: norms,
        identity,
    })
}

/// Report from the fiber Weyl formula check on a warped product.
#[derive(Debug, Clone)]
pub struct FiberWeylReport {
    /// W(e1, a, e1, b) + traceless fiber Ricci / (n-2), componentwise.
    pub residual: Residual,
    /// Max-abs of the traceless-fiber-Ricci side (zero for Einstein fibers).
    pub rhs_max: f64,
    pub fiber_einstein: Option<Residual>,
}

/// For g = b(r) dr^2 + phi(r)^2 g_fiber the Weyl block W(e1, ., e1, .)
/// restricted to fiber pairs equals minus the traceless fiber Ricci over
/// (n-2), in the sign convention pinned by the commutation rule. Einstein
/// fibers therefore force the radial Weyl block to vanish.
pub fn check_fiber_einstein_weyl(
    warped: &WarpedProductChart,
    point: &[f64],
    order: usize,
) -> Result<FiberWeylReport> {
    let bundle = CurvatureBundle::new(&warped.assembled, point, order.max(2))?;
    let n = bundle.dim;
    if n < 4 {
        return Err(CoreError::UnsupportedDimension {
            dim: n,
            context: "fiber weyl formula",
        });
    }
    let w = bundle.weyl()?.tensor.values();
    let b_val = warped.base_factor.eval(&point[..1])?;

    let fiber_point = &point[1..];
    let fiber_bundle = CurvatureBundle::new(&warped.fiber, fiber_point, 2)?;
    let fric = fiber_bundle.ricci.values();
    let fscalar = fiber_bundle.scalar.value();
    let fg = fiber_bundle.g.values();

    let m = n - 1;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut rhs_max: f64 = 0.0;
    for a in 0..m {
        for c in 0..m {
            let lhs = w.get(&[0, a + 1, 0, c + 1]) / b_val;
            let traceless = fric.get(&[a, c]) - fscalar / (m as f64) * fg.get(&[a, c]);
            let rhs = -traceless / (n as f64 - 2.0);
            worst = worst.max((lhs - rhs).abs());
            scale = scale.max(lhs.abs()).max(rhs.abs());
            rhs_max = rhs_max.max(rhs.abs());
        }
    }
    let fiber_einstein = warped.fiber_einstein_residual(fiber_point)?;
    Ok(FiberWeylReport {
        residual: Residual::new(worst, scale),
        rhs_max,
        fiber_einstein,
    })
}
