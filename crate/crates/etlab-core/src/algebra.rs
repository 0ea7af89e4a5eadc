//! Randomized pure-multilinear-algebra checks, independent of the jet stack.
//!
//! These exercise the two pointwise cancellations that power the
//! integral argument for Einstein-type structures: a symmetric bilinear form
//! annihilates any tensor antisymmetric in the contracted pair, and the
//! Ricci-gradient contraction of a Cotton-type tensor built by the T-formula
//! collapses onto its squared norm. Everything here runs on plain f64
//! tensors with explicit index loops, so it doubles as the independent oracle
//! for the jet-based construction in `geometry`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::sample::stream_rng;
use crate::tensor::{ComponentTensor, MetricValue, Variance};

use Variance::Cov;

/// Random SPD metric A·Aᵀ + n·I with A entries uniform in [-1, 1]; the shift
/// keeps condition numbers small so 1e-10 relative tolerances stay meaningful.
pub fn random_spd_metric(n: usize, rng: &mut impl Rng) -> Result<MetricValue<f64>> {
    let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g = ComponentTensor::from_fn(n, vec![Cov, Cov], |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut acc = if i == j { n as f64 } else { 0.0 };
        for k in 0..n {
            acc += a[i * n + k] * a[j * n + k];
        }
        acc
    });
    MetricValue::new(g, &[])
}

pub fn random_symmetric(n: usize, rng: &mut impl Rng) -> ComponentTensor<f64> {
    let mut upper = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0);
            upper[i * n + j] = v;
            upper[j * n + i] = v;
        }
    }
    ComponentTensor::from_fn(n, vec![Cov, Cov], |idx| upper[idx[0] * n + idx[1]])
}

/// The T-formula on raw inputs: a symmetric rank-2 tensor standing in for
/// Ricci, its metric trace, and a covariant vector standing in for grad f.
pub fn t_formula(
    metric: &MetricValue<f64>,
    s: &ComponentTensor<f64>,
    v_cov: &[f64],
) -> ComponentTensor<f64> {
    let n = metric.g.dim();
    let nf = n as f64;
    let mut v_up = vec![0.0; n];
    for l in 0..n {
        for m in 0..n {
            v_up[l] += metric.g_inv.get(&[l, m]) * v_cov[m];
        }
    }
    // a_j = S_{jl} v^l
    let mut a = vec![0.0; n];
    for j in 0..n {
        for l in 0..n {
            a[j] += s.get(&[j, l]) * v_up[l];
        }
    }
    let mut trace = 0.0;
    for i in 0..n {
        for j in 0..n {
            trace += metric.g_inv.get(&[i, j]) * s.get(&[i, j]);
        }
    }
    let c1 = 1.0 / (nf - 2.0);
    let c3 = (nf - 1.0) / (nf - 2.0);
    ComponentTensor::from_fn(n, vec![Cov, Cov, Cov], |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        c1 * (a[j] * metric.g.get(&[i, k]) - a[i] * metric.g.get(&[j, k]))
            + c1 * trace * (v_cov[i] * metric.g.get(&[j, k]) - v_cov[j] * metric.g.get(&[i, k]))
            + c3 * (v_cov[j] * s.get(&[i, k]) - v_cov[i] * s.get(&[j, k]))
    })
}

/// One trial of the identity suite. Returns the two relative residuals.
fn trial_residuals(seed: u64, trial: usize) -> Result<(f64, f64)> {
    let n = [4usize, 5, 6][trial % 3];
    let mut rng = stream_rng(seed, trial as u64 + 1);
    let metric = random_spd_metric(n, &mut rng)?;
    let s = random_symmetric(n, &mut rng);
    let v_cov: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = (0.5 + rng.gen_range(0.0..1.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let h = random_symmetric(n, &mut rng);

    let t = t_formula(&metric, &s, &v_cov);
    let c = t.scale(1.0 / f);

    let raise2 = |x: &ComponentTensor<f64>| -> Result<ComponentTensor<f64>> {
        x.raise(0, &metric.g_inv)?.raise(1, &metric.g_inv)
    };

    // (a) symmetric H against the antisymmetric pair of C: 2 H^{kj} C_{jki} = 0
    let h_up = raise2(&h)?;
    let mut worst_a: f64 = 0.0;
    let mut scale_a: f64 = 0.0;
    for i in 0..n {
        let mut acc = 0.0;
        let mut mag = 0.0;
        for k in 0..n {
            for j in 0..n {
                let term = 2.0 * h_up.get(&[k, j]) * c.get(&[j, k, i]);
                acc += term;
                mag += term.abs();
            }
        }
        worst_a = worst_a.max(acc.abs());
        scale_a = scale_a.max(mag);
    }
    let rel_a = worst_a / (1.0 + scale_a);

    // (b) S^{ji} v^k C_{kji} + (n-2) f / (2(n-1)) |C|^2 = 0
    let s_up = raise2(&s)?;
    let mut v_up = vec![0.0; n];
    for l in 0..n {
        for m in 0..n {
            v_up[l] += metric.g_inv.get(&[l, m]) * v_cov[m];
        }
    }
    let mut lhs = 0.0;
    let mut mag_b = 0.0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let term = s_up.get(&[j, i]) * v_up[k] * c.get(&[k, j, i]);
                lhs += term;
                mag_b += term.abs();
            }
        }
    }
    let norm_sq = c.norm_sq(&metric.g_inv)?;
    let nf = n as f64;
    let coupling = (nf - 2.0) * f / (2.0 * (nf - 1.0)) * norm_sq;
    let rel_b = (lhs + coupling).abs() / (1.0 + mag_b.max(coupling.abs()));
    Ok((rel_a, rel_b))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AlgebraSuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub max_hessian_cancellation: f64,
    pub max_contraction_identity: f64,
    pub hessian_tolerance: f64,
    pub contraction_tolerance: f64,
    /// (trial index, residual a, residual b) for every trial over tolerance.
    pub failures: Vec<(usize, f64, f64)>,
}

impl AlgebraSuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Run `trials` seeded trials across dimensions {4, 5, 6}; each trial draws a
/// random SPD metric, Ricci stand-in, gradient stand-in and nonzero f, builds
/// C through the T-formula and asserts the two contraction identities.
pub fn random_algebra_identity_suite(seed: u64, trials: usize) -> Result<AlgebraSuiteReport> {
    if trials == 0 {
        return Err(CoreError::InvalidArgument(
            "algebra suite needs at least one trial".into(),
        ));
    }
    let hessian_tolerance = 1e-12;
    let contraction_tolerance = 1e-9;
    let residuals: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| trial_residuals(seed, t))
        .collect::<Result<_>>()?;
    let mut report = AlgebraSuiteReport {
        seed,
        trials,
        max_hessian_cancellation: 0.0,
        max_contraction_identity: 0.0,
        hessian_tolerance,
        contraction_tolerance,
        failures: Vec::new(),
    };
    for (t, &(a, b)) in residuals.iter().enumerate() {
        report.max_hessian_cancellation = report.max_hessian_cancellation.max(a);
        report.max_contraction_identity = report.max_contraction_identity.max(b);
        if a > hessian_tolerance || b > contraction_tolerance {
            report.failures.push((t, a, b));
        }
    }
    Ok(report)
}
