//! Einstein-type structures (g, f, h) and the residual evaluators for every
//! identity they must satisfy: the defining equation pair, the gradient-of-h
//! relation, the three derivative lemmas built on the tensor T, and the
//! special-case equation pairs (static vacuum, perfect fluid, CPE, Miao-Tam).
//!
//! Left and right sides of each lemma are evaluated through separate code
//! paths (no shared subexpression across sides), so a sign bug in one route
//! cannot cancel silently.

use std::cell::OnceCell;

use serde::{Deserialize, Serialize};

use crate::chart::MetricChart;
use crate::error::{CoreError, Result};
use crate::expr::ScalarExpression;
use crate::geometry::CurvatureBundle;
use crate::jet::Jet;
use crate::residual::Residual;
use crate::tensor::{ComponentTensor, Variance};

use Variance::Cov;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    Generic,
    StaticNullLambda,
    StaticNonNullLambda,
    PerfectFluid,
    Cpe,
    MiaoTam,
}

impl CaseTag {
    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::Generic => "generic",
            CaseTag::StaticNullLambda => "static_null_lambda",
            CaseTag::StaticNonNullLambda => "static_nonnull_lambda",
            CaseTag::PerfectFluid => "perfect_fluid",
            CaseTag::Cpe => "cpe",
            CaseTag::MiaoTam => "miao_tam",
        }
    }
}

/// A chart with potential f and coefficient h; the object every residual in
/// this module is evaluated against.
#[derive(Debug, Clone)]
pub struct EinsteinTypeStructure {
    pub chart: MetricChart,
    pub f: ScalarExpression,
    pub h: ScalarExpression,
    pub case_tag: CaseTag,
    /// Points with |f| (or |1+f| for CPE) at or below this are rejected.
    pub epsilon_f: f64,
}

impl EinsteinTypeStructure {
    pub fn new(
        chart: MetricChart,
        f: ScalarExpression,
        h: ScalarExpression,
        case_tag: CaseTag,
    ) -> EinsteinTypeStructure {
        EinsteinTypeStructure {
            chart,
            f,
            h,
            case_tag,
            epsilon_f: 1e-6,
        }
    }
}

/// Tensor-valued residual plus its relative measure.
#[derive(Debug, Clone)]
pub struct EvaluatedResidual {
    pub values: ComponentTensor<f64>,
    pub residual: Residual,
}

#[derive(Debug, Clone, Copy)]
pub struct ScalarResidual {
    pub value: f64,
    pub residual: Residual,
}

/// Solved perfect-fluid coefficients at a point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerfectFluidValues {
    pub density: f64,
    pub pressure: f64,
    /// density >= |pressure|
    pub energy_condition: bool,
    pub back_substitution: f64,
}

/// Residual pair for the tagged special case.
#[derive(Debug, Clone)]
pub struct SpecialCaseResidual {
    pub principal: EvaluatedResidual,
    pub trace: ScalarResidual,
    pub fluid: Option<PerfectFluidValues>,
}

/// All curvature and potential data of one structure at one point, cached so
/// a suite can evaluate many identities without rebuilding the stack.
pub struct StructureEval<'a> {
    pub structure: &'a EinsteinTypeStructure,
    pub bundle: CurvatureBundle,
    pub f_jet: Jet,
    pub h_jet: Jet,
    /// Switch for the perfect-fluid trace equation: multiply the (mu, rho)
    /// summand by f instead of taking the equation exactly as printed.
    pub pfe_trace_times_f: bool,
    weyl: OnceCell<ComponentTensor<Jet>>,
    cotton: OnceCell<ComponentTensor<Jet>>,
    t_tensor: OnceCell<ComponentTensor<Jet>>,
    hessian: OnceCell<ComponentTensor<Jet>>,
}

impl<'a> StructureEval<'a> {
    pub fn new(
        structure: &'a EinsteinTypeStructure,
        point: &[f64],
        order: usize,
    ) -> Result<StructureEval<'a>> {
        let bundle = CurvatureBundle::new(&structure.chart, point, order)?;
        let f_jet = structure.f.lift(point, order)?;
        let h_jet = structure.h.lift(point, order)?;
        let guard_value = if structure.case_tag == CaseTag::Cpe {
            1.0 + f_jet.value()
        } else {
            f_jet.value()
        };
        if guard_value.abs() <= structure.epsilon_f {
            return Err(CoreError::NearZeroPotential {
                value: guard_value,
                guard: structure.epsilon_f,
                point: point.to_vec(),
            });
        }
        Ok(StructureEval {
            structure,
            bundle,
            f_jet,
            h_jet,
            pfe_trace_times_f: false,
            weyl: OnceCell::new(),
            cotton: OnceCell::new(),
            t_tensor: OnceCell::new(),
            hessian: OnceCell::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.bundle.dim
    }

    pub fn weyl(&self) -> Result<&ComponentTensor<Jet>> {
        if self.weyl.get().is_none() {
            let w = self.bundle.weyl()?.tensor;
            let _ = self.weyl.set(w);
        }
        Ok(self.weyl.get().expect("weyl cache"))
    }

    pub fn cotton(&self) -> Result<&ComponentTensor<Jet>> {
        if self.cotton.get().is_none() {
            let c = self.bundle.cotton()?;
            let _ = self.cotton.set(c);
        }
        Ok(self.cotton.get().expect("cotton cache"))
    }

    pub fn t_tensor(&self) -> Result<&ComponentTensor<Jet>> {
        if self.t_tensor.get().is_none() {
            let t = self.bundle.t_tensor(&self.f_jet)?;
            let _ = self.t_tensor.set(t);
        }
        Ok(self.t_tensor.get().expect("t cache"))
    }

    pub fn hessian(&self) -> Result<&ComponentTensor<Jet>> {
        if self.hessian.get().is_none() {
            let h = self.bundle.hessian(&self.f_jet)?;
            let _ = self.hessian.set(h);
        }
        Ok(self.hessian.get().expect("hessian cache"))
    }

    fn require_order(&self, required: usize, context: &str) -> Result<()> {
        if self.bundle.order < required {
            return Err(CoreError::OrderExhausted {
                required,
                available: self.bundle.order,
                context: context.to_string(),
            });
        }
        Ok(())
    }

    /// f Ric - Hess f - h g.
    pub fn residual_principal(&self) -> Result<EvaluatedResidual> {
        let f = self.f_jet.value();
        let h = self.h_jet.value();
        let f_ric = self.bundle.ricci.values().scale(f);
        let hess = self.hessian()?.values();
        let hg = self.bundle.g.values().scale(h);
        let values = f_ric.sub(&hess).sub(&hg);
        let residual = Residual::from_tensor(
            &values,
            &[f_ric.max_abs(), hess.max_abs(), hg.max_abs()],
        );
        Ok(EvaluatedResidual { values, residual })
    }

    /// f R - Δf - n h.
    pub fn residual_trace(&self) -> Result<ScalarResidual> {
        let n = self.dim() as f64;
        let f_r = self.f_jet.value() * self.bundle.scalar.value();
        let lap = self.bundle.laplacian(&self.f_jet)?.value();
        let nh = n * self.h_jet.value();
        let value = f_r - lap - nh;
        Ok(ScalarResidual {
            value,
            residual: Residual::from_scalar(value, &[f_r.abs(), lap.abs(), nh.abs()]),
        })
    }

    /// g-trace of the principal residual (must equal `residual_trace` to
    /// machine precision for every input, solution or not).
    pub fn trace_of_principal(&self) -> Result<f64> {
        let principal = self.residual_principal()?.values;
        let ginv = self.bundle.g_inv.values();
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += ginv.get(&[i, j]) * principal.get(&[i, j]);
            }
        }
        Ok(acc)
    }

    /// grad h - (R grad f + f grad R / 2) / (n - 1).
    pub fn residual_grad_h(&self) -> Result<EvaluatedResidual> {
        let n = self.dim();
        let dh = self.bundle.gradient(&self.h_jet)?.values();
        let df = self.bundle.gradient(&self.f_jet)?.values();
        let dr = self.bundle.gradient(&self.bundle.scalar)?.values();
        let r = self.bundle.scalar.value();
        let f = self.f_jet.value();
        let c = 1.0 / (n as f64 - 1.0);
        let rhs = df.scale(r * c).add(&dr.scale(0.5 * f * c));
        let values = dh.sub(&rhs);
        let residual =
            Residual::from_tensor(&values, &[dh.max_abs(), rhs.max_abs()]);
        Ok(EvaluatedResidual { values, residual })
    }

    /// f C - W(., ., ., grad f) - T.
    pub fn residual_lemma_fc(&self) -> Result<EvaluatedResidual> {
        self.require_order(3, "lemma fC = W grad f + T")?;
        let f = self.f_jet.value();
        let fc = self.cotton()?.values().scale(f);
        let radial = self.bundle.radial_weyl(&self.f_jet)?.values();
        let t = self.t_tensor()?.values();
        let values = fc.sub(&radial).sub(&t);
        let residual = Residual::from_tensor(
            &values,
            &[fc.max_abs(), radial.max_abs(), t.max_abs()],
        );
        Ok(EvaluatedResidual { values, residual })
    }

    /// Jet field T/f (order K-2), the object under the derivative lemmas.
    fn t_over_f(&self) -> Result<ComponentTensor<Jet>> {
        let t = self.t_tensor()?;
        let inv_f = self.f_jet.truncate(t.entry_order()).recip()?;
        Ok(t.map(|e| e.mul(&inv_f).expect("t/f order mismatch")))
    }

    /// (n-2) B + grad^k (T_ikj / f) - (n-3)/(n-2) C_jki grad^k f / f
    /// - W_ikjl grad^k f grad^l f / f^2.
    pub fn residual_lemma_bach(&self) -> Result<EvaluatedResidual> {
        self.require_order(4, "bach lemma")?;
        let n = self.dim();
        let nf = n as f64;
        let f = self.f_jet.value();
        let bach = self.bundle.bach()?.values().scale(nf - 2.0);

        let div_t_over_f = {
            let field = self.t_over_f()?;
            let d = self.bundle.cov_derivative(&field)?; // [m, i, k, j]
            self.bundle.contract_up(&d, 0, 2)?.values() // grad^k -> [i, j]
        };

        let cotton = self.cotton()?.values();
        let w = self.weyl()?.values();
        let df_up = {
            let g = self.bundle.gradient(&self.f_jet)?;
            self.bundle.raise_slot(&g, 0)?.values()
        };
        let cotton_term = ComponentTensor::from_fn(n, vec![Cov, Cov], |idx| {
            let (i, j) = (idx[0], idx[1]);
            let mut acc = 0.0;
            for k in 0..n {
                acc += cotton.get(&[j, k, i]) * df_up.get(&[k]);
            }
            acc * (nf - 3.0) / (nf - 2.0) / f
        });
        let weyl_term = ComponentTensor::from_fn(n, vec![Cov, Cov], |idx| {
            let (i, j) = (idx[0], idx[1]);
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += w.get(&[i, k, j, l]) * df_up.get(&[k]) * df_up.get(&[l]);
                }
            }
            acc / (f * f)
        });

        let values = bach
            .add(&div_t_over_f)
            .sub(&cotton_term)
            .sub(&weyl_term);
        let residual = Residual::from_tensor(
            &values,
            &[
                bach.max_abs(),
                div_t_over_f.max_abs(),
                cotton_term.max_abs(),
                weyl_term.max_abs(),
            ],
        );
        Ok(EvaluatedResidual { values, residual })
    }

    /// W_ikjl (Ric^{ik} grad^l f + Ric^{il} grad^k f) contracted at jet level,
    /// divided by f: the shared right-hand ingredient of the second- and
    /// third-order lemmas, returned as a rank-1 jet field over j.
    fn weyl_ricci_gradient_field(&self) -> Result<ComponentTensor<Jet>> {
        let w = self.weyl()?;
        let order = w.entry_order();
        let n = self.dim();
        let ric_up = {
            let r = self.bundle.ricci.truncated(order);
            let r = self.bundle.raise_slot(&r, 0)?;
            self.bundle.raise_slot(&r, 1)?
        };
        let df_up = {
            let g = self.bundle.gradient(&self.f_jet)?.truncated(order);
            self.bundle.raise_slot(&g, 0)?
        };
        let inv_f = self.f_jet.truncate(order).recip()?;
        let zero = Jet::constant(self.f_jet.num_vars(), order, 0.0);
        let mut entries = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = zero.clone();
            for i in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let combo = ric_up
                            .get(&[i, k])
                            .mul(df_up.get(&[l]))?
                            .add(&ric_up.get(&[i, l]).mul(df_up.get(&[k]))?)?;
                        acc = acc.add(&w.get(&[i, k, j, l]).mul(&combo)?)?;
                    }
                }
            }
            entries.push(acc.mul(&inv_f)?);
        }
        Ok(ComponentTensor::from_fn(n, vec![Cov], |idx| {
            entries[idx[0]].clone()
        }))
    }

    /// C_jki Ric^{ik} - (n-2) grad^i grad^k (T_ikj / f)
    /// + (n-2) (1/f) W_ikjl (Ric^{ik} grad^l f + Ric^{il} grad^k f).
    pub fn residual_lemma_second_order(&self) -> Result<EvaluatedResidual> {
        self.require_order(5, "second-order lemma")?;
        let n = self.dim();
        let nf = n as f64;
        let cotton = self.cotton()?.values();
        let ric_up = {
            let r = self.bundle.ricci.values();
            let ginv = self.bundle.g_inv.values();
            r.raise(0, &ginv)?.raise(1, &ginv)?
        };
        let lhs = ComponentTensor::from_fn(n, vec![Cov], |idx| {
            let j = idx[0];
            let mut acc = 0.0;
            for k in 0..n {
                for i in 0..n {
                    acc += cotton.get(&[j, k, i]) * ric_up.get(&[i, k]);
                }
            }
            acc
        });

        let double_div = {
            let field = self.t_over_f()?;
            let d1 = self.bundle.cov_derivative(&field)?; // [m, i, k, j]
            let e1 = self.bundle.contract_up(&d1, 0, 2)?; // grad^k -> [i, j]
            let d2 = self.bundle.cov_derivative(&e1)?; // [m, i, j]
            self.bundle.contract_up(&d2, 0, 1)?.values() // grad^i -> [j]
        };

        let weyl_term = self.weyl_ricci_gradient_field()?.values();

        let values = lhs
            .sub(&double_div.scale(nf - 2.0))
            .add(&weyl_term.scale(nf - 2.0));
        let residual = Residual::from_tensor(
            &values,
            &[
                lhs.max_abs(),
                double_div.max_abs() * (nf - 2.0),
                weyl_term.max_abs() * (nf - 2.0),
            ],
        );
        Ok(EvaluatedResidual { values, residual })
    }

    /// |C|^2 / 2 + Ric^{ik} grad^j C_jki - (n-2) grad^j grad^i grad^k (T_ikj / f)
    /// + (n-2) grad^j [ (1/f) W_ikjl (Ric^{ik} grad^l f + Ric^{il} grad^k f) ].
    pub fn residual_lemma_third_order(&self) -> Result<ScalarResidual> {
        self.require_order(6, "third-order lemma")?;
        let n = self.dim();
        let nf = n as f64;
        let cotton = self.cotton()?;
        let ginv_vals = self.bundle.g_inv.values();
        let norm_sq = cotton.values().norm_sq(&ginv_vals)?;

        let ric_div_c = {
            let d = self.bundle.cov_derivative(cotton)?; // [m, j, k, i]
            let div = self.bundle.contract_up(&d, 0, 1)?.values(); // [k, i]
            let ric_up = {
                let r = self.bundle.ricci.values();
                r.raise(0, &ginv_vals)?.raise(1, &ginv_vals)?
            };
            let mut acc = 0.0;
            for i in 0..n {
                for k in 0..n {
                    acc += ric_up.get(&[i, k]) * div.get(&[k, i]);
                }
            }
            acc
        };

        let triple_div = {
            let field = self.t_over_f()?;
            let d1 = self.bundle.cov_derivative(&field)?; // [m, i, k, j]
            let e1 = self.bundle.contract_up(&d1, 0, 2)?; // grad^k -> [i, j]
            let d2 = self.bundle.cov_derivative(&e1)?; // [m, i, j]
            let e2 = self.bundle.contract_up(&d2, 0, 1)?; // grad^i -> [j]
            let d3 = self.bundle.cov_derivative(&e2)?; // [m, j]
            *self.bundle.contract_up(&d3, 0, 1)?.values().get(&[]) // grad^j
        };

        let div_weyl_term = {
            let field = self.weyl_ricci_gradient_field()?;
            let d = self.bundle.cov_derivative(&field)?; // [m, j]
            *self.bundle.contract_up(&d, 0, 1)?.values().get(&[])
        };

        let value =
            0.5 * norm_sq + ric_div_c - (nf - 2.0) * triple_div + (nf - 2.0) * div_weyl_term;
        Ok(ScalarResidual {
            value,
            residual: Residual::from_scalar(
                value,
                &[
                    0.5 * norm_sq.abs(),
                    ric_div_c.abs(),
                    ((nf - 2.0) * triple_div).abs(),
                    ((nf - 2.0) * div_weyl_term).abs(),
                ],
            ),
        })
    }

    /// Solve the 2x2 linear system for (density, pressure) from
    /// h = (mu - rho) f / (n-1) and the trace equation.
    pub fn perfect_fluid_coefficients(&self) -> Result<PerfectFluidValues> {
        let n = self.dim() as f64;
        let f = self.f_jet.value();
        if f.abs() <= self.structure.epsilon_f {
            return Err(CoreError::SingularSystem {
                context: "perfect fluid coefficients",
            });
        }
        let h = self.h_jet.value();
        let lap = self.bundle.laplacian(&self.f_jet)?.value();
        let b1 = (n - 1.0) * h / f; // mu - rho
        let b2 = if self.pfe_trace_times_f {
            -(n - 1.0) * lap / f
        } else {
            -(n - 1.0) * lap
        }; // (n-2) mu + n rho
        let denom = 2.0 * n - 2.0;
        let density = (n * b1 + b2) / denom;
        let pressure = (-(n - 2.0) * b1 + b2) / denom;
        let r1 = h - (density - pressure) * f / (n - 1.0);
        let r2 = if self.pfe_trace_times_f {
            lap + ((n - 2.0) * density + n * pressure) * f / (n - 1.0)
        } else {
            lap + ((n - 2.0) * density + n * pressure) / (n - 1.0)
        };
        // the verdict tolerates roundoff so vacuum (mu = rho = 0) reports
        // the condition as holding with equality
        let slack = 1e-12 * (1.0 + density.abs() + pressure.abs());
        Ok(PerfectFluidValues {
            density,
            pressure,
            energy_condition: density >= pressure.abs() - slack,
            back_substitution: r1.abs().max(r2.abs()),
        })
    }

    /// Evaluate the tagged special case's own displayed equation pair.
    pub fn special_case_residual(&self) -> Result<SpecialCaseResidual> {
        let n = self.dim() as f64;
        let f = self.f_jet.value();
        let r = self.bundle.scalar.value();
        let ric = self.bundle.ricci.values();
        let g = self.bundle.g.values();
        let hess = self.hessian()?.values();
        let lap = self.bundle.laplacian(&self.f_jet)?.value();

        let build = |tensor: ComponentTensor<f64>, terms: &[f64]| EvaluatedResidual {
            residual: Residual::from_tensor(&tensor, terms),
            values: tensor,
        };
        let scalar = |value: f64, terms: &[f64]| ScalarResidual {
            value,
            residual: Residual::from_scalar(value, terms),
        };

        let (principal, trace, fluid) = match self.structure.case_tag {
            CaseTag::Generic => {
                return Ok(SpecialCaseResidual {
                    principal: self.residual_principal()?,
                    trace: self.residual_trace()?,
                    fluid: None,
                });
            }
            CaseTag::StaticNullLambda => {
                let p = ric.scale(f).sub(&hess);
                let terms = [ric.max_abs() * f.abs(), hess.max_abs()];
                (build(p, &terms), scalar(lap, &[lap.abs()]), None)
            }
            CaseTag::StaticNonNullLambda => {
                let coeff = r * f / (n - 1.0);
                let p = ric.scale(f).sub(&hess).sub(&g.scale(coeff));
                let terms = [
                    ric.max_abs() * f.abs(),
                    hess.max_abs(),
                    g.max_abs() * coeff.abs(),
                ];
                let t = lap + coeff;
                (
                    build(p, &terms),
                    scalar(t, &[lap.abs(), coeff.abs()]),
                    None,
                )
            }
            CaseTag::PerfectFluid => {
                let fluid = self.perfect_fluid_coefficients()?;
                let coeff = (fluid.density - fluid.pressure) * f / (n - 1.0);
                let p = ric.scale(f).sub(&hess).sub(&g.scale(coeff));
                let terms = [
                    ric.max_abs() * f.abs(),
                    hess.max_abs(),
                    g.max_abs() * coeff.abs(),
                ];
                let summand = ((n - 2.0) * fluid.density + n * fluid.pressure) / (n - 1.0);
                let summand = if self.pfe_trace_times_f {
                    summand * f
                } else {
                    summand
                };
                let t = lap + summand;
                (
                    build(p, &terms),
                    scalar(t, &[lap.abs(), summand.abs()]),
                    Some(fluid),
                )
            }
            CaseTag::Cpe => {
                let traceless = ric.sub(&g.scale(r / n));
                let coeff = r * f / (n * (n - 1.0));
                let p = traceless
                    .scale(1.0 + f)
                    .sub(&hess)
                    .sub(&g.scale(coeff));
                let terms = [
                    traceless.max_abs() * (1.0 + f).abs(),
                    hess.max_abs(),
                    g.max_abs() * coeff.abs(),
                ];
                let t = lap + r * f / (n - 1.0);
                (
                    build(p, &terms),
                    scalar(t, &[lap.abs(), (r * f / (n - 1.0)).abs()]),
                    None,
                )
            }
            CaseTag::MiaoTam => {
                let coeff = (r * f + 1.0) / (n - 1.0);
                let p = ric.scale(f).sub(&hess).sub(&g.scale(coeff));
                let terms = [
                    ric.max_abs() * f.abs(),
                    hess.max_abs(),
                    g.max_abs() * coeff.abs(),
                ];
                let t = lap + r * f / (n - 1.0) + n / (n - 1.0);
                (
                    build(p, &terms),
                    scalar(t, &[lap.abs(), (r * f / (n - 1.0)).abs(), n / (n - 1.0)]),
                    None,
                )
            }
        };
        Ok(SpecialCaseResidual {
            principal,
            trace,
            fluid,
        })
    }

    /// |h - expected h| for cases whose displayed equations force h. Returns
    /// `None` where h is not determined by (g, f) alone (generic, perfect
    /// fluid) or where the case is not of the f-Ric shape (CPE).
    pub fn expected_h_residual(&self) -> Result<Option<ScalarResidual>> {
        let n = self.dim() as f64;
        let f = self.f_jet.value();
        let r = self.bundle.scalar.value();
        let h = self.h_jet.value();
        let expected = match self.structure.case_tag {
            CaseTag::StaticNullLambda => 0.0,
            CaseTag::StaticNonNullLambda => r * f / (n - 1.0),
            CaseTag::MiaoTam => (r * f + 1.0) / (n - 1.0),
            CaseTag::Generic | CaseTag::PerfectFluid | CaseTag::Cpe => return Ok(None),
        };
        let value = h - expected;
        Ok(Some(ScalarResidual {
            value,
            residual: Residual::from_scalar(value, &[h.abs(), expected.abs()]),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarExpression as E;
    use approx::assert_relative_eq;

    fn flat_linear(n: usize) -> EinsteinTypeStructure {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let chart = MetricChart::diagonal(
            names,
            vec![E::constant(1.0); n],
            vec![(-2.0, 2.0); n],
        )
        .unwrap();
        EinsteinTypeStructure::new(
            chart,
            E::Add(
                Box::new(E::Mul(Box::new(E::constant(3.0)), Box::new(E::var(0)))),
                Box::new(E::constant(1.0)),
            ),
            E::constant(0.0),
            CaseTag::StaticNullLambda,
        )
    }

    #[test]
    fn flat_linear_solves_everything() {
        let s = flat_linear(4);
        let eval = StructureEval::new(&s, &[0.3, -0.2, 0.5, 0.1], 6).unwrap();
        assert!(eval.residual_principal().unwrap().residual.max_abs < 1e-12);
        assert!(eval.residual_trace().unwrap().value.abs() < 1e-12);
        assert!(eval.residual_grad_h().unwrap().residual.max_abs < 1e-12);
        assert!(eval.residual_lemma_fc().unwrap().residual.max_abs < 1e-12);
        assert!(eval.residual_lemma_bach().unwrap().residual.max_abs < 1e-12);
        assert!(
            eval.residual_lemma_second_order()
                .unwrap()
                .residual
                .max_abs
                < 1e-12
        );
        assert!(eval.residual_lemma_third_order().unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn trace_residual_is_trace_of_principal() {
        // holds for any input, not just solutions: perturb h
        let mut s = flat_linear(4);
        s.h = E::Mul(Box::new(E::constant(0.37)), Box::new(E::var(1)));
        let eval = StructureEval::new(&s, &[0.3, -0.2, 0.5, 0.1], 3).unwrap();
        let lhs = eval.trace_of_principal().unwrap();
        let rhs = eval.residual_trace().unwrap().value;
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn near_zero_potential_is_rejected() {
        let mut s = flat_linear(4);
        s.f = E::var(0);
        match StructureEval::new(&s, &[1e-9, 0.0, 0.0, 0.0], 2) {
            Err(CoreError::NearZeroPotential { .. }) => {}
            Err(other) => panic!("expected near-zero-potential error, got {other:?}"),
            Ok(_) => panic!("expected near-zero-potential error, got a successful eval"),
        }
    }

    #[test]
    fn third_order_lemma_names_required_order() {
        let s = flat_linear(4);
        let eval = StructureEval::new(&s, &[0.3, -0.2, 0.5, 0.1], 5).unwrap();
        match eval.residual_lemma_third_order() {
            Err(CoreError::OrderExhausted {
                required,
                available,
                ..
            }) => {
                assert_eq!(required, 6);
                assert_eq!(available, 5);
            }
            other => panic!("expected order exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn principal_scales_linearly_in_f() {
        // replacing f by c f with h = 0 scales the principal residual by c
        let mut s = flat_linear(4);
        s.case_tag = CaseTag::Generic;
        // non-solution potential so the residual is nonzero
        s.f = E::Mul(Box::new(E::var(0)), Box::new(E::var(1)));
        let point = [0.4, 0.7, -0.3, 0.2];
        let base = StructureEval::new(&s, &point, 2)
            .unwrap()
            .residual_principal()
            .unwrap();
        for c in [2.0, 0.5] {
            let mut scaled = s.clone();
            scaled.f = E::Mul(Box::new(E::constant(c)), Box::new(s.f.clone()));
            let res = StructureEval::new(&scaled, &point, 2)
                .unwrap()
                .residual_principal()
                .unwrap();
            for (idx, v) in res.values.iter_indexed() {
                assert_relative_eq!(*v, c * base.values.get(&idx), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn perfect_fluid_flat_vacuum() {
        let mut s = flat_linear(4);
        s.case_tag = CaseTag::PerfectFluid;
        let eval = StructureEval::new(&s, &[0.3, -0.2, 0.5, 0.1], 2).unwrap();
        let fluid = eval.perfect_fluid_coefficients().unwrap();
        assert!(fluid.density.abs() < 1e-12);
        assert!(fluid.pressure.abs() < 1e-12);
        assert!(fluid.energy_condition);
        assert!(fluid.back_substitution < 1e-12);
    }
}
