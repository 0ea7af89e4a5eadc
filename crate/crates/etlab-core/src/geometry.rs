//! The curvature stack: Christoffel symbols, Riemann, Ricci, scalar
//! curvature, covariant derivatives, Weyl, Cotton, Bach, the rank-3 tensor T,
//! iterated Weyl divergences, and the radial Weyl contraction — all evaluated
//! as jets at a point so that results can be differentiated further.
//!
//! Index convention. The Riemann tensor is pinned by the commutation rule
//! for one-forms,
//! `grad_i grad_j grad_k u - grad_j grad_i grad_k u = Rm[i,j,k,l] grad^l u`,
//! which makes the unit n-sphere satisfy `Rm[i,j,k,l] = g[i,k] g[j,l] -
//! g[i,l] g[j,k]` and R = n(n-1). Ricci is the contraction of slots 1 and 3.
//! The engine re-verifies this on flat and sphere charts in
//! [`convention_self_test`].

use crate::chart::MetricChart;
use crate::error::{CoreError, Result};
use crate::jet::Jet;
use crate::residual::Residual;
use crate::tensor::{cholesky_det, invert_values, unflatten, ComponentTensor, Variance};

use Variance::{Con, Cov};

/// Curvature data of a chart at a point, evaluated at a fixed jet order K.
/// The metric carries order K, Christoffel symbols K-1, curvature K-2; each
/// covariant derivative consumes one further order.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub dim: usize,
    pub order: usize,
    pub point: Vec<f64>,
    /// Metric, order K.
    pub g: ComponentTensor<Jet>,
    /// Inverse metric, order K.
    pub g_inv: ComponentTensor<Jet>,
    /// sqrt(det g), order K.
    pub sqrt_det: Jet,
    /// Christoffel symbols [a, b, c] = Γ^a_{bc}, order K-1.
    pub gamma: ComponentTensor<Jet>,
    /// Riemann tensor, fully covariant, order K-2.
    pub riemann: ComponentTensor<Jet>,
    /// Ricci tensor, order K-2.
    pub ricci: ComponentTensor<Jet>,
    /// Scalar curvature, order K-2.
    pub scalar: Jet,
}

fn exhausted(required: usize, available: usize, context: &str) -> CoreError {
    CoreError::OrderExhausted {
        required,
        available,
        context: context.to_string(),
    }
}

/// Inverse of a matrix of jets through the geometric series
/// (G0 + N)^-1 = sum_k (-G0^-1 N)^k G0^-1, exact at the truncation order
/// because N has no constant term.
fn jet_matrix_inverse(
    g: &ComponentTensor<Jet>,
    point: &[f64],
) -> Result<(ComponentTensor<Jet>, Jet)> {
    let n = g.dim();
    let order = g.entry_order();
    let g0 = g.values();
    let g0_inv = invert_values(&g0).ok_or_else(|| CoreError::SingularMetric {
        point: point.to_vec(),
    })?;
    let det0 = cholesky_det(&g0).ok_or_else(|| CoreError::NotPositiveDefinite {
        point: point.to_vec(),
    })?;

    // M = -G0^-1 N, entries have zero constant term
    let zero = Jet::constant(g.get(&[0, 0]).num_vars(), order, 0.0);
    let mut fluct: Vec<Jet> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = g.get(&[i, j]).clone();
            let mut coeffs = e.coeffs().to_vec();
            coeffs[0] = 0.0;
            e = Jet::from_coeffs(e.num_vars(), e.order(), coeffs);
            fluct.push(e);
        }
    }
    let mut m = vec![zero.clone(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = zero.clone();
            for k in 0..n {
                acc = acc.add(&fluct[k * n + j].scale(-g0_inv.get(&[i, k])))?;
            }
            m[i * n + j] = acc;
        }
    }

    let mat_mul = |a: &[Jet], b: &[Jet]| -> Result<Vec<Jet>> {
        let mut c = vec![zero.clone(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = zero.clone();
                for k in 0..n {
                    acc = acc.add(&a[i * n + k].mul(&b[k * n + j])?)?;
                }
                c[i * n + j] = acc;
            }
        }
        Ok(c)
    };

    // S = I + M + M^2 + ... + M^order
    let mut series = vec![zero.clone(); n * n];
    for i in 0..n {
        series[i * n + i] = Jet::constant(zero.num_vars(), order, 1.0);
    }
    let mut power = m.clone();
    // log det(I + G0^-1 N) with G0^-1 N = -M collapses to -sum_k tr(M^k)/k
    let mut log_det = zero.clone();
    for k in 1..=order {
        for i in 0..n {
            for j in 0..n {
                series[i * n + j] = series[i * n + j].add(&power[i * n + j])?;
            }
        }
        for i in 0..n {
            log_det = log_det.add(&power[i * n + i].scale(-1.0 / k as f64))?;
        }
        if k < order {
            power = mat_mul(&power, &m)?;
        }
    }

    // X = S · G0^-1
    let mut inv_entries = vec![zero.clone(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = zero.clone();
            for k in 0..n {
                acc = acc.add(&series[i * n + k].scale(*g0_inv.get(&[k, j])))?;
            }
            inv_entries[i * n + j] = acc;
        }
    }
    let g_inv = ComponentTensor::from_fn(n, vec![Con, Con], |idx| {
        inv_entries[idx[0] * n + idx[1]].clone()
    });

    let sqrt_det = log_det.scale(0.5).exp()?.scale(det0.sqrt());
    Ok((g_inv, sqrt_det))
}

impl CurvatureBundle {
    pub fn new(chart: &MetricChart, point: &[f64], order: usize) -> Result<CurvatureBundle> {
        if order < 2 {
            return Err(exhausted(2, order, "curvature"));
        }
        chart.check_positive_definite(point)?;
        let n = chart.dim();
        let g = chart.metric_jets(point, order)?;
        let (g_inv, sqrt_det) = jet_matrix_inverse(&g, point)?;

        // Christoffel symbols at order K-1
        let dg: Vec<ComponentTensor<Jet>> = (0..n)
            .map(|m| -> Result<ComponentTensor<Jet>> {
                let mut entries = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        entries.push(g.get(&[i, j]).partial(m)?);
                    }
                }
                Ok(ComponentTensor::from_fn(n, vec![Cov, Cov], |idx| {
                    entries[idx[0] * n + idx[1]].clone()
                }))
            })
            .collect::<Result<_>>()?;
        let g_inv_1 = g_inv.truncated(order - 1);
        let zero1 = Jet::constant(g.get(&[0, 0]).num_vars(), order - 1, 0.0);
        let mut gamma = ComponentTensor::filled(n, vec![Con, Cov, Cov], zero1.clone());
        for a in 0..n {
            for b in 0..n {
                for c in b..n {
                    let mut acc = zero1.clone();
                    for l in 0..n {
                        let sym = dg[b]
                            .get(&[c, l])
                            .add(dg[c].get(&[b, l]))?
                            .sub(dg[l].get(&[b, c]))?;
                        acc = acc.add(&g_inv_1.get(&[a, l]).mul(&sym)?)?;
                    }
                    let value = acc.scale(0.5);
                    gamma.set(&[a, b, c], value.clone());
                    gamma.set(&[a, c, b], value);
                }
            }
        }

        // Riemann (fully covariant) at order K-2, from
        // A^m_{ijk} = d_j Γ^m_{ik} - d_i Γ^m_{jk} + Γ^p_{ik} Γ^m_{jp} - Γ^p_{jk} Γ^m_{ip}
        let gamma2 = gamma.truncated(order - 2);
        let g2 = g.truncated(order - 2);
        let g_inv_2 = g_inv.truncated(order - 2);
        let dgamma: Vec<ComponentTensor<Jet>> = (0..n)
            .map(|m| -> Result<ComponentTensor<Jet>> {
                let mut entries = Vec::with_capacity(n * n * n);
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            entries.push(gamma.get(&[a, b, c]).partial(m)?);
                        }
                    }
                }
                Ok(ComponentTensor::from_fn(n, vec![Con, Cov, Cov], |idx| {
                    entries[(idx[0] * n + idx[1]) * n + idx[2]].clone()
                }))
            })
            .collect::<Result<_>>()?;

        let zero2 = Jet::constant(g.get(&[0, 0]).num_vars(), order - 2, 0.0);
        let mut riemann = ComponentTensor::filled(n, vec![Cov, Cov, Cov, Cov], zero2.clone());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut mixed: Vec<Jet> = Vec::with_capacity(n);
                    for m in 0..n {
                        let mut acc = dgamma[j].get(&[m, i, k]).sub(dgamma[i].get(&[m, j, k]))?;
                        for p in 0..n {
                            acc = acc.add(
                                &gamma2.get(&[p, i, k]).mul(gamma2.get(&[m, j, p]))?,
                            )?;
                            acc = acc.sub(
                                &gamma2.get(&[p, j, k]).mul(gamma2.get(&[m, i, p]))?,
                            )?;
                        }
                        mixed.push(acc);
                    }
                    for l in 0..n {
                        let mut acc = zero2.clone();
                        for (m, a) in mixed.iter().enumerate() {
                            acc = acc.add(&g2.get(&[l, m]).mul(a)?)?;
                        }
                        riemann.set(&[i, j, k, l], acc);
                    }
                }
            }
        }

        let mut ricci = ComponentTensor::filled(n, vec![Cov, Cov], zero2.clone());
        for j in 0..n {
            for l in 0..n {
                let mut acc = zero2.clone();
                for i in 0..n {
                    for k in 0..n {
                        acc = acc.add(&g_inv_2.get(&[i, k]).mul(riemann.get(&[i, j, k, l]))?)?;
                    }
                }
                ricci.set(&[j, l], acc);
            }
        }
        let mut scalar = zero2.clone();
        for j in 0..n {
            for l in 0..n {
                scalar = scalar.add(&g_inv_2.get(&[j, l]).mul(ricci.get(&[j, l]))?)?;
            }
        }

        Ok(CurvatureBundle {
            dim: n,
            order,
            point: point.to_vec(),
            g,
            g_inv,
            sqrt_det,
            gamma,
            riemann,
            ricci,
            scalar,
        })
    }

    /// Covariant derivative; the new covariant slot comes first. Consumes one
    /// jet order.
    pub fn cov_derivative(&self, t: &ComponentTensor<Jet>) -> Result<ComponentTensor<Jet>> {
        let v = t.entry_order();
        if v == 0 {
            return Err(exhausted(
                self.order + 1,
                self.order,
                "covariant derivative",
            ));
        }
        let n = self.dim;
        let rank = t.rank();
        let t_low = t.truncated(v - 1);
        let gamma = self.gamma.truncated(v - 1);
        let mut variances = Vec::with_capacity(rank + 1);
        variances.push(Cov);
        variances.extend_from_slice(t.variances());

        let zero = Jet::constant(t.data()[0].num_vars(), v - 1, 0.0);
        let mut out = ComponentTensor::filled(n, variances, zero);
        let out_len = out.len();
        let mut full = vec![0usize; rank + 1];
        let mut inner = vec![0usize; rank];
        for flat in 0..out_len {
            unflatten(flat, n, &mut full);
            let m = full[0];
            inner.copy_from_slice(&full[1..]);
            let mut acc = t.get(&inner).partial(m)?;
            for s in 0..rank {
                let original = inner[s];
                match t.variances()[s] {
                    Cov => {
                        for p in 0..n {
                            inner[s] = p;
                            acc = acc
                                .sub(&gamma.get(&[p, m, original]).mul(t_low.get(&inner))?)?;
                        }
                    }
                    Con => {
                        for p in 0..n {
                            inner[s] = p;
                            acc = acc
                                .add(&gamma.get(&[original, m, p]).mul(t_low.get(&inner))?)?;
                        }
                    }
                }
                inner[s] = original;
            }
            out.set(&full, acc);
        }
        Ok(out)
    }

    /// Gradient of a scalar jet (covariant components are plain partials).
    pub fn gradient(&self, scalar: &Jet) -> Result<ComponentTensor<Jet>> {
        if scalar.order() == 0 {
            return Err(exhausted(1, 0, "gradient"));
        }
        let mut entries = Vec::with_capacity(self.dim);
        for m in 0..self.dim {
            entries.push(scalar.partial(m)?);
        }
        Ok(ComponentTensor::from_fn(self.dim, vec![Cov], |idx| {
            entries[idx[0]].clone()
        }))
    }

    /// Contract a covariant slot pair through the inverse metric, truncated
    /// to the tensor's own order.
    pub fn contract_up(
        &self,
        t: &ComponentTensor<Jet>,
        slot_a: usize,
        slot_b: usize,
    ) -> Result<ComponentTensor<Jet>> {
        let ginv = self.g_inv.truncated(t.entry_order());
        t.contract(slot_a, slot_b, Some(&ginv))
    }

    pub fn raise_slot(
        &self,
        t: &ComponentTensor<Jet>,
        slot: usize,
    ) -> Result<ComponentTensor<Jet>> {
        let ginv = self.g_inv.truncated(t.entry_order());
        t.raise(slot, &ginv)
    }

    /// Covariant Hessian of a scalar jet.
    pub fn hessian(&self, scalar: &Jet) -> Result<ComponentTensor<Jet>> {
        let grad = self.gradient(scalar)?;
        self.cov_derivative(&grad)
    }

    pub fn laplacian(&self, scalar: &Jet) -> Result<Jet> {
        let hess = self.hessian(scalar)?;
        Ok(self.contract_up(&hess, 0, 1)?.get(&[]).clone())
    }

    /// Weyl tensor at order K-2. In dimension 3 it vanishes identically; the
    /// flag tells callers the zero result carries no information.
    pub fn weyl(&self) -> Result<WeylTensor> {
        let n = self.dim;
        if n < 3 {
            return Err(CoreError::UnsupportedDimension {
                dim: n,
                context: "weyl tensor",
            });
        }
        let order = self.order - 2;
        let zero = Jet::constant(self.scalar.num_vars(), order, 0.0);
        if n == 3 {
            return Ok(WeylTensor {
                tensor: ComponentTensor::filled(n, vec![Cov, Cov, Cov, Cov], zero),
                identically_zero_dim3: true,
            });
        }
        let g = self.g.truncated(order);
        let nf = n as f64;
        let c1 = 1.0 / (nf - 2.0);
        let c2 = 1.0 / ((nf - 1.0) * (nf - 2.0));
        let mut w = ComponentTensor::filled(n, vec![Cov, Cov, Cov, Cov], zero);
        let mut idx = [0usize; 4];
        for flat in 0..w.len() {
            unflatten(flat, n, &mut idx);
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            let ricci_block = self
                .ricci
                .get(&[i, k])
                .mul(g.get(&[j, l]))?
                .sub(&self.ricci.get(&[i, l]).mul(g.get(&[j, k]))?)?
                .add(&self.ricci.get(&[j, l]).mul(g.get(&[i, k]))?)?
                .sub(&self.ricci.get(&[j, k]).mul(g.get(&[i, l]))?)?;
            let metric_block = g
                .get(&[i, k])
                .mul(g.get(&[j, l]))?
                .sub(&g.get(&[i, l]).mul(g.get(&[j, k]))?)?
                .mul(&self.scalar)?;
            let value = self
                .riemann
                .get(&[i, j, k, l])
                .sub(&ricci_block.scale(c1))?
                .add(&metric_block.scale(c2))?;
            w.set(&idx, value);
        }
        Ok(WeylTensor {
            tensor: w,
            identically_zero_dim3: false,
        })
    }

    /// Cotton tensor at order K-3.
    pub fn cotton(&self) -> Result<ComponentTensor<Jet>> {
        if self.order < 3 {
            return Err(exhausted(3, self.order, "cotton tensor"));
        }
        let n = self.dim;
        let d_ricci = self.cov_derivative(&self.ricci)?; // [m, j, k]
        let d_scalar = self.gradient(&self.scalar)?;
        let g = self.g.truncated(self.order - 3);
        let c = 1.0 / (2.0 * (n as f64 - 1.0));
        let mut out = ComponentTensor::filled(
            n,
            vec![Cov, Cov, Cov],
            Jet::constant(self.scalar.num_vars(), self.order - 3, 0.0),
        );
        let mut idx = [0usize; 3];
        for flat in 0..out.len() {
            unflatten(flat, n, &mut idx);
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            let value = d_ricci
                .get(&[i, j, k])
                .sub(d_ricci.get(&[j, i, k]))?
                .sub(
                    &d_scalar
                        .get(&[i])
                        .mul(g.get(&[j, k]))?
                        .sub(&d_scalar.get(&[j]).mul(g.get(&[i, k]))?)?
                        .scale(c),
                )?;
            out.set(&idx, value);
        }
        Ok(out)
    }

    /// First Weyl divergence contracted on the last slot: (div W)[i,j,k] =
    /// grad^l W[i,j,k,l].
    pub fn div_weyl_once(&self, w: &ComponentTensor<Jet>) -> Result<ComponentTensor<Jet>> {
        let dw = self.cov_derivative(w)?; // [m, i, j, k, l]
        self.contract_up(&dw, 0, 4)
    }

    /// Iterated Weyl divergence. k = 1 gives the rank-3 divergence whose
    /// Cotton relation is tested elsewhere; k = 4 is the scalar obtained by
    /// contracting, in order, the last slot, then slot 1, then slot 3, then
    /// the remaining slot.
    pub fn div_weyl(&self, k: usize) -> Result<ComponentTensor<Jet>> {
        if self.dim == 3 {
            return Err(CoreError::UnsupportedDimension {
                dim: 3,
                context: "weyl divergences",
            });
        }
        if !(1..=4).contains(&k) {
            return Err(CoreError::InvalidArgument(format!(
                "weyl divergence takes k in 1..=4, got {k}"
            )));
        }
        if self.order < 2 + k {
            return Err(exhausted(2 + k, self.order, "div_weyl"));
        }
        let w = self.weyl()?.tensor;
        let d1 = self.div_weyl_once(&w)?; // [j, k, i]
        if k == 1 {
            return Ok(d1);
        }
        let d2 = {
            let t = self.cov_derivative(&d1)?; // [m, j, k, i]
            self.contract_up(&t, 0, 1)? // grad^j -> [k, i]
        };
        if k == 2 {
            return Ok(d2);
        }
        let d3 = {
            let t = self.cov_derivative(&d2)?; // [m, k, i]
            self.contract_up(&t, 0, 2)? // grad^i -> [k]
        };
        if k == 3 {
            return Ok(d3);
        }
        let t = self.cov_derivative(&d3)?; // [m, k]
        self.contract_up(&t, 0, 1) // grad^k -> scalar
    }

    /// Radial Weyl contraction W(., ., ., grad f).
    pub fn radial_weyl(&self, f: &Jet) -> Result<ComponentTensor<Jet>> {
        let w = self.weyl()?.tensor;
        let order = w.entry_order();
        let grad_up = self.raise_slot(&self.gradient(f)?.truncated(order), 0)?;
        let n = self.dim;
        let zero = Jet::constant(f.num_vars(), order, 0.0);
        let mut out = ComponentTensor::filled(n, vec![Cov, Cov, Cov], zero.clone());
        let mut idx = [0usize; 3];
        for flat in 0..out.len() {
            unflatten(flat, n, &mut idx);
            let mut acc = zero.clone();
            for l in 0..n {
                acc = acc.add(&w.get(&[idx[0], idx[1], idx[2], l]).mul(grad_up.get(&[l]))?)?;
            }
            out.set(&idx, acc);
        }
        Ok(out)
    }

    /// The rank-3 tensor T built from Ricci, R and grad f; shares the Cotton
    /// symmetries and vanishes for Einstein metrics.
    pub fn t_tensor(&self, f: &Jet) -> Result<ComponentTensor<Jet>> {
        let n = self.dim;
        if n < 3 {
            return Err(CoreError::UnsupportedDimension {
                dim: n,
                context: "t tensor",
            });
        }
        let order = self.order - 2;
        let g = self.g.truncated(order);
        let df = self.gradient(f)?.truncated(order);
        let df_up = self.raise_slot(&df, 0)?;
        // ricci_grad[j] = Ric[j,l] grad^l f
        let zero = Jet::constant(f.num_vars(), order, 0.0);
        let mut ricci_grad = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = zero.clone();
            for l in 0..n {
                acc = acc.add(&self.ricci.get(&[j, l]).mul(df_up.get(&[l]))?)?;
            }
            ricci_grad.push(acc);
        }
        let nf = n as f64;
        let c1 = 1.0 / (nf - 2.0);
        let c3 = (nf - 1.0) / (nf - 2.0);
        let mut out = ComponentTensor::filled(n, vec![Cov, Cov, Cov], zero);
        let mut idx = [0usize; 3];
        for flat in 0..out.len() {
            unflatten(flat, n, &mut idx);
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            let part1 = ricci_grad[j]
                .mul(g.get(&[i, k]))?
                .sub(&ricci_grad[i].mul(g.get(&[j, k]))?)?
                .scale(c1);
            let part2 = df
                .get(&[i])
                .mul(g.get(&[j, k]))?
                .sub(&df.get(&[j]).mul(g.get(&[i, k]))?)?
                .mul(&self.scalar)?
                .scale(c1);
            let part3 = df
                .get(&[j])
                .mul(self.ricci.get(&[i, k]))?
                .sub(&df.get(&[i]).mul(self.ricci.get(&[j, k]))?)?
                .scale(c3);
            out.set(&idx, part1.add(&part2)?.add(&part3)?);
        }
        Ok(out)
    }

    /// Ricci-Weyl contraction RW[i,j] = Ric^{kl} W[i,k,j,l], at the Weyl order.
    fn ricci_weyl(&self, w: &ComponentTensor<Jet>) -> Result<ComponentTensor<Jet>> {
        let order = w.entry_order();
        let ric_up = {
            let r = self.ricci.truncated(order);
            let r = self.raise_slot(&r, 0)?;
            self.raise_slot(&r, 1)?
        };
        let n = self.dim;
        let zero = Jet::constant(self.scalar.num_vars(), order, 0.0);
        let mut out = ComponentTensor::filled(n, vec![Cov, Cov], zero.clone());
        for i in 0..n {
            for j in 0..n {
                let mut acc = zero.clone();
                for k in 0..n {
                    for l in 0..n {
                        acc = acc.add(&ric_up.get(&[k, l]).mul(w.get(&[i, k, j, l]))?)?;
                    }
                }
                out.set(&[i, j], acc);
            }
        }
        Ok(out)
    }

    /// Both Bach evaluations: the double-divergence form
    /// B = (1/(n-3)) grad^k grad^l W[i,k,j,l] + (1/(n-2)) Ric^{kl} W[i,k,j,l]
    /// and the Cotton form
    /// B = -(1/(n-2)) grad^k C[i,k,j] + (1/(n-2)) Ric^{kl} W[i,k,j,l].
    pub fn bach_pair(&self) -> Result<(ComponentTensor<Jet>, ComponentTensor<Jet>)> {
        let n = self.dim;
        if n < 4 {
            return Err(CoreError::UnsupportedDimension {
                dim: n,
                context: "bach tensor",
            });
        }
        if self.order < 4 {
            return Err(exhausted(4, self.order, "bach tensor"));
        }
        let w = self.weyl()?.tensor;
        let nf = n as f64;

        let div_w = self.div_weyl_once(&w)?; // [i, k, j]
        let div2 = {
            let t = self.cov_derivative(&div_w)?; // [m, i, k, j]
            self.contract_up(&t, 0, 2)? // grad^k -> [i, j]
        };
        let rw = self
            .ricci_weyl(&w)?
            .truncated(div2.entry_order());
        let b_div_form = div2
            .scale(1.0 / (nf - 3.0))
            .add(&rw.scale(1.0 / (nf - 2.0)));

        let cotton = self.cotton()?;
        let div_c = {
            let t = self.cov_derivative(&cotton)?; // [m, i, k, j]
            self.contract_up(&t, 0, 2)? // grad^k -> [i, j]
        };
        let b_cotton_form = rw.sub(&div_c).scale(1.0 / (nf - 2.0));
        Ok((b_div_form, b_cotton_form))
    }

    /// Bach tensor (double-divergence form); both routes must already agree
    /// per [`Self::bach_pair`], which callers cross-check.
    pub fn bach(&self) -> Result<ComponentTensor<Jet>> {
        Ok(self.bach_pair()?.0)
    }

    /// Residual of the commutation rule that pins the Riemann sign:
    /// grad_i grad_j grad_k u - grad_j grad_i grad_k u - Rm[i,j,k,l] grad^l u.
    pub fn ricci_identity_residual(&self, u: &Jet) -> Result<Residual> {
        if self.order < 3 {
            return Err(exhausted(3, self.order, "ricci identity"));
        }
        let d1 = self.gradient(u)?;
        let d2 = self.cov_derivative(&d1)?;
        let d3 = self.cov_derivative(&d2)?.values();
        let grad_up = self.raise_slot(&self.gradient(u)?.truncated(self.order - 2), 0)?;
        let rm = self.riemann.values();
        let du = grad_up.values();
        let n = self.dim;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = d3.get(&[i, j, k]) - d3.get(&[j, i, k]);
                    let mut rhs = 0.0;
                    for l in 0..n {
                        rhs += rm.get(&[i, j, k, l]) * du.get(&[l]);
                    }
                    worst = worst.max((lhs - rhs).abs());
                    scale = scale.max(lhs.abs()).max(rhs.abs()).max(d3.get(&[i, j, k]).abs());
                }
            }
        }
        Ok(Residual::new(worst, scale))
    }
}

/// Weyl tensor plus the dimension-3 degeneracy flag.
pub struct WeylTensor {
    pub tensor: ComponentTensor<Jet>,
    pub identically_zero_dim3: bool,
}

/// Verifies the curvature conventions on a flat chart and the unit 4-sphere;
/// returns an error if either check fails. Cheap enough to run at startup.
pub fn convention_self_test() -> Result<()> {
    use crate::expr::ScalarExpression as E;

    // flat R^3, cartesian
    let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let flat = MetricChart::diagonal(
        names,
        vec![E::constant(1.0), E::constant(1.0), E::constant(1.0)],
        vec![(-2.0, 2.0); 3],
    )?;
    let bundle = CurvatureBundle::new(&flat, &[0.3, -0.2, 0.9], 3)?;
    if bundle.gamma.max_abs() > 1e-13 || bundle.riemann.max_abs() > 1e-13 {
        return Err(CoreError::InvalidArgument(
            "convention self-test failed: flat chart has nonzero curvature".into(),
        ));
    }

    // unit S^4 in the conformal chart g = 4/(1+|x|^2)^2 δ
    let chart = crate::catalog::sphere_chart(4)?;
    let point = [0.2, -0.1, 0.15, 0.05];
    let bundle = CurvatureBundle::new(&chart, &point, 4)?;
    let r = bundle.scalar.value();
    if (r - 12.0).abs() > 1e-9 {
        return Err(CoreError::InvalidArgument(format!(
            "convention self-test failed: unit S^4 scalar curvature {r}, expected 12"
        )));
    }
    // cubic test function pins the Riemann sign through the commutation rule
    let u_expr = E::Mul(
        Box::new(E::Var(0)),
        Box::new(E::Mul(Box::new(E::Var(1)), Box::new(E::Var(2)))),
    );
    let u = u_expr.lift(&point, 4)?;
    let res = bundle.ricci_identity_residual(&u)?;
    if res.relative() > 1e-9 {
        return Err(CoreError::InvalidArgument(format!(
            "convention self-test failed: commutation-rule residual {:.3e}",
            res.relative()
        )));
    }
    Ok(())
}
