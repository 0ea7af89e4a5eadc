//! Coordinate charts: a symmetric matrix of scalar expressions plus a domain
//! box. A chart is the sole source of metric data for the curvature stack.

use crate::error::{CoreError, Result};
use crate::expr::ScalarExpression;
use crate::jet::Jet;
use crate::tensor::{cholesky_det, ComponentTensor, Variance};

#[derive(Debug, Clone)]
pub struct MetricChart {
    dim: usize,
    coord_names: Vec<String>,
    /// Row-major n*n; entries (i,j) and (j,i) are clones of the same expression.
    components: Vec<ScalarExpression>,
    /// Per-axis open interval; points are sampled and validated strictly inside.
    pub domain: Vec<(f64, f64)>,
}

impl MetricChart {
    /// Build from the upper triangle (i <= j); the lower triangle mirrors it.
    pub fn from_upper_triangle(
        coord_names: Vec<String>,
        upper: Vec<((usize, usize), ScalarExpression)>,
        domain: Vec<(f64, f64)>,
    ) -> Result<MetricChart> {
        let dim = coord_names.len();
        if dim < 2 {
            return Err(CoreError::UnsupportedDimension {
                dim,
                context: "metric chart",
            });
        }
        if domain.len() != dim {
            return Err(CoreError::InvalidArgument(format!(
                "domain has {} intervals for dimension {dim}",
                domain.len()
            )));
        }
        for &(lo, hi) in &domain {
            if !(lo < hi) {
                return Err(CoreError::InvalidArgument(format!(
                    "degenerate domain interval ({lo}, {hi})"
                )));
            }
        }
        let zero = ScalarExpression::constant(0.0);
        let mut components = vec![zero; dim * dim];
        let mut seen = vec![false; dim * dim];
        for ((i, j), expr) in upper {
            if i > j || j >= dim {
                return Err(CoreError::InvalidArgument(format!(
                    "metric component index ({i}, {j}) is not in the upper triangle of dim {dim}"
                )));
            }
            if let Some(v) = expr.max_var() {
                if v >= dim {
                    return Err(CoreError::InvalidArgument(format!(
                        "metric component ({i}, {j}) references variable #{v} beyond dim {dim}"
                    )));
                }
            }
            components[i * dim + j] = expr.clone();
            components[j * dim + i] = expr;
            seen[i * dim + j] = true;
        }
        // unset diagonal entries would make the metric singular everywhere
        for i in 0..dim {
            if !seen[i * dim + i] {
                return Err(CoreError::InvalidArgument(format!(
                    "metric component ({i}, {i}) missing"
                )));
            }
        }
        Ok(MetricChart {
            dim,
            coord_names,
            components,
            domain,
        })
    }

    /// Diagonal metric helper.
    pub fn diagonal(
        coord_names: Vec<String>,
        diag: Vec<ScalarExpression>,
        domain: Vec<(f64, f64)>,
    ) -> Result<MetricChart> {
        let upper = diag
            .into_iter()
            .enumerate()
            .map(|(i, e)| ((i, i), e))
            .collect();
        MetricChart::from_upper_triangle(coord_names, upper, domain)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpression {
        &self.components[i * self.dim + j]
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim
            && point
                .iter()
                .zip(&self.domain)
                .all(|(&x, &(lo, hi))| x > lo && x < hi)
    }

    pub fn check_interior(&self, point: &[f64]) -> Result<()> {
        if self.contains(point) {
            Ok(())
        } else {
            Err(CoreError::OutsideDomain {
                point: point.to_vec(),
            })
        }
    }

    /// Lift every component to a jet of the given order.
    pub fn metric_jets(&self, point: &[f64], order: usize) -> Result<ComponentTensor<Jet>> {
        self.check_interior(point)?;
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries.push(self.component(i, j).lift(point, order)?);
            }
        }
        let dim = self.dim;
        Ok(ComponentTensor::from_fn(
            dim,
            vec![Variance::Cov, Variance::Cov],
            |idx| entries[idx[0] * dim + idx[1]].clone(),
        ))
    }

    pub fn metric_values(&self, point: &[f64]) -> Result<ComponentTensor<f64>> {
        self.check_interior(point)?;
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries.push(self.component(i, j).eval(point)?);
            }
        }
        let dim = self.dim;
        Ok(ComponentTensor::from_fn(
            dim,
            vec![Variance::Cov, Variance::Cov],
            |idx| entries[idx[0] * dim + idx[1]],
        ))
    }

    /// Positive-definiteness at a point (checked, not assumed).
    pub fn check_positive_definite(&self, point: &[f64]) -> Result<()> {
        let g = self.metric_values(point)?;
        if cholesky_det(&g).is_none() {
            return Err(CoreError::NotPositiveDefinite {
                point: point.to_vec(),
            });
        }
        Ok(())
    }
}
