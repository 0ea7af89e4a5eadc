//! Pointwise dense tensor algebra over real or jet entries: contraction,
//! index raising/lowering, norms, and the Cotton-symmetry residual checks.
//!
//! Every curvature tensor in this crate is stored fully covariant; raising
//! happens on demand against an explicit metric.

use crate::error::{CoreError, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Cov,
    Con,
}

/// Entry types a tensor can hold (plain values or jets).
pub trait TensorEntry: Clone {
    fn zero_like(&self) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: f64) -> Self;
    /// Magnitude of the value part (for residual reporting).
    fn magnitude(&self) -> f64;
}

impl TensorEntry for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl TensorEntry for Jet {
    fn zero_like(&self) -> Self {
        Jet::constant(self.num_vars(), self.order(), 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        Jet::add(self, rhs).expect("jet shape mismatch inside tensor arithmetic")
    }
    fn sub(&self, rhs: &Self) -> Self {
        Jet::sub(self, rhs).expect("jet shape mismatch inside tensor arithmetic")
    }
    fn mul(&self, rhs: &Self) -> Self {
        Jet::mul(self, rhs).expect("jet shape mismatch inside tensor arithmetic")
    }
    fn neg(&self) -> Self {
        Jet::neg(self)
    }
    fn scale(&self, c: f64) -> Self {
        Jet::scale(self, c)
    }
    fn magnitude(&self) -> f64 {
        self.value().abs()
    }
}

/// Dense multi-index array with per-slot variance metadata.
#[derive(Debug, Clone)]
pub struct ComponentTensor<T> {
    dim: usize,
    variances: Vec<Variance>,
    data: Vec<T>,
}

impl<T: TensorEntry> ComponentTensor<T> {
    pub fn filled(dim: usize, variances: Vec<Variance>, fill: T) -> Self {
        let len = dim.pow(variances.len() as u32);
        ComponentTensor {
            dim,
            variances,
            data: vec![fill; len],
        }
    }

    pub fn from_fn(
        dim: usize,
        variances: Vec<Variance>,
        mut f: impl FnMut(&[usize]) -> T,
    ) -> Self {
        let rank = variances.len();
        let len = dim.pow(rank as u32);
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; rank];
        for flat in 0..len {
            unflatten(flat, dim, &mut idx);
            data.push(f(&idx));
        }
        ComponentTensor {
            dim,
            variances,
            data,
        }
    }

    pub fn scalar(value: T) -> Self {
        ComponentTensor {
            dim: 1,
            variances: Vec::new(),
            data: vec![value],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variances.len()
    }

    pub fn variances(&self) -> &[Variance] {
        &self.variances
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut f = 0usize;
        for &i in idx {
            debug_assert!(i < self.dim);
            f = f * self.dim + i;
        }
        f
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.flat(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut T {
        let f = self.flat(idx);
        &mut self.data[f]
    }

    pub fn set(&mut self, idx: &[usize], value: T) {
        let f = self.flat(idx);
        self.data[f] = value;
    }

    /// Iterate (multi-index, entry).
    pub fn iter_indexed(&self) -> impl Iterator<Item = (Vec<usize>, &T)> {
        let dim = self.dim;
        let rank = self.rank();
        self.data.iter().enumerate().map(move |(flat, e)| {
            let mut idx = vec![0usize; rank];
            unflatten(flat, dim, &mut idx);
            (idx, e)
        })
    }

    pub fn map<U: TensorEntry>(&self, mut f: impl FnMut(&T) -> U) -> ComponentTensor<U> {
        ComponentTensor {
            dim: self.dim,
            variances: self.variances.clone(),
            data: self.data.iter().map(|e| f(e)).collect(),
        }
    }

    pub fn zip_map(&self, rhs: &Self, mut f: impl FnMut(&T, &T) -> T) -> Self {
        assert_eq!(self.dim, rhs.dim);
        assert_eq!(self.variances, rhs.variances);
        ComponentTensor {
            dim: self.dim,
            variances: self.variances.clone(),
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_map(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_map(rhs, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|e| e.scale(c))
    }

    pub fn neg(&self) -> Self {
        self.map(|e| e.neg())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, e| m.max(e.magnitude()))
    }

    /// Contract two slots. Opposite variances contract directly; equal
    /// variances require the pairing metric (the inverse metric for two
    /// covariant slots, the metric itself for two contravariant slots).
    pub fn contract(
        &self,
        slot_a: usize,
        slot_b: usize,
        pairing: Option<&ComponentTensor<T>>,
    ) -> Result<ComponentTensor<T>> {
        let rank = self.rank();
        if slot_a >= rank || slot_b >= rank {
            return Err(CoreError::InvalidArgument(format!(
                "contraction slots ({slot_a}, {slot_b}) out of range for rank {rank}"
            )));
        }
        if slot_a == slot_b {
            return Err(CoreError::InvalidArgument(
                "contraction slots must be distinct".into(),
            ));
        }
        let (lo, hi) = (slot_a.min(slot_b), slot_a.max(slot_b));
        let like_variance = self.variances[lo] == self.variances[hi];
        if like_variance && pairing.is_none() {
            return Err(CoreError::InvalidArgument(
                "metric pairing required to contract two slots of equal variance".into(),
            ));
        }

        let out_variances: Vec<Variance> = self
            .variances
            .iter()
            .enumerate()
            .filter(|(s, _)| *s != lo && *s != hi)
            .map(|(_, v)| *v)
            .collect();
        let zero = self.data[0].zero_like();
        let dim = self.dim;
        let mut out = ComponentTensor::filled(dim, out_variances, zero);

        let out_len = out.data.len();
        let mut out_idx = vec![0usize; rank.saturating_sub(2)];
        let mut full_idx = vec![0usize; rank];
        for flat in 0..out_len {
            unflatten(flat, dim, &mut out_idx);
            // scatter the surviving indices around the contracted slots
            let mut pos = 0usize;
            for s in 0..rank {
                if s != lo && s != hi {
                    full_idx[s] = out_idx[pos];
                    pos += 1;
                }
            }
            let mut acc = self.data[0].zero_like();
            if like_variance {
                let pairing = pairing.unwrap();
                for k in 0..dim {
                    full_idx[lo] = k;
                    for l in 0..dim {
                        full_idx[hi] = l;
                        let term = pairing.get(&[k, l]).mul(self.get(&full_idx));
                        acc = acc.add(&term);
                    }
                }
            } else {
                for k in 0..dim {
                    full_idx[lo] = k;
                    full_idx[hi] = k;
                    acc = acc.add(self.get(&full_idx));
                }
            }
            out.data[flat] = acc;
        }
        Ok(out)
    }

    /// Raise a covariant slot with the inverse metric.
    pub fn raise(&self, slot: usize, g_inv: &ComponentTensor<T>) -> Result<ComponentTensor<T>> {
        self.convert_slot(slot, Variance::Cov, Variance::Con, g_inv)
    }

    /// Lower a contravariant slot with the metric.
    pub fn lower(&self, slot: usize, g: &ComponentTensor<T>) -> Result<ComponentTensor<T>> {
        self.convert_slot(slot, Variance::Con, Variance::Cov, g)
    }

    fn convert_slot(
        &self,
        slot: usize,
        expect: Variance,
        target: Variance,
        pairing: &ComponentTensor<T>,
    ) -> Result<ComponentTensor<T>> {
        if slot >= self.rank() {
            return Err(CoreError::InvalidArgument(format!(
                "slot {slot} out of range for rank {}",
                self.rank()
            )));
        }
        if self.variances[slot] != expect {
            return Err(CoreError::InvalidArgument(format!(
                "slot {slot} has the wrong variance for this operation"
            )));
        }
        let dim = self.dim;
        let mut out = self.clone();
        out.variances[slot] = target;
        let mut idx = vec![0usize; self.rank()];
        for flat in 0..out.data.len() {
            unflatten(flat, dim, &mut idx);
            let i = idx[slot];
            let mut acc = self.data[0].zero_like();
            for j in 0..dim {
                idx[slot] = j;
                acc = acc.add(&pairing.get(&[i, j]).mul(self.get(&idx)));
            }
            idx[slot] = i;
            out.data[flat] = acc;
        }
        Ok(out)
    }

    /// Full inner product <self, self> with every slot raised by `g_inv`
    /// (all slots must be covariant).
    pub fn norm_sq(&self, g_inv: &ComponentTensor<T>) -> Result<T> {
        let mut raised = self.clone();
        for s in 0..self.rank() {
            raised = raised.raise(s, g_inv)?;
        }
        let mut acc = self.data[0].zero_like();
        for (a, b) in self.data.iter().zip(&raised.data) {
            acc = acc.add(&a.mul(b));
        }
        Ok(acc)
    }
}

impl ComponentTensor<Jet> {
    /// Values at the expansion point.
    pub fn values(&self) -> ComponentTensor<f64> {
        self.map(|j| j.value())
    }

    /// Truncate every entry to `order`.
    pub fn truncated(&self, order: usize) -> ComponentTensor<Jet> {
        self.map(|j| j.truncate(order))
    }

    pub fn entry_order(&self) -> usize {
        self.data[0].order()
    }
}

pub(crate) fn unflatten(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in (0..idx.len()).rev() {
        idx[slot] = flat % dim;
        flat /= dim;
    }
}

/// Metric data at a point: the metric, its inverse, and sqrt(det g).
#[derive(Debug, Clone)]
pub struct MetricValue<T> {
    pub g: ComponentTensor<T>,
    pub g_inv: ComponentTensor<T>,
    pub sqrt_det: T,
}

impl MetricValue<f64> {
    pub fn new(g: ComponentTensor<f64>, point: &[f64]) -> Result<Self> {
        let det = cholesky_det(&g).ok_or_else(|| CoreError::NotPositiveDefinite {
            point: point.to_vec(),
        })?;
        let g_inv = invert_values(&g).ok_or_else(|| CoreError::SingularMetric {
            point: point.to_vec(),
        })?;
        Ok(MetricValue {
            g,
            g_inv,
            sqrt_det: det.sqrt(),
        })
    }

    /// Max |g·g_inv − I| over all entries.
    pub fn identity_residual(&self) -> f64 {
        let dim = self.g.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = 0.0;
                for k in 0..dim {
                    acc += self.g.get(&[i, k]) * self.g_inv.get(&[k, j]);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).abs());
            }
        }
        worst
    }
}

/// Determinant through Cholesky; `None` when not positive-definite.
pub fn cholesky_det(g: &ComponentTensor<f64>) -> Option<f64> {
    let n = g.dim();
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = *g.get(&[i, j]);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut det = 1.0;
    for i in 0..n {
        det *= l[i * n + i] * l[i * n + i];
    }
    Some(det)
}

/// Dense inverse by Gauss-Jordan with partial pivoting; `None` if singular.
pub fn invert_values(g: &ComponentTensor<f64>) -> Option<ComponentTensor<f64>> {
    let n = g.dim();
    let mut a = vec![0.0f64; n * 2 * n];
    for i in 0..n {
        for j in 0..n {
            a[i * 2 * n + j] = *g.get(&[i, j]);
        }
        a[i * 2 * n + n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * 2 * n + col].abs() > a[pivot * 2 * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * 2 * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..2 * n {
                a.swap(col * 2 * n + k, pivot * 2 * n + k);
            }
        }
        let d = a[col * 2 * n + col];
        for k in 0..2 * n {
            a[col * 2 * n + k] /= d;
        }
        for row in 0..n {
            if row != col {
                let factor = a[row * 2 * n + col];
                if factor != 0.0 {
                    for k in 0..2 * n {
                        a[row * 2 * n + k] -= factor * a[col * 2 * n + k];
                    }
                }
            }
        }
    }
    Some(ComponentTensor::from_fn(
        n,
        vec![Variance::Con, Variance::Con],
        |idx| a[idx[0] * 2 * n + n + idx[1]],
    ))
}

/// Residuals of the Cotton-type symmetries of a rank-3 covariant tensor:
/// antisymmetry in the first two slots, the cyclic identity, and all three
/// metric traces.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CottonSymmetryReport {
    pub antisymmetry: f64,
    pub cyclic: f64,
    pub traces: f64,
    pub scale: f64,
}

pub fn check_cotton_symmetries(
    c: &ComponentTensor<f64>,
    g_inv: &ComponentTensor<f64>,
) -> Result<CottonSymmetryReport> {
    if c.rank() != 3 || c.variances().iter().any(|&v| v != Variance::Cov) {
        return Err(CoreError::InvalidArgument(
            "cotton symmetry check expects a rank-3 fully covariant tensor".into(),
        ));
    }
    let n = c.dim();
    let mut antisymmetry: f64 = 0.0;
    let mut cyclic: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                antisymmetry = antisymmetry.max((c.get(&[i, j, k]) + c.get(&[j, i, k])).abs());
                cyclic = cyclic.max(
                    (c.get(&[i, j, k]) + c.get(&[j, k, i]) + c.get(&[k, i, j])).abs(),
                );
            }
        }
    }
    let mut traces: f64 = 0.0;
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let t = c.contract(a, b, Some(g_inv))?;
        traces = traces.max(t.max_abs());
    }
    Ok(CottonSymmetryReport {
        antisymmetry,
        cyclic,
        traces,
        scale: c.max_abs(),
    })
}
