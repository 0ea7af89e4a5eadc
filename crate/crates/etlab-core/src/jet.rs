//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients (∂^α value / α!) of a scalar at a
//! point, for every multi-index α with |α| <= order. Arithmetic is exact for
//! the retained coefficients; differentiating consumes one order.

use crate::error::{CoreError, Result};
use crate::multi_index::{coefficient_count, shape};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    num_vars: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(num_vars: usize, order: usize, value: f64) -> Jet {
        let mut coeffs = vec![0.0; coefficient_count(num_vars, order)];
        coeffs[0] = value;
        Jet {
            num_vars,
            order,
            coeffs,
        }
    }

    /// The coordinate function `x_var`, expanded at `value`.
    pub fn variable(num_vars: usize, order: usize, var: usize, value: f64) -> Jet {
        assert!(var < num_vars, "variable index out of range");
        let mut jet = Jet::constant(num_vars, order, value);
        if order >= 1 {
            // degree-1 coefficients sit right after the constant, in the
            // same order the enumeration lists degree-1 exponents
            let s = shape(num_vars, order);
            for i in s.degree_offsets[1]..s.degree_offsets[2] {
                if s.exponents[i][var] == 1 {
                    jet.coeffs[i] = 1.0;
                    break;
                }
            }
        }
        jet
    }

    pub fn from_coeffs(num_vars: usize, order: usize, coeffs: Vec<f64>) -> Jet {
        assert_eq!(coeffs.len(), coefficient_count(num_vars, order));
        Jet {
            num_vars,
            order,
            coeffs,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Value at the expansion point (degree-0 coefficient).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient at multi-index `alpha` (i.e. ∂^α / α!).
    pub fn coeff(&self, alpha: &[u8]) -> Result<f64> {
        let s = shape(self.num_vars, self.order);
        match s.position_of(alpha) {
            Some(i) => Ok(self.coeffs[i]),
            None => Err(CoreError::OrderExhausted {
                required: alpha.iter().map(|&x| x as usize).sum(),
                available: self.order,
                context: "coefficient lookup".into(),
            }),
        }
    }

    /// Raw partial derivative ∂^α at the expansion point: α! × coefficient(α).
    pub fn extract_partial(&self, alpha: &[u8]) -> Result<f64> {
        if alpha.len() != self.num_vars {
            return Err(CoreError::InvalidArgument(format!(
                "multi-index length {} does not match {} variables",
                alpha.len(),
                self.num_vars
            )));
        }
        let degree: usize = alpha.iter().map(|&x| x as usize).sum();
        if degree > self.order {
            return Err(CoreError::OrderExhausted {
                required: degree,
                available: self.order,
                context: "extract_partial".into(),
            });
        }
        let mut factorial = 1.0;
        for &a in alpha {
            for k in 2..=(a as u64) {
                factorial *= k as f64;
            }
        }
        Ok(self.coeff(alpha)? * factorial)
    }

    fn check_compatible(&self, rhs: &Jet, context: &'static str) -> Result<()> {
        if self.num_vars != rhs.num_vars || self.order != rhs.order {
            return Err(CoreError::ShapeMismatch {
                lhs_vars: self.num_vars,
                lhs_order: self.order,
                rhs_vars: rhs.num_vars,
                rhs_order: rhs.order,
                context,
            });
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Jet) -> Result<Jet> {
        self.check_compatible(rhs, "add")?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Jet::from_coeffs(self.num_vars, self.order, coeffs))
    }

    pub fn sub(&self, rhs: &Jet) -> Result<Jet> {
        self.check_compatible(rhs, "sub")?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Jet::from_coeffs(self.num_vars, self.order, coeffs))
    }

    pub fn neg(&self) -> Jet {
        Jet::from_coeffs(
            self.num_vars,
            self.order,
            self.coeffs.iter().map(|a| -a).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet::from_coeffs(
            self.num_vars,
            self.order,
            self.coeffs.iter().map(|a| a * c).collect(),
        )
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, rhs: &Jet) -> Result<Jet> {
        self.check_compatible(rhs, "mul")?;
        let s = shape(self.num_vars, self.order);
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(ia, ib, ic) in &s.mul_table {
            coeffs[ic as usize] += self.coeffs[ia as usize] * rhs.coeffs[ib as usize];
        }
        Ok(Jet::from_coeffs(self.num_vars, self.order, coeffs))
    }

    /// Drop coefficients above `order` (prefix copy).
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order, "truncate cannot raise the order");
        if order == self.order {
            return self.clone();
        }
        Jet::from_coeffs(
            self.num_vars,
            order,
            self.coeffs[..coefficient_count(self.num_vars, order)].to_vec(),
        )
    }

    /// Partial derivative with respect to `var`; the result has one order less.
    pub fn partial(&self, var: usize) -> Result<Jet> {
        if self.order == 0 {
            return Err(CoreError::OrderExhausted {
                required: 1,
                available: 0,
                context: "partial derivative".into(),
            });
        }
        assert!(var < self.num_vars, "variable index out of range");
        let s = shape(self.num_vars, self.order);
        let mut coeffs = vec![0.0; coefficient_count(self.num_vars, self.order - 1)];
        for &(src, dst, factor) in &s.partial_tables[var] {
            coeffs[dst as usize] = factor * self.coeffs[src as usize];
        }
        Ok(Jet::from_coeffs(self.num_vars, self.order - 1, coeffs))
    }

    /// Compose a univariate Taylor expansion (coefficients of the outer
    /// function at `self.value()`) with this jet, via Horner on the
    /// zero-constant part. This realizes the higher-order chain rule for all
    /// elementary functions.
    pub fn compose_univariate(&self, outer: &[f64]) -> Result<Jet> {
        assert_eq!(outer.len(), self.order + 1);
        let mut fluctuation = self.clone();
        fluctuation.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.num_vars, self.order, outer[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.mul(&fluctuation)?;
            acc.coeffs[0] += outer[k];
        }
        Ok(acc)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(CoreError::DomainViolation {
                node: "recip".into(),
                detail: format!("constant term is {a}"),
            });
        }
        // 1/(a + v) = sum_k (-1)^k v^k / a^{k+1}
        let mut outer = Vec::with_capacity(self.order + 1);
        let mut c = 1.0 / a;
        for _ in 0..=self.order {
            outer.push(c);
            c *= -1.0 / a;
        }
        self.compose_univariate(&outer)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(CoreError::DomainViolation {
                node: "sqrt".into(),
                detail: format!("argument is {a}, expected > 0"),
            });
        }
        // binomial series: sqrt(a + v) = sqrt(a) * sum_k C(1/2, k) (v/a)^k
        let mut outer = Vec::with_capacity(self.order + 1);
        let mut c = a.sqrt();
        for k in 0..=self.order {
            outer.push(c);
            c *= (0.5 - k as f64) / (k as f64 + 1.0) / a;
        }
        self.compose_univariate(&outer)
    }

    pub fn exp(&self) -> Result<Jet> {
        let e = self.value().exp();
        if !e.is_finite() {
            return Err(CoreError::DomainViolation {
                node: "exp".into(),
                detail: format!("exp({}) overflows", self.value()),
            });
        }
        let mut outer = Vec::with_capacity(self.order + 1);
        let mut c = e;
        for k in 0..=self.order {
            outer.push(c);
            c /= k as f64 + 1.0;
        }
        self.compose_univariate(&outer)
    }

    pub fn log(&self) -> Result<Jet> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(CoreError::DomainViolation {
                node: "log".into(),
                detail: format!("argument is {a}, expected > 0"),
            });
        }
        let mut outer = Vec::with_capacity(self.order + 1);
        outer.push(a.ln());
        let mut c = 1.0 / a;
        for k in 1..=self.order {
            outer.push(c / k as f64);
            c *= -1.0 / a;
        }
        self.compose_univariate(&outer)
    }

    pub fn sin(&self) -> Result<Jet> {
        let a = self.value();
        let cycle = [a.sin(), a.cos(), -a.sin(), -a.cos()];
        let mut outer = Vec::with_capacity(self.order + 1);
        let mut factorial = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                factorial *= k as f64;
            }
            outer.push(cycle[k % 4] / factorial);
        }
        self.compose_univariate(&outer)
    }

    pub fn cos(&self) -> Result<Jet> {
        let a = self.value();
        let cycle = [a.cos(), -a.sin(), -a.cos(), a.sin()];
        let mut outer = Vec::with_capacity(self.order + 1);
        let mut factorial = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                factorial *= k as f64;
            }
            outer.push(cycle[k % 4] / factorial);
        }
        self.compose_univariate(&outer)
    }

    /// Integer power; negative exponents go through `recip`.
    pub fn powi(&self, exponent: i32) -> Result<Jet> {
        if exponent < 0 {
            return self.recip()?.powi(-exponent);
        }
        let mut result = Jet::constant(self.num_vars, self.order, 1.0);
        let mut base = self.clone();
        let mut e = exponent as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}
