//! Scalar expression trees: the carriers of metric components, potentials and
//! coefficients. An expression lifts to a [`Jet`] of any order at an interior
//! point, with coefficients exact up to roundoff.

use std::fmt;

use crate::error::{CoreError, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpression {
    Constant(f64),
    Var(usize),
    Add(Box<ScalarExpression>, Box<ScalarExpression>),
    Sub(Box<ScalarExpression>, Box<ScalarExpression>),
    Mul(Box<ScalarExpression>, Box<ScalarExpression>),
    Div(Box<ScalarExpression>, Box<ScalarExpression>),
    Neg(Box<ScalarExpression>),
    /// Integer power (negative exponents allowed away from zeros).
    PowInt(Box<ScalarExpression>, i32),
    Sqrt(Box<ScalarExpression>),
    Exp(Box<ScalarExpression>),
    Log(Box<ScalarExpression>),
    Sin(Box<ScalarExpression>),
    Cos(Box<ScalarExpression>),
}

use ScalarExpression as E;

impl ScalarExpression {
    pub fn constant(v: f64) -> Self {
        E::Constant(v)
    }

    pub fn var(i: usize) -> Self {
        E::Var(i)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            E::Constant(_) => None,
            E::Var(i) => Some(*i),
            E::Add(a, b) | E::Sub(a, b) | E::Mul(a, b) | E::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            E::Neg(a) | E::PowInt(a, _) | E::Sqrt(a) | E::Exp(a) | E::Log(a) | E::Sin(a)
            | E::Cos(a) => a.max_var(),
        }
    }

    /// Re-index variables by `offset` (used when embedding fiber expressions
    /// into an ambient chart whose first coordinate is the base variable).
    pub fn shift_vars(&self, offset: usize) -> Self {
        match self {
            E::Constant(v) => E::Constant(*v),
            E::Var(i) => E::Var(i + offset),
            E::Add(a, b) => E::Add(a.shift_vars(offset).into(), b.shift_vars(offset).into()),
            E::Sub(a, b) => E::Sub(a.shift_vars(offset).into(), b.shift_vars(offset).into()),
            E::Mul(a, b) => E::Mul(a.shift_vars(offset).into(), b.shift_vars(offset).into()),
            E::Div(a, b) => E::Div(a.shift_vars(offset).into(), b.shift_vars(offset).into()),
            E::Neg(a) => E::Neg(a.shift_vars(offset).into()),
            E::PowInt(a, k) => E::PowInt(a.shift_vars(offset).into(), *k),
            E::Sqrt(a) => E::Sqrt(a.shift_vars(offset).into()),
            E::Exp(a) => E::Exp(a.shift_vars(offset).into()),
            E::Log(a) => E::Log(a.shift_vars(offset).into()),
            E::Sin(a) => E::Sin(a.shift_vars(offset).into()),
            E::Cos(a) => E::Cos(a.shift_vars(offset).into()),
        }
    }

    /// Plain evaluation at a point.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(match self {
            E::Constant(v) => *v,
            E::Var(i) => {
                if *i >= point.len() {
                    return Err(CoreError::InvalidArgument(format!(
                        "expression references variable #{i} but the point has {} coordinates",
                        point.len()
                    )));
                }
                point[*i]
            }
            E::Add(a, b) => a.eval(point)? + b.eval(point)?,
            E::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            E::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            E::Div(a, b) => {
                let d = b.eval(point)?;
                if d == 0.0 {
                    return Err(CoreError::DomainViolation {
                        node: format!("{b}"),
                        detail: format!("division by zero at {point:?}"),
                    });
                }
                a.eval(point)? / d
            }
            E::Neg(a) => -a.eval(point)?,
            E::PowInt(a, k) => {
                let base = a.eval(point)?;
                if *k < 0 && base == 0.0 {
                    return Err(CoreError::DomainViolation {
                        node: format!("{self}"),
                        detail: format!("zero base with negative exponent at {point:?}"),
                    });
                }
                base.powi(*k)
            }
            E::Sqrt(a) => {
                let v = a.eval(point)?;
                if v < 0.0 {
                    return Err(CoreError::DomainViolation {
                        node: format!("sqrt({a})"),
                        detail: format!("argument {v} < 0 at {point:?}"),
                    });
                }
                v.sqrt()
            }
            E::Exp(a) => a.eval(point)?.exp(),
            E::Log(a) => {
                let v = a.eval(point)?;
                if v <= 0.0 {
                    return Err(CoreError::DomainViolation {
                        node: format!("log({a})"),
                        detail: format!("argument {v} <= 0 at {point:?}"),
                    });
                }
                v.ln()
            }
            E::Sin(a) => a.eval(point)?.sin(),
            E::Cos(a) => a.eval(point)?.cos(),
        })
    }

    /// Expand to a jet of the given order at `point`.
    pub fn lift(&self, point: &[f64], order: usize) -> Result<Jet> {
        let n = point.len();
        Ok(match self {
            E::Constant(v) => Jet::constant(n, order, *v),
            E::Var(i) => {
                if *i >= n {
                    return Err(CoreError::InvalidArgument(format!(
                        "expression references variable #{i} but the point has {n} coordinates"
                    )));
                }
                Jet::variable(n, order, *i, point[*i])
            }
            E::Add(a, b) => a.lift(point, order)?.add(&b.lift(point, order)?)?,
            E::Sub(a, b) => a.lift(point, order)?.sub(&b.lift(point, order)?)?,
            E::Mul(a, b) => a.lift(point, order)?.mul(&b.lift(point, order)?)?,
            E::Div(a, b) => {
                let denom = b.lift(point, order)?;
                if denom.value() == 0.0 {
                    return Err(CoreError::DomainViolation {
                        node: format!("{b}"),
                        detail: format!("division by zero at {point:?}"),
                    });
                }
                a.lift(point, order)?.mul(&denom.recip()?)?
            }
            E::Neg(a) => a.lift(point, order)?.neg(),
            E::PowInt(a, k) => a.lift(point, order)?.powi(*k).map_err(|e| at_node(e, self))?,
            E::Sqrt(a) => a.lift(point, order)?.sqrt().map_err(|e| at_node(e, self))?,
            E::Exp(a) => a.lift(point, order)?.exp().map_err(|e| at_node(e, self))?,
            E::Log(a) => a.lift(point, order)?.log().map_err(|e| at_node(e, self))?,
            E::Sin(a) => a.lift(point, order)?.sin()?,
            E::Cos(a) => a.lift(point, order)?.cos()?,
        })
    }

    /// One-sided finite-difference probe of a first partial. Diagnostic only:
    /// the engine itself never differentiates numerically.
    pub fn finite_difference_check(
        &self,
        point: &[f64],
        var: usize,
        step: f64,
    ) -> Result<(f64, f64)> {
        let mut hi = point.to_vec();
        let mut lo = point.to_vec();
        hi[var] += step;
        lo[var] -= step;
        let fd = (self.eval(&hi)? - self.eval(&lo)?) / (2.0 * step);
        let jet = self.lift(point, 1)?;
        let mut e = vec![0u8; point.len()];
        e[var] = 1;
        Ok((jet.extract_partial(&e)?, fd))
    }
}

fn at_node(err: CoreError, node: &ScalarExpression) -> CoreError {
    match err {
        CoreError::DomainViolation { detail, .. } => CoreError::DomainViolation {
            node: format!("{node}"),
            detail,
        },
        other => other,
    }
}

impl fmt::Display for ScalarExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E::Constant(v) => write!(f, "{v}"),
            E::Var(i) => write!(f, "x{i}"),
            E::Add(a, b) => write!(f, "({a} + {b})"),
            E::Sub(a, b) => write!(f, "({a} - {b})"),
            E::Mul(a, b) => write!(f, "({a} * {b})"),
            E::Div(a, b) => write!(f, "({a} / {b})"),
            E::Neg(a) => write!(f, "(-{a})"),
            E::PowInt(a, k) => write!(f, "{a}^{k}"),
            E::Sqrt(a) => write!(f, "sqrt({a})"),
            E::Exp(a) => write!(f, "exp({a})"),
            E::Log(a) => write!(f, "log({a})"),
            E::Sin(a) => write!(f, "sin({a})"),
            E::Cos(a) => write!(f, "cos({a})"),
        }
    }
}
