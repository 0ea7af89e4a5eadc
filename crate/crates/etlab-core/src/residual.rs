//! Residual bookkeeping. A residual pairs the max-abs of a left-minus-right
//! evaluation with the max-abs of the constituent terms, so the relative
//! figure `max_abs / (1 + scale)` cannot pass vacuously on tiny tensors.

use crate::tensor::{ComponentTensor, TensorEntry};

#[derive(Debug, Clone, Copy)]
pub struct Residual {
    pub max_abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(max_abs: f64, scale: f64) -> Residual {
        Residual { max_abs, scale }
    }

    pub fn zero() -> Residual {
        Residual {
            max_abs: 0.0,
            scale: 0.0,
        }
    }

    /// Residual of `value` against the scale of the terms that produced it.
    pub fn from_tensor<T: TensorEntry>(value: &ComponentTensor<T>, terms: &[f64]) -> Residual {
        Residual {
            max_abs: value.max_abs(),
            scale: terms.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn from_scalar(value: f64, terms: &[f64]) -> Residual {
        Residual {
            max_abs: value.abs(),
            scale: terms.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn relative(&self) -> f64 {
        self.max_abs / (1.0 + self.scale)
    }

    /// Pointwise worst of two residuals.
    pub fn max(self, other: Residual) -> Residual {
        Residual {
            max_abs: self.max_abs.max(other.max_abs),
            scale: self.scale.max(other.scale),
        }
    }
}
