//! Exact curvature computation and residual certification for Einstein-type
//! structures (f·Ric = ∇²f + h·g) on explicit metric charts.
//!
//! All derivatives come from truncated multivariate Taylor jets, so every
//! residual reported by this crate is exact up to floating-point roundoff;
//! nothing inside the engine is finite-differenced.

pub mod algebra;
pub mod catalog;
pub mod chart;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod multi_index;
pub mod parse;
pub mod quadrature;
pub mod report;
pub mod residual;
pub mod sample;
pub mod structures;
pub mod suites;
pub mod tensor;
pub mod tolerances;

pub use chart::MetricChart;
pub use error::{CoreError, Result};
pub use expr::ScalarExpression;
pub use geometry::CurvatureBundle;
pub use jet::Jet;
pub use residual::Residual;
pub use structures::{CaseTag, EinsteinTypeStructure};
pub use tensor::{ComponentTensor, MetricValue, Variance};
