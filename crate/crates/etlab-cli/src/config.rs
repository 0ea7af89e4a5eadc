//! Run configuration: JSON files selecting a structure (catalog entry or
//! inline chart), the suites to run, sampling controls and tolerance
//! overrides.

use std::collections::BTreeMap;

use serde::Deserialize;

use etlab_core::catalog::{self, VerificationTarget};
use etlab_core::chart::MetricChart;
use etlab_core::error::{CoreError, Result};
use etlab_core::parse::parse_expression;
use etlab_core::structures::{CaseTag, EinsteinTypeStructure};
use etlab_core::suites::{RunSpec, SUITE_NAMES};
use etlab_core::tolerances::Tolerances;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub structure: StructureSpec,
    #[serde(default = "default_suites")]
    pub suites: SuiteSelection,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_jet_order")]
    pub jet_order: usize,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub report_format: ReportFormat,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Text,
    #[default]
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Multiply the (density, pressure) summand of the perfect-fluid trace
    /// equation by f instead of using the equation as printed.
    #[serde(default)]
    pub pfe_trace_times_f: bool,
    #[serde(default = "default_algebra_trials")]
    pub algebra_trials: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            pfe_trace_times_f: false,
            algebra_trials: default_algebra_trials(),
        }
    }
}

fn default_suites() -> SuiteSelection {
    SuiteSelection::All("all".to_string())
}

fn default_samples() -> usize {
    20
}

fn default_seed() -> u64 {
    7
}

fn default_jet_order() -> usize {
    6
}

fn default_algebra_trials() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SuiteSelection {
    All(String),
    List(Vec<String>),
}

impl SuiteSelection {
    pub fn resolve(&self) -> Result<Vec<String>> {
        match self {
            SuiteSelection::All(s) if s == "all" => {
                Ok(SUITE_NAMES.iter().map(|s| s.to_string()).collect())
            }
            SuiteSelection::All(s) => Err(CoreError::InvalidArgument(format!(
                "suites must be \"all\" or a list of suite names, got \"{s}\""
            ))),
            SuiteSelection::List(list) => {
                if list.is_empty() {
                    return Err(CoreError::InvalidArgument(
                        "suite list must not be empty".into(),
                    ));
                }
                for s in list {
                    if !SUITE_NAMES.contains(&s.as_str()) {
                        return Err(CoreError::InvalidArgument(format!(
                            "unknown suite `{s}` (known: {})",
                            SUITE_NAMES.join(", ")
                        )));
                    }
                }
                Ok(list.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StructureSpec {
    Catalog {
        catalog: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Inline {
        inline: InlineStructure,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineStructure {
    pub coords: Vec<String>,
    /// Full n x n matrix of expression strings; (i, j) and (j, i) must be
    /// textually identical.
    pub metric: Vec<Vec<String>>,
    pub f: String,
    pub h: String,
    #[serde(default = "default_case")]
    pub case: CaseTag,
    /// Per-axis open sampling intervals.
    pub domain: Vec<(f64, f64)>,
}

fn default_case() -> CaseTag {
    CaseTag::Generic
}

impl InlineStructure {
    pub fn build(&self) -> Result<VerificationTarget> {
        let n = self.coords.len();
        if self.metric.len() != n || self.metric.iter().any(|row| row.len() != n) {
            return Err(CoreError::InvalidArgument(format!(
                "metric must be a {n} x {n} matrix of expression strings"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if self.metric[i][j] != self.metric[j][i] {
                    return Err(CoreError::InvalidArgument(format!(
                        "metric is not symmetric as expressions: entry ({i}, {j}) is `{}` but ({j}, {i}) is `{}`",
                        self.metric[i][j], self.metric[j][i]
                    )));
                }
            }
        }
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i..n {
                upper.push(((i, j), parse_expression(&self.metric[i][j], &self.coords)?));
            }
        }
        let chart = MetricChart::from_upper_triangle(
            self.coords.clone(),
            upper,
            self.domain.clone(),
        )?;
        let f = parse_expression(&self.f, &self.coords)?;
        let h = parse_expression(&self.h, &self.coords)?;
        let structure = EinsteinTypeStructure::new(chart, f, h, self.case);
        Ok(VerificationTarget {
            name: "inline".to_string(),
            sample_box: self.domain.clone(),
            structure,
            warped: None,
            expect_solution: false,
            expect_harmonic_weyl: false,
            expect_zero_radial_weyl: false,
            level_set: None,
            summary: "inline structure from configuration".to_string(),
        })
    }
}

impl ConfigFile {
    pub fn build_target(&self) -> Result<VerificationTarget> {
        match &self.structure {
            StructureSpec::Catalog { catalog: name, params } => catalog::build(name, params),
            StructureSpec::Inline { inline } => inline.build(),
        }
    }

    pub fn build_run_spec(&self) -> Result<RunSpec> {
        if self.samples == 0 {
            return Err(CoreError::InvalidArgument("samples must be >= 1".into()));
        }
        if self.jet_order > 10 {
            return Err(CoreError::InvalidArgument(format!(
                "jet_order {} is unreasonably deep (max 10)",
                self.jet_order
            )));
        }
        let target = self.build_target()?;
        let suites = self.suites.resolve()?;
        let mut tolerances = Tolerances::default();
        tolerances.apply_overrides(&self.tolerances)?;
        Ok(RunSpec {
            target,
            suites,
            samples: self.samples,
            seed: self.seed,
            jet_order: self.jet_order,
            tolerances,
            pfe_trace_times_f: self.options.pfe_trace_times_f,
            algebra_trials: self.options.algebra_trials,
        })
    }
}
