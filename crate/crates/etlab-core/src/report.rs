//! Machine-readable run reports. The JSON document is the primary artifact;
//! the text rendering is derived from it, never the other way round. Reports
//! contain no timestamps or environment data so identical (config, seed)
//! runs serialize byte-identically.

use serde::Serialize;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// How the observed residual compares against the tolerance: `Below` for
/// identities (residual must stay under), `Above` for negative controls
/// (residual must exceed, proving sensitivity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckDirection {
    Below,
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRecord {
    pub name: String,
    pub formula: String,
    pub points: usize,
    pub skipped: usize,
    pub max_rel: f64,
    pub mean_rel: f64,
    pub tolerance: f64,
    pub check: CheckDirection,
    /// Advisory records are listed but never gate the run.
    pub advisory: bool,
    pub verdict: Verdict,
}

/// Accumulates per-point relative residuals into one record.
#[derive(Debug, Clone)]
pub struct Accumulator {
    evaluated: usize,
    skipped: usize,
    max_rel: f64,
    sum_rel: f64,
}

impl Accumulator {
    pub fn new() -> Accumulator {
        Accumulator {
            evaluated: 0,
            skipped: 0,
            max_rel: 0.0,
            sum_rel: 0.0,
        }
    }

    pub fn add(&mut self, rel: f64) {
        self.evaluated += 1;
        self.max_rel = self.max_rel.max(rel);
        self.sum_rel += rel;
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    /// Record one residual measured jointly over `count` points (family-style
    /// checks such as level-set spreads and multi-draw controls).
    pub fn add_family(&mut self, rel: f64, count: usize) {
        self.evaluated += count;
        self.max_rel = self.max_rel.max(rel);
        self.sum_rel += rel * count as f64;
    }

    pub fn finalize(
        &self,
        name: &str,
        formula: &str,
        tolerance: f64,
        check: CheckDirection,
        advisory: bool,
    ) -> IdentityRecord {
        let verdict = if self.evaluated == 0 {
            Verdict::Skipped
        } else {
            let ok = match check {
                CheckDirection::Below => self.max_rel <= tolerance,
                CheckDirection::Above => self.max_rel >= tolerance,
            };
            if ok {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        };
        IdentityRecord {
            name: name.to_string(),
            formula: formula.to_string(),
            points: self.evaluated,
            skipped: self.skipped,
            max_rel: self.max_rel,
            mean_rel: if self.evaluated > 0 {
                self.sum_rel / self.evaluated as f64
            } else {
                0.0
            },
            tolerance,
            check,
            advisory,
            verdict,
        }
    }
}

impl Default for Accumulator {
    fn default() -> Self {
        Accumulator::new()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub identities: Vec<IdentityRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub structure: String,
    pub dim: usize,
    pub seed: u64,
    pub samples: usize,
    pub jet_order: usize,
    pub suites: Vec<SuiteReport>,
    pub points_evaluated: usize,
    pub points_skipped: usize,
    pub overall_pass: bool,
}

impl RunReport {
    /// Overall verdict: no failing identity, and not vacuous (at least one
    /// identity actually evaluated somewhere).
    pub fn compute_overall(&mut self) {
        let mut any_fail = false;
        let mut any_evaluated = false;
        let mut evaluated = 0usize;
        let mut skipped = 0usize;
        for suite in &self.suites {
            for id in &suite.identities {
                evaluated += id.points;
                skipped += id.skipped;
                if id.advisory {
                    continue;
                }
                match id.verdict {
                    Verdict::Fail => any_fail = true,
                    Verdict::Pass => any_evaluated = true,
                    Verdict::Skipped => {}
                }
            }
        }
        self.points_evaluated = evaluated;
        self.points_skipped = skipped;
        self.overall_pass = !any_fail && any_evaluated;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Human-readable rendering, derived from the same data as the JSON.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "structure {} (dim {}), seed {}, {} samples, jet order {}",
            self.structure, self.dim, self.seed, self.samples, self.jet_order
        );
        for suite in &self.suites {
            let _ = writeln!(out, "suite {}", suite.suite);
            for id in &suite.identities {
                let verdict = match id.verdict {
                    Verdict::Pass => "pass",
                    Verdict::Fail => "FAIL",
                    Verdict::Skipped => "skipped",
                };
                let direction = match id.check {
                    CheckDirection::Below => "<=",
                    CheckDirection::Above => ">=",
                };
                let advisory = if id.advisory { " (advisory)" } else { "" };
                let _ = writeln!(
                    out,
                    "  {:<32} {:>10} | max {:.3e} {} {:.1e}, mean {:.3e}, points {}{}{}",
                    id.name,
                    verdict,
                    id.max_rel,
                    direction,
                    id.tolerance,
                    id.mean_rel,
                    id.points,
                    if id.skipped > 0 {
                        format!(" (+{} skipped)", id.skipped)
                    } else {
                        String::new()
                    },
                    advisory,
                );
            }
        }
        let _ = writeln!(
            out,
            "overall: {} ({} evaluations, {} skipped)",
            if self.overall_pass { "pass" } else { "FAIL" },
            self.points_evaluated,
            self.points_skipped
        );
        out
    }
}
