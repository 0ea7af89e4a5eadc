//! Per-identity relative tolerances. The stage scaling follows the number of
//! derivative orders an identity consumes: 1e-8 for up to two orders, 1e-7
//! for three, 1e-6 for four and more, with tighter values where arithmetic is
//! exact (consistency checks, pure algebra).

use std::collections::BTreeMap;

use crate::error::{CoreError, Result};

const DEFAULTS: &[(&str, f64)] = &[
    ("ricci_identity", 1e-9),
    ("riemann_antisym_first_pair", 1e-8),
    ("riemann_antisym_second_pair", 1e-8),
    ("riemann_pair_swap", 1e-8),
    ("first_bianchi", 1e-8),
    ("contracted_second_bianchi", 1e-8),
    ("weyl_trace_free", 1e-8),
    ("cotton_antisymmetry", 1e-8),
    ("cotton_cyclic", 1e-8),
    ("cotton_trace_free", 1e-8),
    ("bach_symmetric", 1e-8),
    ("bach_trace_free", 1e-8),
    ("metric_compatibility", 1e-10),
    ("cotton_weyl", 1e-8),
    ("bach_forms_agree", 1e-8),
    ("div_cotton_symmetric", 1e-8),
    ("div_cotton_trace_free", 1e-8),
    ("div_bach", 1e-7),
    ("principal", 1e-8),
    ("trace", 1e-8),
    ("trace_consistency", 1e-12),
    ("grad_h", 1e-8),
    ("case_principal", 1e-8),
    ("case_trace", 1e-8),
    ("case_h", 1e-8),
    ("lemma_fc", 1e-8),
    ("lemma_bach", 1e-7),
    ("lemma_second_order", 1e-7),
    ("lemma_third_order", 1e-6),
    ("cotton_vanishes", 1e-8),
    ("div_weyl_vanishes", 1e-8),
    ("div2_weyl", 1e-6),
    ("div3_weyl", 1e-6),
    ("div4_weyl_vanishes", 1e-6),
    ("radial_weyl_vanishes", 1e-9),
    ("ricci_eigenvector", 1e-8),
    ("ricci_eigenframe_combination", 1e-8),
    ("level_set_gradient_spread", 1e-9),
    ("level_set_identity", 1e-8),
    ("fiber_einstein_weyl", 1e-7),
    ("fiber_einstein", 1e-9),
    ("hessian_cotton_cancellation", 1e-12),
    ("cotton_ricci_contraction", 1e-9),
    ("control_unsymmetrized_rank3", 1e-3),
    ("control_perturbed_h", 1e-3),
];

#[derive(Debug, Clone)]
pub struct Tolerances {
    map: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            map: DEFAULTS
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
        }
    }
}

impl Tolerances {
    /// Override defaults by identity name; unknown names are config errors.
    pub fn apply_overrides(&mut self, overrides: &BTreeMap<String, f64>) -> Result<()> {
        for (k, v) in overrides {
            if !self.map.contains_key(k) {
                return Err(CoreError::InvalidArgument(format!(
                    "unknown tolerance key `{k}`"
                )));
            }
            if !(*v > 0.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "tolerance `{k}` must be positive, got {v}"
                )));
            }
            self.map.insert(k.clone(), *v);
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> f64 {
        *self
            .map
            .get(key)
            .unwrap_or_else(|| panic!("tolerance key `{key}` is not registered"))
    }

    pub fn known_keys() -> impl Iterator<Item = &'static str> {
        DEFAULTS.iter().map(|&(k, _)| k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_known_keys() {
        let mut t = Tolerances::default();
        let mut o = BTreeMap::new();
        o.insert("lemma_third_order".to_string(), 1e-5);
        t.apply_overrides(&o).unwrap();
        assert_eq!(t.get("lemma_third_order"), 1e-5);
        assert_eq!(t.get("lemma_fc"), 1e-8);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut t = Tolerances::default();
        let mut o = BTreeMap::new();
        o.insert("no_such_identity".to_string(), 1e-5);
        assert!(t.apply_overrides(&o).is_err());
    }
}
