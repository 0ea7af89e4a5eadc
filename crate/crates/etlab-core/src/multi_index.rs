//! Graded multi-index enumeration and the cached convolution/derivative
//! tables backing jet arithmetic.
//!
//! Multi-indices α with |α| <= order are listed degree by degree, so the
//! enumeration for order K-1 is a strict prefix of the one for order K.
//! Truncating a jet is therefore a prefix copy, and one multiplication table
//! serves every lower order by cutting at the right output position.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Number of multi-indices with `num_vars` variables and total degree <= `order`:
/// C(num_vars + order, order).
pub fn coefficient_count(num_vars: usize, order: usize) -> usize {
    let mut c: usize = 1;
    for k in 1..=order {
        c = c * (num_vars + k) / k;
    }
    c
}

/// Shared per-(num_vars, order) lookup tables.
pub struct JetShape {
    pub num_vars: usize,
    pub order: usize,
    /// All exponent tuples, graded (degree 0 first, then degree 1, ...).
    pub exponents: Vec<Vec<u8>>,
    /// `degree_offsets[d]` = first position with total degree d; last entry = len.
    pub degree_offsets: Vec<usize>,
    position: HashMap<Vec<u8>, usize>,
    /// Convolution triples (a, b, out) with |α_a| + |α_b| <= order, sorted by out.
    pub mul_table: Vec<(u32, u32, u32)>,
    /// Per variable v: (src, dst, factor) with coeff_out[dst] = factor * coeff_in[src],
    /// where dst indexes the order-1 prefix and factor = exponents[dst][v] + 1.
    pub partial_tables: Vec<Vec<(u32, u32, f64)>>,
}

impl JetShape {
    fn build(num_vars: usize, order: usize) -> JetShape {
        let mut exponents = Vec::with_capacity(coefficient_count(num_vars, order));
        let mut degree_offsets = Vec::with_capacity(order + 2);
        for degree in 0..=order {
            degree_offsets.push(exponents.len());
            append_degree(num_vars, degree, &mut exponents);
        }
        degree_offsets.push(exponents.len());

        let mut position = HashMap::with_capacity(exponents.len());
        for (i, e) in exponents.iter().enumerate() {
            position.insert(e.clone(), i);
        }

        let mut mul_table = Vec::new();
        for (ia, alpha) in exponents.iter().enumerate() {
            let da: usize = alpha.iter().map(|&x| x as usize).sum();
            for ib in 0..degree_offsets[order - da + 1] {
                let beta = &exponents[ib];
                let gamma: Vec<u8> = alpha.iter().zip(beta).map(|(&a, &b)| a + b).collect();
                let ic = position[&gamma];
                mul_table.push((ia as u32, ib as u32, ic as u32));
            }
        }
        mul_table.sort_unstable_by_key(|&(_, _, ic)| ic);

        let lower_len = if order == 0 {
            0
        } else {
            degree_offsets[order]
        };
        let mut partial_tables = Vec::with_capacity(num_vars);
        for v in 0..num_vars {
            let mut table = Vec::with_capacity(lower_len);
            for dst in 0..lower_len {
                let mut bumped = exponents[dst].clone();
                bumped[v] += 1;
                let src = position[&bumped];
                table.push((src as u32, dst as u32, (exponents[dst][v] + 1) as f64));
            }
            partial_tables.push(table);
        }

        JetShape {
            num_vars,
            order,
            exponents,
            degree_offsets,
            position,
            mul_table,
            partial_tables,
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn position_of(&self, alpha: &[u8]) -> Option<usize> {
        self.position.get(alpha).copied()
    }
}

fn append_degree(num_vars: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
    let mut current = vec![0u8; num_vars];
    fill(0, degree, &mut current, num_vars, out);
}

fn fill(var: usize, remaining: usize, current: &mut Vec<u8>, num_vars: usize, out: &mut Vec<Vec<u8>>) {
    if var + 1 == num_vars {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        fill(var + 1, remaining - e, current, num_vars, out);
    }
    current[var] = 0;
}

static SHAPES: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetShape>>>> = OnceLock::new();

/// Fetch (building and caching on first use) the tables for (num_vars, order).
pub fn shape(num_vars: usize, order: usize) -> Arc<JetShape> {
    let cache = SHAPES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("shape cache poisoned");
    guard
        .entry((num_vars, order))
        .or_insert_with(|| Arc::new(JetShape::build(num_vars, order)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomial() {
        assert_eq!(coefficient_count(4, 6), 210);
        assert_eq!(coefficient_count(1, 3), 4);
        assert_eq!(coefficient_count(2, 2), 6);
        assert_eq!(coefficient_count(6, 6), 924);
    }

    #[test]
    fn enumeration_has_prefix_property() {
        let big = shape(3, 5);
        let small = shape(3, 3);
        assert_eq!(&big.exponents[..small.len()], &small.exponents[..]);
    }

    #[test]
    fn degree_offsets_partition() {
        let s = shape(4, 6);
        assert_eq!(s.degree_offsets[0], 0);
        assert_eq!(*s.degree_offsets.last().unwrap(), s.len());
        for d in 0..=6 {
            for i in s.degree_offsets[d]..s.degree_offsets[d + 1] {
                let deg: usize = s.exponents[i].iter().map(|&x| x as usize).sum();
                assert_eq!(deg, d);
            }
        }
    }

    #[test]
    fn mul_table_is_complete() {
        // all pairs (α, β) with |α| + |β| <= order appear exactly once
        let s = shape(2, 3);
        let mut seen = std::collections::HashSet::new();
        for &(a, b, c) in &s.mul_table {
            let da: usize = s.exponents[a as usize].iter().map(|&x| x as usize).sum();
            let db: usize = s.exponents[b as usize].iter().map(|&x| x as usize).sum();
            assert!(da + db <= 3);
            let gamma: Vec<u8> = s.exponents[a as usize]
                .iter()
                .zip(&s.exponents[b as usize])
                .map(|(&x, &y)| x + y)
                .collect();
            assert_eq!(s.position_of(&gamma), Some(c as usize));
            assert!(seen.insert((a, b)));
        }
        let expected: usize = coefficient_count(4, 3); // pairs = indices in 2*2 vars
        assert_eq!(s.mul_table.len(), expected);
    }
}
