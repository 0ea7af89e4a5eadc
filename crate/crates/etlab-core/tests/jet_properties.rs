//! Property tests for the jet substrate, checked against a symbolic
//! polynomial oracle that differentiates coefficient maps directly.

use std::collections::HashMap;

use proptest::prelude::*;

use etlab_core::expr::ScalarExpression as E;
use etlab_core::jet::Jet;

/// A sparse polynomial as a map from exponent tuples to coefficients; the
/// oracle differentiates it symbolically, independent of the jet stack.
#[derive(Debug, Clone)]
struct Polynomial {
    num_vars: usize,
    terms: HashMap<Vec<u8>, f64>,
}

impl Polynomial {
    fn eval(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, c)| {
                c * alpha
                    .iter()
                    .zip(point)
                    .map(|(&a, &x)| x.powi(a as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Raw partial derivative by the falling-factorial rule.
    fn partial(&self, beta: &[u8], point: &[f64]) -> f64 {
        let mut acc = 0.0;
        'terms: for (alpha, c) in &self.terms {
            let mut coeff = *c;
            let mut monomial = 1.0;
            for v in 0..self.num_vars {
                if alpha[v] < beta[v] {
                    continue 'terms;
                }
                for k in 0..beta[v] {
                    coeff *= (alpha[v] - k) as f64;
                }
                monomial *= point[v].powi((alpha[v] - beta[v]) as i32);
            }
            acc += coeff * monomial;
        }
        acc
    }

    fn to_expression(&self) -> E {
        let mut expr = E::constant(0.0);
        // deterministic order for reproducible trees
        let mut entries: Vec<(&Vec<u8>, &f64)> = self.terms.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        for (alpha, c) in entries {
            let mut term = E::constant(*c);
            for (v, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    term = E::Mul(
                        Box::new(term),
                        Box::new(E::PowInt(Box::new(E::var(v)), a as i32)),
                    );
                }
            }
            expr = E::Add(Box::new(expr), Box::new(term));
        }
        expr
    }
}

fn arbitrary_polynomial(num_vars: usize) -> impl Strategy<Value = Polynomial> {
    let term = (
        proptest::collection::vec(0u8..=3, num_vars),
        -2.0f64..2.0,
    );
    proptest::collection::vec(term, 1..8).prop_filter_map(
        "total degree within 5",
        move |terms| {
            let mut map = HashMap::new();
            for (alpha, c) in terms {
                if alpha.iter().map(|&a| a as usize).sum::<usize>() <= 5 {
                    *map.entry(alpha).or_insert(0.0) += c;
                }
            }
            if map.is_empty() {
                None
            } else {
                Some(Polynomial {
                    num_vars,
                    terms: map,
                })
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifted_polynomials_match_symbolic_derivatives(
        poly in arbitrary_polynomial(3),
        point in proptest::collection::vec(-1.2f64..1.2, 3),
        beta in proptest::collection::vec(0u8..=2, 3),
    ) {
        prop_assume!(beta.iter().map(|&b| b as usize).sum::<usize>() <= 5);
        let expr = poly.to_expression();
        let jet = expr.lift(&point, 5).unwrap();
        let from_jet = jet.extract_partial(&beta).unwrap();
        let from_oracle = poly.partial(&beta, &point);
        let scale = 1.0 + from_oracle.abs() + poly.eval(&point).abs();
        prop_assert!(
            (from_jet - from_oracle).abs() / scale < 1e-12,
            "jet {from_jet} vs oracle {from_oracle}"
        );
    }

    #[test]
    fn four_variable_polynomials_match(
        poly in arbitrary_polynomial(4),
        point in proptest::collection::vec(-1.0f64..1.0, 4),
    ) {
        let expr = poly.to_expression();
        let jet = expr.lift(&point, 5).unwrap();
        for beta in [[1u8, 0, 0, 0], [0, 2, 0, 0], [1, 1, 1, 0], [2, 0, 0, 2]] {
            let from_jet = jet.extract_partial(&beta).unwrap();
            let from_oracle = poly.partial(&beta, &point);
            let scale = 1.0 + from_oracle.abs() + poly.eval(&point).abs();
            prop_assert!((from_jet - from_oracle).abs() / scale < 1e-12);
        }
    }

    #[test]
    fn reciprocal_round_trip(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 35),
        lead in 0.1f64..3.0,
        sign in proptest::bool::ANY,
    ) {
        // random order-4 jets in 3 variables with constant term away from
        // zero; fluctuation coefficients scale with the constant term, as
        // for lifts of functions bounded away from zero
        let mut c: Vec<f64> = coeffs.iter().map(|x| x * lead).collect();
        c[0] = if sign { lead } else { -lead };
        let jet = Jet::from_coeffs(3, 4, c);
        let product = jet.mul(&jet.recip().unwrap()).unwrap();
        prop_assert!((product.value() - 1.0).abs() < 1e-12);
        for &coeff in &product.coeffs()[1..] {
            prop_assert!(coeff.abs() < 1e-12, "non-constant coefficient {coeff}");
        }
    }

    #[test]
    fn sqrt_squares_back(
        coeffs in proptest::collection::vec(-0.5f64..0.5, 15),
        lead in 0.2f64..4.0,
    ) {
        let mut c = coeffs.clone();
        c[0] = lead;
        let jet = Jet::from_coeffs(2, 4, c);
        let root = jet.sqrt().unwrap();
        let squared = root.mul(&root).unwrap();
        for (a, b) in squared.coeffs().iter().zip(jet.coeffs()) {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn leibniz_rule_first_order(
        a in proptest::collection::vec(-2.0f64..2.0, 15),
        b in proptest::collection::vec(-2.0f64..2.0, 15),
    ) {
        let x = Jet::from_coeffs(2, 4, a);
        let y = Jet::from_coeffs(2, 4, b);
        let product = x.mul(&y).unwrap();
        for v in 0..2 {
            let mut e = vec![0u8; 2];
            e[v] = 1;
            let lhs = product.extract_partial(&e).unwrap();
            let rhs = x.extract_partial(&e).unwrap() * y.value()
                + x.value() * y.extract_partial(&e).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn truncation_is_a_prefix(
        coeffs in proptest::collection::vec(-2.0f64..2.0, 35),
        order in 0usize..4,
    ) {
        let jet = Jet::from_coeffs(3, 4, coeffs);
        let truncated = jet.truncate(order);
        prop_assert_eq!(truncated.coeffs(), &jet.coeffs()[..truncated.coeffs().len()]);
    }
}
