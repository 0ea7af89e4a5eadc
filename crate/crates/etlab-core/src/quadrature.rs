//! Adaptive Gauss-Kronrod quadrature (7/15 pair with interval bisection).
//!
//! Used for the arclength reparametrization of the catalog's warped-product
//! profile, where the integrable endpoint singularity is removed first by the
//! substitution u = 1 + s^2.

/// Positive Kronrod abscissae for the 7-15 pair.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// 7-point Gauss weights (for the odd Kronrod abscissae).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_gauss = WG[3] * fc;
    let mut result_kronrod = WGK[7] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        result_kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * fsum;
        }
    }
    (result_kronrod * half, (result_kronrod - result_gauss).abs() * half.abs())
}

/// Integrate `f` over [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let (value, err) = kronrod_15(f, a, b);
        if err <= tol || depth >= 40 {
            return value;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, tol * 0.5, depth + 1) + recurse(f, mid, b, tol * 0.5, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    recurse(f, a, b, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-13);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert_relative_eq!(v, exact, epsilon = 1e-12);
    }

    #[test]
    fn oscillatory_integral_converges() {
        let v = integrate(&|x: f64| (10.0 * x).sin(), 0.0, 1.0, 1e-13);
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert_relative_eq!(v, exact, epsilon = 1e-11);
    }

    #[test]
    fn square_root_after_substitution() {
        // integral of 1/(2 sqrt(u)) du over (0,1] equals 1; substitute u = s^2
        let v = integrate(&|_s: f64| 1.0, 0.0, 1.0, 1e-13);
        assert_relative_eq!(v, 1.0, epsilon = 1e-13);
    }
}
