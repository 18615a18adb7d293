//! Gauss–Legendre quadrature.
//!
//! The brute-force posterior oracle integrates likelihoods over the slab
//! `[-1, 1]^s` of each active coefficient set. An order-`n` Gauss–Legendre
//! rule is exact for polynomials of degree `<= 2n - 1`, so modest orders
//! already resolve the smooth, low-dimensional integrands that appear there;
//! the oracle certifies itself by doubling the order and comparing.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
//! iteration from the Chebyshev-flavoured initial guesses
//! `cos(pi (i - 1/4) / (n + 1/2))`; weights are `2 / ((1 - x^2) P_n'(x)^2)`.
//! Computed rules are symmetrized exactly around zero, which keeps mapped
//! rules and tensor products bit-reproducible across runs.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A one-dimensional quadrature rule: paired nodes and weights.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// Legendre polynomial value and derivative at `x` by the three-term
/// recurrence `(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}`.
fn legendre_value_deriv<T: Real>(n: usize, x: T) -> (T, T) {
    let mut prev = T::one(); // P_0
    let mut cur = x; // P_1
    if n == 0 {
        return (prev, T::zero());
    }
    for k in 1..n {
        let kf = T::of_usize(k);
        let next = ((kf + kf + T::one()) * x * cur - kf * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1), stable away from the
    // endpoints; Gauss nodes stay strictly inside (-1, 1).
    let deriv = T::of_usize(n) * (x * cur - prev) / (x * x - T::one());
    (cur, deriv)
}

/// The order-`n` Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(order: usize) -> Result<QuadratureRule<T>> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "quadrature order must be at least 1".to_string(),
        ));
    }
    let pi = T::of(std::f64::consts::PI);
    let tol = T::epsilon() * T::of(4.0);
    let half = T::of(0.5);
    let mut nodes = vec![T::zero(); order];
    let mut weights = vec![T::zero(); order];
    // Roots come out in decreasing order of the cosine guesses; only the
    // lower half is computed, the rest is mirrored exactly.
    for i in 0..(order + 1) / 2 {
        let k = T::of_usize(order - i); // i-th root from the left
        let mut x = (pi * (k - T::of(0.25)) / (T::of_usize(order) + half)).cos();
        for _ in 0..100 {
            let (value, d) = legendre_value_deriv(order, x);
            let step = value / d;
            x = x - step;
            if step.abs() <= tol {
                break;
            }
        }
        let (_, deriv) = legendre_value_deriv(order, x);
        let w = T::of(2.0) / ((T::one() - x * x) * deriv * deriv);
        nodes[i] = x;
        weights[i] = w;
        nodes[order - 1 - i] = -x;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = T::zero();
    }
    Ok(QuadratureRule { nodes, weights })
}

impl<T: Real> QuadratureRule<T> {
    /// Affine image of the rule on `[a, b]` (`a < b`).
    pub fn mapped(&self, a: T, b: T) -> Result<QuadratureRule<T>> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "quadrature interval needs a < b, got [{a}, {b}]"
            )));
        }
        let half_len = (b - a) * T::of(0.5);
        let mid = (a + b) * T::of(0.5);
        Ok(QuadratureRule {
            nodes: self.nodes.iter().map(|&x| mid + half_len * x).collect(),
            weights: self.weights.iter().map(|&w| w * half_len).collect(),
        })
    }

    /// `Σ_i w_i f(x_i)`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor-product integration of `f` over the `dim`-fold product of the
/// rule's interval, walking the full node grid with an odometer (the grid has
/// `len^dim` points, so this is for small `dim` — the oracle uses `dim <= 3`).
pub fn tensor_integrate<T, F>(rule: &QuadratureRule<T>, dim: usize, mut f: F) -> Result<T>
where
    T: Real,
    F: FnMut(&[T]) -> T,
{
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "tensor integration needs dim >= 1".to_string(),
        ));
    }
    let n = rule.len();
    let mut index = vec![0usize; dim];
    let mut point = vec![T::zero(); dim];
    let mut total = T::zero();
    loop {
        let mut w = T::one();
        for (d, &i) in index.iter().enumerate() {
            point[d] = rule.nodes[i];
            w = w * rule.weights[i];
        }
        total = total + w * f(&point);
        // Odometer increment; finished once every digit has wrapped.
        let mut d = 0;
        loop {
            index[d] += 1;
            if index[d] < n {
                break;
            }
            index[d] = 0;
            d += 1;
            if d == dim {
                return Ok(total);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules_match_closed_forms() {
        let r1 = gauss_legendre::<f64>(1).expect("order 1");
        assert_eq!(r1.nodes, vec![0.0], "order 1 node is the midpoint");
        assert!((r1.weights[0] - 2.0).abs() <= 1e-15, "order 1 weight is 2");

        let r2 = gauss_legendre::<f64>(2).expect("order 2");
        let x = 1.0 / 3f64.sqrt();
        assert!(
            (r2.nodes[0] + x).abs() <= 1e-15 && (r2.nodes[1] - x).abs() <= 1e-15,
            "order 2 nodes are -/+ 1/sqrt(3), got {:?}",
            r2.nodes
        );
        assert!(
            (r2.weights[0] - 1.0).abs() <= 1e-15 && (r2.weights[1] - 1.0).abs() <= 1e-15,
            "order 2 weights are 1, got {:?}",
            r2.weights
        );

        let r3 = gauss_legendre::<f64>(3).expect("order 3");
        let x = 0.6f64.sqrt();
        for (got, want) in r3.nodes.iter().zip([-x, 0.0, x]) {
            assert!((got - want).abs() <= 1e-15, "order 3 node {got} vs {want}");
        }
        for (got, want) in r3.weights.iter().zip([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]) {
            assert!((got - want).abs() <= 1e-15, "order 3 weight {got} vs {want}");
        }

        // Classic order-5 table values.
        let r5 = gauss_legendre::<f64>(5).expect("order 5");
        let nodes = [
            -0.906179845938664,
            -0.5384693101056831,
            0.0,
            0.5384693101056831,
            0.906179845938664,
        ];
        let weights = [
            0.23692688505618908,
            0.47862867049936647,
            0.5688888888888889,
            0.47862867049936647,
            0.23692688505618908,
        ];
        for (got, want) in r5.nodes.iter().zip(nodes) {
            assert!((got - want).abs() <= 1e-14, "order 5 node {got} vs {want}");
        }
        for (got, want) in r5.weights.iter().zip(weights) {
            assert!((got - want).abs() <= 1e-14, "order 5 weight {got} vs {want}");
        }
    }

    #[test]
    fn rule_is_exact_through_degree_2n_minus_1() {
        for order in 1..=12 {
            let rule = gauss_legendre::<f64>(order).expect("rule builds");
            for k in 0..=(2 * order - 1) {
                let got = rule.integrate(|x| x.powi(k as i32));
                let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!(
                    (got - want).abs() <= 1e-13,
                    "order {order}, moment {k}: got {got}, exact {want}"
                );
            }
        }
        // Degree 2n is the first failure and visibly so at low order.
        for order in 1..=4 {
            let rule = gauss_legendre::<f64>(order).expect("rule builds");
            let k = 2 * order;
            let got = rule.integrate(|x| x.powi(k as i32));
            let want = 2.0 / (k as f64 + 1.0);
            assert!(
                (got - want).abs() > 1e-4,
                "order {order} should not integrate x^{k} exactly, error {}",
                (got - want).abs()
            );
        }
    }

    #[test]
    fn nodes_are_symmetric_sorted_and_weights_sum_to_length() {
        for order in [7usize, 8, 33] {
            let rule = gauss_legendre::<f64>(order).expect("rule builds");
            for i in 0..order / 2 {
                assert_eq!(
                    rule.nodes[i].to_bits(),
                    (-rule.nodes[order - 1 - i]).to_bits(),
                    "order {order}: node {i} is not the exact mirror of its partner"
                );
                assert_eq!(
                    rule.weights[i], rule.weights[order - 1 - i],
                    "order {order}: weights not symmetric at {i}"
                );
            }
            if order % 2 == 1 {
                assert_eq!(rule.nodes[order / 2], 0.0, "odd order centers on zero");
            }
            for &w in &rule.weights {
                assert!(w > 0.0, "weights must be positive, got {w}");
            }
            for w in rule.nodes.windows(2) {
                assert!(w[0] < w[1], "nodes must increase, got {} then {}", w[0], w[1]);
            }
            let total: f64 = rule.weights.iter().sum();
            assert!(
                (total - 2.0).abs() <= 1e-13,
                "order {order}: weights sum to {total}, expected 2"
            );
        }
    }

    #[test]
    fn mapped_rule_integrates_shifted_intervals() {
        let rule = gauss_legendre::<f64>(20).expect("rule builds");
        let unit = rule.mapped(0.0, 1.0).expect("maps");
        let got = unit.integrate(|x| x * x * x);
        assert!(
            (got - 0.25).abs() <= 1e-15,
            "cubic moment on [0,1]: got {got}, exact 0.25"
        );
        let shifted = rule.mapped(0.2, 1.7).expect("maps");
        let got = shifted.integrate(f64::exp);
        let want = 1.7f64.exp() - 0.2f64.exp();
        assert!(
            (got - want).abs() <= 1e-12,
            "exp on [0.2, 1.7]: got {got}, exact {want}"
        );
        let total: f64 = shifted.weights.iter().sum();
        assert!(
            (total - 1.5).abs() <= 1e-13,
            "mapped weights sum to the interval length, got {total}"
        );
        let err = rule.mapped(1.0, 1.0).expect_err("empty interval rejected");
        assert!(matches!(err, Error::InvalidArgument(_)), "got {err:?}");
    }

    #[test]
    fn order_doubling_certifies_smooth_integrands() {
        // Poles at +/- i put the integrand's Bernstein ellipse at
        // rho = 1 + sqrt(2), so the order-n error decays like rho^{-2n}:
        // order 24 is already converged to machine precision.
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let want = std::f64::consts::FRAC_PI_2;
        let coarse = gauss_legendre::<f64>(24).expect("rule").integrate(f);
        let fine = gauss_legendre::<f64>(48).expect("rule").integrate(f);
        assert!(
            (coarse - fine).abs() <= 1e-12,
            "order doubling moved the integral by {:.3e}",
            (coarse - fine).abs()
        );
        assert!(
            (fine - want).abs() <= 1e-13,
            "got {fine}, exact pi/2 = {want}"
        );
    }

    #[test]
    fn tensor_rule_integrates_separable_monomials() {
        let rule = gauss_legendre::<f64>(8).expect("rule builds");
        let got = tensor_integrate(&rule, 2, |x| x[0] * x[0] * x[1].powi(4)).expect("integrates");
        let want = (2.0 / 3.0) * (2.0 / 5.0);
        assert!(
            (got - want).abs() <= 1e-13,
            "x^2 y^4 over the square: got {got}, exact {want}"
        );
        let got = tensor_integrate(&rule, 3, |x| x.iter().map(|v| v * v).product())
            .expect("integrates");
        let want = (2.0f64 / 3.0).powi(3);
        assert!(
            (got - want).abs() <= 1e-13,
            "x^2 y^2 z^2 over the cube: got {got}, exact {want}"
        );
        let err = tensor_integrate(&rule, 0, |_| 0.0).expect_err("dim 0 rejected");
        assert!(matches!(err, Error::InvalidArgument(_)), "got {err:?}");
    }

    #[test]
    fn rejects_order_zero() {
        let err = gauss_legendre::<f64>(0).expect_err("order 0 rejected");
        assert!(matches!(err, Error::InvalidArgument(_)), "got {err:?}");
    }
}
