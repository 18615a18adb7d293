//! Scalar abstraction and small numeric helpers.
//!
//! Everything in the numerical core is generic over [`Real`], a thin extension of
//! `num_traits::Float` that adds conversions from `f64`/`usize` and the two random
//! draws the samplers need (standard normal, uniform on a closed interval). Only
//! `f32` and `f64` implement it; concrete aliases for the common `f64` instantiations
//! live at the crate root.
//!
//! The helpers at the bottom (`ln_gamma`, `ln_binomial`, `log_sum_exp`, ...) are the
//! shared log-space plumbing for prior normalizers and combinatorial terms. They are
//! deliberately generic so that the same code path is exercised regardless of the
//! scalar in play.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar usable throughout the crate.
///
/// Beyond arithmetic this adds infallible-for-finite conversions and the random
/// draws used by the prior sampler and the proposal kernels, so that generic code
/// never needs to thread `rand_distr` bounds through its signatures.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert from `f64`, rounding to the nearest representable value.
    fn of(x: f64) -> Self;

    /// Convert from `usize`, rounding to the nearest representable value.
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    /// Widen to `f64` (lossless for `f32`/`f64`).
    fn as_f64(self) -> f64;

    /// One standard normal draw.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw on the closed interval `[lo, hi]`.
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn of(x: f64) -> Self {
                x as $t
            }

            fn as_f64(self) -> f64 {
                self as f64
            }

            fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(StandardNormal)
            }

            fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
                rng.random_range(lo..=hi)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Lanczos coefficients (g = 7, 9 terms); accurate to ~15 significant digits in f64.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function, Lanczos approximation with reflection for
/// arguments below 1/2. Infinite at non-positive integers.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::of(0.5) {
        // Reflection: Γ(x) Γ(1-x) = π / sin(πx).
        let pi = T::PI();
        let sin_pix = (pi * x).sin();
        if sin_pix == T::zero() {
            return T::infinity();
        }
        return (pi / sin_pix.abs()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let mut acc = T::of(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::of(c) / (z + T::of_usize(i));
    }
    let t = z + T::of(LANCZOS_G) + T::of(0.5);
    let half_ln_two_pi = T::of(0.918_938_533_204_672_7); // ln(2π)/2
    half_ln_two_pi + (z + T::of(0.5)) * t.ln() - t + acc.ln()
}

/// Natural log of `n!`.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    ln_gamma(T::of(n as f64 + 1.0))
}

/// Natural log of the binomial coefficient `C(n, k)`. Zero-width cases return 0.
pub fn ln_binomial<T: Real>(n: u64, k: u64) -> T {
    assert!(k <= n, "ln_binomial: k = {k} exceeds n = {n}");
    ln_factorial::<T>(n) - ln_factorial::<T>(k) - ln_factorial::<T>(n - k)
}

/// log(Σ exp(x_i)) with the usual max shift; empty input gives -∞.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().cloned().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    let s: T = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// log(1 - exp(x)) for x < 0, stable near both ends.
pub fn ln_one_minus_exp<T: Real>(x: T) -> T {
    assert!(x < T::zero(), "ln_one_minus_exp needs a negative argument, got {x}");
    // For x close to 0 use ln(-expm1(x)); otherwise ln_1p(-exp(x)).
    if x > T::of(-std::f64::consts::LN_2) {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_known_values() {
        // Γ(1/2) = √π, Γ(1) = 1, Γ(5) = 24.
        let cases = [
            (0.5_f64, 0.572_364_942_924_700_1),
            (1.0, 0.0),
            (2.0, 0.0),
            (5.0, 24.0_f64.ln()),
            (10.5, 1_133_278.388_948_904_7_f64.ln()),
        ];
        for (x, want) in cases {
            let got = ln_gamma(x);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "ln_gamma({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn ln_gamma_recurrence_holds_along_a_grid() {
        // Γ(x+1) = x Γ(x) ⇒ lnΓ(x+1) - lnΓ(x) = ln x.
        for i in 1..200 {
            let x = 0.1 * i as f64;
            let lhs = ln_gamma(x + 1.0) - ln_gamma(x);
            let rhs = x.ln();
            assert!(
                (lhs - rhs).abs() <= 1e-11 * rhs.abs().max(1.0),
                "recurrence broken at x = {x}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn ln_binomial_matches_exact_integer_enumeration() {
        // Exact u128 Pascal triangle as the oracle.
        let mut row: Vec<u128> = vec![1];
        for n in 0..=60u64 {
            for k in 0..=n {
                let want = (row[k as usize] as f64).ln();
                let got = ln_binomial::<f64>(n, k);
                let tol = 1e-12 * want.abs().max(1.0);
                assert!(
                    (got - want).abs() <= tol,
                    "ln C({n},{k}) = {got}, exact {want}"
                );
            }
            let mut next = vec![1u128];
            for k in 0..n as usize {
                next.push(row[k] + row[k + 1]);
            }
            next.push(1);
            row = next;
        }
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        let got = log_sum_exp(&[-1000.0, -1000.0]);
        let want = -1000.0 + 2.0_f64.ln();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn ln_one_minus_exp_agrees_with_direct_formula_in_safe_range() {
        for &x in &[-0.01_f64, -0.5, -1.0, -5.0, -40.0] {
            let got = ln_one_minus_exp(x);
            let want = (1.0 - x.exp()).ln();
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "x = {x}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn generic_helpers_also_run_in_f32() {
        let got = ln_binomial::<f32>(10, 4);
        let want = 210.0_f32.ln();
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        let lse = log_sum_exp::<f32>(&[0.0, 0.0]);
        assert!((lse - std::f32::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn uniform_draw_stays_inside_closed_interval() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let v = f64::uniform(&mut rng, -1.0, 1.0);
            assert!((-1.0..=1.0).contains(&v), "uniform draw {v} escaped [-1, 1]");
        }
    }
}
