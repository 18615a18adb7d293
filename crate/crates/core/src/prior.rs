//! Hierarchical spike-and-slab prior over sparse networks.
//!
//! The prior factorizes over four levels, all evaluated in log space:
//!
//! * **coefficients** given the pattern: active slots draw from the uniform slab on
//!   [-1, 1] (density 1/2 each); inactive slots sit at the point mass at zero,
//!   which contributes nothing to the log density (the Dirac convention used
//!   throughout: a point-mass component evaluates to log 1 = 0 at its atom);
//! * **pattern** given the sparsity: uniform over the `C(T, s)` masks with exactly
//!   `s` active slots;
//! * **sparsity**: `π(s) ∝ exp(-λ_s s)` on the finite support `{0, ..., T}`
//!   (optionally capped below T, in which case both the sampler and the
//!   brute-force oracle use the same truncated support);
//! * **width**: `π(N) = λ^N / ((e^λ - 1) N!)` on `N ∈ {1, 2, ...}` — a positive
//!   Poisson shape, which requires `λ > 0` to be a distribution.
//!
//! Every function here is a density calculation or an exact sampler; nothing in
//! this module knows about data or likelihoods.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Architecture, SparseNetwork};
use crate::scalar::{ln_binomial, ln_factorial, ln_one_minus_exp, Real};

/// Hyper-parameters of the full hierarchy.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PriorHyperParams<T> {
    /// Width rate λ > 0 in the positive-Poisson width prior.
    pub lambda_width: T,
    /// Sparsity penalty λ_s ≥ 0 in the geometric-shape sparsity prior.
    pub lambda_sparsity: T,
    /// Sup-norm clip bound F applied to network outputs.
    pub clip_bound: T,
    /// Truncation of the width support used for sampling and width moves.
    pub n_max: u64,
    /// Optional cap on the sparsity support: when set, sparsity lives on
    /// `{0, ..., min(T, s_cap)}` for both the sampler and the oracle.
    pub s_cap: Option<u64>,
}

impl<T: Real> Default for PriorHyperParams<T> {
    fn default() -> Self {
        PriorHyperParams {
            lambda_width: T::one(),
            lambda_sparsity: T::one(),
            clip_bound: T::of(10.0),
            n_max: 64,
            s_cap: None,
        }
    }
}

impl<T: Real> PriorHyperParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_width > T::zero()) || !self.lambda_width.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "width rate must be positive and finite, got {}",
                self.lambda_width
            )));
        }
        if self.lambda_sparsity < T::zero() || !self.lambda_sparsity.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sparsity penalty must be >= 0 and finite, got {}",
                self.lambda_sparsity
            )));
        }
        if !(self.clip_bound > T::zero()) || !self.clip_bound.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "clip bound must be positive and finite, got {}",
                self.clip_bound
            )));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        Ok(())
    }

    /// Effective sparsity support bound for a model with T slots.
    pub fn sparsity_support_max(&self, t: u64) -> u64 {
        match self.s_cap {
            Some(cap) => cap.min(t),
            None => t,
        }
    }
}

/// ln(e^λ - 1), stable for both small and large λ.
fn ln_exp_m1<T: Real>(lambda: T) -> T {
    if lambda > T::of(30.0) {
        // e^λ - 1 ≈ e^λ: the correction ln(1 - e^{-λ}) is still applied.
        lambda + ln_one_minus_exp(-lambda)
    } else {
        lambda.exp_m1().ln()
    }
}

/// Log density of the coefficient vector given the pattern: `s·ln(1/2)` when every
/// active coefficient lies in [-1, 1] (−∞ if one escapes), and an error if an
/// inactive slot holds a nonzero value — that is a broken invariant, not a
/// zero-probability event.
pub fn log_prior_beta_given_gamma<T: Real>(beta: &[T], gamma: &[bool]) -> Result<T> {
    if beta.len() != gamma.len() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries, gamma has {}",
            beta.len(),
            gamma.len()
        )));
    }
    let mut active = 0u64;
    for (j, (&b, &g)) in beta.iter().zip(gamma).enumerate() {
        if g {
            if !b.is_finite() || b.abs() > T::one() {
                return Ok(T::neg_infinity());
            }
            active += 1;
        } else if b != T::zero() {
            return Err(Error::ContractViolation(format!(
                "slot {j} is inactive but holds {b}"
            )));
        }
    }
    Ok(T::of(active as f64) * T::of(0.5).ln())
}

/// Log probability of a pattern given its sparsity: `-ln C(T, s)` when the pattern
/// has exactly `s` active entries, −∞ otherwise.
pub fn log_prior_gamma_given_s<T: Real>(gamma: &[bool], s: u64) -> Result<T> {
    let t = gamma.len() as u64;
    if s > t {
        return Err(Error::InvalidArgument(format!(
            "sparsity {s} exceeds the {t} available slots"
        )));
    }
    let actual = gamma.iter().filter(|&&g| g).count() as u64;
    if actual != s {
        return Ok(T::neg_infinity());
    }
    Ok(-ln_binomial::<T>(t, s))
}

/// Log pmf of the width prior `π(N) = λ^N / ((e^λ - 1) N!)`, N ≥ 1.
pub fn log_prior_width<T: Real>(n: u64, lambda: T) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidArgument("width N must be at least 1".into()));
    }
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "width rate must be positive and finite, got {lambda}"
        )));
    }
    Ok(T::of(n as f64) * lambda.ln() - ln_exp_m1(lambda) - ln_factorial::<T>(n))
}

/// Log normalizer `ln Σ_{k=0}^{m} e^{-λ_s k}` of the sparsity prior on `{0..m}`.
fn ln_sparsity_normalizer<T: Real>(m: u64, lambda_s: T) -> T {
    if lambda_s == T::zero() {
        return T::of(m as f64 + 1.0).ln();
    }
    // Geometric sum with ratio r = e^{-λ_s}: (1 - r^{m+1}) / (1 - r).
    ln_one_minus_exp(-lambda_s * T::of(m as f64 + 1.0)) - ln_one_minus_exp(-lambda_s)
}

/// Log pmf of the sparsity prior `π(s) ∝ e^{-λ_s s}` on `{0, ..., m}` where
/// `m` is the support bound (usually T, possibly capped). Errors for `s > m`.
pub fn log_prior_sparsity<T: Real>(s: u64, support_max: u64, lambda_s: T) -> Result<T> {
    if s > support_max {
        return Err(Error::InvalidArgument(format!(
            "sparsity {s} outside the support 0..={support_max}"
        )));
    }
    if lambda_s < T::zero() || !lambda_s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sparsity penalty must be >= 0 and finite, got {lambda_s}"
        )));
    }
    Ok(-lambda_s * T::of(s as f64) - ln_sparsity_normalizer(support_max, lambda_s))
}

/// Joint log prior of a fully specified state: width, sparsity, pattern, and
/// coefficients. `n_width` is the width index N the architecture was built from.
/// States outside the (possibly capped) sparsity support get −∞.
pub fn log_prior_joint<T: Real>(
    net: &SparseNetwork<T>,
    n_width: u64,
    hyper: &PriorHyperParams<T>,
) -> Result<T> {
    hyper.validate()?;
    let t = net.arch().param_count();
    let s = net.active_count();
    let support_max = hyper.sparsity_support_max(t);
    if s > support_max {
        return Ok(T::neg_infinity());
    }
    let lp_n = log_prior_width(n_width, hyper.lambda_width)?;
    let lp_s = log_prior_sparsity(s, support_max, hyper.lambda_sparsity)?;
    let lp_gamma = log_prior_gamma_given_s(net.gamma(), s)?;
    let lp_beta = log_prior_beta_given_gamma(net.beta(), net.gamma())?;
    Ok(lp_n + lp_s + lp_gamma + lp_beta)
}

/// A draw from the full hierarchy, including the sampled width and the width-prior
/// mass lost to the `n_max` truncation.
#[derive(Clone, Debug)]
pub struct PriorDraw<T> {
    pub n_width: u64,
    pub net: SparseNetwork<T>,
    /// `Π(N > n_max)` under the untruncated width prior — reported so callers can
    /// see what the truncation discards.
    pub width_tail_mass: T,
}

/// Draw a sparsity level from the truncated-geometric shape on `{0..=m}` by
/// inverse CDF in closed form.
fn sample_sparsity<T: Real, R: Rng + ?Sized>(m: u64, lambda_s: T, rng: &mut R) -> u64 {
    if m == 0 {
        return 0;
    }
    if lambda_s == T::zero() {
        return rng.random_range(0..=m);
    }
    let u = T::uniform(rng, T::zero(), T::one());
    // Solve Σ_{k<=s} r^k ≥ u Z with r = e^{-λ_s}: s = ⌈ln(1 - u(1 - r^{m+1}))/ln r⌉ - 1.
    let r_ln = -lambda_s;
    let tail_all = ln_one_minus_exp(r_ln * T::of(m as f64 + 1.0)).exp(); // 1 - r^{m+1}
    let target = T::one() - u * tail_all;
    if target <= T::zero() {
        return m;
    }
    let s = (target.ln() / r_ln).ceil() - T::one();
    let s = s.max(T::zero()).as_f64() as u64;
    s.min(m)
}

/// Draw `s` distinct slot indices from `0..t` (Floyd's algorithm), ascending order.
fn sample_pattern<R: Rng + ?Sized>(t: u64, s: u64, rng: &mut R) -> Vec<u64> {
    let mut chosen = std::collections::BTreeSet::new();
    for j in t - s..t {
        let pick = rng.random_range(0..=j);
        if !chosen.insert(pick) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().collect()
}

/// Sample a network from the prior at a fixed architecture: sparsity, then a
/// uniform pattern, then slab coefficients.
pub fn sample_prior<T: Real, R: Rng + ?Sized>(
    arch: &Architecture,
    hyper: &PriorHyperParams<T>,
    rng: &mut R,
) -> Result<SparseNetwork<T>> {
    hyper.validate()?;
    let t = arch.param_count();
    let m = hyper.sparsity_support_max(t);
    let s = sample_sparsity(m, hyper.lambda_sparsity, rng);
    let mut net = SparseNetwork::empty(arch.clone(), hyper.clip_bound)?;
    for j in sample_pattern(t, s, rng) {
        net.activate(j, T::uniform(rng, -T::one(), T::one()))?;
    }
    Ok(net)
}

/// Sample from the full hierarchy: width N from the truncated width prior, the
/// templated architecture at that width, then the fixed-architecture draw.
pub fn sample_prior_adaptive<T: Real, R: Rng + ?Sized>(
    input_dim: usize,
    hidden_layers: usize,
    hyper: &PriorHyperParams<T>,
    rng: &mut R,
) -> Result<PriorDraw<T>> {
    hyper.validate()?;
    // Width pmf over 1..=n_max, renormalized; inverse CDF by linear scan (the
    // support is small and the pmf decays factorially).
    let mut pmf = Vec::with_capacity(hyper.n_max as usize);
    let mut total = T::zero();
    for n in 1..=hyper.n_max {
        let p = log_prior_width(n, hyper.lambda_width)?.exp();
        pmf.push(p);
        total += p;
    }
    let width_tail_mass = (T::one() - total).max(T::zero());
    let u = T::uniform(rng, T::zero(), T::one()) * total;
    let mut acc = T::zero();
    let mut n_width = hyper.n_max;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u <= acc {
            n_width = i as u64 + 1;
            break;
        }
    }
    let arch = Architecture::template(input_dim, n_width as usize, hidden_layers)?;
    let net = sample_prior(&arch, hyper, rng)?;
    Ok(PriorDraw {
        n_width,
        net,
        width_tail_mass,
    })
}

/// Exact upper tail `Π(N > n)` of the width prior, summed directly in shifted log
/// space so extreme tails do not underflow to zero prematurely.
pub fn log_prior_width_tail<T: Real>(n: u64, lambda: T) -> Result<T> {
    let first = log_prior_width(n + 1, lambda)?;
    if first == T::neg_infinity() {
        return Ok(T::neg_infinity());
    }
    let mut acc = T::one(); // term (n+1) relative to itself
    let mut rel = T::one();
    let mut k = n + 2;
    loop {
        // π(k) / π(k-1) = λ / k.
        rel = rel * lambda / T::of(k as f64);
        acc += rel;
        if rel / acc < T::of(1e-18) || k > n + 10_000 {
            break;
        }
        k += 1;
    }
    Ok(first + acc.ln())
}

/// Exact upper tail `ln Π(s > s0)` of the sparsity prior on `{0..=m}`.
pub fn log_prior_sparsity_tail<T: Real>(s0: u64, support_max: u64, lambda_s: T) -> Result<T> {
    if lambda_s < T::zero() || !lambda_s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sparsity penalty must be >= 0 and finite, got {lambda_s}"
        )));
    }
    if s0 >= support_max {
        return Ok(T::neg_infinity());
    }
    if lambda_s == T::zero() {
        return Ok(T::of((support_max - s0) as f64).ln() - T::of(support_max as f64 + 1.0).ln());
    }
    // Σ_{k=s0+1}^{m} r^k / Z = r^{s0+1} (1 - r^{m-s0}) / (1 - r) / Z.
    let log_num = -lambda_s * T::of(s0 as f64 + 1.0)
        + ln_one_minus_exp(-lambda_s * T::of((support_max - s0) as f64))
        - ln_one_minus_exp(-lambda_s);
    Ok(log_num - ln_sparsity_normalizer(support_max, lambda_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Architecture;

    fn hyper() -> PriorHyperParams<f64> {
        PriorHyperParams::default()
    }

    #[test]
    fn width_prior_normalizes_with_certified_tail() {
        for &lambda in &[0.5f64, 1.0, 2.0, 5.0] {
            let sum: f64 = (1..=60)
                .map(|n| log_prior_width(n, lambda).unwrap().exp())
                .sum();
            // Certified geometric tail bound: π(61) / (1 - λ/62).
            let tail_bound = log_prior_width(61, lambda).unwrap().exp() / (1.0 - lambda / 62.0);
            assert!(
                (sum - 1.0).abs() <= 1e-12 + tail_bound,
                "λ = {lambda}: partial sum {sum} not within tail bound {tail_bound} of 1"
            );
        }
    }

    #[test]
    fn width_prior_rejects_bad_arguments() {
        assert!(log_prior_width(0, 1.0_f64).is_err(), "N = 0 is out of support");
        assert!(log_prior_width(3, 0.0_f64).is_err(), "λ = 0 is not a distribution");
        assert!(log_prior_width(3, -1.0_f64).is_err(), "negative λ signs alternate");
    }

    #[test]
    fn sparsity_prior_normalizes_across_supports_and_penalties() {
        for &m in &[0u64, 1, 7, 100, 10_000] {
            for &ls in &[0.0f64, 0.3, 1.0, 2.0] {
                let sum: f64 = (0..=m)
                    .map(|s| log_prior_sparsity(s, m, ls).unwrap().exp())
                    .sum();
                assert!(
                    (sum - 1.0).abs() <= 1e-12,
                    "support 0..={m}, λ_s = {ls}: sum = {sum}"
                );
            }
        }
        assert!(log_prior_sparsity(5, 4, 1.0_f64).is_err(), "s > support must error");
    }

    #[test]
    fn pattern_prior_matches_mask_enumeration() {
        // Enumerate all 2^4 masks: exactly 6 have two active slots.
        let mut count = 0;
        for mask in 0u32..16 {
            if mask.count_ones() == 2 {
                count += 1;
            }
        }
        assert_eq!(count, 6);
        let gamma = [true, true, false, false];
        let got = log_prior_gamma_given_s::<f64>(&gamma, 2).unwrap();
        assert!(
            (got - (1.0f64 / 6.0).ln()).abs() < 1e-12,
            "uniform over 6 patterns, got ln p = {got}"
        );
        // Mismatched sparsity has probability zero.
        assert_eq!(
            log_prior_gamma_given_s::<f64>(&gamma, 1).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn coefficient_prior_counts_slabs_and_enforces_the_contract() {
        let gamma = [true, false, true];
        let beta = [0.25, 0.0, -1.0];
        let got = log_prior_beta_given_gamma(&beta, &gamma).unwrap();
        assert!((got - 2.0 * 0.5f64.ln()).abs() < 1e-15);

        let escaped = [1.5, 0.0, -1.0];
        assert_eq!(
            log_prior_beta_given_gamma(&escaped, &gamma).unwrap(),
            f64::NEG_INFINITY,
            "active coefficient outside the slab has zero density"
        );

        let broken = [0.25, 0.1, -1.0];
        assert!(
            matches!(
                log_prior_beta_given_gamma(&broken, &gamma),
                Err(Error::ContractViolation(_))
            ),
            "nonzero value on an inactive slot is a broken invariant"
        );
    }

    #[test]
    fn joint_prior_changes_by_the_expected_increment_when_s_grows() {
        // Adding one active slot multiplies the prior by
        // e^{-λ_s} · C(T,s)/C(T,s+1) · 1/2.
        let arch = Architecture::new(vec![2, 3, 1]).unwrap();
        let t = arch.param_count(); // 12
        let h = hyper();
        let mut net = SparseNetwork::<f64>::empty(arch, h.clip_bound).unwrap();
        net.activate(0, 0.5).unwrap();
        net.activate(4, -0.25).unwrap();
        let s = net.active_count(); // 2
        let before = log_prior_joint(&net, 1, &h).unwrap();
        net.activate(9, 0.75).unwrap();
        let after = log_prior_joint(&net, 1, &h).unwrap();
        let want = -h.lambda_sparsity + ((s + 1) as f64 / (t - s) as f64).ln() + 0.5f64.ln();
        assert!(
            ((after - before) - want).abs() < 1e-12,
            "Δ log prior = {}, want {want}",
            after - before
        );
    }

    #[test]
    fn prior_sample_statistics_match_the_hierarchy() {
        // 10^4 fixed-architecture draws: the sparsity mean must sit within 3σ of the
        // closed-form mean, and the pooled active coefficients must pass a KS test
        // against U[-1, 1] at the 1% level.
        let arch = Architecture::new(vec![2, 3, 1]).unwrap();
        let t = arch.param_count();
        let h = hyper();
        let mut rng = crate::seeds::stream_rng(31, 0);
        let draws = 10_000usize;
        let mut s_sum = 0.0f64;
        let mut coefs: Vec<f64> = Vec::new();
        for _ in 0..draws {
            let net = sample_prior(&arch, &h, &mut rng).unwrap();
            s_sum += net.active_count() as f64;
            coefs.extend(
                net.beta()
                    .iter()
                    .zip(net.gamma())
                    .filter(|(_, &g)| g)
                    .map(|(&b, _)| b),
            );
        }
        let probs: Vec<f64> = (0..=t)
            .map(|s| log_prior_sparsity(s, t, h.lambda_sparsity).unwrap().exp())
            .collect();
        let mean: f64 = probs.iter().enumerate().map(|(s, p)| s as f64 * p).sum();
        let var: f64 = probs
            .iter()
            .enumerate()
            .map(|(s, p)| (s as f64 - mean).powi(2) * p)
            .sum();
        let se = (var / draws as f64).sqrt();
        let got_mean = s_sum / draws as f64;
        assert!(
            (got_mean - mean).abs() <= 3.0 * se,
            "sparsity mean {got_mean} vs {mean} ± 3·{se}"
        );

        coefs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = coefs.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &c) in coefs.iter().enumerate() {
            let cdf = (c + 1.0) / 2.0;
            d = d.max((cdf - i as f64 / m).abs());
            d = d.max(((i as f64 + 1.0) / m - cdf).abs());
        }
        let critical = 1.628 / m.sqrt(); // 1% asymptotic KS critical value
        assert!(
            d <= critical,
            "KS distance {d} above the 1% critical value {critical} ({} coefficients)",
            coefs.len()
        );
    }

    #[test]
    fn adaptive_sampler_tracks_the_width_prior() {
        let h = hyper();
        let mut rng = crate::seeds::stream_rng(32, 0);
        let draws = 10_000usize;
        let mut n_sum = 0.0f64;
        for _ in 0..draws {
            let draw = sample_prior_adaptive(1, 1, &h, &mut rng).unwrap();
            assert_eq!(
                draw.net.arch().widths()[1],
                12 * draw.n_width as usize,
                "template width must match the sampled N"
            );
            assert!(
                draw.width_tail_mass < 1e-12,
                "truncation at n_max = 64 must discard almost nothing for λ = 1"
            );
            n_sum += draw.n_width as f64;
        }
        // Mean of the untruncated positive Poisson with λ = 1: λ e^λ/(e^λ-1) = e/(e-1).
        let mean = std::f64::consts::E / (std::f64::consts::E - 1.0);
        let var: f64 = (1..=64)
            .map(|n| log_prior_width(n, 1.0f64).unwrap().exp() * (n as f64 - mean).powi(2))
            .sum();
        let se = (var / draws as f64).sqrt();
        let got = n_sum / draws as f64;
        assert!(
            (got - mean).abs() <= 3.0 * se,
            "width mean {got} vs {mean} ± 3·{se}"
        );
    }

    #[test]
    fn sampled_patterns_are_uniform_over_fixed_sparsity() {
        // Condition on s = 2 over T = 4 slots (architecture (4,1) is output-weights
        // only, so T = 4) and chi-square the 6 patterns at 20k conditioned draws.
        let arch = Architecture::new(vec![4, 1]).unwrap();
        assert_eq!(arch.param_count(), 4);
        let h = hyper();
        let mut rng = crate::seeds::stream_rng(33, 0);
        let mut counts = std::collections::BTreeMap::new();
        let mut total = 0usize;
        for _ in 0..300_000 {
            let net = sample_prior(&arch, &h, &mut rng).unwrap();
            if net.active_count() == 2 {
                let key: Vec<usize> = net
                    .gamma()
                    .iter()
                    .enumerate()
                    .filter(|(_, &g)| g)
                    .map(|(j, _)| j)
                    .collect();
                *counts.entry(key).or_insert(0usize) += 1;
                total += 1;
            }
            if total >= 20_000 {
                break;
            }
        }
        assert!(total >= 20_000, "not enough s = 2 draws: {total}");
        assert_eq!(counts.len(), 6, "all 6 patterns should appear");
        let expected = total as f64 / 6.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 5 degrees of freedom; 0.1% critical value is 20.52.
        assert!(
            chi2 < 20.52,
            "pattern uniformity chi-square {chi2} exceeds the 0.1% critical value"
        );
    }

    #[test]
    fn width_tail_matches_direct_summation() {
        for &lambda in &[0.5f64, 1.0, 2.0] {
            for &n in &[1u64, 3, 10] {
                let got = log_prior_width_tail(n, lambda).unwrap().exp();
                let want: f64 = (n + 1..n + 200)
                    .map(|k| log_prior_width(k, lambda).unwrap().exp())
                    .sum();
                assert!(
                    (got - want).abs() <= 1e-14 + 1e-12 * want,
                    "λ = {lambda}, n = {n}: tail {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn sparsity_tail_matches_direct_summation() {
        for &ls in &[0.0f64, 0.5, 1.5] {
            for &(s0, m) in &[(0u64, 10u64), (3, 10), (9, 10), (50, 1_000)] {
                let got = log_prior_sparsity_tail(s0, m, ls).unwrap().exp();
                let want: f64 = (s0 + 1..=m)
                    .map(|s| log_prior_sparsity(s, m, ls).unwrap().exp())
                    .sum();
                assert!(
                    (got - want).abs() <= 1e-12,
                    "λ_s = {ls}, s0 = {s0}, m = {m}: tail {got} vs {want}"
                );
            }
        }
        assert_eq!(
            log_prior_sparsity_tail(10, 10, 1.0_f64).unwrap(),
            f64::NEG_INFINITY,
            "tail above the support bound is empty"
        );
    }
}
