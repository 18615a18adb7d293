//! Trans-dimensional Metropolis-within-Gibbs over (β, γ, s, N).
//!
//! The target is the unnormalized posterior: Gaussian log-likelihood plus the
//! hierarchical spike-and-slab log-prior. Six moves cycle at configured
//! probabilities:
//!
//! * **beta-walk** — random-walk on one active coefficient, proposal reflected
//!   into [−1,1] (reflection keeps it symmetric);
//! * **birth** — activate a uniformly random inactive slot with β ~ U[−1,1];
//! * **death** — deactivate a uniformly random active slot (reverse of birth);
//! * **swap** — death and birth composed at fixed sparsity;
//! * **grow** — widen the template N → N+1, embedding the current network with
//!   all new slots inactive so predictions are bitwise unchanged;
//! * **shrink** — the reverse, proposable only when every slot unique to the
//!   wider template is inactive.
//!
//! Every acceptance ratio is assembled compositionally as
//! `Δ(log posterior) + log q(backward) − log q(forward)`; the combinatorial
//! pattern-count and sparsity-normalizer ratios are inside the prior term, so
//! no move hand-cancels anything it does not own. The cached log-posterior is
//! audited against a from-scratch recomputation every `audit_every` steps: a
//! discrepancy beyond `audit_tol` is a hard error, because it can only mean a
//! bookkeeping bug.
//!
//! Draws stream to an append-only record file (one line per kept draw:
//! iteration, N, s, log-posterior, γ bitstring, active β values) so long runs
//! are auditable and resumable. Everything is deterministic given the seed.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Architecture, Evaluator, SparseNetwork};
use crate::prior::{log_prior_joint, PriorHyperParams};
use crate::regression::{log_likelihood, RegressionDataset};
use crate::scalar::Real;
use crate::seeds;

const TEMPLATE_WIDTH_FACTOR: usize = 12;

/// The six move kinds, in dispatch order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    BetaWalk,
    Birth,
    Death,
    Swap,
    Grow,
    Shrink,
}

const MOVE_KINDS: [MoveKind; 6] = [
    MoveKind::BetaWalk,
    MoveKind::Birth,
    MoveKind::Death,
    MoveKind::Swap,
    MoveKind::Grow,
    MoveKind::Shrink,
];

/// Move mixture; must sum to 1.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MoveProbabilities<T> {
    pub beta_walk: T,
    pub birth: T,
    pub death: T,
    pub swap: T,
    pub grow: T,
    pub shrink: T,
}

impl<T: Real> Default for MoveProbabilities<T> {
    fn default() -> Self {
        MoveProbabilities {
            beta_walk: T::of(0.5),
            birth: T::of(0.15),
            death: T::of(0.15),
            swap: T::of(0.1),
            grow: T::of(0.05),
            shrink: T::of(0.05),
        }
    }
}

impl<T: Real> MoveProbabilities<T> {
    /// Pattern-and-coefficient moves only; used when the width is held fixed.
    pub fn without_width_moves() -> Self {
        MoveProbabilities {
            beta_walk: T::of(0.5),
            birth: T::of(0.2),
            death: T::of(0.2),
            swap: T::of(0.1),
            grow: T::zero(),
            shrink: T::zero(),
        }
    }

    fn as_array(&self) -> [T; 6] {
        [self.beta_walk, self.birth, self.death, self.swap, self.grow, self.shrink]
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.as_array();
        let mut sum = T::zero();
        for (v, kind) in a.iter().zip(MOVE_KINDS) {
            if !(*v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "move probability for {kind:?} must be finite and >= 0, got {v}"
                )));
            }
            sum += *v;
        }
        if (sum - T::one()).abs() > T::of(1e-12) {
            return Err(Error::InvalidArgument(format!(
                "move probabilities must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    fn prob(&self, kind: MoveKind) -> T {
        match kind {
            MoveKind::BetaWalk => self.beta_walk,
            MoveKind::Birth => self.birth,
            MoveKind::Death => self.death,
            MoveKind::Swap => self.swap,
            MoveKind::Grow => self.grow,
            MoveKind::Shrink => self.shrink,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MoveKind {
        let u = T::uniform(rng, T::zero(), T::one());
        let mut acc = T::zero();
        let mut last_positive = MoveKind::BetaWalk;
        for kind in MOVE_KINDS {
            let p = self.prob(kind);
            if p > T::zero() {
                last_positive = kind;
            }
            acc += p;
            if u < acc {
                return kind;
            }
        }
        // The cumulative sum can fall a few ulp short of 1; the remainder must
        // map to a move of positive probability or its reverse-probability
        // correction would blow up.
        last_positive
    }
}

/// Full sampler configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplerConfig<T> {
    pub iterations: u64,
    pub burn_in: u64,
    /// Keep every `thinning`-th post-burn-in draw (≥ 1).
    pub thinning: u64,
    pub moves: MoveProbabilities<T>,
    /// Std of the reflected-normal beta proposal.
    pub beta_std: T,
    /// Width cap for the chain; the effective cap is min(this, hyper.n_max).
    pub n_max: usize,
    pub seed: u64,
    /// Probe points (row-major, length a multiple of p) whose posterior-mean
    /// predictions are accumulated over kept draws.
    pub probes: Vec<T>,
    /// Per-axis grid for the pre-clip sup-norm audit of kept draws; 0 disables.
    pub supnorm_grid: usize,
    /// Append-only draw record destination.
    pub record_path: Option<PathBuf>,
    /// Audit the cached log-posterior every this many steps.
    pub audit_every: u64,
    pub audit_tol: T,
}

impl<T: Real> Default for SamplerConfig<T> {
    fn default() -> Self {
        SamplerConfig {
            iterations: 50_000,
            burn_in: 10_000,
            thinning: 10,
            moves: MoveProbabilities::default(),
            beta_std: T::of(0.1),
            n_max: 64,
            seed: 1,
            probes: Vec::new(),
            supnorm_grid: 0,
            record_path: None,
            audit_every: 1000,
            audit_tol: T::of(1e-8),
        }
    }
}

impl<T: Real> SamplerConfig<T> {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidArgument(format!(
                "iterations ({}) must exceed burn_in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidArgument("thinning must be >= 1".into()));
        }
        self.moves.validate()?;
        if !(self.beta_std > T::zero()) || !self.beta_std.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta proposal std must be positive and finite, got {}",
                self.beta_std
            )));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be >= 1".into()));
        }
        if p == 0 || self.probes.len() % p != 0 {
            return Err(Error::InvalidArgument(format!(
                "probe list length {} is not a multiple of p = {p}",
                self.probes.len()
            )));
        }
        if self.audit_every == 0 {
            return Err(Error::InvalidArgument("audit_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Proposal/acceptance counters for one move kind.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct MoveStats {
    pub proposed: u64,
    pub accepted: u64,
}

/// Counters for all six moves.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct MoveCounters {
    pub beta_walk: MoveStats,
    pub birth: MoveStats,
    pub death: MoveStats,
    pub swap: MoveStats,
    pub grow: MoveStats,
    pub shrink: MoveStats,
}

impl MoveCounters {
    fn of(&mut self, kind: MoveKind) -> &mut MoveStats {
        match kind {
            MoveKind::BetaWalk => &mut self.beta_walk,
            MoveKind::Birth => &mut self.birth,
            MoveKind::Death => &mut self.death,
            MoveKind::Swap => &mut self.swap,
            MoveKind::Grow => &mut self.grow,
            MoveKind::Shrink => &mut self.shrink,
        }
    }
}

/// Current point of the chain plus its cached log-posterior.
#[derive(Clone, Debug)]
pub struct ChainState<T> {
    pub net: SparseNetwork<T>,
    pub n_width: usize,
    pub log_post: T,
}

impl<T: Real> ChainState<T> {
    pub fn s(&self) -> u64 {
        self.net.active_count()
    }
}

/// One kept (post-burn-in, thinned) draw.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeptDraw<T> {
    pub iteration: u64,
    pub n_width: usize,
    pub s: u64,
    pub log_post: T,
    /// Active slot indices, ascending.
    pub active: Vec<u32>,
    /// Coefficient values aligned with `active`.
    pub beta_active: Vec<T>,
}

impl<T: Real> KeptDraw<T> {
    /// Rebuild the draw as a network on `arch`, which must be the architecture
    /// the chain occupied at this draw's width: the run's base architecture
    /// when width moves are off, `Architecture::template(p, n_width, l)`
    /// otherwise.
    pub fn to_network(&self, arch: &Architecture, clip_bound: T) -> Result<SparseNetwork<T>> {
        let mut net = SparseNetwork::empty(arch.clone(), clip_bound)?;
        for (&idx, &value) in self.active.iter().zip(&self.beta_active) {
            net.activate(idx as u64, value)?;
        }
        Ok(net)
    }
}

/// What a finished run reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PosteriorSummary<T> {
    pub iterations: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub counters: MoveCounters,
    pub kept: Vec<KeptDraw<T>>,
    pub mean_n_width: T,
    pub mean_s: T,
    /// Posterior-mean prediction at each probe point.
    pub probe_means: Vec<T>,
    /// Fraction of kept draws whose pre-clip sup-norm estimate exceeds the clip
    /// bound (None when the audit grid is disabled).
    pub sup_exceed_fraction: Option<T>,
    pub final_log_post: T,
}

impl<T: Real> PosteriorSummary<T> {
    /// Pattern → count over kept draws, in deterministic order.
    pub fn pattern_counts(&self) -> BTreeMap<Vec<u32>, u64> {
        let mut m = BTreeMap::new();
        for d in &self.kept {
            *m.entry(d.active.clone()).or_insert(0) += 1;
        }
        m
    }

    /// Width → count over kept draws.
    pub fn width_counts(&self) -> BTreeMap<usize, u64> {
        let mut m = BTreeMap::new();
        for d in &self.kept {
            *m.entry(d.n_width).or_insert(0) += 1;
        }
        m
    }

    /// Sparsity → count over kept draws.
    pub fn sparsity_counts(&self) -> BTreeMap<u64, u64> {
        let mut m = BTreeMap::new();
        for d in &self.kept {
            *m.entry(d.s).or_insert(0) += 1;
        }
        m
    }
}

/// One line of the append-only draw record.
#[derive(Clone, Debug, PartialEq)]
pub struct DrawRecord<T> {
    pub iteration: u64,
    pub n_width: usize,
    pub s: u64,
    pub log_post: T,
    pub gamma: Vec<bool>,
    /// Active β values in ascending slot order.
    pub beta_active: Vec<T>,
}

impl<T: Real> DrawRecord<T> {
    pub fn to_line(&self) -> String {
        let bits: String = self.gamma.iter().map(|&g| if g { '1' } else { '0' }).collect();
        let betas = if self.beta_active.is_empty() {
            "-".to_string()
        } else {
            self.beta_active
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "{} {} {} {} {} {}",
            self.iteration, self.n_width, self.s, self.log_post, bits, betas
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let mut it = line.split_whitespace();
        let mut next = |what: &str| {
            it.next()
                .ok_or_else(|| Error::Parse(format!("draw record missing field: {what}")))
        };
        let iteration: u64 = next("iteration")?
            .parse()
            .map_err(|e| Error::Parse(format!("iteration: {e}")))?;
        let n_width: usize =
            next("N")?.parse().map_err(|e| Error::Parse(format!("N: {e}")))?;
        let s: u64 = next("s")?.parse().map_err(|e| Error::Parse(format!("s: {e}")))?;
        let log_post: T = next("log_post")?
            .parse::<f64>()
            .map(T::of)
            .map_err(|e| Error::Parse(format!("log_post: {e}")))?;
        let bits = next("gamma")?;
        let gamma: Vec<bool> = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("bad gamma bit {other:?}"))),
            })
            .collect::<Result<_>>()?;
        let betas = next("beta")?;
        let beta_active: Vec<T> = if betas == "-" {
            Vec::new()
        } else {
            betas
                .split(',')
                .map(|v| {
                    v.parse::<f64>()
                        .map(T::of)
                        .map_err(|e| Error::Parse(format!("beta value {v:?}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        if gamma.iter().filter(|&&g| g).count() as u64 != s
            || beta_active.len() as u64 != s
        {
            return Err(Error::Parse(format!(
                "draw record inconsistent: s = {s} vs {} set bits, {} beta values",
                gamma.iter().filter(|&&g| g).count(),
                beta_active.len()
            )));
        }
        Ok(DrawRecord { iteration, n_width, s, log_post, gamma, beta_active })
    }

    /// Rebuild the sparse network this record describes.
    pub fn to_network(&self, arch: Architecture, clip_bound: T) -> Result<SparseNetwork<T>> {
        if arch.param_count() as usize != self.gamma.len() {
            return Err(Error::DimensionMismatch(format!(
                "record has {} slots, architecture has {}",
                self.gamma.len(),
                arch.param_count()
            )));
        }
        let mut beta = vec![T::zero(); self.gamma.len()];
        let mut k = 0;
        for (j, &g) in self.gamma.iter().enumerate() {
            if g {
                beta[j] = self.beta_active[k];
                k += 1;
            }
        }
        SparseNetwork::new(arch, self.gamma.clone(), beta, clip_bound)
    }
}

/// Reflect a real into [−1, 1] by folding the line at the endpoints; the map
/// x ↦ reflect(x) is an even-periodic triangle wave, so the random-walk
/// proposal built on it stays symmetric.
pub fn reflect_into_unit<T: Real>(x: T) -> T {
    if x >= -T::one() && x <= T::one() {
        return x;
    }
    let four = T::of(4.0);
    let mut y = (x + T::one()) % four;
    if y < T::zero() {
        y += four;
    }
    if y <= T::of(2.0) {
        y - T::one()
    } else {
        T::of(3.0) - y
    }
}

/// Embed a network on the width-N template into the width-`n_to` template for
/// the same (p, L), copying every slot by its structural position; all slots
/// unique to the wider template stay inactive, so predictions are unchanged
/// bitwise.
pub fn embed_into_width<T: Real>(
    net: &SparseNetwork<T>,
    p: usize,
    l: usize,
    n_to: usize,
) -> Result<SparseNetwork<T>> {
    let arch_to = Architecture::template(p, n_to, l)?;
    let mut out = SparseNetwork::empty(arch_to.clone(), net.clip_bound())?;
    let arch_from = net.arch();
    for (j, &g) in net.gamma().iter().enumerate() {
        if g {
            let slot = arch_from.slot(j as u64)?;
            let idx = arch_to.index_of(&slot)?;
            out.activate(idx, net.beta()[j])?;
        }
    }
    Ok(out)
}

/// Check whether every active slot of `net` (on the width-N template) also
/// exists in the width-`n_to` template — the shrink-proposability condition.
fn fits_in_width<T: Real>(net: &SparseNetwork<T>, p: usize, l: usize, n_to: usize) -> Result<bool> {
    let arch_to = Architecture::template(p, n_to, l)?;
    let widths = arch_to.widths().to_vec();
    let arch_from = net.arch();
    for (j, &g) in net.gamma().iter().enumerate() {
        if !g {
            continue;
        }
        let slot = arch_from.slot(j as u64)?;
        let ok = match slot.kind {
            crate::network::SlotKind::Weight { row, col } => {
                row < widths[slot.layer] && col < widths[slot.layer - 1]
            }
            crate::network::SlotKind::Shift { unit } => unit < widths[slot.layer],
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The sequential chain runner. One instance is one chain; run several with
/// independent seed streams for multi-chain studies.
struct Chain<'a, T: Real> {
    data: &'a RegressionDataset<T>,
    hyper: &'a PriorHyperParams<T>,
    cfg: &'a SamplerConfig<T>,
    p: usize,
    l: usize,
    n_cap: usize,
    state: ChainState<T>,
    rng: rand_chacha::ChaCha8Rng,
    counters: MoveCounters,
    slot_buf: Vec<u64>,
}

impl<'a, T: Real> Chain<'a, T> {
    fn new(
        data: &'a RegressionDataset<T>,
        arch0: &Architecture,
        hyper: &'a PriorHyperParams<T>,
        cfg: &'a SamplerConfig<T>,
    ) -> Result<Self> {
        hyper.validate()?;
        cfg.validate(data.input_dim())?;
        if arch0.input_dim() != data.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "architecture expects p = {}, data has p = {}",
                arch0.input_dim(),
                data.input_dim()
            )));
        }
        let p = arch0.input_dim();
        let l = arch0.hidden_layers();
        let width_moves = cfg.moves.grow > T::zero() || cfg.moves.shrink > T::zero();
        let n0 = if l == 0 {
            if width_moves {
                return Err(Error::InvalidArgument(
                    "width moves need hidden layers (the template has none)".into(),
                ));
            }
            1
        } else {
            let w = arch0.widths()[1];
            let base = TEMPLATE_WIDTH_FACTOR * p;
            if width_moves {
                if w % base != 0 || arch0.widths()[1..=l].iter().any(|&wi| wi != w) {
                    return Err(Error::InvalidArgument(format!(
                        "width moves need the 12pN template; got widths {:?}",
                        arch0.widths()
                    )));
                }
                w / base
            } else {
                (w / base).max(1)
            }
        };
        let n_cap = cfg.n_max.min(hyper.n_max as usize).max(n0);
        let net = SparseNetwork::empty(arch0.clone(), hyper.clip_bound)?;
        let log_post = log_posterior(&net, n0, data, hyper)?;
        if !log_post.is_finite() {
            return Err(Error::Numerical(format!(
                "initial state has non-finite log posterior {log_post}"
            )));
        }
        Ok(Chain {
            data,
            hyper,
            cfg,
            p,
            l,
            n_cap,
            state: ChainState { net, n_width: n0, log_post },
            rng: seeds::stream_rng(cfg.seed, 0),
            counters: MoveCounters::default(),
            slot_buf: Vec::new(),
        })
    }

    /// Collect active or inactive slot indices into the scratch buffer.
    fn collect_slots(&mut self, active: bool) -> usize {
        self.slot_buf.clear();
        for (j, &g) in self.state.net.gamma().iter().enumerate() {
            if g == active {
                self.slot_buf.push(j as u64);
            }
        }
        self.slot_buf.len()
    }

    /// Metropolis accept/reject on `log_acc`; returns whether it was accepted.
    fn metropolis(&mut self, log_acc: T) -> bool {
        if log_acc >= T::zero() {
            return true;
        }
        if log_acc == T::neg_infinity() {
            return false;
        }
        let u = T::uniform(&mut self.rng, T::zero(), T::one());
        u.ln() < log_acc
    }

    fn commit(&mut self, net: SparseNetwork<T>, n_width: usize, log_post: T, kind: MoveKind) {
        self.state.net = net;
        self.state.n_width = n_width;
        self.state.log_post = log_post;
        self.counters.of(kind).accepted += 1;
    }

    fn step(&mut self) -> Result<()> {
        let kind = self.cfg.moves.sample(&mut self.rng);
        self.counters.of(kind).proposed += 1;
        match kind {
            MoveKind::BetaWalk => self.move_beta_walk(),
            MoveKind::Birth => self.move_birth(),
            MoveKind::Death => self.move_death(),
            MoveKind::Swap => self.move_swap(),
            MoveKind::Grow => self.move_grow(),
            MoveKind::Shrink => self.move_shrink(),
        }
    }

    fn move_beta_walk(&mut self) -> Result<()> {
        let n_active = self.collect_slots(true);
        if n_active == 0 {
            return Ok(());
        }
        let j = self.slot_buf[self.rng.random_range(0..n_active)];
        let old = self.state.net.beta()[j as usize];
        let eps: T = T::std_normal(&mut self.rng) * self.cfg.beta_std;
        let proposed = reflect_into_unit(old + eps);
        let mut net = self.state.net.clone();
        net.activate(j, proposed)?;
        let lp = log_posterior(&net, self.state.n_width, self.data, self.hyper)?;
        let log_acc = lp - self.state.log_post;
        if self.metropolis(log_acc) {
            let n_width = self.state.n_width;
            self.commit(net, n_width, lp, MoveKind::BetaWalk);
        }
        Ok(())
    }

    fn move_birth(&mut self) -> Result<()> {
        let t = self.state.net.arch().param_count();
        let s = self.state.s();
        let n_inactive = self.collect_slots(false);
        if n_inactive == 0 {
            return Ok(()); // s = T: birth impossible.
        }
        let j = self.slot_buf[self.rng.random_range(0..n_inactive)];
        let value = T::uniform(&mut self.rng, -T::one(), T::one());
        let mut net = self.state.net.clone();
        net.activate(j, value)?;
        let lp = log_posterior(&net, self.state.n_width, self.data, self.hyper)?;
        // Forward: pick 1 of (T−s) inactive slots, slab density 1/2.
        // Backward: death picks 1 of (s+1) active slots.
        let log_fwd = self.cfg.moves.birth.ln() - T::of((t - s) as f64).ln() + T::of(0.5).ln();
        let log_bwd = self.cfg.moves.death.ln() - T::of(s as f64 + 1.0).ln();
        let log_acc = lp - self.state.log_post + log_bwd - log_fwd;
        if self.metropolis(log_acc) {
            let n_width = self.state.n_width;
            self.commit(net, n_width, lp, MoveKind::Birth);
        }
        Ok(())
    }

    fn move_death(&mut self) -> Result<()> {
        let t = self.state.net.arch().param_count();
        let s = self.state.s();
        if s == 0 {
            return Ok(()); // death is a rejected no-op at s = 0.
        }
        let n_active = self.collect_slots(true);
        let j = self.slot_buf[self.rng.random_range(0..n_active)];
        let mut net = self.state.net.clone();
        net.deactivate(j)?;
        let lp = log_posterior(&net, self.state.n_width, self.data, self.hyper)?;
        // Forward: pick 1 of s active slots. Backward: birth picks 1 of
        // (T−s+1) inactive slots and re-proposes the value at slab density 1/2.
        let log_fwd = self.cfg.moves.death.ln() - T::of(s as f64).ln();
        let log_bwd =
            self.cfg.moves.birth.ln() - T::of((t - s + 1) as f64).ln() + T::of(0.5).ln();
        let log_acc = lp - self.state.log_post + log_bwd - log_fwd;
        if self.metropolis(log_acc) {
            let n_width = self.state.n_width;
            self.commit(net, n_width, lp, MoveKind::Death);
        }
        Ok(())
    }

    fn move_swap(&mut self) -> Result<()> {
        let s = self.state.s();
        let t = self.state.net.arch().param_count();
        if s == 0 || s == t {
            return Ok(());
        }
        let n_active = self.collect_slots(true);
        let i = self.slot_buf[self.rng.random_range(0..n_active)];
        let n_inactive = self.collect_slots(false);
        let j = self.slot_buf[self.rng.random_range(0..n_inactive)];
        let value = T::uniform(&mut self.rng, -T::one(), T::one());
        let mut net = self.state.net.clone();
        net.deactivate(i)?;
        net.activate(j, value)?;
        let lp = log_posterior(&net, self.state.n_width, self.data, self.hyper)?;
        // Forward and backward picks have identical counts (s and T−s are
        // unchanged) and identical slab densities: the correction cancels.
        let log_acc = lp - self.state.log_post;
        if self.metropolis(log_acc) {
            let n_width = self.state.n_width;
            self.commit(net, n_width, lp, MoveKind::Swap);
        }
        Ok(())
    }

    fn move_grow(&mut self) -> Result<()> {
        if self.l == 0 || self.state.n_width >= self.n_cap {
            return Ok(()); // at N_max: rejected no-op.
        }
        let n_to = self.state.n_width + 1;
        let net = embed_into_width(&self.state.net, self.p, self.l, n_to)?;
        let lp = log_posterior(&net, n_to, self.data, self.hyper)?;
        // The proposal is deterministic given the move choice; the prior ratio
        // (width pmf, pattern count at the new T, sparsity normalizer) is all
        // inside lp.
        let log_acc =
            lp - self.state.log_post + self.cfg.moves.shrink.ln() - self.cfg.moves.grow.ln();
        if self.metropolis(log_acc) {
            self.commit(net, n_to, lp, MoveKind::Grow);
        }
        Ok(())
    }

    fn move_shrink(&mut self) -> Result<()> {
        if self.l == 0 || self.state.n_width <= 1 {
            return Ok(());
        }
        let n_to = self.state.n_width - 1;
        if !fits_in_width(&self.state.net, self.p, self.l, n_to)? {
            return Ok(()); // an active slot lives in the strip being removed.
        }
        let net = embed_into_width(&self.state.net, self.p, self.l, n_to)?;
        let lp = log_posterior(&net, n_to, self.data, self.hyper)?;
        let log_acc =
            lp - self.state.log_post + self.cfg.moves.grow.ln() - self.cfg.moves.shrink.ln();
        if self.metropolis(log_acc) {
            self.commit(net, n_to, lp, MoveKind::Shrink);
        }
        Ok(())
    }

    fn audit(&self, step: u64) -> Result<()> {
        let fresh = log_posterior(&self.state.net, self.state.n_width, self.data, self.hyper)?;
        let diff = (fresh - self.state.log_post).abs();
        if !(diff <= self.cfg.audit_tol) {
            return Err(Error::Numerical(format!(
                "log-posterior cache incoherent at step {step}: cached {} vs fresh {} \
                 (|diff| = {diff}); this indicates a sampler bookkeeping bug",
                self.state.log_post, fresh
            )));
        }
        Ok(())
    }
}

/// Unnormalized log-posterior: log-likelihood plus joint log-prior.
pub fn log_posterior<T: Real>(
    net: &SparseNetwork<T>,
    n_width: usize,
    data: &RegressionDataset<T>,
    hyper: &PriorHyperParams<T>,
) -> Result<T> {
    let prior = log_prior_joint(net, n_width as u64, hyper)?;
    if prior == T::neg_infinity() {
        return Ok(prior); // outside support: skip the likelihood.
    }
    let like = log_likelihood(net, data)?;
    Ok(like + prior)
}

/// Run one chain and summarize it. Deterministic given `cfg.seed`.
pub fn run_chain<T: Real>(
    data: &RegressionDataset<T>,
    arch0: &Architecture,
    hyper: &PriorHyperParams<T>,
    cfg: &SamplerConfig<T>,
) -> Result<PosteriorSummary<T>> {
    let mut chain = Chain::new(data, arch0, hyper, cfg)?;
    let mut record: Option<BufWriter<File>> = match &cfg.record_path {
        Some(path) => Some(BufWriter::new(File::create(path)?)),
        None => None,
    };
    let p = data.input_dim();
    let n_probes = cfg.probes.len() / p;
    let mut probe_sums = vec![T::zero(); n_probes];
    let mut kept: Vec<KeptDraw<T>> = Vec::new();
    let mut sup_checked = 0u64;
    let mut sup_exceeded = 0u64;
    let mut sum_n = 0.0f64;
    let mut sum_s = 0.0f64;

    for i in 0..cfg.iterations {
        chain.step()?;
        if (i + 1) % cfg.audit_every == 0 {
            chain.audit(i + 1)?;
        }
        if i >= cfg.burn_in && (i - cfg.burn_in) % cfg.thinning == 0 {
            let state = &chain.state;
            let active: Vec<u32> = state
                .net
                .gamma()
                .iter()
                .enumerate()
                .filter_map(|(j, &g)| if g { Some(j as u32) } else { None })
                .collect();
            let beta_active: Vec<T> = active
                .iter()
                .map(|&j| state.net.beta()[j as usize])
                .collect();
            let draw = KeptDraw {
                iteration: i,
                n_width: state.n_width,
                s: state.s(),
                log_post: state.log_post,
                active: active.clone(),
                beta_active,
            };
            sum_n += state.n_width as f64;
            sum_s += draw.s as f64;
            if n_probes > 0 {
                let mut ev = Evaluator::new(&state.net);
                for (k, sum) in probe_sums.iter_mut().enumerate() {
                    *sum += ev.predict(&cfg.probes[k * p..(k + 1) * p])?;
                }
            }
            if cfg.supnorm_grid > 0 {
                let (raw, _) = state.net.sup_norm_estimate_raw(cfg.supnorm_grid)?;
                sup_checked += 1;
                if raw > hyper.clip_bound {
                    sup_exceeded += 1;
                }
            }
            if let Some(w) = record.as_mut() {
                let rec = DrawRecord {
                    iteration: draw.iteration,
                    n_width: draw.n_width,
                    s: draw.s,
                    log_post: draw.log_post,
                    gamma: state.net.gamma().to_vec(),
                    beta_active: active
                        .iter()
                        .map(|&j| state.net.beta()[j as usize])
                        .collect(),
                };
                writeln!(w, "{}", rec.to_line())?;
            }
            kept.push(draw);
        }
    }
    if let Some(mut w) = record {
        w.flush()?;
    }
    let m = kept.len().max(1) as f64;
    let probe_means = probe_sums
        .into_iter()
        .map(|s| s / T::of(kept.len().max(1) as f64))
        .collect();
    Ok(PosteriorSummary {
        iterations: cfg.iterations,
        burn_in: cfg.burn_in,
        thinning: cfg.thinning,
        seed: cfg.seed,
        counters: chain.counters,
        mean_n_width: T::of(sum_n / m),
        mean_s: T::of(sum_s / m),
        probe_means,
        sup_exceed_fraction: if sup_checked > 0 {
            Some(T::of(sup_exceeded as f64 / sup_checked as f64))
        } else {
            None
        },
        final_log_post: chain.state.log_post,
        kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Slot, SlotKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn ramp_data(n: usize, seed: u64) -> RegressionDataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| 0.8 * (x - 0.5f64).max(0.0) + 0.1 * rng.random::<f64>())
            .collect();
        RegressionDataset::new(xs, ys, 1).unwrap()
    }

    #[test]
    fn reflection_stays_inside_and_matches_fold_oracle() {
        // Independent oracle: fold step by step.
        fn fold(mut x: f64) -> f64 {
            for _ in 0..64 {
                if x > 1.0 {
                    x = 2.0 - x;
                } else if x < -1.0 {
                    x = -2.0 - x;
                } else {
                    return x;
                }
            }
            x
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100_000 {
            let x = rng.random::<f64>() * 12.0 - 6.0;
            let got = reflect_into_unit(x);
            assert!((-1.0..=1.0).contains(&got), "reflect({x}) = {got} left [-1,1]");
            let want = fold(x);
            assert!(
                (got - want).abs() < 1e-12,
                "reflect({x}) = {got}, fold oracle {want}"
            );
        }
        assert_eq!(reflect_into_unit(0.3), 0.3, "interior points unchanged");
        assert!((reflect_into_unit(1.5f64) - 0.5).abs() < 1e-15);
        assert!((reflect_into_unit(-1.5f64) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn proposals_never_leave_the_slab_support() {
        // 10^6 reflected-normal proposals from varied anchors stay in [−1,1].
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1_000_000 {
            let anchor = rng.random::<f64>() * 2.0 - 1.0;
            let eps: f64 = rng.random::<f64>() * 6.0 - 3.0;
            let v = reflect_into_unit(anchor + eps);
            assert!((-1.0..=1.0).contains(&v), "{anchor} + {eps} -> {v}");
        }
    }

    #[test]
    fn same_seed_means_identical_runs() {
        let data = ramp_data(40, 11);
        let arch = Architecture::template(1, 1, 1).unwrap();
        let hyper = PriorHyperParams::default();
        let cfg = SamplerConfig {
            iterations: 4000,
            burn_in: 1000,
            thinning: 5,
            seed: 99,
            probes: vec![0.25, 0.75],
            ..SamplerConfig::default()
        };
        let a = run_chain(&data, &arch, &hyper, &cfg).unwrap();
        let b = run_chain(&data, &arch, &hyper, &cfg).unwrap();
        assert_eq!(a.kept.len(), b.kept.len());
        for (x, y) in a.kept.iter().zip(&b.kept) {
            assert_eq!(x.iteration, y.iteration);
            assert_eq!(x.active, y.active);
            assert!(x.log_post == y.log_post, "log_post must match bitwise");
        }
        assert_eq!(a.counters.beta_walk.accepted, b.counters.beta_walk.accepted);
        assert!(a.probe_means == b.probe_means);
    }

    #[test]
    fn tiny_step_beta_walk_always_accepts() {
        // With a vanishing proposal std the posterior ratio is ~1 and the
        // proposal is symmetric, so acceptance is (numerically) certain.
        let data = ramp_data(20, 3);
        let arch = Architecture::template(1, 1, 1).unwrap();
        let hyper = PriorHyperParams::default();
        let cfg = SamplerConfig { beta_std: 1e-12, seed: 5, ..SamplerConfig::default() };
        let mut chain = Chain::new(&data, &arch, &hyper, &cfg).unwrap();
        // Put the chain at a state with active coordinates.
        chain.state.net.activate(0, 0.9).unwrap();
        chain.state.net.activate(12, 0.5).unwrap();
        chain.state.log_post =
            log_posterior(&chain.state.net, chain.state.n_width, &data, &hyper).unwrap();
        for _ in 0..2000 {
            chain.counters.of(MoveKind::BetaWalk).proposed += 1;
            chain.move_beta_walk().unwrap();
        }
        let walks = chain.counters.beta_walk;
        assert_eq!(
            walks.accepted, 2000,
            "near-zero-std walks must accept every proposal, got {}/2000",
            walks.accepted
        );
    }

    #[test]
    fn grow_embedding_preserves_predictions_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
        let arch = Architecture::template(2, 2, 2).unwrap();
        let t = arch.param_count();
        let mut net = SparseNetwork::empty(arch, 10.0).unwrap();
        // Random sparse pattern with 40 active slots.
        let mut placed = 0;
        while placed < 40 {
            let j = rng.random_range(0..t);
            if !net.gamma()[j as usize] {
                net.activate(j, rng.random::<f64>() * 2.0 - 1.0).unwrap();
                placed += 1;
            }
        }
        let wide = embed_into_width(&net, 2, 2, 3).unwrap();
        assert_eq!(wide.active_count(), net.active_count());
        for _ in 0..200 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let a = net.predict(&x).unwrap();
            let b = wide.predict(&x).unwrap();
            assert!(
                a.to_bits() == b.to_bits(),
                "embedding changed prediction at {x:?}: {a} vs {b}"
            );
        }
        let mut rng2 = ChaCha8Rng::seed_from_u64(9);
        let xs: Vec<f64> = (0..60).map(|_| rng2.random::<f64>()).collect();
        let ys: Vec<f64> = (0..30).map(|_| rng2.random::<f64>()).collect();
        let data2 = RegressionDataset::new(xs, ys, 2).unwrap();
        let la = log_likelihood(&net, &data2).unwrap();
        let lb = log_likelihood(&wide, &data2).unwrap();
        assert!(la.to_bits() == lb.to_bits(), "likelihood must be bitwise equal");
    }

    #[test]
    fn prior_only_pattern_chain_matches_closed_form() {
        // T = 4 network (4 → 1, no hidden layers): 16 patterns with prior mass
        // π(γ) = π_s(|γ|) / C(4, |γ|), where π_s(s) = e^{−s} / Σ_{k≤4} e^{−k}.
        // Chi-square over all 16 cells against the exact closed form.
        let arch = Architecture::new(vec![4, 1]).unwrap();
        let t = arch.param_count();
        assert_eq!(t, 4, "output-only template must have T = 4");
        let data = RegressionDataset::<f64>::empty(4);
        let hyper = PriorHyperParams::default();
        let cfg = SamplerConfig {
            iterations: 210_000,
            burn_in: 10_000,
            thinning: 25,
            moves: MoveProbabilities::without_width_moves(),
            seed: 2024,
            ..SamplerConfig::default()
        };
        let summary = run_chain(&data, &arch, &hyper, &cfg).unwrap();
        let m = summary.kept.len() as f64;

        // Closed-form cell probabilities.
        let z: f64 = (0..=4).map(|s| (-(s as f64)).exp()).sum();
        let mut expected = std::collections::BTreeMap::new();
        for mask in 0u32..16 {
            let s = mask.count_ones() as u64;
            let choose = [1.0, 4.0, 6.0, 4.0, 1.0][s as usize];
            let pattern: Vec<u32> = (0..4).filter(|b| mask >> b & 1 == 1).collect();
            expected.insert(pattern, (-(s as f64)).exp() / z / choose);
        }
        let counts = summary.pattern_counts();
        let mut stat = 0.0;
        for (pattern, prob) in &expected {
            let want = prob * m;
            let got = counts.get(pattern).copied().unwrap_or(0) as f64;
            stat += (got - want).powi(2) / want;
            assert!(want >= 5.0, "chi-square needs >= 5 expected per cell, got {want}");
        }
        let chi = ChiSquared::new(15.0).unwrap();
        let p_value = 1.0 - chi.cdf(stat);
        assert!(
            p_value > 0.01,
            "pattern marginal off the prior: chi2 = {stat:.2} (15 df), p = {p_value:.4}"
        );
    }

    #[test]
    fn prior_only_width_chain_matches_truncated_closed_form() {
        // Width marginal of the joint prior is π(N) ∝ λ^N/N! truncated to
        // [1, n_max] (the sparsity and pattern factors are proper pmfs at
        // every T, so they integrate out exactly).
        let arch = Architecture::template(1, 1, 1).unwrap();
        let data = RegressionDataset::<f64>::empty(1);
        let hyper = PriorHyperParams { n_max: 4, ..PriorHyperParams::default() };
        let cfg = SamplerConfig {
            iterations: 210_000,
            burn_in: 10_000,
            thinning: 25,
            moves: MoveProbabilities {
                beta_walk: 0.2,
                birth: 0.2,
                death: 0.2,
                swap: 0.0,
                grow: 0.2,
                shrink: 0.2,
            },
            n_max: 64,
            seed: 77,
            ..SamplerConfig::default()
        };
        let summary = run_chain(&data, &arch, &hyper, &cfg).unwrap();
        let m = summary.kept.len() as f64;
        let weights: Vec<f64> = (1..=4)
            .map(|n| 1.0 / (1..=n).map(|k| k as f64).product::<f64>())
            .collect();
        let z: f64 = weights.iter().sum();
        let counts = summary.width_counts();
        let mut stat = 0.0;
        for (n, w) in weights.iter().enumerate() {
            let want = w / z * m;
            let got = counts.get(&(n + 1)).copied().unwrap_or(0) as f64;
            assert!(want >= 5.0);
            stat += (got - want).powi(2) / want;
        }
        let chi = ChiSquared::new(3.0).unwrap();
        let p_value = 1.0 - chi.cdf(stat);
        assert!(
            p_value > 0.01,
            "width marginal off the truncated prior: chi2 = {stat:.2} (3 df), p = {p_value:.4}"
        );
    }

    #[test]
    fn pairwise_transition_flows_balance() {
        // Reversibility check on the collapsed sparsity level: summing the
        // detailed-balance identity over all states in two lumps A, B gives
        // flow(A→B) = flow(B→A) exactly in stationarity, so empirical counts
        // must agree within Monte Carlo error.
        let arch = Architecture::new(vec![2, 1]).unwrap();
        assert_eq!(arch.param_count(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let xs: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<f64> = (0..10).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let data = RegressionDataset::new(xs, ys, 2).unwrap();
        let hyper = PriorHyperParams::default();
        let cfg = SamplerConfig {
            iterations: 400_000,
            burn_in: 50_000,
            thinning: 1,
            moves: MoveProbabilities::without_width_moves(),
            seed: 31,
            ..SamplerConfig::default()
        };
        let summary = run_chain(&data, &arch, &hyper, &cfg).unwrap();
        let mut flows = std::collections::BTreeMap::new();
        for w in summary.kept.windows(2) {
            let (a, b) = (w[0].s, w[1].s);
            if a != b {
                *flows.entry((a, b)).or_insert(0u64) += 1;
            }
        }
        for (&(a, b), &fwd) in &flows {
            if a < b {
                let bwd = flows.get(&(b, a)).copied().unwrap_or(0);
                let tol = 5.0 * ((fwd + bwd) as f64).sqrt() + 5.0;
                assert!(
                    (fwd as f64 - bwd as f64).abs() <= tol,
                    "flow {a}->{b} = {fwd} vs {b}->{a} = {bwd} beyond MC error {tol:.1}"
                );
            }
        }
    }

    #[test]
    fn boundary_moves_are_rejected_no_ops() {
        // Grow at the cap, shrink at N = 1, death at s = 0: all proposed but
        // never accepted; the chain must keep running and stay coherent.
        let arch = Architecture::template(1, 1, 1).unwrap();
        let data = RegressionDataset::<f64>::empty(1);
        let hyper = PriorHyperParams { n_max: 1, ..PriorHyperParams::default() };
        let cfg = SamplerConfig {
            iterations: 2000,
            burn_in: 100,
            thinning: 10,
            moves: MoveProbabilities {
                beta_walk: 0.0,
                birth: 0.0,
                death: 0.4,
                swap: 0.0,
                grow: 0.3,
                shrink: 0.3,
            },
            seed: 9,
            ..SamplerConfig::default()
        };
        let summary = run_chain(&data, &arch, &hyper, &cfg).unwrap();
        assert!(summary.counters.grow.proposed > 0);
        assert_eq!(summary.counters.grow.accepted, 0, "grow at N_max must never accept");
        assert_eq!(summary.counters.shrink.accepted, 0, "shrink at N = 1 must never accept");
        assert_eq!(summary.counters.death.accepted, 0, "death at s = 0 must never accept");
        assert!(summary.kept.iter().all(|d| d.n_width == 1 && d.s == 0));
    }

    #[test]
    fn shrink_is_blocked_by_active_slots_in_the_removed_strip() {
        let arch = Architecture::template(1, 2, 1).unwrap(); // widths [1, 24, 1]
        let mut net = SparseNetwork::<f64>::empty(arch.clone(), 10.0).unwrap();
        // Activate a weight pointing at hidden unit 20 — outside the width-12
        // template, so the shrink condition must fail.
        let idx = arch
            .index_of(&Slot { layer: 1, kind: SlotKind::Weight { row: 20, col: 0 } })
            .unwrap();
        net.activate(idx, 0.5).unwrap();
        assert!(!fits_in_width(&net, 1, 1, 1).unwrap());
        // A slot inside the narrow template is fine.
        let mut net2 = SparseNetwork::<f64>::empty(arch.clone(), 10.0).unwrap();
        let idx2 = arch
            .index_of(&Slot { layer: 1, kind: SlotKind::Weight { row: 3, col: 0 } })
            .unwrap();
        net2.activate(idx2, 0.5).unwrap();
        assert!(fits_in_width(&net2, 1, 1, 1).unwrap());
    }

    #[test]
    fn record_file_round_trips_and_rebuilds_the_draws() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("draws.log");
        let data = ramp_data(25, 17);
        let arch = Architecture::template(1, 1, 1).unwrap();
        let hyper = PriorHyperParams::default();
        let cfg = SamplerConfig {
            iterations: 3000,
            burn_in: 500,
            thinning: 50,
            record_path: Some(path.clone()),
            seed: 55,
            ..SamplerConfig::default()
        };
        let summary = run_chain(&data, &arch, &hyper, &cfg).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), summary.kept.len(), "one record line per kept draw");
        for (line, draw) in lines.iter().zip(&summary.kept) {
            let rec: DrawRecord<f64> = DrawRecord::parse(line).unwrap();
            assert_eq!(rec.iteration, draw.iteration);
            assert_eq!(rec.s, draw.s);
            assert!(rec.log_post == draw.log_post, "shortest-repr floats round-trip exactly");
            // Round-trip again through the line format.
            assert_eq!(DrawRecord::<f64>::parse(&rec.to_line()).unwrap(), rec);
            // Rebuild the network on the template the draw was living on
            // (the chain may have grown past the initial width).
            let draw_arch = Architecture::template(1, rec.n_width, 1).unwrap();
            let net = rec.to_network(draw_arch, hyper.clip_bound).unwrap();
            let lp = log_posterior(&net, rec.n_width, &data, &hyper).unwrap();
            assert!(
                (lp - rec.log_post).abs() < 1e-9,
                "rebuilt log-posterior {lp} vs recorded {}",
                rec.log_post
            );
        }
    }

    #[test]
    fn probe_means_stay_inside_the_clip_bound() {
        let data = ramp_data(30, 23);
        let arch = Architecture::template(1, 1, 1).unwrap();
        let hyper = PriorHyperParams::default();
        let cfg = SamplerConfig {
            iterations: 5000,
            burn_in: 1000,
            thinning: 10,
            probes: vec![0.0, 0.5, 1.0],
            supnorm_grid: 33,
            seed: 4,
            ..SamplerConfig::default()
        };
        let summary = run_chain(&data, &arch, &hyper, &cfg).unwrap();
        assert_eq!(summary.probe_means.len(), 3);
        for (k, &v) in summary.probe_means.iter().enumerate() {
            assert!(v.is_finite() && v.abs() <= hyper.clip_bound, "probe {k} mean {v}");
        }
        let frac = summary.sup_exceed_fraction.expect("audit grid was on");
        assert!((0.0..=1.0).contains(&frac), "exceed fraction {frac}");
    }

    #[test]
    fn config_validation_rejects_bad_setups() {
        let base = SamplerConfig::<f64>::default();
        let bad = SamplerConfig { iterations: 100, burn_in: 100, ..base.clone() };
        assert!(bad.validate(1).is_err(), "iterations must exceed burn_in");
        let bad = SamplerConfig { thinning: 0, ..base.clone() };
        assert!(bad.validate(1).is_err());
        let mut bad = SamplerConfig::<f64>::default();
        bad.moves.birth = 0.5;
        assert!(bad.validate(1).is_err(), "probabilities must sum to 1");
        let bad = SamplerConfig { beta_std: 0.0, ..base.clone() };
        assert!(bad.validate(1).is_err());
        let bad = SamplerConfig { probes: vec![0.1, 0.2, 0.3], ..base };
        assert!(bad.validate(2).is_err(), "probe length must be a multiple of p");
    }

    #[test]
    fn width_moves_require_the_template_shape() {
        let data = RegressionDataset::<f64>::empty(1);
        let hyper = PriorHyperParams::default();
        let cfg = SamplerConfig::<f64>::default(); // includes width moves
        let bad_arch = Architecture::new(vec![1, 7, 1]).unwrap();
        assert!(
            run_chain(&data, &bad_arch, &hyper, &cfg).is_err(),
            "non-template width 7 must be rejected when width moves are on"
        );
        let ok_arch = Architecture::new(vec![1, 7, 1]).unwrap();
        let cfg_fixed = SamplerConfig {
            moves: MoveProbabilities::without_width_moves(),
            iterations: 50,
            burn_in: 10,
            ..SamplerConfig::default()
        };
        assert!(run_chain(&data, &ok_arch, &hyper, &cfg_fixed).is_ok());
    }
}
