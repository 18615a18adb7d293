//! Sparse deep ReLU networks with bounded parameters.
//!
//! A network with layer widths (p_0, p_1, ..., p_{L+1}) computes
//!
//! ```text
//! f(x) = W_{L+1} · σ_{b_L}( W_L · σ_{b_{L-1}}( ... σ_{b_1}(W_1 · x) ... ) )
//! ```
//!
//! where `σ_b(y)_i = max(y_i - b_i, 0)` applies the ReLU *after subtracting* the
//! shift, hidden layer `l` owns a weight matrix `W_l` (p_l × p_{l-1}) and a shift
//! vector `b_l`, and the output layer owns weights only — no shift. Outputs are
//! clamped to `[-clip_bound, clip_bound]`, which is how the implementation keeps
//! every representable function inside the bounded class the priors live on.
//!
//! Parameters are addressed by a single flat index `0 .. T`:
//! layers in order `l = 1 ..= L+1`; within a layer, first the weight entries in
//! row-major order (row = output unit, col = input unit), then the shift entries
//! (skipped for the output layer). The total is
//!
//! ```text
//! T = Σ_{l=0}^{L} p_{l+1} (p_l + 1) - p_{L+1}
//! ```
//!
//! A [`SparseNetwork`] stores an activity mask (`gamma`) and coefficient vector
//! (`beta`) over those T slots, with the invariants: inactive slots hold exactly
//! zero, active slots hold finite values in [-1, 1], and `clip_bound` is positive.
//! Evaluation compiles the active slots into a per-layer edge plan that skips
//! structurally-zero units, so the cost per input point scales with the number of
//! active parameters plus the touched units, not with T.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Multiplier in the templated hidden width: hidden layers get `12 * p * N` units.
pub const TEMPLATE_WIDTH_FACTOR: usize = 12;

/// Layer widths (p_0, ..., p_{L+1}) of a fully specified network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Architecture {
    widths: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Architecture {
    type Error = Error;
    fn try_from(widths: Vec<usize>) -> Result<Self> {
        Architecture::new(widths)
    }
}

impl From<Architecture> for Vec<usize> {
    fn from(a: Architecture) -> Vec<usize> {
        a.widths
    }
}

impl Architecture {
    /// Validate and wrap a width list. Needs at least (input, output) and strictly
    /// positive widths; the flat parameter count must fit in `u64`.
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "architecture needs at least input and output widths, got {:?}",
                widths
            )));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidArgument(format!(
                "zero-width layer in {:?}",
                widths
            )));
        }
        let arch = Architecture { widths };
        let t = arch.param_count_u128();
        if t > u64::MAX as u128 {
            return Err(Error::Infeasible(format!(
                "parameter count {t} exceeds u64 range"
            )));
        }
        Ok(arch)
    }

    /// The templated architecture: input dim `p`, `l` hidden layers of width
    /// `12 * p * n` each, scalar output.
    pub fn template(p: usize, n: usize, l: usize) -> Result<Self> {
        if p == 0 || n == 0 || l == 0 {
            return Err(Error::InvalidArgument(format!(
                "template needs p, n, l >= 1, got p = {p}, n = {n}, l = {l}"
            )));
        }
        let hidden = TEMPLATE_WIDTH_FACTOR
            .checked_mul(p)
            .and_then(|v| v.checked_mul(n))
            .ok_or_else(|| Error::Infeasible(format!("template width overflows: p = {p}, n = {n}")))?;
        let mut widths = Vec::with_capacity(l + 2);
        widths.push(p);
        widths.extend(std::iter::repeat(hidden).take(l));
        widths.push(1);
        Architecture::new(widths)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("validated: at least two widths")
    }

    /// Number of hidden layers L.
    pub fn hidden_layers(&self) -> usize {
        self.widths.len() - 2
    }

    fn param_count_u128(&self) -> u128 {
        let w = &self.widths;
        let mut total: u128 = 0;
        for l in 0..=w.len() - 2 {
            total += w[l + 1] as u128 * (w[l] as u128 + 1);
        }
        total - self.output_dim() as u128
    }

    /// Total number of parameter slots T.
    pub fn param_count(&self) -> u64 {
        self.param_count_u128() as u64
    }

    /// Weight-matrix entries in layer `l` (1-based, `1 ..= L+1`).
    fn layer_weight_count(&self, l: usize) -> u64 {
        (self.widths[l] as u64) * (self.widths[l - 1] as u64)
    }

    /// All slots in layer `l`: weights plus shifts (output layer has no shifts).
    fn layer_slot_count(&self, l: usize) -> u64 {
        let shifts = if l == self.widths.len() - 1 {
            0
        } else {
            self.widths[l] as u64
        };
        self.layer_weight_count(l) + shifts
    }

    /// Flat index where layer `l`'s block begins.
    pub fn layer_offset(&self, l: usize) -> u64 {
        (1..l).map(|k| self.layer_slot_count(k)).sum()
    }

    /// Decode a flat index into its (layer, kind, position) slot.
    pub fn slot(&self, index: u64) -> Result<Slot> {
        let mut rest = index;
        let last = self.widths.len() - 1;
        for l in 1..=last {
            let block = self.layer_slot_count(l);
            if rest < block {
                let wcount = self.layer_weight_count(l);
                let kind = if rest < wcount {
                    let cols = self.widths[l - 1] as u64;
                    SlotKind::Weight {
                        row: (rest / cols) as usize,
                        col: (rest % cols) as usize,
                    }
                } else {
                    SlotKind::Shift {
                        unit: (rest - wcount) as usize,
                    }
                };
                return Ok(Slot { layer: l, kind });
            }
            rest -= block;
        }
        Err(Error::InvalidArgument(format!(
            "slot index {index} out of range (T = {})",
            self.param_count()
        )))
    }

    /// Encode a slot back into its flat index.
    pub fn index_of(&self, slot: &Slot) -> Result<u64> {
        let last = self.widths.len() - 1;
        if slot.layer == 0 || slot.layer > last {
            return Err(Error::InvalidArgument(format!(
                "layer {} out of range 1..={last}",
                slot.layer
            )));
        }
        let rows = self.widths[slot.layer];
        let cols = self.widths[slot.layer - 1];
        let within = match slot.kind {
            SlotKind::Weight { row, col } => {
                if row >= rows || col >= cols {
                    return Err(Error::InvalidArgument(format!(
                        "weight ({row}, {col}) out of {rows}x{cols} in layer {}",
                        slot.layer
                    )));
                }
                row as u64 * cols as u64 + col as u64
            }
            SlotKind::Shift { unit } => {
                if slot.layer == last {
                    return Err(Error::InvalidArgument(
                        "output layer has no shift slots".into(),
                    ));
                }
                if unit >= rows {
                    return Err(Error::InvalidArgument(format!(
                        "shift unit {unit} out of width {rows} in layer {}",
                        slot.layer
                    )));
                }
                self.layer_weight_count(slot.layer) + unit as u64
            }
        };
        Ok(self.layer_offset(slot.layer) + within)
    }
}

/// Where a flat parameter index lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    /// 1-based layer: `1 ..= L+1`.
    pub layer: usize,
    pub kind: SlotKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    /// Entry (row, col) of the layer's weight matrix: row = unit in this layer,
    /// col = unit in the previous one.
    Weight { row: usize, col: usize },
    /// Shift of a unit in this (hidden) layer.
    Shift { unit: usize },
}

/// Dense view of one layer's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer<T> {
    /// Row-major `p_l × p_{l-1}` weight matrix.
    pub weights: Vec<T>,
    /// Shift vector of length `p_l`; `None` for the output layer.
    pub shifts: Option<Vec<T>>,
}

/// Dense view of a full parameter vector, layer by layer.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams<T> {
    pub arch: Architecture,
    pub layers: Vec<DenseLayer<T>>,
}

/// A ReLU network over a fixed architecture with an activity mask and bounded
/// coefficients. See the module docs for the invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseNetwork<T> {
    arch: Architecture,
    gamma: Vec<bool>,
    beta: Vec<T>,
    clip_bound: T,
}

impl<T: Real> SparseNetwork<T> {
    /// Wrap explicit (gamma, beta) vectors, validating every invariant.
    pub fn new(arch: Architecture, gamma: Vec<bool>, beta: Vec<T>, clip_bound: T) -> Result<Self> {
        let t = arch.param_count();
        if gamma.len() as u64 != t || beta.len() as u64 != t {
            return Err(Error::DimensionMismatch(format!(
                "gamma has {} and beta has {} entries, architecture has T = {t}",
                gamma.len(),
                beta.len()
            )));
        }
        if !(clip_bound > T::zero()) || !clip_bound.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "clip bound must be positive and finite, got {clip_bound}"
            )));
        }
        for (j, (&g, &b)) in gamma.iter().zip(&beta).enumerate() {
            if g {
                if !b.is_finite() || b.abs() > T::one() {
                    return Err(Error::ContractViolation(format!(
                        "active slot {j} holds {b}, outside [-1, 1]"
                    )));
                }
            } else if b != T::zero() {
                return Err(Error::ContractViolation(format!(
                    "inactive slot {j} holds {b}, expected exactly 0"
                )));
            }
        }
        Ok(SparseNetwork {
            arch,
            gamma,
            beta,
            clip_bound,
        })
    }

    /// The all-inactive network (computes the zero function).
    pub fn empty(arch: Architecture, clip_bound: T) -> Result<Self> {
        let t = arch.param_count() as usize;
        SparseNetwork::new(arch, vec![false; t], vec![T::zero(); t], clip_bound)
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn gamma(&self) -> &[bool] {
        &self.gamma
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn clip_bound(&self) -> T {
        self.clip_bound
    }

    /// Number of active slots (the sparsity s).
    pub fn active_count(&self) -> u64 {
        self.gamma.iter().filter(|&&g| g).count() as u64
    }

    /// Activate slot `index` with coefficient `value` (must lie in [-1, 1]).
    pub fn activate(&mut self, index: u64, value: T) -> Result<()> {
        if index >= self.arch.param_count() {
            return Err(Error::InvalidArgument(format!(
                "slot index {index} out of range (T = {})",
                self.arch.param_count()
            )));
        }
        if !value.is_finite() || value.abs() > T::one() {
            return Err(Error::ContractViolation(format!(
                "coefficient {value} outside [-1, 1] for slot {index}"
            )));
        }
        self.gamma[index as usize] = true;
        self.beta[index as usize] = value;
        Ok(())
    }

    /// Deactivate slot `index`, zeroing its coefficient.
    pub fn deactivate(&mut self, index: u64) -> Result<()> {
        if index >= self.arch.param_count() {
            return Err(Error::InvalidArgument(format!(
                "slot index {index} out of range (T = {})",
                self.arch.param_count()
            )));
        }
        self.gamma[index as usize] = false;
        self.beta[index as usize] = T::zero();
        Ok(())
    }

    /// Compile an evaluator and run one input through it. Convenience for one-off
    /// evaluations; batch callers should hold an [`Evaluator`].
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let mut ev = Evaluator::new(self);
        ev.eval(x)
    }

    /// Scalar-output convenience.
    pub fn predict(&self, x: &[T]) -> Result<T> {
        if self.arch.output_dim() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "predict needs a scalar output, architecture ends in {}",
                self.arch.output_dim()
            )));
        }
        Ok(self.forward(x)?[0])
    }

    /// Expand to dense per-layer matrices (inactive slots appear as zeros).
    pub fn densify(&self) -> DenseParams<T> {
        let widths = self.arch.widths();
        let last = widths.len() - 1;
        let mut layers = Vec::with_capacity(last);
        let mut cursor = 0usize;
        for l in 1..=last {
            let wcount = (widths[l] * widths[l - 1]) as usize;
            let weights = self.beta[cursor..cursor + wcount].to_vec();
            cursor += wcount;
            let shifts = if l == last {
                None
            } else {
                let s = self.beta[cursor..cursor + widths[l]].to_vec();
                cursor += widths[l];
                Some(s)
            };
            layers.push(DenseLayer { weights, shifts });
        }
        DenseParams {
            arch: self.arch.clone(),
            layers,
        }
    }

    /// Rebuild a sparse network from dense parameters: a slot is active iff its
    /// value is exactly nonzero (no thresholding), and every nonzero value must
    /// already satisfy the [-1, 1] bound.
    pub fn sparsify(params: &DenseParams<T>, clip_bound: T) -> Result<Self> {
        let widths = params.arch.widths();
        let last = widths.len() - 1;
        if params.layers.len() != last {
            return Err(Error::DimensionMismatch(format!(
                "{} dense layers for an architecture with {last}",
                params.layers.len()
            )));
        }
        let t = params.arch.param_count() as usize;
        let mut beta = Vec::with_capacity(t);
        for (i, layer) in params.layers.iter().enumerate() {
            let l = i + 1;
            let wcount = widths[l] * widths[l - 1];
            if layer.weights.len() != wcount {
                return Err(Error::DimensionMismatch(format!(
                    "layer {l} has {} weights, expected {wcount}",
                    layer.weights.len()
                )));
            }
            beta.extend_from_slice(&layer.weights);
            match (&layer.shifts, l == last) {
                (None, true) => {}
                (Some(s), false) => {
                    if s.len() != widths[l] {
                        return Err(Error::DimensionMismatch(format!(
                            "layer {l} has {} shifts, expected {}",
                            s.len(),
                            widths[l]
                        )));
                    }
                    beta.extend_from_slice(s);
                }
                (None, false) => {
                    return Err(Error::DimensionMismatch(format!(
                        "hidden layer {l} is missing its shift vector"
                    )));
                }
                (Some(_), true) => {
                    return Err(Error::DimensionMismatch(
                        "output layer must not carry shifts".into(),
                    ));
                }
            }
        }
        let gamma: Vec<bool> = beta.iter().map(|&v| v != T::zero()).collect();
        SparseNetwork::new(params.arch.clone(), gamma, beta, clip_bound)
    }

    /// Estimate the sup norm of |f| over the unit cube by a tensor grid with
    /// `resolution` points per axis (endpoints included). Returns the maximum and
    /// an attaining grid point. Refuses grids past 2e7 evaluations.
    pub fn sup_norm_estimate(&self, resolution: usize) -> Result<(T, Vec<T>)> {
        self.sup_norm_scan(resolution, true)
    }

    /// Same scan on the *pre-clip* map: how large |f| would get without the
    /// output clamp. This is what the posterior draw audit reports against the
    /// clip bound, since the clipped map can never exceed it.
    pub fn sup_norm_estimate_raw(&self, resolution: usize) -> Result<(T, Vec<T>)> {
        self.sup_norm_scan(resolution, false)
    }

    fn sup_norm_scan(&self, resolution: usize, clipped: bool) -> Result<(T, Vec<T>)> {
        let p = self.arch.input_dim();
        if self.arch.output_dim() != 1 {
            return Err(Error::DimensionMismatch(
                "sup_norm_estimate needs a scalar output".into(),
            ));
        }
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "resolution must be at least 2, got {resolution}"
            )));
        }
        let total = (resolution as f64).powi(p as i32);
        if total > 2e7 {
            return Err(Error::Infeasible(format!(
                "{resolution}^{p} = {total:.3e} grid evaluations exceed the 2e7 cap"
            )));
        }
        let mut ev = Evaluator::new(self);
        let step = T::one() / T::of_usize(resolution - 1);
        let mut idx = vec![0usize; p];
        let mut x = vec![T::zero(); p];
        let mut best = T::neg_infinity();
        let mut best_x = x.clone();
        loop {
            for (xi, &i) in x.iter_mut().zip(&idx) {
                *xi = T::of_usize(i) * step;
            }
            let v = if clipped {
                ev.eval(&x)?[0].abs()
            } else {
                ev.eval_raw(&x)?[0].abs()
            };
            if v > best {
                best = v;
                best_x.copy_from_slice(&x);
            }
            // Odometer increment over the multi-index.
            let mut d = 0;
            loop {
                if d == p {
                    return Ok((best, best_x));
                }
                idx[d] += 1;
                if idx[d] < resolution {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    /// Debug text form: widths, clip bound, then one `index value` line per active
    /// slot in ascending index order. Round-trips losslessly (values print in the
    /// shortest form that re-parses to the same bits).
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        out.push_str("widths");
        for w in self.arch.widths() {
            let _ = write!(out, " {w}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "clip {}", self.clip_bound);
        let _ = writeln!(out, "active {}", self.active_count());
        for (j, (&g, &b)) in self.gamma.iter().zip(&self.beta).enumerate() {
            if g {
                let _ = writeln!(out, "{j} {b}");
            }
        }
        out
    }

    /// Parse the [`to_text`](Self::to_text) form.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let widths_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing widths line".into()))?;
        let mut parts = widths_line.split_whitespace();
        if parts.next() != Some("widths") {
            return Err(Error::Parse("first line must start with 'widths'".into()));
        }
        let widths: Vec<usize> = parts
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad width '{t}': {e}")))
            })
            .collect::<Result<_>>()?;
        let arch = Architecture::new(widths)?;

        let clip_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing clip line".into()))?;
        let clip_str = clip_line
            .strip_prefix("clip ")
            .ok_or_else(|| Error::Parse("second line must start with 'clip '".into()))?;
        let clip_bound = T::of(
            clip_str
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad clip '{clip_str}': {e}")))?,
        );

        let active_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing active-count line".into()))?;
        let declared: u64 = active_line
            .strip_prefix("active ")
            .ok_or_else(|| Error::Parse("third line must start with 'active '".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad active count: {e}")))?;

        let mut net = SparseNetwork::empty(arch, clip_bound)?;
        let mut last_index: Option<u64> = None;
        let mut seen = 0u64;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let j: u64 = it
                .next()
                .ok_or_else(|| Error::Parse(format!("bad slot line '{line}'")))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad slot index in '{line}': {e}")))?;
            let v: f64 = it
                .next()
                .ok_or_else(|| Error::Parse(format!("missing value in '{line}'")))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad value in '{line}': {e}")))?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("trailing tokens in '{line}'")));
            }
            if let Some(prev) = last_index {
                if j <= prev {
                    return Err(Error::Parse(format!(
                        "slot indices must be strictly ascending, saw {j} after {prev}"
                    )));
                }
            }
            last_index = Some(j);
            net.activate(j, T::of(v))?;
            seen += 1;
        }
        if seen != declared {
            return Err(Error::Parse(format!(
                "declared {declared} active slots, found {seen}"
            )));
        }
        Ok(net)
    }
}

/// One compiled hidden layer: which units to evaluate and the active edges/shifts
/// feeding them. Indices are local to the layer; `shift` pairs units with their
/// shift value (zero when the shift slot is inactive).
struct LayerPlan<T> {
    /// (unit, shift value) for every touched unit, ascending by unit.
    units: Vec<(u32, T)>,
    /// (unit, source unit in previous layer, weight), in flat-slot order.
    edges: Vec<(u32, u32, T)>,
}

/// Compiled evaluation plan for a [`SparseNetwork`]. Baking the active structure
/// once makes repeated evaluation cost proportional to the active size. The plan
/// snapshots the coefficients, so it must be rebuilt after any mutation.
pub struct Evaluator<T> {
    input_dim: usize,
    output_dim: usize,
    clip_bound: T,
    hidden: Vec<LayerPlan<T>>,
    /// (output unit, source unit, weight) edges of the output layer.
    out_edges: Vec<(u32, u32, T)>,
    scratch_a: Vec<T>,
    scratch_b: Vec<T>,
}

impl<T: Real> Evaluator<T> {
    pub fn new(net: &SparseNetwork<T>) -> Self {
        let widths = net.arch.widths();
        let last = widths.len() - 1;
        let gamma = &net.gamma;
        let beta = &net.beta;

        let mut hidden = Vec::with_capacity(last - 1);
        let mut cursor = 0usize;
        // Which units of the previous layer can be nonzero. Inputs always can.
        let mut live_prev = vec![true; widths[0]];
        for l in 1..last {
            let rows = widths[l];
            let cols = widths[l - 1];
            let mut edges = Vec::new();
            let mut has_edge = vec![false; rows];
            for r in 0..rows {
                for c in 0..cols {
                    let j = cursor + r * cols + c;
                    if gamma[j] && live_prev[c] {
                        edges.push((r as u32, c as u32, beta[j]));
                        has_edge[r] = true;
                    }
                }
            }
            cursor += rows * cols;
            let mut shift_of = vec![T::zero(); rows];
            let mut has_shift = vec![false; rows];
            for u in 0..rows {
                let j = cursor + u;
                if gamma[j] {
                    shift_of[u] = beta[j];
                    has_shift[u] = true;
                }
            }
            cursor += rows;
            let mut units = Vec::new();
            let mut live = vec![false; rows];
            for u in 0..rows {
                if has_edge[u] || has_shift[u] {
                    units.push((u as u32, shift_of[u]));
                    // A unit with only a shift still fires when the shift is
                    // negative: σ(0 - b) = max(-b, 0).
                    live[u] = true;
                }
            }
            hidden.push(LayerPlan { units, edges });
            live_prev = live;
        }

        let rows = widths[last];
        let cols = widths[last - 1];
        let mut out_edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let j = cursor + r * cols + c;
                if gamma[j] && live_prev[c] {
                    out_edges.push((r as u32, c as u32, beta[j]));
                }
            }
        }

        let scratch = widths.iter().copied().max().unwrap_or(1);
        Evaluator {
            input_dim: widths[0],
            output_dim: widths[last],
            clip_bound: net.clip_bound,
            hidden,
            out_edges,
            scratch_a: vec![T::zero(); scratch],
            scratch_b: vec![T::zero(); scratch],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Evaluate the network at `x`, clamping outputs to the clip bound.
    pub fn eval(&mut self, x: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.output_dim];
        self.eval_into(x, &mut out, true)?;
        Ok(out)
    }

    /// Evaluate without the final output clamp (the raw linear read-out).
    pub fn eval_raw(&mut self, x: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.output_dim];
        self.eval_into(x, &mut out, false)?;
        Ok(out)
    }

    /// Scalar-output convenience for hot loops.
    pub fn predict(&mut self, x: &[T]) -> Result<T> {
        if self.output_dim != 1 {
            return Err(Error::DimensionMismatch(format!(
                "predict needs a scalar output, network ends in {}",
                self.output_dim
            )));
        }
        let mut out = [T::zero()];
        self.eval_into(x, &mut out, true)?;
        Ok(out[0])
    }

    fn eval_into(&mut self, x: &[T], out: &mut [T], clip: bool) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "input has {} coordinates, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        debug_assert_eq!(out.len(), self.output_dim);
        self.scratch_a[..x.len()].copy_from_slice(x);
        // Untouched units are structurally zero and their outgoing edges were pruned
        // at compile time, so stale scratch entries are never read.
        let (mut prev, mut cur) = (&mut self.scratch_a, &mut self.scratch_b);
        for layer in &self.hidden {
            for &(u, _) in &layer.units {
                cur[u as usize] = T::zero();
            }
            for &(u, src, w) in &layer.edges {
                cur[u as usize] = cur[u as usize] + w * prev[src as usize];
            }
            for &(u, b) in &layer.units {
                let v = cur[u as usize] - b;
                cur[u as usize] = if v > T::zero() { v } else { T::zero() };
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        for o in out.iter_mut() {
            *o = T::zero();
        }
        for &(r, c, w) in &self.out_edges {
            out[r as usize] = out[r as usize] + w * prev[c as usize];
        }
        if clip {
            let f = self.clip_bound;
            for o in out.iter_mut() {
                *o = o.min(f).max(-f);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Independent slot-count oracle: walk the layers and count weight entries and
    /// hidden shifts one by one, never touching the closed-form expression.
    fn enumerate_slots(widths: &[usize]) -> u64 {
        let mut count = 0u64;
        for l in 1..widths.len() {
            for _row in 0..widths[l] {
                for _col in 0..widths[l - 1] {
                    count += 1;
                }
            }
            if l != widths.len() - 1 {
                for _unit in 0..widths[l] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Naive dense reference evaluator: full matrix loops over the densified
    /// parameters, no sparsity anywhere.
    fn reference_forward(params: &DenseParams<f64>, x: &[f64], clip: f64) -> Vec<f64> {
        let widths = params.arch.widths();
        let mut a: Vec<f64> = x.to_vec();
        for (i, layer) in params.layers.iter().enumerate() {
            let l = i + 1;
            let rows = widths[l];
            let cols = widths[l - 1];
            let mut y = vec![0.0; rows];
            for r in 0..rows {
                for (c, &ac) in a.iter().enumerate().take(cols) {
                    y[r] += layer.weights[r * cols + c] * ac;
                }
            }
            match &layer.shifts {
                Some(b) => {
                    for r in 0..rows {
                        y[r] = (y[r] - b[r]).max(0.0);
                    }
                }
                None => {
                    for v in y.iter_mut() {
                        *v = v.clamp(-clip, clip);
                    }
                }
            }
            a = y;
        }
        a
    }

    fn arch(widths: &[usize]) -> Architecture {
        Architecture::new(widths.to_vec()).expect("test architecture")
    }

    #[test]
    fn param_count_matches_slot_enumeration() {
        let cases: Vec<Vec<usize>> = vec![
            vec![2, 3, 1],
            vec![1, 12, 1],
            vec![5, 1],
            vec![2, 24, 24, 1],
            vec![3, 7, 2, 9, 4],
            vec![1, 1, 1, 1, 1, 1],
        ];
        for widths in cases {
            let a = arch(&widths);
            let want = enumerate_slots(&widths);
            assert_eq!(
                a.param_count(),
                want,
                "closed form disagrees with enumeration for {widths:?}"
            );
        }
        // Two fixed values worth pinning.
        assert_eq!(arch(&[2, 3, 1]).param_count(), 12);
        assert_eq!(arch(&[1, 12, 1]).param_count(), 36);
    }

    #[test]
    fn template_count_stays_below_geometric_bound() {
        // T < (12 p N)^(L+1) for the templated widths.
        for &(p, n, l) in &[(1usize, 1usize, 1usize), (2, 1, 2), (1, 3, 3), (3, 2, 2)] {
            let a = Architecture::template(p, n, l).unwrap();
            let bound = (12.0 * p as f64 * n as f64).powi(l as i32 + 1);
            assert!(
                (a.param_count() as f64) < bound,
                "T = {} not below (12pN)^(L+1) = {bound} for p={p}, N={n}, L={l}",
                a.param_count()
            );
        }
    }

    #[test]
    fn slot_decode_encode_roundtrip_covers_every_index() {
        for widths in [vec![2, 3, 1], vec![1, 4, 2, 1], vec![3, 1]] {
            let a = arch(&widths);
            for j in 0..a.param_count() {
                let slot = a.slot(j).unwrap();
                let back = a.index_of(&slot).unwrap();
                assert_eq!(back, j, "slot {slot:?} for {widths:?}");
            }
            assert!(a.slot(a.param_count()).is_err(), "index T must be rejected");
        }
    }

    #[test]
    fn output_layer_has_no_shift_slots() {
        let a = arch(&[2, 3, 1]);
        // Layer 2 is the output layer: slots 9, 10, 11 are its weights.
        for j in 9..12 {
            match a.slot(j).unwrap() {
                Slot {
                    layer: 2,
                    kind: SlotKind::Weight { .. },
                } => {}
                other => panic!("slot {j} should be an output weight, got {other:?}"),
            }
        }
        let bad = a.index_of(&Slot {
            layer: 2,
            kind: SlotKind::Shift { unit: 0 },
        });
        assert!(bad.is_err(), "output shift must not be addressable");
    }

    #[test]
    fn ramp_network_evaluates_shifted_relu() {
        // widths (1,1,1): w1 = 1, b1 = 0.5, w2 = 1 gives f(x) = max(x - 0.5, 0).
        let a = arch(&[1, 1, 1]);
        let mut net = SparseNetwork::<f64>::empty(a, 10.0).unwrap();
        net.activate(0, 1.0).unwrap(); // W1[0,0]
        net.activate(1, 0.5).unwrap(); // b1[0]
        net.activate(2, 1.0).unwrap(); // W2[0,0]
        assert_eq!(net.predict(&[0.7]).unwrap(), 0.7_f64 - 0.5, "f(0.7)");
        assert!((net.predict(&[0.7]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(net.predict(&[0.2]).unwrap(), 0.0, "f(0.2) sits on the flat side");
        assert_eq!(net.predict(&[0.5]).unwrap(), 0.0, "kink itself evaluates to 0");
    }

    #[test]
    fn output_clipping_saturates_at_the_bound() {
        // Two hidden units each computing x + 1; output sums them: f(x) = 2x + 2.
        let a = arch(&[1, 2, 1]);
        let mut net = SparseNetwork::<f64>::empty(a.clone(), 1.0).unwrap();
        net.activate(0, 1.0).unwrap(); // W1[0,0]
        net.activate(1, 1.0).unwrap(); // W1[1,0]
        net.activate(2, -1.0).unwrap(); // b1[0] = -1  →  σ(x + 1)
        net.activate(3, -1.0).unwrap(); // b1[1] = -1
        net.activate(4, 1.0).unwrap(); // W2[0,0]
        net.activate(5, 1.0).unwrap(); // W2[0,1]
        // Unclipped value at x = 0.9 would be 3.8.
        assert_eq!(net.predict(&[0.9]).unwrap(), 1.0, "positive clip");
        let mut neg = net.clone();
        neg.deactivate(4).unwrap();
        neg.activate(4, -1.0).unwrap();
        neg.deactivate(5).unwrap();
        neg.activate(5, -1.0).unwrap();
        assert_eq!(neg.predict(&[0.9]).unwrap(), -1.0, "negative clip");
    }

    #[test]
    fn empty_network_computes_zero() {
        let net = SparseNetwork::<f64>::empty(arch(&[3, 5, 5, 1]), 10.0).unwrap();
        assert_eq!(net.predict(&[0.1, 0.9, 0.4]).unwrap(), 0.0);
        assert_eq!(net.active_count(), 0);
    }

    #[test]
    fn shift_only_unit_fires_on_negative_shift() {
        // Active shift b = -0.3 with no incoming weights: unit outputs max(0.3, 0).
        let a = arch(&[1, 1, 1]);
        let mut net = SparseNetwork::<f64>::empty(a, 10.0).unwrap();
        net.activate(1, -0.3).unwrap(); // b1[0]
        net.activate(2, 1.0).unwrap(); // W2[0,0]
        assert_eq!(net.predict(&[0.0]).unwrap(), 0.3);
        assert_eq!(net.predict(&[0.99]).unwrap(), 0.3, "input is disconnected");
    }

    #[test]
    fn sparse_forward_matches_dense_reference_on_random_networks() {
        let mut rng = crate::seeds::stream_rng(2024, 1);
        for trial in 0..200 {
            let widths: Vec<usize> = {
                let depth = rng.random_range(1..=4);
                let mut w = vec![rng.random_range(1..=3usize)];
                for _ in 0..depth {
                    w.push(rng.random_range(1..=5));
                }
                w.push(rng.random_range(1..=2));
                w
            };
            let a = arch(&widths);
            let t = a.param_count() as usize;
            let mut net = SparseNetwork::<f64>::empty(a.clone(), 5.0).unwrap();
            for j in 0..t {
                if rng.random_bool(0.5) {
                    net.activate(j as u64, rng.random_range(-1.0..=1.0)).unwrap();
                }
            }
            let dense = net.densify();
            let mut ev = Evaluator::new(&net);
            for _ in 0..20 {
                let x: Vec<f64> = (0..widths[0]).map(|_| rng.random_range(-2.0..=2.0)).collect();
                let got = ev.eval(&x).unwrap();
                let want = reference_forward(&dense, &x, 5.0);
                assert_eq!(
                    got, want,
                    "trial {trial}: sparse and dense evaluation disagree for {widths:?} at {x:?}"
                );
            }
        }
    }

    #[test]
    fn densify_sparsify_roundtrip_preserves_the_network() {
        let mut rng = crate::seeds::stream_rng(99, 2);
        let a = arch(&[2, 4, 3, 1]);
        let t = a.param_count() as usize;
        let mut net = SparseNetwork::<f64>::empty(a, 7.5).unwrap();
        for j in 0..t {
            if rng.random_bool(0.4) {
                // Strictly nonzero coefficients so activity is recoverable.
                let mut v: f64 = 0.0;
                while v == 0.0 {
                    v = rng.random_range(-1.0..=1.0);
                }
                net.activate(j as u64, v).unwrap();
            }
        }
        let back = SparseNetwork::sparsify(&net.densify(), 7.5).unwrap();
        assert_eq!(back, net, "densify ∘ sparsify must be the identity on nonzero coefficients");
    }

    #[test]
    fn sparsify_rejects_out_of_range_values() {
        let a = arch(&[1, 1, 1]);
        let dense = DenseParams {
            arch: a,
            layers: vec![
                DenseLayer {
                    weights: vec![1.5],
                    shifts: Some(vec![0.0]),
                },
                DenseLayer {
                    weights: vec![1.0],
                    shifts: None,
                },
            ],
        };
        let err = SparseNetwork::sparsify(&dense, 10.0).unwrap_err();
        assert!(
            matches!(err, Error::ContractViolation(_)),
            "1.5 must violate the coefficient bound, got {err:?}"
        );
    }

    #[test]
    fn constructor_rejects_nonzero_inactive_and_oversized_active() {
        let a = arch(&[1, 1, 1]);
        let t = a.param_count() as usize;
        let bad_inactive = SparseNetwork::new(
            a.clone(),
            vec![false; t],
            {
                let mut b = vec![0.0; t];
                b[1] = 0.25;
                b
            },
            10.0,
        );
        assert!(matches!(bad_inactive.unwrap_err(), Error::ContractViolation(_)));

        let mut net = SparseNetwork::<f64>::empty(a, 10.0).unwrap();
        assert!(net.activate(0, 1.25).is_err(), "coefficient above 1 must fail");
        assert!(net.activate(99, 0.5).is_err(), "out-of-range slot must fail");
        assert!(!net.gamma()[0], "failed activation must not flip the mask");
    }

    #[test]
    fn text_roundtrip_is_lossless() {
        let a = arch(&[2, 3, 1]);
        let mut net = SparseNetwork::<f64>::empty(a, 10.0).unwrap();
        net.activate(0, 0.1).unwrap();
        net.activate(5, -1.0 / 3.0).unwrap();
        net.activate(7, 1.0).unwrap();
        net.activate(11, -0.7071067811865476).unwrap();
        let text = net.to_text();
        let back = SparseNetwork::<f64>::from_text(&text).unwrap();
        assert_eq!(back, net, "text form must round-trip bitwise:\n{text}");
    }

    #[test]
    fn from_text_rejects_malformed_input() {
        assert!(SparseNetwork::<f64>::from_text("").is_err());
        let missing_count = "widths 1 1 1\nclip 10\nactive 2\n0 0.5\n";
        assert!(SparseNetwork::<f64>::from_text(missing_count).is_err());
        let unsorted = "widths 1 1 1\nclip 10\nactive 2\n2 0.5\n0 0.5\n";
        assert!(SparseNetwork::<f64>::from_text(unsorted).is_err());
        let oversized = "widths 1 1 1\nclip 10\nactive 1\n0 1.5\n";
        assert!(SparseNetwork::<f64>::from_text(oversized).is_err());
    }

    #[test]
    fn sup_norm_estimate_finds_the_ramp_maximum() {
        let a = arch(&[1, 1, 1]);
        let mut net = SparseNetwork::<f64>::empty(a, 10.0).unwrap();
        net.activate(0, 1.0).unwrap();
        net.activate(1, 0.5).unwrap();
        net.activate(2, 1.0).unwrap();
        let (sup, at) = net.sup_norm_estimate(101).unwrap();
        assert!((sup - 0.5).abs() < 1e-12, "max of σ(x - 1/2) on [0,1] is 0.5, got {sup}");
        assert!((at[0] - 1.0).abs() < 1e-12, "attained at x = 1, got {at:?}");
    }

    #[test]
    fn sup_norm_estimate_refuses_infeasible_grids() {
        let net = SparseNetwork::<f64>::empty(arch(&[4, 2, 1]), 10.0).unwrap();
        let err = net.sup_norm_estimate(1000).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "1000^4 grid must be refused");
    }

    #[test]
    fn forward_checks_input_dimension() {
        let net = SparseNetwork::<f64>::empty(arch(&[2, 3, 1]), 10.0).unwrap();
        assert!(matches!(
            net.forward(&[0.1]).unwrap_err(),
            Error::DimensionMismatch(_)
        ));
    }

    #[test]
    fn forward_also_works_in_f32() {
        let a = arch(&[1, 1, 1]);
        let mut net = SparseNetwork::<f32>::empty(a, 10.0).unwrap();
        net.activate(0, 1.0).unwrap();
        net.activate(1, 0.5).unwrap();
        net.activate(2, 1.0).unwrap();
        assert!((net.predict(&[0.7f32]).unwrap() - 0.2).abs() < 1e-6);
    }

    #[test]
    fn architecture_serde_rejects_invalid_widths() {
        let ok: Architecture = serde_json::from_str("[2,3,1]").unwrap();
        assert_eq!(ok.widths(), &[2, 3, 1]);
        let bad: std::result::Result<Architecture, _> = serde_json::from_str("[2,0,1]");
        assert!(bad.is_err(), "zero width must fail to deserialize");
    }
}
