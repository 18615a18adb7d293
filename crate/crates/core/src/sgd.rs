//! Dense MAP/SGD trainer: the optimization view of the regression problem.
//!
//! Minimizes `Σ_i (y_i − f(x_i))² + penalty·‖B‖₂²` over the full dense
//! parameter vector of a ReLU network `f(x) = W_{L+1} σ(W_L · − b_L) ⋯` by
//! mini-batch gradient descent with classical momentum and backpropagation.
//! The ReLU subgradient at 0 is taken to be 0, and hidden shifts enter as
//! subtractions (`σ(Wx − b)`), so `∂/∂b` is the *negative* of the unit's
//! upstream delta. Training acts on the raw (unclipped) read-out: clamping
//! would zero gradients exactly where the optimizer needs them.
//!
//! The trainer is deterministic given its seed, reports a per-epoch loss
//! trace, and aborts with a diagnostic when the objective diverges past the
//! configured bound.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Architecture, DenseLayer, DenseParams};
use crate::regression::RegressionDataset;
use crate::scalar::Real;

/// Learning-rate schedule.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum LrSchedule<T> {
    Constant(T),
    /// `initial · factor^(epoch / every)` with integer division.
    Step { initial: T, factor: T, every: u64 },
}

impl<T: Real> LrSchedule<T> {
    pub fn at(&self, epoch: u64) -> T {
        match *self {
            LrSchedule::Constant(lr) => lr,
            LrSchedule::Step { initial, factor, every } => {
                initial * factor.powi((epoch / every.max(1)) as i32)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            LrSchedule::Constant(lr) => lr > T::zero() && lr.is_finite(),
            LrSchedule::Step { initial, factor, every } => {
                initial > T::zero()
                    && initial.is_finite()
                    && factor > T::zero()
                    && factor <= T::one()
                    && every >= 1
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad learning-rate schedule {self:?}")))
        }
    }
}

/// Trainer configuration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub penalty_weight: T,
    pub epochs: u64,
    pub lr: LrSchedule<T>,
    pub batch_size: usize,
    pub momentum: T,
    pub seed: u64,
    /// Abort when the epoch objective exceeds this.
    pub divergence_bound: T,
    /// Std multiplier for the He-style `N(0, 2/fan_in)` weight init.
    pub init_scale: T,
    /// Initial value of every hidden shift. Activations are `σ(w·a − b)`, so
    /// a negative value opens all ReLU gates at initialization — on narrow
    /// deep towers with nonnegative inputs this prevents units from being
    /// born dead (`σ′(0) = 0` would freeze them permanently).
    pub shift_init: T,
    /// Initialize hidden weight matrices as a norm-preserving partial
    /// identity plus `init_scale`-sized noise instead of pure He noise. A
    /// tower of near-identity layers is almost linear and well-conditioned
    /// at the start, so gradients reach every layer; pure random narrow
    /// layers compose into a map whose first optimizer steps routinely slam
    /// an entire layer's gates shut.
    pub near_identity: bool,
    /// Linear learning-rate ramp over this many leading epochs (0 = none),
    /// easing in before the schedule's nominal rate applies.
    pub warmup_epochs: u64,
    /// Cap on the global L2 norm of each batch-mean gradient; `None` leaves
    /// gradients unclipped.
    pub grad_clip: Option<T>,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        TrainConfig {
            penalty_weight: T::of(1e-4),
            epochs: 2000,
            lr: LrSchedule::Constant(T::of(0.05)),
            batch_size: 16,
            momentum: T::of(0.9),
            seed: 1,
            divergence_bound: T::of(1e6),
            init_scale: T::one(),
            shift_init: T::zero(),
            near_identity: false,
            warmup_epochs: 0,
            grad_clip: None,
        }
    }
}

impl<T: Real> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty_weight >= T::zero()) || !self.penalty_weight.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "penalty weight must be >= 0, got {}",
                self.penalty_weight
            )));
        }
        self.lr.validate()?;
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        if !(self.momentum >= T::zero() && self.momentum < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.divergence_bound > T::zero()) {
            return Err(Error::InvalidArgument("divergence bound must be positive".into()));
        }
        if !(self.init_scale > T::zero()) || !self.init_scale.is_finite() {
            return Err(Error::InvalidArgument("init scale must be positive".into()));
        }
        if !self.shift_init.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "shift init must be finite, got {}",
                self.shift_init
            )));
        }
        if let Some(c) = self.grad_clip {
            if !(c > T::zero()) || !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "gradient clip must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// A trained dense network plus its per-epoch objective trace.
#[derive(Clone, Debug)]
pub struct TrainedNet<T> {
    pub params: DenseParams<T>,
    /// Full-data objective after each epoch (index 0 = initialization).
    pub loss_trace: Vec<T>,
}

/// He-style random initialization on the given architecture.
pub fn init_dense<T: Real>(arch: &Architecture, seed: u64, scale: T) -> DenseParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths = arch.widths();
    let last = widths.len() - 1;
    let mut layers = Vec::with_capacity(last);
    for l in 1..=last {
        let rows = widths[l];
        let cols = widths[l - 1];
        let std = scale * (T::of(2.0) / T::of_usize(cols)).sqrt();
        let weights: Vec<T> = (0..rows * cols).map(|_| T::std_normal(&mut rng) * std).collect();
        let shifts =
            if l == last { None } else { Some(vec![T::zero(); rows]) };
        layers.push(DenseLayer { weights, shifts });
    }
    DenseParams { arch: arch.clone(), layers }
}

/// Near-identity initialization: every hidden weight matrix is a
/// norm-preserving partial identity (rows cycle through the input
/// coordinates, entries `1/√(repeat count)`) plus `N(0, scale²/fan_in)`
/// noise; the output layer is pure noise so the initial function is small.
/// The resulting tower is almost linear and well-conditioned, which keeps
/// gradients alive through long stacks of narrow ReLU layers.
pub fn init_dense_near_identity<T: Real>(
    arch: &Architecture,
    seed: u64,
    scale: T,
) -> DenseParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths = arch.widths();
    let last = widths.len() - 1;
    let mut layers = Vec::with_capacity(last);
    for l in 1..=last {
        let rows = widths[l];
        let cols = widths[l - 1];
        let std = scale * (T::one() / T::of_usize(cols)).sqrt();
        let mut weights: Vec<T> =
            (0..rows * cols).map(|_| T::std_normal(&mut rng) * std).collect();
        if l < last {
            // Column c is hit by ceil((rows − c)/cols) cycling rows.
            for r in 0..rows {
                let c = r % cols;
                let repeats = (rows - c + cols - 1) / cols;
                weights[r * cols + c] += T::one() / T::of_usize(repeats).sqrt();
            }
        }
        let shifts =
            if l == last { None } else { Some(vec![T::zero(); rows]) };
        layers.push(DenseLayer { weights, shifts });
    }
    DenseParams { arch: arch.clone(), layers }
}

/// Raw (unclipped) scalar forward pass of a dense parameterization.
pub fn dense_predict<T: Real>(params: &DenseParams<T>, x: &[T]) -> Result<T> {
    if params.arch.output_dim() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "dense_predict needs scalar output, got {}",
            params.arch.output_dim()
        )));
    }
    if x.len() != params.arch.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "input has {} coordinates, network expects {}",
            x.len(),
            params.arch.input_dim()
        )));
    }
    let widths = params.arch.widths();
    let mut a: Vec<T> = x.to_vec();
    for (l, layer) in params.layers.iter().enumerate() {
        let rows = widths[l + 1];
        let cols = widths[l];
        let mut z = vec![T::zero(); rows];
        for r in 0..rows {
            let mut acc = T::zero();
            for c in 0..cols {
                acc += layer.weights[r * cols + c] * a[c];
            }
            z[r] = acc;
        }
        if let Some(b) = &layer.shifts {
            for r in 0..rows {
                let v = z[r] - b[r];
                z[r] = if v > T::zero() { v } else { T::zero() };
            }
        }
        a = z;
    }
    Ok(a[0])
}

/// Full objective: `Σ_i (y_i − f(x_i))² + penalty·‖B‖₂²`.
pub fn dense_objective<T: Real>(
    params: &DenseParams<T>,
    data: &RegressionDataset<T>,
    penalty: T,
) -> Result<T> {
    let mut loss = T::zero();
    for i in 0..data.len() {
        let r = data.y(i) - dense_predict(params, data.x(i))?;
        loss += r * r;
    }
    Ok(loss + penalty * sq_norm(params))
}

/// Gradient of [`dense_objective`] by backpropagation, in the same shapes as
/// the parameters. ReLU uses the `σ'(0) = 0` subgradient convention.
pub fn dense_gradient<T: Real>(
    params: &DenseParams<T>,
    data: &RegressionDataset<T>,
    penalty: T,
) -> Result<DenseParams<T>> {
    let mut grad = DenseGrad::zeros(params);
    for i in 0..data.len() {
        backprop_point(params, data.x(i), data.y(i), &mut grad)?;
    }
    let two_pen = T::of(2.0) * penalty;
    let mut layers = grad.layers;
    for (gl, pl) in layers.iter_mut().zip(&params.layers) {
        for (g, &w) in gl.weights.iter_mut().zip(&pl.weights) {
            *g += two_pen * w;
        }
        if let (Some(gb), Some(pb)) = (&mut gl.shifts, &pl.shifts) {
            for (g, &b) in gb.iter_mut().zip(pb.iter()) {
                *g += two_pen * b;
            }
        }
    }
    Ok(DenseParams { arch: params.arch.clone(), layers })
}

fn sq_norm<T: Real>(params: &DenseParams<T>) -> T {
    let mut acc = T::zero();
    for layer in &params.layers {
        for &w in &layer.weights {
            acc += w * w;
        }
        if let Some(b) = &layer.shifts {
            for &v in b {
                acc += v * v;
            }
        }
    }
    acc
}

/// Gradient accumulator with the same shapes as the parameters.
struct DenseGrad<T> {
    layers: Vec<DenseLayer<T>>,
}

impl<T: Real> DenseGrad<T> {
    fn zeros(params: &DenseParams<T>) -> Self {
        DenseGrad {
            layers: params
                .layers
                .iter()
                .map(|l| DenseLayer {
                    weights: vec![T::zero(); l.weights.len()],
                    shifts: l.shifts.as_ref().map(|b| vec![T::zero(); b.len()]),
                })
                .collect(),
        }
    }

    fn clear(&mut self) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = T::zero());
            if let Some(b) = &mut l.shifts {
                b.iter_mut().for_each(|v| *v = T::zero());
            }
        }
    }
}

/// Backpropagate the squared-error gradient of one point into `grad`.
/// Activations: `a_0 = x`, `z_l = W_l a_{l-1}`, `a_l = σ(z_l − b_l)` for hidden
/// layers, output `f = W_{L+1} a_L`. With `δ_l = ∂loss/∂(pre-activation)_l`:
/// `∂/∂W_l = δ_l a_{l-1}ᵀ`, `∂/∂b_l = −δ_l`, ReLU′(0) = 0.
fn backprop_point<T: Real>(
    params: &DenseParams<T>,
    x: &[T],
    y: T,
    grad: &mut DenseGrad<T>,
) -> Result<T> {
    let widths = params.arch.widths();
    let n_layers = params.layers.len();

    // Forward, retaining activations per layer and the ReLU gates.
    let mut activations: Vec<Vec<T>> = Vec::with_capacity(n_layers + 1);
    activations.push(x.to_vec());
    let mut gates: Vec<Vec<bool>> = Vec::with_capacity(n_layers);
    for (l, layer) in params.layers.iter().enumerate() {
        let rows = widths[l + 1];
        let cols = widths[l];
        let prev = &activations[l];
        let mut z = vec![T::zero(); rows];
        for r in 0..rows {
            let mut acc = T::zero();
            for c in 0..cols {
                acc += layer.weights[r * cols + c] * prev[c];
            }
            z[r] = acc;
        }
        let gate = if let Some(b) = &layer.shifts {
            let mut g = vec![false; rows];
            for r in 0..rows {
                let v = z[r] - b[r];
                // Subgradient convention: the unit is open only for v > 0.
                if v > T::zero() {
                    z[r] = v;
                    g[r] = true;
                } else {
                    z[r] = T::zero();
                }
            }
            g
        } else {
            vec![true; rows]
        };
        gates.push(gate);
        activations.push(z);
    }

    let f = activations[n_layers][0];
    let residual = y - f;
    // loss_i = (y − f)²; dloss/df = −2(y − f).
    let mut delta = vec![-T::of(2.0) * residual];

    for l in (0..n_layers).rev() {
        let rows = widths[l + 1];
        let cols = widths[l];
        let layer = &params.layers[l];
        let glayer = &mut grad.layers[l];
        let prev = &activations[l];
        for r in 0..rows {
            let d = delta[r];
            if d == T::zero() {
                continue;
            }
            for c in 0..cols {
                glayer.weights[r * cols + c] += d * prev[c];
            }
            if let Some(gb) = &mut glayer.shifts {
                gb[r] += -d;
            }
        }
        if l > 0 {
            // δ_{l-1} = (W_lᵀ δ_l) ⊙ gate_{l-1}.
            let mut next = vec![T::zero(); cols];
            for r in 0..rows {
                let d = delta[r];
                if d == T::zero() {
                    continue;
                }
                for c in 0..cols {
                    next[c] += layer.weights[r * cols + c] * d;
                }
            }
            for (c, open) in gates[l - 1].iter().enumerate() {
                if !open {
                    next[c] = T::zero();
                }
            }
            delta = next;
        }
    }
    Ok(residual * residual)
}

/// Train a dense network by mini-batch SGD with momentum. Deterministic in the
/// seed; epoch 0 of the loss trace is the objective at initialization, and a
/// zero-epoch call returns the initialization untouched.
pub fn map_sgd_train<T: Real>(
    arch: &Architecture,
    data: &RegressionDataset<T>,
    cfg: &TrainConfig<T>,
) -> Result<TrainedNet<T>> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("cannot train on an empty dataset".into()));
    }
    if arch.input_dim() != data.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "architecture expects p = {}, data has p = {}",
            arch.input_dim(),
            data.input_dim()
        )));
    }
    let mut params = if cfg.near_identity {
        init_dense_near_identity(arch, cfg.seed, cfg.init_scale)
    } else {
        init_dense(arch, cfg.seed, cfg.init_scale)
    };
    if cfg.shift_init != T::zero() {
        for layer in &mut params.layers {
            if let Some(b) = &mut layer.shifts {
                b.iter_mut().for_each(|v| *v = cfg.shift_init);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9E37_79B9_7F4A_7C15));
    let mut grad = DenseGrad::zeros(&params);
    let mut velocity = DenseGrad::zeros(&params);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs as usize + 1);
    trace.push(dense_objective(&params, data, cfg.penalty_weight)?);

    for epoch in 0..cfg.epochs {
        let mut lr = cfg.lr.at(epoch);
        if epoch < cfg.warmup_epochs {
            lr *= T::of_usize((epoch + 1) as usize) / T::of_usize(cfg.warmup_epochs as usize);
        }
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.clear();
            for &i in batch {
                backprop_point(&params, data.x(i), data.y(i), &mut grad)?;
            }
            // Penalty gradient 2·penalty·B and the momentum update.
            let two_pen = T::of(2.0) * cfg.penalty_weight;
            let mut scale = lr / T::of_usize(batch.len());
            if let Some(cap) = cfg.grad_clip {
                let inv_n = T::one() / T::of_usize(batch.len());
                let mut sq = T::zero();
                for (g_l, p_l) in grad.layers.iter().zip(&params.layers) {
                    for (&g, &w) in g_l.weights.iter().zip(&p_l.weights) {
                        let v = g * inv_n + two_pen * w;
                        sq += v * v;
                    }
                    if let (Some(gb), Some(pb)) = (&g_l.shifts, &p_l.shifts) {
                        for (&g, &b) in gb.iter().zip(pb.iter()) {
                            let v = g * inv_n + two_pen * b;
                            sq += v * v;
                        }
                    }
                }
                let norm = sq.sqrt();
                if norm > cap {
                    scale *= cap / norm;
                }
            }
            for ((p_l, g_l), v_l) in params
                .layers
                .iter_mut()
                .zip(&grad.layers)
                .zip(&mut velocity.layers)
            {
                for ((w, &g), v) in
                    p_l.weights.iter_mut().zip(&g_l.weights).zip(&mut v_l.weights)
                {
                    *v = cfg.momentum * *v - scale * (g + two_pen * *w);
                    *w += *v;
                }
                if let (Some(b), Some(gb), Some(vb)) =
                    (&mut p_l.shifts, &g_l.shifts, &mut v_l.shifts)
                {
                    for ((bi, &g), v) in b.iter_mut().zip(gb).zip(vb.iter_mut()) {
                        *v = cfg.momentum * *v - scale * (g + two_pen * *bi);
                        *bi += *v;
                    }
                }
            }
        }
        let loss = dense_objective(&params, data, cfg.penalty_weight)?;
        if !(loss < cfg.divergence_bound) || !loss.is_finite() {
            return Err(Error::Numerical(format!(
                "training diverged at epoch {epoch}: objective {loss} \
                 (bound {}); lower the learning rate",
                cfg.divergence_bound
            )));
        }
        trace.push(loss);
    }
    Ok(TrainedNet { params, loss_trace: trace })
}
