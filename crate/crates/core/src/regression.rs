//! Fixed-design Gaussian regression: the data model and its exact
//! log-likelihood, plus the empirical L² distance used to score estimators.
//!
//! The model is `Y_i = f(x_i) + ε_i` with `ε_i ~ N(0,1)` and design points
//! `x_i ∈ [0,1]^p`, so the log-likelihood of a network `f` is
//! `−(1/2) Σ_i (y_i − f(x_i))² − (n/2) ln 2π` with the noise variance pinned
//! at one. An empty dataset (n = 0) is legal and gives log-likelihood zero,
//! which is how prior-only chains switch the data term off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Evaluator, SparseNetwork};
use crate::scalar::Real;

/// A fixed-design regression sample: `n` points in `[0,1]^p` with responses.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegressionDataset<T> {
    /// Design matrix, row-major: point i occupies `xs[i*p .. (i+1)*p]`.
    xs: Vec<T>,
    ys: Vec<T>,
    p: usize,
}

impl<T: Real> RegressionDataset<T> {
    /// Build from a row-major design and responses, checking the unit cube.
    pub fn new(xs: Vec<T>, ys: Vec<T>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("input dimension must be >= 1".into()));
        }
        if xs.len() != ys.len() * p {
            return Err(Error::DimensionMismatch(format!(
                "design has {} coordinates but {} responses need {}",
                xs.len(),
                ys.len(),
                ys.len() * p
            )));
        }
        for (i, &x) in xs.iter().enumerate() {
            if !(x >= T::zero() && x <= T::one()) {
                return Err(Error::InvalidArgument(format!(
                    "design coordinate {i} = {x} lies outside [0,1]"
                )));
            }
        }
        for (i, &y) in ys.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::InvalidArgument(format!("response {i} = {y} is not finite")));
            }
        }
        Ok(RegressionDataset { xs, ys, p })
    }

    /// The empty dataset: likelihood identically zero (prior-only inference).
    pub fn empty(p: usize) -> Self {
        RegressionDataset { xs: Vec::new(), ys: Vec::new(), p }
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.p
    }

    pub fn x(&self, i: usize) -> &[T] {
        &self.xs[i * self.p..(i + 1) * self.p]
    }

    pub fn y(&self, i: usize) -> T {
        self.ys[i]
    }

    /// The full design, row-major (`len() * input_dim()` scalars).
    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }
}

/// Exact Gaussian log-likelihood of a sparse network under unit noise:
/// `−(1/2) Σ_i (y_i − f(x_i))² − (n/2) ln 2π`.
pub fn log_likelihood<T: Real>(net: &SparseNetwork<T>, data: &RegressionDataset<T>) -> Result<T> {
    let mut eval = Evaluator::new(net);
    log_likelihood_with(&mut eval, data)
}

/// Same likelihood through a pre-compiled evaluator (the sampler's hot path).
pub fn log_likelihood_with<T: Real>(
    eval: &mut Evaluator<T>,
    data: &RegressionDataset<T>,
) -> Result<T> {
    if data.is_empty() {
        return Ok(T::zero());
    }
    if eval.input_dim() != data.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "network expects {} inputs, data has {}",
            eval.input_dim(),
            data.input_dim()
        )));
    }
    let mut sse = T::zero();
    for i in 0..data.len() {
        let r = data.y(i) - eval.predict(data.x(i))?;
        sse += r * r;
    }
    let n = T::of_usize(data.len());
    Ok(-sse / T::of(2.0) - n / T::of(2.0) * (T::of(2.0) * T::PI()).ln())
}

/// Empirical L² distance `sqrt((1/n) Σ_i (f(x_i) − g(x_i))²)` over a row-major
/// list of design points.
pub fn empirical_l2<T, F, G>(mut f: F, mut g: G, xs: &[T], p: usize) -> Result<T>
where
    T: Real,
    F: FnMut(&[T]) -> T,
    G: FnMut(&[T]) -> T,
{
    if p == 0 || xs.is_empty() || xs.len() % p != 0 {
        return Err(Error::InvalidArgument(format!(
            "need a nonempty row-major design whose length ({}) is a multiple of p = {p}",
            xs.len()
        )));
    }
    let n = xs.len() / p;
    let mut acc = T::zero();
    for i in 0..n {
        let x = &xs[i * p..(i + 1) * p];
        let d = f(x) - g(x);
        acc += d * d;
    }
    Ok((acc / T::of_usize(n)).sqrt())
}
