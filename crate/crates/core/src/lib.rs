//! Sparse deep ReLU regression with spike-and-slab priors.
//!
//! The crate implements one statistical machine end to end:
//!
//! * [`network`] — the bounded-parameter sparse ReLU model class, with flat
//!   parameter indexing, compiled sparse evaluation, and dense round-trips;
//! * [`prior`] — the hierarchical spike-and-slab prior over coefficients,
//!   connectivity patterns, sparsity level, and network width, all in log space;
//! * [`theory`] — the closed-form quantities behind the posterior-concentration
//!   analysis (depth/width/sparsity recipes, rate, sieve sizes, entropy and tail
//!   bounds) as executable calculators;
//! * [`regression`] — fixed-design Gaussian regression data, likelihood, and the
//!   empirical L2 distance;
//! * [`mcmc`] — the trans-dimensional Metropolis–Hastings sampler over
//!   (coefficients, pattern, sparsity, width);
//! * [`sgd`] — a dense mini-batch SGD trainer for the penalized least-squares view
//!   of the same model;
//! * [`gadgets`] — exact ReLU constructions (sawtooth, squaring, product,
//!   piecewise-linear interpolants) with certified error bounds, plus the quartic
//!   identity audit and the two fixed comparison architectures;
//! * [`quadrature`] — Gauss–Legendre rules used by the brute-force posterior
//!   oracle;
//! * [`harness`] — benchmark targets, dataset synthesis, the tiny-instance
//!   posterior oracle, and the experiment drivers (rate study, overfit check,
//!   deep-vs-shallow comparison).
//!
//! The numerical core is generic over the scalar type through [`scalar::Real`]
//! (implemented for `f32` and `f64`); the aliases below fix the `f64`
//! instantiations that the executables and experiment drivers use.

pub mod error;
pub mod gadgets;
pub mod harness;
pub mod mcmc;
pub mod network;
pub mod prior;
pub mod quadrature;
pub mod regression;
pub mod scalar;
pub mod seeds;
pub mod sgd;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` network, the instantiation used by the samplers and experiment drivers.
pub type Net = network::SparseNetwork<f64>;
/// `f64` dense parameter view.
pub type Dense = network::DenseParams<f64>;
/// `f64` compiled evaluator.
pub type NetEvaluator = network::Evaluator<f64>;
/// `f64` prior hyper-parameters.
pub type Hyper = prior::PriorHyperParams<f64>;
