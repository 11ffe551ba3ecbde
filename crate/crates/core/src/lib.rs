//! Logistic model of political-news sharing.
//!
//! A reader with political belief `B` shares an article with bias `b` and
//! truthfulness `t` with probability
//!
//! ```text
//! p(b, t, B) = f / (1 + exp(-k (t - (b - B)^2)))
//! ```
//!
//! where `(f, k)` is `(f_left, k_left)` for `B < 0` and `(f_right, k_right)`
//! otherwise. On top of that model the crate provides:
//!
//! - [`model`]: single-reader and population evaluation, belief distributions.
//! - [`optimizer`]: propagation-maximizing `(b, t)` under `|b| + t <= 1`,
//!   closed form for a single reader and grid + refinement for populations.
//! - [`fitting`]: damped Gauss-Newton least squares for the model parameters,
//!   the extreme-user extension, and OLS slope tests of the model assumptions.
//! - [`data`]: truthfulness color codes, belief groups and CSV ingestion.
//! - [`analysis`]: figure-backing tables, sensitivity grid, partisan comparison.
//! - [`cli`]: the `newsprop` command-line surface.

pub mod analysis;
pub mod cli;
pub mod data;
mod error;
pub mod fitting;
pub mod model;
pub mod optimizer;
pub mod synth;

pub use error::{Error, Result};
pub use model::{
    Article, BeliefDistribution, BeliefGroup, BuiltinDistribution, ModelParams, ReaderBelief, Side,
};
pub use optimizer::{ActiveBoundary, OptimizationResult};
