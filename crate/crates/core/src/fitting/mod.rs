//! Parameter estimation from observed sharing rates.
//!
//! Rates are fitted by nonlinear least squares, `min sum_i (rate_i - p_i)^2`,
//! with standard errors from `s^2 (J^T J)^-1` at the optimum and two-sided t
//! tests on `n - p` degrees of freedom.

mod regression;
mod solver;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{alignment_margin, check_bias, check_unit, logistic, ModelParams, Side};

pub use regression::{slope_test, two_sided_p_value, SlopeTest};
pub use solver::SolverOptions;
use solver::{solve, LeastSquaresProblem, Solution};

const F_FLOOR: f64 = 1e-12;
const K_FLOOR: f64 = 1e-12;
const K_CEIL: f64 = 100.0;
/// Starting steepness: middle of the sensitivity interval used in the analysis.
const K_START: f64 = 5.0;

/// One `(article, belief group)` cell of tabulated sharing data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub bias: f64,
    pub truth: f64,
    pub belief: f64,
    pub exposures: u64,
    pub shares: u64,
    /// Reader class has extreme activity (supersharers, superconsumers).
    #[serde(default)]
    pub extreme: bool,
}

impl Observation {
    pub fn validate(&self) -> Result<()> {
        check_bias("bias", self.bias)?;
        check_unit("truth", self.truth)?;
        check_bias("belief", self.belief)?;
        if self.shares > self.exposures {
            return Err(Error::InvalidArgument(format!(
                "shares ({}) exceed exposures ({})",
                self.shares, self.exposures
            )));
        }
        Ok(())
    }

    /// `shares / exposures`, `None` when there were no exposures.
    pub fn rate(&self) -> Option<f64> {
        (self.exposures > 0).then(|| self.shares as f64 / self.exposures as f64)
    }

    pub fn side(&self) -> Side {
        Side::of_belief(self.belief)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Every observation counts equally.
    #[default]
    Unweighted,
    /// Squared residuals weighted by exposure count (normalized to mean 1).
    Exposures,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub weighting: Weighting,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub side: Side,
    pub parameters: Vec<ParameterEstimate>,
    pub residual_standard_error: f64,
    pub degrees_of_freedom: usize,
    pub n_observations: usize,
    pub loss: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

impl FitReport {
    pub fn parameter(&self, name: &str) -> Option<&ParameterEstimate> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.parameter(name).map(|p| p.estimate)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.parameter(name).map(|p| p.std_error)
    }

    /// `(f, k)` of the fitted side.
    pub fn scale_and_rate(&self) -> (f64, f64) {
        (
            self.estimate("f").unwrap_or(f64::NAN),
            self.estimate("k").unwrap_or(f64::NAN),
        )
    }

    /// `base` with the fitted side replaced by the estimates.
    pub fn apply_to(&self, base: ModelParams) -> ModelParams {
        let (f, k) = self.scale_and_rate();
        base.with_side(self.side, f, k)
    }
}

/// Derivatives `(dp/df, dp/dk)` of `p = f * logistic(k * g)`.
pub fn logistic_gradient(bias: f64, truth: f64, belief: f64, f: f64, k: f64) -> [f64; 2] {
    let g = alignment_margin(bias, truth, belief);
    let s = logistic(k * g);
    [s, f * s * (1.0 - s) * g]
}

/// Derivatives `(dp/df, dp/dk, dp/df_e, dp/dk_e)` of the extreme-user model
/// `p = (f + f_e I) * logistic((k + k_e I) g)`.
pub fn extreme_gradient(
    bias: f64,
    truth: f64,
    belief: f64,
    extreme: bool,
    x: [f64; 4],
) -> [f64; 4] {
    let indicator = if extreme { 1.0 } else { 0.0 };
    let scale = x[0] + x[2] * indicator;
    let rate = x[1] + x[3] * indicator;
    let g = alignment_margin(bias, truth, belief);
    let s = logistic(rate * g);
    let dk = scale * s * (1.0 - s) * g;
    [s, dk, indicator * s, indicator * dk]
}

/// Extreme-user model probability.
pub fn extreme_probability(bias: f64, truth: f64, belief: f64, extreme: bool, x: [f64; 4]) -> f64 {
    let indicator = if extreme { 1.0 } else { 0.0 };
    (x[0] + x[2] * indicator)
        * logistic((x[1] + x[3] * indicator) * alignment_margin(bias, truth, belief))
}

#[derive(Debug, Clone, Copy)]
struct Point {
    bias: f64,
    truth: f64,
    belief: f64,
    rate: f64,
    sqrt_weight: f64,
    extreme: bool,
}

fn collect_points(
    observations: &[Observation],
    side: Side,
    weighting: Weighting,
) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    for obs in observations {
        obs.validate()?;
        if obs.side() != side {
            continue;
        }
        let Some(rate) = obs.rate() else { continue };
        points.push(Point {
            bias: obs.bias,
            truth: obs.truth,
            belief: obs.belief,
            rate,
            sqrt_weight: obs.exposures as f64,
            extreme: obs.extreme,
        });
    }
    match weighting {
        Weighting::Unweighted => points.iter_mut().for_each(|p| p.sqrt_weight = 1.0),
        Weighting::Exposures => {
            let mean =
                points.iter().map(|p| p.sqrt_weight).sum::<f64>() / points.len().max(1) as f64;
            points
                .iter_mut()
                .for_each(|p| p.sqrt_weight = (p.sqrt_weight / mean).sqrt());
        }
    }
    Ok(points)
}

struct LogisticProblem<'a> {
    points: &'a [Point],
}

impl LeastSquaresProblem for LogisticProblem<'_> {
    fn n_params(&self) -> usize {
        2
    }
    fn n_residuals(&self) -> usize {
        self.points.len()
    }
    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        for (slot, p) in out.iter_mut().zip(self.points) {
            let model = x[0] * logistic(x[1] * alignment_margin(p.bias, p.truth, p.belief));
            *slot = p.sqrt_weight * (p.rate - model);
        }
    }
    fn jacobian(&self, x: &[f64], out: &mut DMatrix<f64>) {
        for (i, p) in self.points.iter().enumerate() {
            let g = logistic_gradient(p.bias, p.truth, p.belief, x[0], x[1]);
            out[(i, 0)] = -p.sqrt_weight * g[0];
            out[(i, 1)] = -p.sqrt_weight * g[1];
        }
    }
    fn project(&self, x: &mut [f64]) {
        x[0] = x[0].clamp(F_FLOOR, 1.0);
        x[1] = x[1].clamp(K_FLOOR, K_CEIL);
    }
}

struct ExtremeProblem<'a> {
    points: &'a [Point],
}

impl LeastSquaresProblem for ExtremeProblem<'_> {
    fn n_params(&self) -> usize {
        4
    }
    fn n_residuals(&self) -> usize {
        self.points.len()
    }
    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let x = [x[0], x[1], x[2], x[3]];
        for (slot, p) in out.iter_mut().zip(self.points) {
            let model = extreme_probability(p.bias, p.truth, p.belief, p.extreme, x);
            *slot = p.sqrt_weight * (p.rate - model);
        }
    }
    fn jacobian(&self, x: &[f64], out: &mut DMatrix<f64>) {
        let x = [x[0], x[1], x[2], x[3]];
        for (i, p) in self.points.iter().enumerate() {
            let g = extreme_gradient(p.bias, p.truth, p.belief, p.extreme, x);
            for (j, d) in g.iter().enumerate() {
                out[(i, j)] = -p.sqrt_weight * d;
            }
        }
    }
    fn project(&self, x: &mut [f64]) {
        x[0] = x[0].clamp(F_FLOOR, 1.0);
        x[1] = x[1].clamp(K_FLOOR, K_CEIL);
        // the extreme class must also stay a valid logistic
        x[2] = x[2].clamp(F_FLOOR - x[0], 1.0 - x[0]);
        x[3] = x[3].clamp(K_FLOOR - x[1], K_CEIL - x[1]);
    }
}

fn report(side: Side, names: &[&str], solution: Solution) -> Result<FitReport> {
    let n = solution.residuals.len();
    let p = names.len();
    let df = n - p;
    let s2 = solution.loss / df as f64;
    let jtj = solution.jacobian.transpose() * &solution.jacobian;
    let scale = jtj.diagonal().map(|d| d.sqrt());
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::RankDeficient(
            "a parameter has no influence on the residuals".into(),
        ));
    }
    // invert the correlation form for better conditioning
    let normalized = DMatrix::from_fn(p, p, |i, j| jtj[(i, j)] / (scale[i] * scale[j]));
    let inverse = normalized
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .filter(|_| {
            let eig = normalized.clone().symmetric_eigen().eigenvalues;
            eig.min() > 1e-12 * eig.max()
        })
        .ok_or_else(|| Error::RankDeficient("J^T J is singular at the optimum".into()))?;

    let parameters = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let estimate = solution.x[i];
            let var = s2 * inverse[(i, i)] / (scale[i] * scale[i]);
            let std_error = var.max(0.0).sqrt();
            let t_value = if std_error > 0.0 {
                estimate / std_error
            } else if estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(estimate)
            };
            ParameterEstimate {
                name: (*name).to_string(),
                estimate,
                std_error,
                t_value,
                p_value: two_sided_p_value(t_value, df as f64),
            }
        })
        .collect();

    Ok(FitReport {
        side,
        parameters,
        residual_standard_error: s2.sqrt(),
        degrees_of_freedom: df,
        n_observations: n,
        loss: solution.loss,
        gradient_norm: solution.gradient_norm,
        iterations: solution.iterations,
        converged: solution.converged,
        loss_history: solution.loss_history,
    })
}

/// Fit `(f, k)` for one side of the spectrum.
///
/// Uses the observations with exposures on that side (`B < 0` left,
/// `B >= 0` right). Starts from `f = max rate`, `k = 5`.
pub fn fit_parameters(
    observations: &[Observation],
    side: Side,
    options: &FitOptions,
) -> Result<FitReport> {
    let points = collect_points(observations, side, options.weighting)?;
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable {side} observations, need at least 4",
            points.len()
        )));
    }
    let f0 = points.iter().map(|p| p.rate).fold(0.0, f64::max).max(1e-6);
    let solution = solve(
        &LogisticProblem { points: &points },
        &[f0, K_START],
        &options.solver,
    );
    report(side, &["f", "k"], solution)
}

/// Fit `(f, k, f_e, k_e)` of the extreme-user model for one side.
pub fn fit_extreme_user_model(
    observations: &[Observation],
    side: Side,
    options: &FitOptions,
) -> Result<FitReport> {
    let points = collect_points(observations, side, options.weighting)?;
    let n_extreme = points.iter().filter(|p| p.extreme).count();
    let n_typical = points.len() - n_extreme;
    if n_extreme == 0 || n_typical == 0 {
        return Err(Error::DegenerateDesign(format!(
            "need both extreme and typical {side} readers, got {n_extreme} extreme and {n_typical} typical; f_e and k_e are unidentifiable"
        )));
    }
    if points.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "{} usable {side} observations, need at least 6",
            points.len()
        )));
    }
    let max_rate = |extreme: bool| {
        points
            .iter()
            .filter(|p| p.extreme == extreme)
            .map(|p| p.rate)
            .fold(0.0, f64::max)
    };
    let f0 = max_rate(false).max(1e-6);
    let fe0 = max_rate(true).max(1e-6) - f0;
    let solution = solve(
        &ExtremeProblem { points: &points },
        &[f0, K_START, fe0, 0.0],
        &options.solver,
    );
    report(side, &["f", "k", "f_e", "k_e"], solution)
}

/// Slope tests backing the two model assumptions, per reader side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Rate against `|b - B|`; negative supports "aligned content spreads more".
    pub slope_misalignment_left: SlopeTest,
    pub slope_misalignment_right: SlopeTest,
    /// Rate against `t`; positive supports "truthful content spreads more".
    pub slope_truth_left: SlopeTest,
    pub slope_truth_right: SlopeTest,
}

pub fn validate_assumptions(observations: &[Observation]) -> Result<AssumptionReport> {
    let mut columns = [
        (Vec::new(), Vec::new(), Vec::new()),
        (Vec::new(), Vec::new(), Vec::new()),
    ];
    for obs in observations {
        obs.validate()?;
        let Some(rate) = obs.rate() else { continue };
        let (misalignment, truth, rates) = &mut columns[obs.side() as usize];
        misalignment.push((obs.bias - obs.belief).abs());
        truth.push(obs.truth);
        rates.push(rate);
    }
    for (side, (_, _, rates)) in [Side::Left, Side::Right].iter().zip(&columns) {
        if rates.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "{} usable {side} observations, need at least 3",
                rates.len()
            )));
        }
    }
    let [(mis_l, truth_l, rate_l), (mis_r, truth_r, rate_r)] = &columns;
    Ok(AssumptionReport {
        slope_misalignment_left: slope_test(mis_l, rate_l)?,
        slope_misalignment_right: slope_test(mis_r, rate_r)?,
        slope_truth_left: slope_test(truth_l, rate_l)?,
        slope_truth_right: slope_test(truth_r, rate_r)?,
    })
}
