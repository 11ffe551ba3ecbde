//! Propagation-maximizing articles under the truth-bias tradeoff `|b| + t <= 1`.
//!
//! For a single reader the optimum has a closed form. For a population the
//! objective is a weighted sum of logistics and is maximized numerically: an
//! exhaustive grid over the feasible triangle locates the basin, then a
//! coordinate refinement polishes the point. Refinement works in
//! `(bias, slack)` coordinates, `slack = 1 - |b| - t`, so that the bias search
//! with fixed slack slides along lines parallel to the constraint instead of
//! getting pinned against it.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    check_unit, share_raw, BeliefDistribution, BeliefGroup, ModelParams, ReaderBelief, Side,
};

pub const DEFAULT_GRID_STEP: f64 = 0.005;
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEP_ROWS: usize = 100_000;

/// Relative tolerance under which two objective values count as tied.
const TIE_RTOL: f64 = 1e-12;
const LINE_SEARCH_WIDTH: f64 = 1e-13;
const MAX_REFINE_ROUNDS: usize = 200;

/// Which part of the feasible region's boundary an optimum lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveBoundary {
    /// `|b| + t = 1` with `b != 0`.
    TruthBiasTradeoff,
    /// `b = 0, t = 1`: the corner where the tradeoff line meets `b = 0`.
    Apex,
    ZeroBias,
    ZeroTruth,
    Interior,
    /// `|b| = 1` or `t = 1` away from the tradeoff line.
    BoxEdge,
}

impl ActiveBoundary {
    pub fn as_str(self) -> &'static str {
        match self {
            ActiveBoundary::TruthBiasTradeoff => "truth_bias_tradeoff",
            ActiveBoundary::Apex => "apex",
            ActiveBoundary::ZeroBias => "zero_bias",
            ActiveBoundary::ZeroTruth => "zero_truth",
            ActiveBoundary::Interior => "interior",
            ActiveBoundary::BoxEdge => "box_edge",
        }
    }

    pub fn classify(bias: f64, truth: f64, tol: f64) -> Self {
        let on_tradeoff = (bias.abs() + truth - 1.0).abs() <= tol;
        if on_tradeoff {
            if bias.abs() <= tol {
                ActiveBoundary::Apex
            } else {
                ActiveBoundary::TruthBiasTradeoff
            }
        } else if bias.abs() <= tol {
            ActiveBoundary::ZeroBias
        } else if truth <= tol {
            ActiveBoundary::ZeroTruth
        } else if (bias.abs() - 1.0).abs() <= tol || (truth - 1.0).abs() <= tol {
            ActiveBoundary::BoxEdge
        } else {
            ActiveBoundary::Interior
        }
    }
}

impl std::fmt::Display for ActiveBoundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub bias_star: f64,
    pub truth_star: f64,
    pub probability_star: f64,
    pub active_boundary: ActiveBoundary,
}

/// Closed-form optimum for a single reader.
///
/// The objective increases in `t`, so the optimum lies on `t = 1 - |b|`.
/// Along that line the logistic argument is `1 - |b| - (b - B)^2`, maximized
/// at `b = B - 1/2` for `B >= 1/2`, `b = B + 1/2` for `B <= -1/2`, and at the
/// apex `b = 0` otherwise.
pub fn optimize_single_reader_closed_form(
    belief: ReaderBelief,
    params: &ModelParams,
) -> Result<OptimizationResult> {
    params.validate()?;
    let belief = belief.value();
    let (bias, truth) = if belief >= 0.5 {
        (belief - 0.5, 1.5 - belief)
    } else if belief <= -0.5 {
        (belief + 0.5, 1.5 + belief)
    } else {
        (0.0, 1.0)
    };
    let active_boundary = if bias == 0.0 {
        ActiveBoundary::Apex
    } else {
        ActiveBoundary::TruthBiasTradeoff
    };
    Ok(OptimizationResult {
        bias_star: bias,
        truth_star: truth,
        probability_star: share_raw(params, bias, truth, belief),
        active_boundary,
    })
}

/// Best bias for a single reader when truthfulness is fixed.
///
/// `b = B` if that is feasible, otherwise the feasible endpoint on the
/// reader's side, `sign(B) (1 - t)`.
pub fn optimize_fixed_truth(truth: f64, belief: ReaderBelief) -> Result<f64> {
    check_unit("truth", truth)?;
    let belief = belief.value();
    let reach = 1.0 - truth;
    Ok(if belief.abs() <= reach {
        belief
    } else {
        reach.copysign(belief)
    })
}

fn check_grid_step(grid_step: f64) -> Result<()> {
    if grid_step > 0.0 && grid_step <= 0.1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "grid_step must lie in (0, 0.1], got {grid_step}"
        )))
    }
}

fn check_refine_tol(refine_tol: f64) -> Result<()> {
    if refine_tol > 0.0 && refine_tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "refine_tol must be positive, got {refine_tol}"
        )))
    }
}

/// Number of grid intervals on `[0, 1]` for a requested step.
fn intervals(grid_step: f64) -> i64 {
    ((1.0 / grid_step).round() as i64).max(1)
}

/// `true` when `(p, b, t)` should replace the incumbent `(bp, bb, bt)`.
///
/// Larger probability wins; near-ties prefer smallest `|b|`, then smallest
/// `b`, then largest `t`.
fn better(p: f64, b: f64, t: f64, bp: f64, bb: f64, bt: f64) -> bool {
    let scale = p.abs().max(bp.abs());
    if (p - bp).abs() > TIE_RTOL * scale {
        return p > bp;
    }
    match b.abs().partial_cmp(&bb.abs()).unwrap_or(Ordering::Equal) {
        Ordering::Less => return true,
        Ordering::Greater => return false,
        Ordering::Equal => {}
    }
    if b != bb {
        return b < bb;
    }
    t > bt
}

/// Lattice points `(i/n, j/n)` with `|i| + j <= n`, ordered by `i` then `j`.
fn triangle_points(n: i64) -> Vec<(f64, f64)> {
    let nf = n as f64;
    let mut points = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
    for i in -n..=n {
        for j in 0..=(n - i.abs()) {
            points.push((i as f64 / nf, j as f64 / nf));
        }
    }
    points
}

fn grid_argmax(points: &[(f64, f64)], values: impl Fn(usize) -> f64) -> (f64, f64, f64) {
    let (mut bb, mut bt) = points[0];
    let mut bp = values(0);
    for (idx, &(b, t)) in points.iter().enumerate().skip(1) {
        let p = values(idx);
        if better(p, b, t, bp, bb, bt) {
            bp = p;
            bb = b;
            bt = t;
        }
    }
    (bb, bt, bp)
}

/// Maximize a unimodal-near-the-optimum function on `[lo, hi]` by bisection:
/// compare two probes straddling the midpoint and keep the half holding the
/// larger one. The endpoints are compared at the end so that monotone
/// objectives land exactly on the boundary.
fn bisect_max(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut rounds = 0;
    while b - a > LINE_SEARCH_WIDTH && rounds < 200 {
        let mid = 0.5 * (a + b);
        let eps = 0.125 * (b - a);
        if f(mid - eps) < f(mid + eps) {
            a = mid - eps;
        } else {
            b = mid + eps;
        }
        rounds += 1;
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Objective trace of a population optimization, one entry per refinement round.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTrace {
    pub grid_best: (f64, f64, f64),
    pub probabilities: Vec<f64>,
}

fn refine(
    dist: &BeliefDistribution,
    params: &ModelParams,
    start: (f64, f64, f64),
    step: f64,
    refine_tol: f64,
    trace: &mut Vec<f64>,
) -> (f64, f64, f64) {
    let objective = |b: f64, t: f64| dist.share_raw(params, b, t);
    let (mut b, mut t, mut p) = start;
    trace.push(p);
    for _ in 0..MAX_REFINE_ROUNDS {
        let previous = p;

        // slack coordinate, bias fixed
        let reach = 1.0 - b.abs();
        let slack = (reach - t).max(0.0);
        let lo = (slack - step).max(0.0);
        let hi = (slack + step).min(reach);
        let (s, v) = bisect_max(lo, hi, |s| objective(b, (reach - s).max(0.0)));
        let ts = (reach - s).max(0.0);
        if v >= p && better(v, b, ts, p, b, t) {
            t = ts;
            p = v;
        }

        // bias coordinate, slack fixed
        let slack = (1.0 - b.abs() - t).max(0.0);
        let limit = 1.0 - slack;
        let lo = (b - step).max(-limit);
        let hi = (b + step).min(limit);
        let along = |x: f64| (1.0 - x.abs() - slack).max(0.0);
        let (x, v) = bisect_max(lo, hi, |x| objective(x, along(x)));
        if v >= p && better(v, x, along(x), p, b, t) {
            b = x;
            t = along(x);
            p = v;
        }

        trace.push(p);
        if p - previous < refine_tol {
            break;
        }
    }
    (b, t, p)
}

fn finish(bias: f64, truth: f64, probability: f64, tol: f64) -> OptimizationResult {
    // snap -0.0 and sub-tolerance residue so that output is stable
    let bias = if bias.abs() < 1e-15 { 0.0 } else { bias };
    OptimizationResult {
        bias_star: bias,
        truth_star: truth,
        probability_star: probability,
        active_boundary: ActiveBoundary::classify(bias, truth, tol),
    }
}

/// Global maximum of the population sharing probability over `|b| + t <= 1`.
pub fn optimize_population(
    dist: &BeliefDistribution,
    params: &ModelParams,
    grid_step: f64,
    refine_tol: f64,
) -> Result<OptimizationResult> {
    optimize_population_traced(dist, params, grid_step, refine_tol).map(|(r, _)| r)
}

/// [`optimize_population`] that also returns the refinement trace.
pub fn optimize_population_traced(
    dist: &BeliefDistribution,
    params: &ModelParams,
    grid_step: f64,
    refine_tol: f64,
) -> Result<(OptimizationResult, RefinementTrace)> {
    check_grid_step(grid_step)?;
    check_refine_tol(refine_tol)?;
    params.validate()?;
    let n = intervals(grid_step);
    let points = triangle_points(n);
    let start = grid_argmax(&points, |i| {
        dist.share_raw(params, points[i].0, points[i].1)
    });
    let mut probabilities = Vec::new();
    let (b, t, p) = refine(
        dist,
        params,
        start,
        1.0 / n as f64,
        refine_tol,
        &mut probabilities,
    );
    Ok((
        finish(b, t, p, 1e-9),
        RefinementTrace {
            grid_best: start,
            probabilities,
        },
    ))
}

/// Range of article bias searched when truthfulness is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasRange {
    /// `[-(1 - t), 1 - t]`
    Full,
    /// Only articles leaning to one side, e.g. `[0, 1 - t]` for right.
    Side(Side),
}

impl BiasRange {
    fn bounds(self, reach: f64) -> (f64, f64) {
        match self {
            BiasRange::Full => (-reach, reach),
            BiasRange::Side(Side::Left) => (-reach, 0.0),
            BiasRange::Side(Side::Right) => (0.0, reach),
        }
    }
}

/// Best bias for a population at fixed truthfulness, over the full bias range.
/// Returns `(bias_star, probability_star)`.
pub fn optimize_population_fixed_truth(
    dist: &BeliefDistribution,
    truth: f64,
    params: &ModelParams,
    grid_step: f64,
) -> Result<(f64, f64)> {
    optimize_population_fixed_truth_in(dist, truth, params, grid_step, BiasRange::Full)
}

/// [`optimize_population_fixed_truth`] restricted to a bias range.
pub fn optimize_population_fixed_truth_in(
    dist: &BeliefDistribution,
    truth: f64,
    params: &ModelParams,
    grid_step: f64,
    range: BiasRange,
) -> Result<(f64, f64)> {
    check_unit("truth", truth)?;
    check_grid_step(grid_step)?;
    params.validate()?;
    let (lo, hi) = range.bounds(1.0 - truth);
    let objective = |b: f64| dist.share_raw(params, b, truth);

    let step = 1.0 / intervals(grid_step) as f64;
    // lattice multiples of the step inside [lo, hi], plus both endpoints
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let mut candidates = vec![lo];
    candidates.extend((first..=last).map(|i| i as f64 * step));
    candidates.push(hi);

    let mut best_b = candidates[0];
    let mut best_p = objective(best_b);
    for &b in &candidates[1..] {
        let p = objective(b);
        if better(p, b, truth, best_p, best_b, truth) {
            best_b = b;
            best_p = p;
        }
    }
    let (x, v) = bisect_max((best_b - step).max(lo), (best_b + step).min(hi), objective);
    if v > best_p * (1.0 + TIE_RTOL) {
        best_b = x;
        best_p = v;
    }
    let best_b = if best_b.abs() < 1e-15 { 0.0 } else { best_b };
    Ok((best_b, best_p))
}

/// One row of the moment-space sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub weights: [f64; 7],
    pub expectation: f64,
    pub variance: f64,
    pub bias_star: f64,
    pub truth_star: f64,
    pub probability_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub weight_step: f64,
    pub grid_step: f64,
    pub refine_tol: f64,
    pub max_rows: usize,
    /// When set, optimize bias only, at this truthfulness.
    pub fixed_truth: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            weight_step: 0.1,
            grid_step: DEFAULT_GRID_STEP,
            refine_tol: DEFAULT_REFINE_TOL,
            max_rows: DEFAULT_MAX_SWEEP_ROWS,
            fixed_truth: None,
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1u64, |acc, i| acc.saturating_mul(n + 1 - i) / i)
}

/// All `parts`-tuples of non-negative integers summing to `total`, in
/// lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for head in 0..=remaining {
            prefix.push(head);
            rec(remaining - head, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// Optimize every seven-group distribution whose weights are multiples of
/// `weight_step`. Rows come back sorted by weight vector.
pub fn sweep_moment_space(params: &ModelParams, options: &SweepOptions) -> Result<Vec<SweepRow>> {
    params.validate()?;
    check_grid_step(options.grid_step)?;
    check_refine_tol(options.refine_tol)?;
    if let Some(t) = options.fixed_truth {
        check_unit("fixed_truth", t)?;
    }
    let m = (1.0 / options.weight_step).round();
    if !(options.weight_step > 0.0) || m < 1.0 || (m * options.weight_step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "weight_step must divide 1 evenly, got {}",
            options.weight_step
        )));
    }
    let m = m as u32;
    let rows = binomial(m as u64 + 6, 6);
    if rows > options.max_rows as u64 {
        return Err(Error::InvalidArgument(format!(
            "weight_step {} yields {rows} distributions, above the cap of {}",
            options.weight_step, options.max_rows
        )));
    }

    let weights: Vec<[f64; 7]> = compositions(m, 7)
        .into_iter()
        .map(|c| {
            let mut w = [0.0; 7];
            for (slot, count) in w.iter_mut().zip(c) {
                *slot = count as f64 / m as f64;
            }
            w
        })
        .collect();

    // Per-center values on the grid are shared by every distribution.
    let n = intervals(options.grid_step);
    let step = 1.0 / n as f64;
    let points: Vec<(f64, f64)> = match options.fixed_truth {
        None => triangle_points(n),
        Some(t) => {
            let reach = 1.0 - t;
            let k = (reach / step).floor() as i64;
            let mut pts = vec![(-reach, t)];
            pts.extend((-k..=k).map(|i| (i as f64 * step, t)));
            pts.push((reach, t));
            pts
        }
    };
    let table: Vec<[f64; 7]> = points
        .iter()
        .map(|&(b, t)| {
            let mut row = [0.0; 7];
            for (slot, &c) in row.iter_mut().zip(BeliefGroup::CENTERS.iter()) {
                *slot = share_raw(params, b, t, c);
            }
            row
        })
        .collect();

    let mut out: Vec<SweepRow> = weights
        .par_iter()
        .map(|w| {
            let dist = BeliefDistribution::over_groups(*w).expect("composition weights sum to 1");
            let (expectation, variance) = dist.moments();
            let start = grid_argmax(&points, |i| {
                table[i].iter().zip(w.iter()).map(|(v, wt)| v * wt).sum()
            });
            let (b, t, p) = match options.fixed_truth {
                None => {
                    let mut trace = Vec::new();
                    refine(&dist, params, start, step, options.refine_tol, &mut trace)
                }
                Some(t) => {
                    let reach = 1.0 - t;
                    let (x, v) = bisect_max(
                        (start.0 - step).max(-reach),
                        (start.0 + step).min(reach),
                        |b| dist.share_raw(params, b, t),
                    );
                    if v > start.2 * (1.0 + TIE_RTOL) {
                        (x, t, v)
                    } else {
                        start
                    }
                }
            };
            SweepRow {
                weights: *w,
                expectation,
                variance,
                bias_star: if b.abs() < 1e-15 { 0.0 } else { b },
                truth_star: t,
                probability_star: p,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.weights
            .iter()
            .zip(b.weights.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    Ok(out)
}
