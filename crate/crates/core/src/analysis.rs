//! Figure-level analyses built on the model and optimizer: level curves,
//! population curves, the low/high parameter sensitivity grid, the
//! partisan/unimodal comparison and moment-sweep summaries.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    check_bias, check_unit, share_raw, BeliefDistribution, BuiltinDistribution, ModelParams, Side,
};
use crate::optimizer::{optimize_population_fixed_truth_in, BiasRange, SweepRow};

/// Points per axis in level sweeps and population curves.
pub const DEFAULT_POINTS: usize = 201;
/// Truthfulness at which "untruthful content" argmaxes are taken.
pub const LOW_TRUTH: f64 = 0.1;
/// Change in low-truth argmax bias that counts as a shifted conclusion.
pub const SHIFT_THRESHOLD: f64 = 0.15;

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let d = (n - 1) as f64;
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / d
        }
    })
}

fn check_points(points: usize) -> Result<()> {
    if points < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 grid points, got {points}"
        )));
    }
    Ok(())
}

/// The variable held constant in a level sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelAxis {
    Bias,
    Truth,
    Belief,
}

impl LevelAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            LevelAxis::Bias => "b",
            LevelAxis::Truth => "t",
            LevelAxis::Belief => "belief",
        }
    }

    fn range(self) -> (f64, f64) {
        match self {
            LevelAxis::Truth => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }
}

impl fmt::Display for LevelAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for LevelAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "b" | "bias" => Ok(LevelAxis::Bias),
            "t" | "truth" => Ok(LevelAxis::Truth),
            "belief" | "big_b" | "reader" => Ok(LevelAxis::Belief),
            _ => Err(Error::InvalidArgument(format!(
                "unknown axis `{s}` (expected b, t or belief)"
            ))),
        }
    }
}

/// `p` over the two free variables with one variable fixed, on the full box
/// `b, B in [-1, 1]`, `t in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSweep {
    pub fixed: LevelAxis,
    pub value: f64,
    /// Rows `[b, t, belief, p]`, the first free axis varying slowest.
    pub rows: Vec<[f64; 4]>,
}

pub fn sweep_levels(
    params: &ModelParams,
    fixed: LevelAxis,
    value: f64,
    points: usize,
) -> Result<LevelSweep> {
    params.validate()?;
    check_points(points)?;
    match fixed {
        LevelAxis::Truth => check_unit("t", value)?,
        LevelAxis::Bias => check_bias("b", value)?,
        LevelAxis::Belief => check_bias("belief", value)?,
    }
    let free: Vec<LevelAxis> = [LevelAxis::Bias, LevelAxis::Truth, LevelAxis::Belief]
        .into_iter()
        .filter(|a| *a != fixed)
        .collect();
    let (lo0, hi0) = free[0].range();
    let (lo1, hi1) = free[1].range();
    let mut rows = Vec::with_capacity(points * points);
    for u in linspace(lo0, hi0, points) {
        for v in linspace(lo1, hi1, points) {
            let mut bt = [0.0; 3];
            let slot = |a: LevelAxis| match a {
                LevelAxis::Bias => 0,
                LevelAxis::Truth => 1,
                LevelAxis::Belief => 2,
            };
            bt[slot(fixed)] = value;
            bt[slot(free[0])] = u;
            bt[slot(free[1])] = v;
            let p = share_raw(params, bt[0], bt[1], bt[2]);
            rows.push([bt[0], bt[1], bt[2], p]);
        }
    }
    Ok(LevelSweep { fixed, value, rows })
}

/// Population sharing probability over the feasible half-triangle of one
/// side: `b` in `[0, 1]` (right) or `[-1, 0]` (left), `t` in `[0, 1]`,
/// `|b| + t <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationCurves {
    pub side: Side,
    /// Rows `[b, t, p]` ordered by `|b|` then `t`.
    pub rows: Vec<[f64; 3]>,
}

impl PopulationCurves {
    /// The same rows ordered by `t` then `|b|`.
    pub fn transposed(&self) -> Vec<[f64; 3]> {
        let mut rows = self.rows.clone();
        rows.sort_by(|x, y| {
            x[1].total_cmp(&y[1])
                .then(x[0].abs().total_cmp(&y[0].abs()))
        });
        rows
    }

    /// Rows at truthfulness `t` (exact lattice match), ordered by `|b|`.
    pub fn slice_at_truth(&self, t: f64) -> Vec<[f64; 3]> {
        self.rows
            .iter()
            .filter(|r| (r[1] - t).abs() < 1e-12)
            .copied()
            .collect()
    }
}

pub fn population_curves(
    dist: &BeliefDistribution,
    params: &ModelParams,
    side: Side,
    points: usize,
) -> Result<PopulationCurves> {
    params.validate()?;
    check_points(points)?;
    let n = (points - 1) as i64;
    let sign = match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    };
    let mut rows = Vec::new();
    for i in 0..=n {
        let b = sign * i as f64 / n as f64;
        let b = if b == 0.0 { 0.0 } else { b };
        for j in 0..=(n - i) {
            let t = j as f64 / n as f64;
            rows.push([b, t, dist.share_raw(params, b, t)]);
        }
    }
    Ok(PopulationCurves { side, rows })
}

/// Bias maximizing population sharing at low truthfulness, restricted to
/// articles leaning to `side`. Returns `(bias_star, probability_star)`.
pub fn low_truth_argmax(
    dist: &BeliefDistribution,
    params: &ModelParams,
    side: Side,
    truth: f64,
    grid_step: f64,
) -> Result<(f64, f64)> {
    optimize_population_fixed_truth_in(dist, truth, params, grid_step, BiasRange::Side(side))
}

/// Low/high bounds for each parameter of the sensitivity grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRange {
    pub low: ModelParams,
    pub high: ModelParams,
}

impl SensitivityRange {
    pub const TABLE: SensitivityRange = SensitivityRange {
        low: ModelParams {
            f_left: 0.005,
            k_left: 2.232,
            f_right: 0.004,
            k_right: 2.791,
        },
        high: ModelParams {
            f_left: 0.014,
            k_left: 6.697,
            f_right: 0.011,
            k_right: 8.372,
        },
    };

    pub fn validate(&self) -> Result<()> {
        self.low.validate()?;
        self.high.validate()?;
        let pairs = [
            ("f_l", self.low.f_left, self.high.f_left),
            ("k_l", self.low.k_left, self.high.k_left),
            ("f_r", self.low.f_right, self.high.f_right),
            ("k_r", self.low.k_right, self.high.k_right),
        ];
        for (name, lo, hi) in pairs {
            if !(lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "{name}: low {lo} must be below high {hi}"
                )));
            }
        }
        Ok(())
    }

    /// Parameters of combination `index` in `0..16`. Bits from most to
    /// least significant select `f_l, k_l, f_r, k_r`; a set bit means high.
    pub fn combination(&self, index: u8) -> Combination {
        let pick = |bit: u8, lo: f64, hi: f64| if index >> bit & 1 == 1 { hi } else { lo };
        Combination {
            index,
            params: ModelParams {
                f_left: pick(3, self.low.f_left, self.high.f_left),
                k_left: pick(2, self.low.k_left, self.high.k_left),
                f_right: pick(1, self.low.f_right, self.high.f_right),
                k_right: pick(0, self.low.k_right, self.high.k_right),
            },
        }
    }

    pub fn combinations(&self) -> Vec<Combination> {
        (0..16).map(|i| self.combination(i)).collect()
    }
}

impl Default for SensitivityRange {
    fn default() -> Self {
        SensitivityRange::TABLE
    }
}

/// One low/high setting of the four parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub index: u8,
    pub params: ModelParams,
}

impl Combination {
    /// Level string such as `HLLL`, in `f_l, k_l, f_r, k_r` order.
    pub fn label(&self) -> String {
        (0..4)
            .rev()
            .map(|bit| if self.index >> bit & 1 == 1 { 'H' } else { 'L' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub combination: u8,
    pub label: String,
    pub distribution: BuiltinDistribution,
    pub bias_star: f64,
    pub probability_star: f64,
    pub base_bias_star: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub truth: f64,
    pub threshold: f64,
    pub base: ModelParams,
    pub rows: Vec<SensitivityRow>,
    /// Combinations whose argmax moved by more than `threshold` for at least
    /// one distribution.
    pub flagged: Vec<u8>,
}

impl SensitivityReport {
    pub fn is_flagged(&self, index: u8) -> bool {
        self.flagged.contains(&index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityOptions {
    pub side: Side,
    pub truth: f64,
    pub threshold: f64,
    pub grid_step: f64,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        SensitivityOptions {
            side: Side::Right,
            truth: LOW_TRUTH,
            threshold: SHIFT_THRESHOLD,
            grid_step: crate::optimizer::DEFAULT_GRID_STEP,
        }
    }
}

/// Low-truth argmax for every combination and distribution, compared
/// against the argmax under `base`.
pub fn sensitivity(
    range: &SensitivityRange,
    base: &ModelParams,
    distributions: &[BuiltinDistribution],
    options: &SensitivityOptions,
) -> Result<SensitivityReport> {
    range.validate()?;
    base.validate()?;
    check_unit("truth", options.truth)?;
    if distributions.is_empty() {
        return Err(Error::InvalidArgument("no distributions given".into()));
    }
    let argmax = |d: BuiltinDistribution, p: &ModelParams| {
        low_truth_argmax(
            &d.distribution(),
            p,
            options.side,
            options.truth,
            options.grid_step,
        )
    };
    let base_star = distributions
        .iter()
        .map(|&d| argmax(d, base).map(|(b, _)| b))
        .collect::<Result<Vec<f64>>>()?;

    let jobs: Vec<(Combination, usize)> = range
        .combinations()
        .into_iter()
        .flat_map(|c| (0..distributions.len()).map(move |i| (c, i)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(c, i)| {
            let d = distributions[i];
            let (b, p) = argmax(d, &c.params)?;
            Ok(SensitivityRow {
                combination: c.index,
                label: c.label(),
                distribution: d,
                bias_star: b,
                probability_star: p,
                base_bias_star: base_star[i],
                shift: (b - base_star[i]).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut flagged: Vec<u8> = rows
        .iter()
        .filter(|r| r.shift > options.threshold)
        .map(|r| r.combination)
        .collect();
    flagged.dedup();
    Ok(SensitivityReport {
        truth: options.truth,
        threshold: options.threshold,
        base: *base,
        rows,
        flagged,
    })
}

/// Sharing in a unimodal population at `B` against a partisan population
/// with mass `q` at `B` and `1 - q` at `-B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartisanRow {
    pub truth: f64,
    pub p_unimodal: f64,
    pub p_partisan: f64,
    pub absolute_gap: f64,
    /// `(p_U - p_P) / p_U`
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartisanReport {
    pub bias: f64,
    pub belief: f64,
    pub q: f64,
    /// False when `b` and `B` have opposite signs; rows are still computed.
    pub same_sign: bool,
    pub rows: Vec<PartisanRow>,
}

pub fn partisan_row(
    params: &ModelParams,
    bias: f64,
    truth: f64,
    belief: f64,
    q: f64,
) -> PartisanRow {
    let p_u = share_raw(params, bias, truth, belief);
    let p_m = share_raw(params, bias, truth, -belief);
    let absolute_gap = (1.0 - q) * (p_u - p_m);
    PartisanRow {
        truth,
        p_unimodal: p_u,
        p_partisan: p_u - absolute_gap,
        absolute_gap,
        relative_gap: absolute_gap / p_u,
    }
}

/// Rows over `truths`. Requires `f_l = f_r` and `k_l = k_r`.
pub fn partisan_report(
    params: &ModelParams,
    bias: f64,
    belief: f64,
    q: f64,
    truths: &[f64],
) -> Result<PartisanReport> {
    params.validate()?;
    if !params.is_symmetric() {
        return Err(Error::InvalidArgument(
            "partisan report needs symmetric parameters (f_l = f_r, k_l = k_r)".into(),
        ));
    }
    check_bias("b", bias)?;
    check_bias("belief", belief)?;
    check_unit("q", q)?;
    for &t in truths {
        check_unit("t", t)?;
    }
    Ok(PartisanReport {
        bias,
        belief,
        q,
        same_sign: bias * belief >= 0.0,
        rows: truths
            .iter()
            .map(|&t| partisan_row(params, bias, t, belief, q))
            .collect(),
    })
}

/// `n` evenly spaced truthfulness values on `[0, 1]`.
pub fn truth_grid(n: usize) -> Result<Vec<f64>> {
    check_points(n)?;
    Ok(linspace(0.0, 1.0, n).collect())
}

/// Average ranks (1-based), ties sharing the mean rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `None` when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Expectation bucket index `floor(E / width)`, with the quotient rounded
/// to 9 decimals so that values on a bucket edge open the upper bucket.
pub fn expectation_bucket(expectation: f64, width: f64) -> i64 {
    let q = expectation / width;
    ((q * 1e9).round() / 1e9).floor() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketCorrelation {
    pub bucket: i64,
    pub lower: f64,
    pub rows: usize,
    /// Spearman correlation of variance against probability_star.
    pub rho: Option<f64>,
}

/// Variance/probability rank correlation within each expectation bucket of
/// a moment sweep, in bucket order.
pub fn variance_effect(rows: &[SweepRow], width: f64) -> Vec<BucketCorrelation> {
    let mut buckets: std::collections::BTreeMap<i64, (Vec<f64>, Vec<f64>)> = Default::default();
    for r in rows {
        let entry = buckets
            .entry(expectation_bucket(r.expectation, width))
            .or_default();
        entry.0.push(r.variance);
        entry.1.push(r.probability_star);
    }
    buckets
        .into_iter()
        .map(|(bucket, (v, p))| BucketCorrelation {
            bucket,
            lower: bucket as f64 * width,
            rows: v.len(),
            rho: spearman(&v, &p),
        })
        .collect()
}
