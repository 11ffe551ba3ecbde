//! Sharing-probability model for individual readers and reader populations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `sum(weights) == 1`.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Scaling parameters of the logistic sharing model.
///
/// `f_*` is the ceiling of the sharing probability and `k_*` the steepness of
/// the logistic in `t - (b - B)^2`, for left-political (`B < 0`) and
/// right-political (`B >= 0`) readers respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub f_left: f64,
    pub k_left: f64,
    pub f_right: f64,
    pub k_right: f64,
}

impl ModelParams {
    /// Least-squares estimates used as the base scenario of the population analysis.
    pub const BASE: ModelParams = ModelParams {
        f_left: 0.010,
        k_left: 4.465,
        f_right: 0.007,
        k_right: 5.581,
    };

    pub fn new(f_left: f64, k_left: f64, f_right: f64, k_right: f64) -> Result<Self> {
        let params = ModelParams {
            f_left,
            k_left,
            f_right,
            k_right,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same `(f, k)` on both sides of the spectrum.
    pub fn symmetric(f: f64, k: f64) -> Result<Self> {
        Self::new(f, k, f, k)
    }

    pub fn validate(&self) -> Result<()> {
        check_scale("f_left", self.f_left)?;
        check_rate("k_left", self.k_left)?;
        check_scale("f_right", self.f_right)?;
        check_rate("k_right", self.k_right)?;
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.f_left == self.f_right && self.k_left == self.k_right
    }

    /// The `(f, k)` pair that applies to a reader with the given belief.
    /// `B = 0` takes the right branch.
    #[inline]
    pub fn branch(&self, belief: f64) -> (f64, f64) {
        if belief < 0.0 {
            (self.f_left, self.k_left)
        } else {
            (self.f_right, self.k_right)
        }
    }

    pub fn side(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Left => (self.f_left, self.k_left),
            Side::Right => (self.f_right, self.k_right),
        }
    }

    /// Replace the parameters of one side.
    pub fn with_side(mut self, side: Side, f: f64, k: f64) -> Self {
        match side {
            Side::Left => {
                self.f_left = f;
                self.k_left = k;
            }
            Side::Right => {
                self.f_right = f;
                self.k_right = k;
            }
        }
        self
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::BASE
    }
}

fn check_scale(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(name, value, "(0, 1]"))
    }
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, value, "(0, inf)"))
    }
}

pub(crate) fn check_bias(name: &'static str, value: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(name, value, "[-1, 1]"))
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(name, value, "[0, 1]"))
    }
}

/// Half of the political spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Side a reader belongs to; `B = 0` counts as right.
    pub fn of_belief(belief: f64) -> Side {
        if belief < 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(Error::InvalidArgument(format!(
                "side must be `left` or `right`, got `{other}`"
            ))),
        }
    }
}

/// An article's political bias (`-1` very liberal, `+1` very conservative)
/// and truthfulness (`0` fully false, `1` fully true).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub bias: f64,
    pub truth: f64,
}

impl Article {
    pub fn new(bias: f64, truth: f64) -> Result<Self> {
        let article = Article { bias, truth };
        article.validate()?;
        Ok(article)
    }

    pub fn validate(&self) -> Result<()> {
        check_bias("bias", self.bias)?;
        check_unit("truth", self.truth)
    }

    /// Inside the truth-bias tradeoff region `|b| + t <= 1`.
    pub fn is_feasible(&self) -> bool {
        self.bias.abs() + self.truth <= 1.0
    }
}

/// A reader's political belief on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReaderBelief(f64);

impl ReaderBelief {
    pub fn new(value: f64) -> Result<Self> {
        check_bias("belief", value)?;
        Ok(ReaderBelief(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Numerically stable logistic `1 / (1 + exp(-x))`.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `t - (b - B)^2`, the argument the logistic is scaled by `k`.
#[inline]
pub fn alignment_margin(bias: f64, truth: f64, belief: f64) -> f64 {
    let d = bias - belief;
    truth - d * d
}

/// Unchecked model evaluation for hot loops.
#[inline]
pub(crate) fn share_raw(params: &ModelParams, bias: f64, truth: f64, belief: f64) -> f64 {
    let (f, k) = params.branch(belief);
    f * logistic(k * alignment_margin(bias, truth, belief))
}

/// Probability that a reader with `belief` shares `article`.
///
/// Defined on the whole box `[-1,1] x [0,1] x [-1,1]`; the feasibility
/// constraint is not applied here.
pub fn sharing_probability(
    article: Article,
    belief: ReaderBelief,
    params: &ModelParams,
) -> Result<f64> {
    article.validate()?;
    check_bias("belief", belief.value())?;
    params.validate()?;
    Ok(share_raw(
        params,
        article.bias,
        article.truth,
        belief.value(),
    ))
}

/// The seven political affiliation groups, left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefGroup {
    ExtremeLeft,
    Left,
    LeanLeft,
    Center,
    LeanRight,
    Right,
    ExtremeRight,
}

impl BeliefGroup {
    pub const ALL: [BeliefGroup; 7] = [
        BeliefGroup::ExtremeLeft,
        BeliefGroup::Left,
        BeliefGroup::LeanLeft,
        BeliefGroup::Center,
        BeliefGroup::LeanRight,
        BeliefGroup::Right,
        BeliefGroup::ExtremeRight,
    ];

    /// Representative belief of each group, as printed (three decimals).
    pub const CENTERS: [f64; 7] = [-0.857, -0.571, -0.286, 0.0, 0.286, 0.571, 0.857];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn center(self) -> f64 {
        Self::CENTERS[self.index()]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BeliefGroup::ExtremeLeft => "extreme_left",
            BeliefGroup::Left => "left",
            BeliefGroup::LeanLeft => "lean_left",
            BeliefGroup::Center => "center",
            BeliefGroup::LeanRight => "lean_right",
            BeliefGroup::Right => "right",
            BeliefGroup::ExtremeRight => "extreme_right",
        }
    }
}

impl fmt::Display for BeliefGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for BeliefGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        BeliefGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown belief group `{s}`")))
    }
}

/// One support point of a discrete belief distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefAtom {
    pub belief: f64,
    pub weight: f64,
}

/// Discrete distribution of reader beliefs.
///
/// The usual support is the seven group centers ([`BeliefGroup::CENTERS`]),
/// but any finite set of beliefs in `[-1, 1]` is accepted so that point masses
/// and two-point populations can be expressed directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefDistribution {
    atoms: Vec<BeliefAtom>,
}

impl BeliefDistribution {
    /// Distribution over arbitrary support points.
    pub fn new(atoms: Vec<BeliefAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no support points".into()));
        }
        let mut total = 0.0;
        for atom in &atoms {
            if !(-1.0..=1.0).contains(&atom.belief) {
                return Err(Error::InvalidDistribution(format!(
                    "belief {} outside [-1, 1]",
                    atom.belief
                )));
            }
            if !(atom.weight >= 0.0) || !atom.weight.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "negative or non-finite weight {}",
                    atom.weight
                )));
            }
            total += atom.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(BeliefDistribution { atoms })
    }

    /// Weights over the seven belief groups, extreme-left first.
    pub fn over_groups(weights: [f64; 7]) -> Result<Self> {
        Self::new(
            BeliefGroup::CENTERS
                .iter()
                .zip(weights)
                .map(|(&belief, weight)| BeliefAtom { belief, weight })
                .collect(),
        )
    }

    /// All mass on one belief.
    pub fn point(belief: f64) -> Result<Self> {
        Self::new(vec![BeliefAtom {
            belief,
            weight: 1.0,
        }])
    }

    pub fn group(group: BeliefGroup) -> Self {
        let mut weights = [0.0; 7];
        weights[group.index()] = 1.0;
        Self::over_groups(weights).expect("unit mass is a valid distribution")
    }

    pub fn atoms(&self) -> &[BeliefAtom] {
        &self.atoms
    }

    /// Mirror image `B -> -B`.
    pub fn mirrored(&self) -> Self {
        BeliefDistribution {
            atoms: self
                .atoms
                .iter()
                .map(|a| BeliefAtom {
                    belief: -a.belief,
                    weight: a.weight,
                })
                .collect(),
        }
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        check_unit("lambda", lambda)?;
        let mut atoms: Vec<BeliefAtom> = self
            .atoms
            .iter()
            .map(|a| BeliefAtom {
                belief: a.belief,
                weight: lambda * a.weight,
            })
            .collect();
        atoms.extend(other.atoms.iter().map(|a| BeliefAtom {
            belief: a.belief,
            weight: (1.0 - lambda) * a.weight,
        }));
        // convex combination of valid distributions keeps the input totals
        Ok(BeliefDistribution { atoms })
    }

    pub fn expectation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.belief).sum()
    }

    /// `(E[B], Var[B])` with `Var[B] = E[B^2] - E[B]^2`.
    pub fn moments(&self) -> (f64, f64) {
        let mean = self.expectation();
        let second: f64 = self
            .atoms
            .iter()
            .map(|a| a.weight * a.belief * a.belief)
            .sum();
        (mean, second - mean * mean)
    }

    #[inline]
    pub(crate) fn share_raw(&self, params: &ModelParams, bias: f64, truth: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * share_raw(params, bias, truth, a.belief))
            .sum()
    }
}

/// `sum_g w_g * p(b, t, B_g)`.
pub fn population_sharing_probability(
    article: Article,
    dist: &BeliefDistribution,
    params: &ModelParams,
) -> Result<f64> {
    article.validate()?;
    params.validate()?;
    Ok(dist.share_raw(params, article.bias, article.truth))
}

/// `(expectation, variance)` of a belief distribution.
pub fn distribution_moments(dist: &BeliefDistribution) -> (f64, f64) {
    dist.moments()
}

/// The empirical population and the five constructed ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinDistribution {
    Empirical,
    Partisan,
    Hyperpartisan,
    LeftUnimodal,
    CentristUnimodal,
    RightUnimodal,
}

impl BuiltinDistribution {
    pub const ALL: [BuiltinDistribution; 6] = [
        BuiltinDistribution::Empirical,
        BuiltinDistribution::Partisan,
        BuiltinDistribution::Hyperpartisan,
        BuiltinDistribution::LeftUnimodal,
        BuiltinDistribution::CentristUnimodal,
        BuiltinDistribution::RightUnimodal,
    ];

    pub fn weights(self) -> [f64; 7] {
        match self {
            BuiltinDistribution::Empirical => [0.092, 0.230, 0.225, 0.184, 0.131, 0.091, 0.046],
            BuiltinDistribution::Partisan => [0.080, 0.400, 0.020, 0.0, 0.020, 0.400, 0.080],
            BuiltinDistribution::Hyperpartisan => [0.400, 0.080, 0.020, 0.0, 0.020, 0.080, 0.400],
            BuiltinDistribution::LeftUnimodal => [0.200, 0.400, 0.200, 0.080, 0.060, 0.040, 0.020],
            BuiltinDistribution::CentristUnimodal => {
                [0.020, 0.080, 0.200, 0.400, 0.200, 0.080, 0.020]
            }
            BuiltinDistribution::RightUnimodal => [0.020, 0.040, 0.060, 0.080, 0.200, 0.400, 0.200],
        }
    }

    pub fn distribution(self) -> BeliefDistribution {
        // the printed empirical column sums to 0.999 and is kept verbatim
        BeliefDistribution {
            atoms: BeliefGroup::CENTERS
                .iter()
                .zip(self.weights())
                .map(|(&belief, weight)| BeliefAtom { belief, weight })
                .collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinDistribution::Empirical => "empirical",
            BuiltinDistribution::Partisan => "partisan",
            BuiltinDistribution::Hyperpartisan => "hyperpartisan",
            BuiltinDistribution::LeftUnimodal => "left_unimodal",
            BuiltinDistribution::CentristUnimodal => "centrist_unimodal",
            BuiltinDistribution::RightUnimodal => "right_unimodal",
        }
    }
}

impl fmt::Display for BuiltinDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for BuiltinDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let key = match key.as_str() {
            "centrist" | "unimodal" => "centrist_unimodal",
            "bimodal" => "partisan",
            other => other,
        };
        BuiltinDistribution::ALL
            .into_iter()
            .find(|d| d.as_str() == key)
            .ok_or_else(|| Error::UnknownDistribution(s.to_string()))
    }
}

/// Look up a built-in distribution by name.
pub fn builtin_distribution(name: &str) -> Result<BeliefDistribution> {
    Ok(name.parse::<BuiltinDistribution>()?.distribution())
}
