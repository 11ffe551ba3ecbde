//! Seeded synthetic observations drawn from the model, for tests, examples
//! and fixture files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{DomainRecord, GroupCounts};
use crate::error::{Error, Result};
use crate::fitting::{extreme_probability, Observation};
use crate::model::{alignment_margin, share_raw, BeliefGroup, ModelParams, Side};

/// Exposure count used to encode a continuous rate as `shares / exposures`.
/// Rates are therefore quantized at `1e-12`.
pub const RATE_RESOLUTION: u64 = 1_000_000_000_000;

/// An `(article, reader)` design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    pub bias: f64,
    pub truth: f64,
    pub belief: f64,
}

/// `n` design points on one side, readers at the group centers of that side.
///
/// Points are rejection-sampled so that the logistic margin `t - (b - B)^2`
/// lies in `[-0.1, 1]`, which keeps rates away from zero and spreads them
/// over the steep part of the curve.
pub fn design(n: usize, side: Side, seed: u64) -> Vec<DesignPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beliefs: Vec<f64> = BeliefGroup::CENTERS
        .iter()
        .copied()
        .filter(|b| Side::of_belief(*b) == side)
        .collect();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let belief = beliefs[rng.random_range(0..beliefs.len())];
        let bias: f64 = rng.random_range(-1.0..=1.0);
        let truth: f64 = rng.random_range(0.0..=1.0);
        let margin = alignment_margin(bias, truth, belief);
        if (-0.1..=1.0).contains(&margin) {
            out.push(DesignPoint {
                bias,
                truth,
                belief,
            });
        }
    }
    out
}

fn encode(point: DesignPoint, rate: f64, extreme: bool) -> Observation {
    let shares = (rate.clamp(0.0, 1.0) * RATE_RESOLUTION as f64).round() as u64;
    Observation {
        bias: point.bias,
        truth: point.truth,
        belief: point.belief,
        exposures: RATE_RESOLUTION,
        shares,
        extreme,
    }
}

/// Noise added to the model rate of each observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    None,
    /// Independent Gaussian noise with this standard deviation.
    Gaussian(f64),
    /// Gaussian noise applied as `+e` and `-e` to two copies of every design
    /// point, so the per-point mean is exactly the model value.
    Antithetic(f64),
}

/// Observations with rates `p(b, t, B) + noise` (negative rates clipped to 0).
pub fn observations(
    points: &[DesignPoint],
    params: &ModelParams,
    noise: Noise,
    seed: u64,
) -> Result<Vec<Observation>> {
    params.validate()?;
    generate(
        points,
        noise,
        seed,
        |p, _| share_raw(params, p.bias, p.truth, p.belief),
        |_| false,
    )
}

/// Observations from the extreme-user model. Every design point is emitted
/// once for typical readers and once for extreme readers.
pub fn extreme_observations(
    points: &[DesignPoint],
    x: [f64; 4],
    noise: Noise,
    seed: u64,
) -> Result<Vec<Observation>> {
    let doubled: Vec<(DesignPoint, bool)> = points
        .iter()
        .flat_map(|p| [(*p, false), (*p, true)])
        .collect();
    let design: Vec<DesignPoint> = doubled.iter().map(|(p, _)| *p).collect();
    generate(
        &design,
        noise,
        seed,
        |p, i| extreme_probability(p.bias, p.truth, p.belief, doubled[i].1, x),
        |i| doubled[i].1,
    )
}

fn generate(
    points: &[DesignPoint],
    noise: Noise,
    seed: u64,
    model: impl Fn(&DesignPoint, usize) -> f64,
    extreme: impl Fn(usize) -> bool,
) -> Result<Vec<Observation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |sigma: f64| {
        Normal::new(0.0, sigma)
            .map_err(|e| Error::InvalidArgument(format!("noise level {sigma}: {e}")))
    };
    let mut out = Vec::with_capacity(points.len() * 2);
    match noise {
        Noise::None => {
            for (i, p) in points.iter().enumerate() {
                out.push(encode(*p, model(p, i), extreme(i)));
            }
        }
        Noise::Gaussian(sigma) => {
            let dist = normal(sigma)?;
            for (i, p) in points.iter().enumerate() {
                out.push(encode(*p, model(p, i) + dist.sample(&mut rng), extreme(i)));
            }
        }
        Noise::Antithetic(sigma) => {
            let dist = normal(sigma)?;
            for (i, p) in points.iter().enumerate() {
                let e: f64 = dist.sample(&mut rng);
                let rate = model(p, i);
                out.push(encode(*p, rate + e, extreme(i)));
                out.push(encode(*p, rate - e, extreme(i)));
            }
        }
    }
    Ok(out)
}

/// Tabulated domain records whose shares are binomial-like draws from the
/// model: `shares = round(exposures * p) + noise`, seven groups per domain.
pub fn domain_records(
    n_domains: usize,
    params: &ModelParams,
    exposures: u64,
    seed: u64,
) -> Result<Vec<DomainRecord>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n_domains);
    for d in 0..n_domains {
        let bias: f64 = rng.random_range(-1.0..=1.0);
        let truth: f64 = rng.random_range(0.0..=0.8);
        let cells = BeliefGroup::ALL
            .iter()
            .map(|&group| {
                let p = share_raw(params, bias, truth, group.center());
                let mean = p * exposures as f64;
                let sd = (mean * (1.0 - p)).sqrt().max(1e-12);
                let draw: f64 = Normal::new(mean, sd).expect("finite sd").sample(&mut rng);
                GroupCounts {
                    group,
                    exposures,
                    shares: draw.round().clamp(0.0, exposures as f64) as u64,
                    extreme: false,
                }
            })
            .collect();
        records.push(DomainRecord {
            domain_id: format!("domain{d:03}"),
            bias,
            truth: Some(truth),
            justifications: Vec::new(),
            cells,
        });
    }
    Ok(records)
}

/// Tabulate observations as domain records, one domain per distinct
/// `(bias, truth)` in order of first appearance. Beliefs must be group centers.
pub fn records_from_observations(observations: &[Observation]) -> Result<Vec<DomainRecord>> {
    let mut records: Vec<DomainRecord> = Vec::new();
    for o in observations {
        let group = BeliefGroup::ALL
            .into_iter()
            .find(|g| g.center() == o.belief)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("belief {} is not a group center", o.belief))
            })?;
        let cell = GroupCounts {
            group,
            exposures: o.exposures,
            shares: o.shares,
            extreme: o.extreme,
        };
        match records
            .iter_mut()
            .find(|r| r.bias == o.bias && r.truth == Some(o.truth))
        {
            Some(r) => r.cells.push(cell),
            None => records.push(DomainRecord {
                domain_id: format!("domain{:03}", records.len()),
                bias: o.bias,
                truth: Some(o.truth),
                justifications: Vec::new(),
                cells: vec![cell],
            }),
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::build_observations;

    #[test]
    fn tabulated_observations_round_trip() {
        let points = design(12, Side::Right, 4);
        let obs = extreme_observations(&points, [0.01, 4.0, 0.02, 0.0], Noise::None, 5).unwrap();
        let records = records_from_observations(&obs).unwrap();
        assert_eq!(records.len(), 12);
        assert!(records.iter().all(|r| r.cells.len() == 2));
        assert_eq!(build_observations(&records).unwrap(), obs);
    }

    #[test]
    fn off_center_beliefs_are_rejected() {
        let mut obs = observations(
            &design(2, Side::Left, 1),
            &ModelParams::BASE,
            Noise::None,
            2,
        )
        .unwrap();
        obs[1].belief = -0.5;
        assert!(records_from_observations(&obs).is_err());
    }
}
