//! Propagation-maximizing article for each built-in belief distribution,
//! unconstrained and at low truthfulness.
//!
//! ```text
//! cargo run --example population_optimum
//! ```

use newsprop::analysis::low_truth_argmax;
use newsprop::optimizer::{optimize_population_traced, DEFAULT_GRID_STEP, DEFAULT_REFINE_TOL};
use newsprop::{BuiltinDistribution, ModelParams, Side};

fn main() -> newsprop::Result<()> {
    let params = ModelParams::BASE;
    println!(
        "{:<18} {:>7} {:>6} {:>7} {:>7} {:>10} {:>12}",
        "distribution", "E[B]", "Var", "b*", "t*", "p*", "b*(t=0.1)"
    );
    for d in BuiltinDistribution::ALL {
        let dist = d.distribution();
        let (e, v) = dist.moments();
        let (r, trace) =
            optimize_population_traced(&dist, &params, DEFAULT_GRID_STEP, DEFAULT_REFINE_TOL)?;
        let (low, _) = low_truth_argmax(&dist, &params, Side::Right, 0.1, DEFAULT_GRID_STEP)?;
        println!(
            "{:<18} {:>7.3} {:>6.3} {:>7.3} {:>7.3} {:>10.7} {:>12.3}",
            d.as_str(),
            e,
            v,
            r.bias_star,
            r.truth_star,
            r.probability_star,
            low
        );
        assert!(trace.probabilities.windows(2).all(|w| w[1] >= w[0]));
    }

    let mixed = BuiltinDistribution::Partisan
        .distribution()
        .mix(&BuiltinDistribution::CentristUnimodal.distribution(), 0.5)?;
    let (r, _) =
        optimize_population_traced(&mixed, &params, DEFAULT_GRID_STEP, DEFAULT_REFINE_TOL)?;
    println!(
        "50/50 partisan+centrist: b*={:.3} t*={:.3}",
        r.bias_star, r.truth_star
    );
    Ok(())
}
