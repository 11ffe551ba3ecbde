//! Slope tests of the two model assumptions: sharing falls with
//! misalignment `(b - B)^2` and rises with truthfulness.
//!
//! ```text
//! cargo run --example validate_assumptions
//! ```

use newsprop::fitting::validate_assumptions;
use newsprop::synth::{design, observations, Noise};
use newsprop::{ModelParams, Side};

fn main() -> newsprop::Result<()> {
    let mut obs = observations(
        &design(200, Side::Left, 1),
        &ModelParams::BASE,
        Noise::Gaussian(0.0005),
        2,
    )?;
    obs.extend(observations(
        &design(200, Side::Right, 3),
        &ModelParams::BASE,
        Noise::Gaussian(0.0005),
        4,
    )?);
    let report = validate_assumptions(&obs)?;
    for (name, s) in [
        ("misalignment, left", report.slope_misalignment_left),
        ("misalignment, right", report.slope_misalignment_right),
        ("truthfulness, left", report.slope_truth_left),
        ("truthfulness, right", report.slope_truth_right),
    ] {
        println!(
            "{name:<20} slope {:>9.5}  t {:>7.2}  p {:.1e}  n {}",
            s.slope, s.t_value, s.p_value, s.n
        );
    }
    Ok(())
}
