//! Fit the extreme-user model, where extreme readers add `f_e` to the scale
//! and `k_e` to the rate.
//!
//! ```text
//! cargo run --example extreme_users
//! ```

use newsprop::fitting::{fit_extreme_user_model, FitOptions};
use newsprop::synth::{design, extreme_observations, Noise};
use newsprop::Side;

fn main() -> newsprop::Result<()> {
    let truth = [0.010, 4.465, 0.004, 0.0];
    let points = design(150, Side::Left, 80);
    for (label, noise) in [
        ("independent", Noise::Gaussian(0.001)),
        ("antithetic", Noise::Antithetic(0.001)),
    ] {
        let obs = extreme_observations(&points, truth, noise, 81)?;
        let report = fit_extreme_user_model(&obs, Side::Left, &FitOptions::default())?;
        println!("{label} noise, {} observations", report.n_observations);
        for (p, t) in report.parameters.iter().zip(truth) {
            println!(
                "  {:<3} {:>10.6} ± {:.6}  truth {t:<6} p={:.3}",
                p.name, p.estimate, p.std_error, p.p_value
            );
        }
    }
    Ok(())
}
