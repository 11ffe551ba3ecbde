//! Fit (f, k) on each side from noisy synthetic observations and compare
//! against the generating parameters.
//!
//! ```text
//! cargo run --example fit_synthetic -- [n] [sigma] [seed]
//! ```

use newsprop::fitting::{fit_parameters, FitOptions};
use newsprop::synth::{design, observations, Noise};
use newsprop::{ModelParams, Side};

fn main() -> newsprop::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(200);
    let sigma = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.001);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let truth = ModelParams::BASE;
    for side in [Side::Left, Side::Right] {
        let obs = observations(
            &design(n, side, seed),
            &truth,
            Noise::Gaussian(sigma),
            seed + 1,
        )?;
        let report = fit_parameters(&obs, side, &FitOptions::default())?;
        let (f, k) = truth.side(side);
        println!(
            "{side}: {} observations, {} iterations",
            report.n_observations, report.iterations
        );
        for (p, t) in report.parameters.iter().zip([f, k]) {
            println!(
                "  {:<2} {:>9.5} ± {:.5}  (truth {t}, t={:.1}, p={:.1e})",
                p.name, p.estimate, p.std_error, p.t_value, p.p_value
            );
        }
    }
    Ok(())
}
