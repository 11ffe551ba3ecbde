//! Sweep belief distributions over the seven groups and summarize how the
//! optimum moves with expectation and variance.
//!
//! ```text
//! cargo run --release --example moment_sweep -- [weight_step]
//! ```

use newsprop::analysis::variance_effect;
use newsprop::optimizer::{sweep_moment_space, SweepOptions};
use newsprop::ModelParams;

fn main() -> newsprop::Result<()> {
    let weight_step = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.1);
    let options = SweepOptions {
        weight_step,
        ..SweepOptions::default()
    };
    let rows = sweep_moment_space(&ModelParams::BASE, &options)?;
    println!("{} distributions", rows.len());

    println!(
        "{:>8} {:>5} {:>10} {:>10} {:>8}",
        "E bucket", "rows", "max b*", "mean p*", "rho"
    );
    let buckets = variance_effect(&rows, 0.1);
    for b in &buckets {
        let inside: Vec<_> = rows
            .iter()
            .filter(|r| newsprop::analysis::expectation_bucket(r.expectation, 0.1) == b.bucket)
            .collect();
        let max_bias = inside
            .iter()
            .map(|r| r.bias_star)
            .fold(f64::NEG_INFINITY, f64::max);
        let mean_p = inside.iter().map(|r| r.probability_star).sum::<f64>() / inside.len() as f64;
        let rho = b.rho.map_or("-".to_string(), |r| format!("{r:.3}"));
        println!(
            "{:>8.1} {:>5} {:>10.3} {:>10.6} {:>8}",
            b.lower, b.rows, max_bias, mean_p, rho
        );
    }
    Ok(())
}
