//! Rerun the low-truth argmax under all 16 low/high parameter combinations
//! and list the ones that move it.
//!
//! ```text
//! cargo run --release --example sensitivity_grid
//! ```

use newsprop::analysis::{sensitivity, SensitivityOptions, SensitivityRange};
use newsprop::{BuiltinDistribution, ModelParams};

fn main() -> newsprop::Result<()> {
    let report = sensitivity(
        &SensitivityRange::TABLE,
        &ModelParams::BASE,
        &BuiltinDistribution::ALL,
        &SensitivityOptions::default(),
    )?;
    for row in report.rows.iter().filter(|r| r.shift > report.threshold) {
        println!(
            "{:>2} {} {:<16} b* {:.3} -> {:.3}",
            row.combination,
            row.label,
            row.distribution.as_str(),
            row.base_bias_star,
            row.bias_star
        );
    }
    let labels: Vec<String> = report
        .flagged
        .iter()
        .map(|&i| SensitivityRange::TABLE.combination(i).label())
        .collect();
    println!("flagged: {}", labels.join(" "));
    Ok(())
}
