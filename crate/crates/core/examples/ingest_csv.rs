//! Load domain counts and truthfulness ratings from CSV, then fit both sides.
//!
//! ```text
//! cargo run --example ingest_csv -- [counts.csv] [justifications.csv]
//! ```

use std::path::PathBuf;

use newsprop::data::{load_observations, truthfulness_category};
use newsprop::fitting::{fit_parameters, FitOptions};
use newsprop::Side;

fn main() -> newsprop::Result<()> {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let mut args = std::env::args().skip(1).map(PathBuf::from);
    let counts = args.next().unwrap_or_else(|| here.join("domains.csv"));
    let justifications = args
        .next()
        .unwrap_or_else(|| here.join("justifications.csv"));

    let obs = load_observations(&counts, Some(&justifications))?;
    let mut domains: Vec<(f64, f64)> = obs.iter().map(|o| (o.bias, o.truth)).collect();
    domains.dedup();
    println!("{} cells from {} domains", obs.len(), domains.len());
    for (bias, truth) in domains {
        println!(
            "  bias {bias:>6.2}  truth {truth:.3}  {}",
            truthfulness_category(truth)?
        );
    }
    for side in [Side::Left, Side::Right] {
        let r = fit_parameters(&obs, side, &FitOptions::default())?;
        let (f, k) = r.scale_and_rate();
        println!(
            "{side}: f={f:.5} k={k:.3} (rse {:.2e})",
            r.residual_standard_error
        );
    }
    Ok(())
}
