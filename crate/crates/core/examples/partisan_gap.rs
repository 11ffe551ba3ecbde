//! Sharing in a unimodal population at `B` against a partisan population
//! split between `B` and `-B`.
//!
//! ```text
//! cargo run --example partisan_gap -- [b] [B]
//! ```

use newsprop::analysis::{partisan_report, truth_grid};
use newsprop::ModelParams;

fn main() -> newsprop::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|s| s.parse().ok())
        .collect();
    let bias = args.first().copied().unwrap_or(0.4);
    let belief = args.get(1).copied().unwrap_or(0.6);
    let params = ModelParams::symmetric(0.007, 5.581)?;
    let truths = truth_grid(6)?;
    for q in [0.3, 0.5, 0.7] {
        let report = partisan_report(&params, bias, belief, q, &truths)?;
        println!("q = {q}");
        for r in &report.rows {
            println!(
                "  t {:.1}  p_U {:.6}  p_P {:.6}  relative gap {:.4}",
                r.truth, r.p_unimodal, r.p_partisan, r.relative_gap
            );
        }
    }
    Ok(())
}
