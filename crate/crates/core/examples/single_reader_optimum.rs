//! Closed-form optimal article for a single reader, across beliefs.
//!
//! ```text
//! cargo run --example single_reader_optimum
//! ```

use newsprop::optimizer::{optimize_fixed_truth, optimize_single_reader_closed_form};
use newsprop::{ModelParams, ReaderBelief};

fn main() -> newsprop::Result<()> {
    let params = ModelParams::BASE;
    println!(
        "{:>6} {:>7} {:>7} {:>10} {:<20} {:>12}",
        "B", "b*", "t*", "p*", "boundary", "b*(t=0.1)"
    );
    for i in -4..=4 {
        let belief = ReaderBelief::new(i as f64 / 4.0)?;
        let r = optimize_single_reader_closed_form(belief, &params)?;
        let low = optimize_fixed_truth(0.1, belief)?;
        println!(
            "{:>6.2} {:>7.3} {:>7.3} {:>10.6} {:<20} {:>12.3}",
            belief.value(),
            r.bias_star,
            r.truth_star,
            r.probability_star,
            r.active_boundary,
            low
        );
    }
    Ok(())
}
