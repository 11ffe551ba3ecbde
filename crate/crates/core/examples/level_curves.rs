//! Level-set data for the single-reader model: fix one of b, t, B and write
//! the other two with the sharing probability as CSV.
//!
//! ```text
//! cargo run --example level_curves -- [b|t|belief] [value] > levels.csv
//! ```

use std::io::Write;

use newsprop::analysis::{sweep_levels, LevelAxis};
use newsprop::ModelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let axis: LevelAxis = args.next().as_deref().unwrap_or("belief").parse()?;
    let value: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.45);
    let sweep = sweep_levels(&ModelParams::BASE, axis, value, 51)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "b,t,belief,p")?;
    for [b, t, belief, p] in sweep.rows {
        writeln!(out, "{b},{t},{belief},{p}")?;
    }
    Ok(())
}
