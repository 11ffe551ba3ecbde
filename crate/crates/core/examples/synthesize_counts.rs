//! Write a synthetic counts CSV drawn from the model.
//!
//! ```text
//! cargo run --example synthesize_counts -- [domains] [exposures] [seed] > counts.csv
//! ```

use newsprop::data::write_domain_records;
use newsprop::synth::domain_records;
use newsprop::ModelParams;

fn main() -> newsprop::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: u64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let domains = arg(0, 40) as usize;
    let exposures = arg(1, 1_000_000_000);
    let seed = arg(2, 7);

    let records = domain_records(domains, &ModelParams::BASE, exposures, seed)?;
    write_domain_records(&records, std::io::stdout().lock())
}
