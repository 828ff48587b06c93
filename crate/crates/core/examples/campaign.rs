//! Seeded property campaigns, as run by `bellwire campaign`.
//!
//! Run with `cargo run --release --example campaign`.

use bellwire::cli::campaign::{run_campaign, Suite};
use bellwire::monotones::SolverOptions;

fn main() -> bellwire::Result<()> {
    let opts = SolverOptions::default();
    for (suite, trials) in [
        (Suite::GwContractivity, 200),
        (Suite::LosrClosure, 50),
        (Suite::SnlMonotonicity, 50),
        (Suite::MinimaxIdentity, 20),
    ] {
        let report = run_campaign(suite, trials, 7, &opts, None)?;
        println!(
            "{:<18} rows {:>4}  violations {}  errors {}  max(after - before) {:.3e}",
            suite.name(),
            report.rows.len(),
            report.violations(),
            report.errors(),
            report.max_excess()
        );
    }
    Ok(())
}
