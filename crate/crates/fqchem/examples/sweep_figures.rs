//! Regenerate the figure data: total Toffolis against electron count for a
//! few Wigner-Seitz radii and basis sizes, one CSV row per grid point.
//!
//!     cargo run --release --example sweep_figures > figures.csv

use fqchem::cli::{run_sweep, AlgorithmArg, ScenarioArgs};

fn main() -> fqchem::Result<()> {
    let scenario = ScenarioArgs {
        config: None,
        preset: Some("jellium".to_string()),
        set: vec!["eps=0.0016".to_string()],
    };
    let csv = run_sweep(
        &scenario,
        AlgorithmArg::Both,
        Some("20:200:20"),
        Some("1,5,10"),
        Some("12,15,18,21"),
        None,
    )?;
    print!("{csv}");
    Ok(())
}
