//! Recompute the built-in reference tables and print the diffs.
//!
//!     cargo run --release --example reproduce_tables

fn main() -> fqchem::Result<()> {
    for target in ["wigner-table", "kim-table", "crossover"] {
        let (text, ok) = fqchem::cli::run_reproduce(target)?;
        println!(
            "== {target} ({})",
            if ok {
                "within tolerance"
            } else {
                "OUT OF TOLERANCE"
            }
        );
        print!("{text}");
        println!();
    }
    Ok(())
}
