//! Build a scenario in code and run the rigorous optimizer, pinning one
//! register to see the optimizer work around it.
//!
//!     cargo run --release --example custom_scenario

use fqchem::qubitization::{optimize, Overrides};
use fqchem::report::sig6;
use fqchem::scenario::{from_rs, NuclearSpecies};

fn main() -> fqchem::Result<()> {
    // A 64-electron hydrogen-like slab at r_s = 4 Bohr with a 2^15 basis.
    let system = from_rs(64, 4.0, vec![NuclearSpecies::new(1, 64)?], 1 << 15, 0.0016)?;
    let (config, report) = optimize(&system, &Overrides::default())?;
    println!("free optimum: {config:?}");
    println!(
        "  steps={} total Toffolis={} logical qubits={}",
        report.steps,
        sig6(report.total_toffolis as f64),
        report.logical_qubits
    );
    let budget = report.budget.expect("rigorous reports carry a budget");
    println!(
        "  budget: eps_pha={} eps_M={} eps_R={} eps_T={}",
        sig6(budget.eps_pha),
        sig6(budget.eps_m),
        sig6(budget.eps_r),
        sig6(budget.eps_t)
    );

    // Pin the inequality register two bits below the free optimum.
    let pinned = Overrides {
        n_m: Some(config.n_m - 2),
        ..Default::default()
    };
    let (config2, report2) = optimize(&system, &pinned)?;
    println!("\npinned n_m = {}: {config2:?}", config.n_m - 2);
    println!(
        "  steps={} total Toffolis={} (x{} of the free optimum)",
        report2.steps,
        sig6(report2.total_toffolis as f64),
        sig6(report2.total_toffolis as f64 / report.total_toffolis as f64)
    );
    Ok(())
}
