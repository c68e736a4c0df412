//! Price a benchmark molecule with both algorithms and both cost models.
//!
//!     cargo run --release --example estimate_molecule

use fqchem::interaction::{self, Overrides as IntOverrides};
use fqchem::qubitization::{self, Overrides as QubOverrides};
use fqchem::report::{sig6, CostModel};
use fqchem::scenario;

fn main() -> fqchem::Result<()> {
    let mut system = scenario::preset("ethylene_carbonate")?;
    system.num_plane_waves = 1 << 18;
    system.target_error_hartree = 0.0016;
    let geom = scenario::derive(&system)?;
    println!(
        "ethylene carbonate: eta={} lambda_zeta={} Omega={} Bohr^3 N=2^18 eps={} Ha",
        system.eta,
        geom.lambda_zeta,
        sig6(system.omega_bohr3),
        sig6(system.target_error_hartree),
    );
    println!(
        "momentum register: {} bits/component, {} system qubits\n",
        geom.n_p, geom.n_s
    );

    for model in [CostModel::Calibrated, CostModel::Rigorous] {
        let qub = qubitization::estimate(&system, model, &QubOverrides::default())?;
        let int = interaction::estimate(&system, model, &IntOverrides::default())?;
        println!("{} model:", model.name());
        for r in [&qub, &int] {
            println!(
                "  {:<13} steps={:<11} per-step={:<6} total Toffolis={:<12} logical qubits={}",
                r.algorithm.name(),
                r.steps,
                r.per_step_total,
                sig6(r.total_toffolis as f64),
                r.logical_qubits
            );
        }
        println!(
            "  interaction / qubitization Toffoli ratio: {}\n",
            sig6(int.total_toffolis as f64 / qub.total_toffolis as f64)
        );
    }

    // The largest per-step items, from the calibrated qubitization breakdown.
    let report = qubitization::estimate(&system, CostModel::Calibrated, &QubOverrides::default())?;
    let mut items = report.per_step_breakdown.clone();
    items.sort_by_key(|item| std::cmp::Reverse(item.count));
    println!("largest per-step contributions (qubitization):");
    for item in items.iter().take(5) {
        println!("  {:<42} {}", item.label, item.count);
    }
    Ok(())
}
