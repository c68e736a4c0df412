//! Map the (eta, resolution) region where the interaction-picture walk beats
//! direct qubitization, and trace the equal-cost boundary across basis sizes.
//!
//!     cargo run --release --example crossover_map

use fqchem::cli::{crossover_boundary, crossover_ratio};

fn main() -> fqchem::Result<()> {
    let etas = [20u64, 40, 70, 100, 150, 200];
    let deltas = [1e-3, 3e-3, 1e-2, 3e-2];
    println!("interaction / qubitization Toffoli ratio at N = 2^18, eps = 0.0016 Ha");
    print!("{:<8}", "eta");
    for d in deltas {
        print!("{:<12}", format!("d={d:.0e}"));
    }
    println!();
    for eta in etas {
        print!("{eta:<8}");
        for delta in deltas {
            match crossover_ratio(eta, delta, 18, 0.0016) {
                Ok(r) => print!(
                    "{:<12}",
                    format!("{r:.3}{}", if r < 1.0 { " *" } else { "" })
                ),
                Err(_) => print!("{:<12}", "-"),
            }
        }
        println!();
    }
    println!("(* marks the interaction picture winning)\n");

    println!("equal-cost resolution delta at eta = 70:");
    for log2n in [12u32, 15, 18, 21] {
        println!(
            "  N = 2^{log2n}: delta* = {:.4e} Bohr",
            crossover_boundary(70, log2n, 0.0016)?
        );
    }
    Ok(())
}
