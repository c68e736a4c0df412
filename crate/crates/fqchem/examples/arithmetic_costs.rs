//! The closed-form Toffoli primitives that the step costs are built from.
//!
//!     cargo run --release --example arithmetic_costs

use fqchem::arith::*;

fn main() -> fqchem::Result<()> {
    println!("squaring an n-bit number:");
    println!("  n    repeated-addition   improved");
    for n in [2u32, 4, 8, 16, 32] {
        println!(
            "  {:<4} {:<19} {}",
            n,
            square_cost_simple(n)?,
            square_cost(n)?
        );
    }

    println!("\nsum of three squares vs the generic k-term bound (k = 3):");
    for n in [4u32, 8, 16] {
        println!(
            "  n={:<3} special-case {:<5} generic {}",
            n,
            sum_three_squares_cost(n)?,
            sum_k_squares_cost(3, n)?
        );
    }

    println!("\nproducts and table erasure:");
    println!("  5x3-bit product: {} Toffolis", product_cost(5, 3)?);
    for x in [8u64, 46, 100, 1000] {
        println!(
            "  erase a {x}-entry lookup: {} Toffolis (power-of-two split: {})",
            qrom_erase_cost(x)?,
            qrom_erase_cost_power_of_two_k(x)?
        );
    }

    println!("\nsorting network comparators:");
    for k in [2u32, 4, 8, 16] {
        println!("  {k} items: {}", sort_comparator_count(k)?);
    }

    println!("\nequal-superposition success probabilities:");
    for (n, b_r) in [(3u64, 8u32), (46, 7), (138, 7), (1 << 20, 7)] {
        let v = equal_superposition_success(EqualSuperpositionSpec::new(n, b_r)?);
        println!(
            "  n={n:<8} b_r={b_r}: {v:.6}  (proven floor {:.6})",
            equal_superposition_lower_bound(b_r)
        );
    }
    Ok(())
}
