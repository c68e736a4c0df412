//! Exact momentum-transfer lattice sums: normalization factors, preparation
//! success probability, and the quantization error, with the parallel path
//! checked bit-for-bit against the sequential one.
//!
//!     cargo run --release --example momentum_sums

use fqchem::momentum::*;
use std::time::Instant;

fn main() -> fqchem::Result<()> {
    println!("box    points        lambda_nu      sum 1/|nu|     p_success  amplified");
    for n_p in 1..=8u32 {
        let bx = MomentumBox::new(n_p)?;
        let spec = NuPreparationSpec::exact(13)?;
        let s = BoxSums::compute(bx, spec, false);
        let w = 2 * bx.half_width() as u64 + 1;
        println!(
            "n_p={n_p}  {:<12} {:<14.6} {:<14.6} {:<10.6} {:.6}",
            w * w * w - 1,
            s.lambda_nu,
            s.inv_norm,
            s.p_success,
            amplify(s.p_success)?
        );
    }

    // Quantization error of the inequality-test preparation against the
    // proven bound, with and without amplitude-scale tuning.
    let bx = MomentumBox::new(5)?;
    println!("\nquantization error over the n_p=5 box (eta=46, lambda_zeta=46, Omega=1e5):");
    for n_m in [10u32, 13, 16] {
        let bound = eps_m_bound(bx, n_m, 46, 46, 1e5);
        let exact = eps_m_exact(bx, NuPreparationSpec::exact(n_m)?, 46, 46, 1e5);
        let m = (n_m as f64).exp2();
        let tuned = (0..=6)
            .map(|i| {
                let alpha = 1.0 - 3.0 / (2.0 * m) + (i as f64 / 6.0) / (2.0 * m);
                eps_m_exact(bx, NuPreparationSpec::new(n_m, alpha).unwrap(), 46, 46, 1e5)
            })
            .fold(f64::MAX, f64::min);
        println!(
            "  n_m={n_m}: bound {bound:.4e}  exact {exact:.4e} ({:.0}%)  tuned {tuned:.4e} ({:.0}%)",
            100.0 * exact / bound,
            100.0 * tuned / bound
        );
    }

    // The big box, sequential against the rayon path.
    let bx = MomentumBox::new(8)?;
    let spec = NuPreparationSpec::exact(16)?;
    let t0 = Instant::now();
    let seq = BoxSums::compute(bx, spec, false);
    let t_seq = t0.elapsed();
    let t1 = Instant::now();
    let par = BoxSums::compute(bx, spec, true);
    let t_par = t1.elapsed();
    println!(
        "\nn_p=8 ({} lattice points): sequential {:.3}s, parallel {:.3}s, bitwise equal: {}",
        (2u64 * 255 + 1).pow(3) - 1,
        t_seq.as_secs_f64(),
        t_par.as_secs_f64(),
        seq.lambda_nu.to_bits() == par.lambda_nu.to_bits()
            && seq.p_success.to_bits() == par.p_success.to_bits()
    );
    Ok(())
}
