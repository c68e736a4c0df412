//! Cost a generic (Hamiltonian-agnostic) interaction-picture simulation:
//! block-encoded B with one-norm lambda_B, directly exponentiable A, and a
//! step length that is a rational multiple c/(d lambda_B).
//!
//!     cargo run --release --example generic_dyson

use fqchem::interaction::{generic_cost, sigma_cd, GenericIPSpec};

fn main() -> fqchem::Result<()> {
    // c/d = 9/13 is a good rational stand-in for ln 2, keeping the
    // amplified success probability at one half per step.
    let spec = GenericIPSpec {
        lambda_b: 13.0,
        norm_a: 650.0,
        time: 90.0, // reps = lambda_B t d / c = 1690
        c: 9,
        d: 13,
        k: 8,
        n_t: 24,
        n_theta: 30,
        b_r: 8,
        n_b: 24,
        eps: 1e-3,
        controlled_exp_a_cost: Some(500),
        prep_b_cost: Some(2_000),
        sel_b_cost: Some(4_000),
    };
    let cost = generic_cost(&spec)?;
    println!(
        "series coefficients (K = {}, c/d = {}/{}):",
        spec.k, spec.c, spec.d
    );
    for k in 0..=spec.k {
        println!("  sigma({k}) = {}", sigma_cd(k, spec.k, spec.c, spec.d)?);
    }
    println!("\nsteps: {}", cost.reps);
    println!("native Toffolis:          {}", cost.toffolis);
    println!("controlled-exp(A) calls:  {}", cost.controlled_exp_a_calls);
    println!("PREP_B calls:             {}", cost.prep_b_calls);
    println!("SEL_B calls:              {}", cost.sel_b_calls);
    if let Some(total) = cost.total_with_handles {
        println!("grand total at the supplied per-call prices: {total}");
    }
    println!(
        "\nerror terms: eps_K = {:.3e}, eps_theta = {:.3e}, eps_t = {:.3e}",
        cost.eps_k, cost.eps_theta, cost.eps_t
    );
    Ok(())
}
