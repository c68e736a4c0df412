//! Closed-form Toffoli costs for the reversible arithmetic and state
//! preparation primitives that both algorithm models are assembled from.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A count of Toffoli gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ToffoliCount(pub u64);

impl ToffoliCount {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl std::fmt::Display for ToffoliCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Parameters of an equal-superposition preparation over `n` basis states
/// using `b_r` bits of rotation on an ancilla qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualSuperpositionSpec {
    pub n: u64,
    pub b_r: u32,
}

impl EqualSuperpositionSpec {
    pub fn new(n: u64, b_r: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("equal superposition needs n >= 1".into()));
        }
        if b_r < 1 {
            return Err(Error::Domain("rotation bits b_r must be >= 1".into()));
        }
        Ok(Self { n, b_r })
    }
}

/// Squaring an n-bit number by repeated addition: n^2 - 2 Toffolis.
pub fn square_cost_simple(n: u32) -> Result<ToffoliCount> {
    if n < 2 {
        return Err(Error::InvalidWidth(format!(
            "simple squaring needs n >= 2, got {n}"
        )));
    }
    let n = n as u64;
    Ok(ToffoliCount(n * n - 2))
}

/// Squaring an n-bit number with the improved adder layout: n(n-1) Toffolis.
pub fn square_cost(n: u32) -> Result<ToffoliCount> {
    if n < 1 {
        return Err(Error::InvalidWidth("squaring needs n >= 1".into()));
    }
    let n = n as u64;
    Ok(ToffoliCount(n * (n - 1)))
}

/// Sum of the squares of three n-bit numbers: 3n^2 - n - 1 Toffolis.
pub fn sum_three_squares_cost(n: u32) -> Result<ToffoliCount> {
    if n < 1 {
        return Err(Error::InvalidWidth("sum of squares needs n >= 1".into()));
    }
    let n = n as u64;
    Ok(ToffoliCount(3 * n * n - n - 1))
}

/// Sum of the squares of k n-bit numbers: k*n^2 Toffolis (proven bound).
///
/// Empirically the construction uses k*n^2 - n Toffolis (k*n^2 - n - 1 when k
/// is a multiple of 3), but the proven bound is what is exposed here; the
/// per-term costs used by the cost models are taken from the tighter
/// special-case constructions instead.
pub fn sum_k_squares_cost(k: u32, n: u32) -> Result<ToffoliCount> {
    if k < 1 || n < 1 {
        return Err(Error::InvalidWidth(
            "sum of k squares needs k, n >= 1".into(),
        ));
    }
    Ok(ToffoliCount(k as u64 * (n as u64) * (n as u64)))
}

/// Multiplying an n-bit number by an m-bit number: 2ab - a Toffolis with
/// a = max(n, m) and b = min(n, m).
pub fn product_cost(n: u32, m: u32) -> Result<ToffoliCount> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidWidth("product needs n, m >= 1".into()));
    }
    let a = n.max(m) as u64;
    let b = n.min(m) as u64;
    Ok(ToffoliCount(2 * a * b - a))
}

/// Cost of erasing a QROM output over a table of size `x`:
/// min over k >= 0 of 2^k + ceil(x / 2^k).
///
/// The minimum is taken over all non-negative integers k. The variant that
/// restricts k to powers of two is available from
/// [`qrom_erase_cost_power_of_two_k`] for comparison; it rarely differs.
pub fn qrom_erase_cost(x: u64) -> Result<ToffoliCount> {
    if x < 1 {
        return Err(Error::Domain("QROM erase needs table size >= 1".into()));
    }
    Ok(ToffoliCount(erase_min(x, false)))
}

/// Same minimization with k restricted to k = 2^j (and k = 0).
pub fn qrom_erase_cost_power_of_two_k(x: u64) -> Result<ToffoliCount> {
    if x < 1 {
        return Err(Error::Domain("QROM erase needs table size >= 1".into()));
    }
    Ok(ToffoliCount(erase_min(x, true)))
}

fn erase_min(x: u64, pow2_k_only: bool) -> u64 {
    let mut best = u64::MAX;
    let mut k = 0u32;
    loop {
        let allowed = !pow2_k_only || k == 0 || k.is_power_of_two();
        if allowed {
            let v = (1u64 << k) + x.div_ceil(1u64 << k);
            best = best.min(v);
        }
        if (1u64 << k) >= x {
            break;
        }
        k += 1;
    }
    best
}

/// Comparator counts of the best known sorting networks for 2..=16 items.
const SORT_COMPARATORS: [u64; 15] = [1, 3, 5, 9, 12, 16, 19, 25, 29, 35, 39, 45, 51, 56, 60];

/// Number of comparators needed for a reversible sort of `k` items.
pub fn sort_comparator_count(k: u32) -> Result<u64> {
    if !(2..=16).contains(&k) {
        return Err(Error::UnsupportedSize(format!(
            "sorting network table covers 2..=16 items, got {k}"
        )));
    }
    Ok(SORT_COMPARATORS[(k - 2) as usize])
}

/// The rotation angle used in the equal superposition preparation, rounded
/// to a multiple of 2*pi/2^{b_r} (half away from zero) after the second-order
/// correction that guarantees the lower bound of
/// [`equal_superposition_lower_bound`].
fn rounded_theta(x: f64, b_r: u32) -> f64 {
    let theta0 = (1.0 / (2.0 * x.sqrt())).asin();
    let correction = (PI / exp2(b_r)).powi(2) * (2.0 * x - 1.0) / (4.0 * x - 1.0).sqrt();
    let grid = 2.0 * PI / exp2(b_r);
    grid * ((theta0 - correction) / grid).round()
}

fn exp2(b: u32) -> f64 {
    (b as f64).exp2()
}

/// Success probability of preparing an equal superposition over `n` basis
/// states with a `b_r`-bit ancilla rotation.
///
/// Depends on n only through x = n / 2^{ceil(log2 n)}.
pub fn equal_superposition_success(spec: EqualSuperpositionSpec) -> f64 {
    let n = spec.n as f64;
    let ceil_log = spec.n.next_power_of_two().trailing_zeros();
    let x = n / exp2(ceil_log);
    let theta = rounded_theta(x, spec.b_r);
    let s2 = theta.sin().powi(2);
    let value = x * ((1.0 + (2.0 - 4.0 * x) * s2).powi(2) + (2.0 * theta).sin().powi(2));
    value.min(1.0)
}

/// Lower bound 1 - (3/2)^2 (pi/2^{b_r})^2 on the success probability of the
/// equal superposition preparation. Vacuous (negative) for b_r <= 2; the raw
/// value is returned either way.
pub fn equal_superposition_lower_bound(b_r: u32) -> f64 {
    1.0 - 2.25 * (PI / exp2(b_r)).powi(2)
}
