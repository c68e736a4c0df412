//! Exact sums over the momentum-transfer lattice: the 1/nu^2 normalization,
//! the success probability of the nested-box state preparation, and the exact
//! and bounded preparation error for a finite inequality-test register.
//!
//! The lattice for a box parameter n_p covers nu with components in
//! [-(2^{n_p}-1), 2^{n_p}-1], excluding the zero vector, partitioned into
//! nested shells B_mu for mu = 2..=n_p+1.

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The momentum-transfer box; components run over +-(2^{n_p}-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumBox {
    n_p: u32,
}

impl MomentumBox {
    pub fn new(n_p: u32) -> Result<Self> {
        if n_p < 1 {
            return Err(Error::InvalidWidth("momentum box needs n_p >= 1".into()));
        }
        if n_p > 20 {
            return Err(Error::UnsupportedSize(format!(
                "momentum box n_p = {n_p} would have ~2^{} lattice points",
                3 * n_p
            )));
        }
        Ok(Self { n_p })
    }

    pub fn n_p(&self) -> u32 {
        self.n_p
    }

    /// Maximum mu index, n_mu = n_p + 1.
    pub fn n_mu(&self) -> u32 {
        self.n_p + 1
    }

    /// Largest component magnitude, 2^{n_p} - 1 (the effective N^{1/3}).
    pub fn half_width(&self) -> i64 {
        (1i64 << self.n_p) - 1
    }
}

/// A nonzero lattice vector of momentum transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuVector {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl NuVector {
    pub fn new(x: i64, y: i64, z: i64) -> Result<Self> {
        if x == 0 && y == 0 && z == 0 {
            return Err(Error::Domain("zero momentum transfer is excluded".into()));
        }
        Ok(Self { x, y, z })
    }

    pub fn norm_sq(&self) -> u64 {
        (self.x * self.x + self.y * self.y + self.z * self.z) as u64
    }

    pub fn max_component(&self) -> u64 {
        self.x
            .unsigned_abs()
            .max(self.y.unsigned_abs())
            .max(self.z.unsigned_abs())
    }
}

/// Shell index: the minimum mu with all |nu_w| < 2^{mu-1}, i.e.
/// floor(log2 max|nu_w|) + 2.
pub fn mu_of(nu: NuVector) -> u32 {
    nu.max_component().ilog2() + 2
}

/// Inequality-test register: M = 2^{n_m} alternatives and the amplitude scale
/// alpha in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuPreparationSpec {
    pub n_m: u32,
    pub alpha: f64,
}

impl NuPreparationSpec {
    pub fn new(n_m: u32, alpha: f64) -> Result<Self> {
        if n_m < 1 {
            return Err(Error::InvalidWidth("n_m must be >= 1".into()));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha must be in (0, 1], got {alpha}"
            )));
        }
        Ok(Self { n_m, alpha })
    }

    pub fn exact(n_m: u32) -> Result<Self> {
        Self::new(n_m, 1.0)
    }

    pub fn m(&self) -> f64 {
        (self.n_m as f64).exp2()
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn merge(&mut self, other: Neumaier) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const N_SUMS: usize = 5;

/// All lattice sums for one (box, preparation) pair, computed in a single
/// symmetry-reduced pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSums {
    /// sum of 1/|nu|^2
    pub lambda_nu: f64,
    /// sum of 1/|nu|
    pub inv_norm: f64,
    /// sum of ceil(M (2^{mu-2}/|nu|)^2) / (M 2^{2mu-4}), before the alpha factor
    pub lambda_nu_alpha_base: f64,
    /// success probability of the nested-box preparation
    pub p_success: f64,
    /// sum over the box of |1/|nu'|^2 - 1/|nu|^2| at the preparation's alpha
    pub eps_m_abs_sum: f64,
}

/// Per-point contributions to the five sums.
#[inline]
fn point_terms(x: i64, y: i64, z: i64, n_p: u32, m: f64, inv_m: f64, alpha: f64) -> [f64; N_SUMS] {
    let r2 = (x * x + y * y + z * z) as f64;
    let max_c = (x.unsigned_abs())
        .max(y.unsigned_abs())
        .max(z.unsigned_abs());
    let mu = max_c.ilog2() + 2;
    let inv_r2 = 1.0 / r2;
    // 2^{2mu}, 2^{2mu-4} as exact powers
    let p2_2mu = ((2 * mu) as f64).exp2();
    let ceil_term = (m * p2_2mu / (16.0 * r2)).ceil();
    let quantized = 16.0 * ceil_term * inv_m / p2_2mu;
    [
        inv_r2,
        inv_r2.sqrt(),
        quantized,
        ceil_term * inv_m / (p2_2mu * ((n_p + 2) as f64).exp2()),
        (alpha * quantized - inv_r2).abs(),
    ]
}

/// Multiplicity of the canonical representative 0 <= x <= y <= z under sign
/// flips and coordinate permutations.
#[inline]
fn multiplicity(x: i64, y: i64, z: i64) -> f64 {
    let nonzero = (x != 0) as u32 + (y != 0) as u32 + (z != 0) as u32;
    let signs = (1u32 << nonzero) as f64;
    let perms = if x == y && y == z {
        1.0
    } else if x == y || y == z {
        3.0
    } else {
        6.0
    };
    signs * perms
}

fn partial_for_plane(
    x: i64,
    l: i64,
    n_p: u32,
    m: f64,
    inv_m: f64,
    alpha: f64,
) -> [Neumaier; N_SUMS] {
    let mut acc = [Neumaier::default(); N_SUMS];
    for y in x..=l {
        for z in y..=l {
            if z == 0 {
                continue; // x <= y <= z, so z == 0 means the zero vector
            }
            let w = multiplicity(x, y, z);
            let terms = point_terms(x, y, z, n_p, m, inv_m, alpha);
            for (a, t) in acc.iter_mut().zip(terms) {
                a.add(w * t);
            }
        }
    }
    acc
}

impl BoxSums {
    /// Compute all sums. `parallel` distributes the outer x loop across the
    /// rayon pool; per-x partials are folded in ascending x order, so the
    /// result is bitwise identical to the sequential path.
    pub fn compute(bx: MomentumBox, spec: NuPreparationSpec, parallel: bool) -> Self {
        let l = bx.half_width();
        let n_p = bx.n_p;
        let m = spec.m();
        let inv_m = 1.0 / m;
        let alpha = spec.alpha;

        let partials: Vec<[Neumaier; N_SUMS]> = if parallel {
            (0..=l)
                .into_par_iter()
                .map(|x| partial_for_plane(x, l, n_p, m, inv_m, alpha))
                .collect()
        } else {
            (0..=l)
                .map(|x| partial_for_plane(x, l, n_p, m, inv_m, alpha))
                .collect()
        };

        let mut acc = [Neumaier::default(); N_SUMS];
        for p in partials {
            for (a, q) in acc.iter_mut().zip(p) {
                a.merge(q);
            }
        }
        BoxSums {
            lambda_nu: acc[0].value(),
            inv_norm: acc[1].value(),
            lambda_nu_alpha_base: acc[2].value(),
            p_success: acc[3].value(),
            eps_m_abs_sum: acc[4].value(),
        }
    }
}

static SUMS_CACHE: std::sync::OnceLock<
    std::sync::Mutex<std::collections::BTreeMap<(u32, u32), BoxSums>>,
> = std::sync::OnceLock::new();

/// Memoized sums at alpha = 1, the common case along the costing pipelines.
/// The cached value is bitwise identical to a direct computation.
pub fn cached_sums(bx: MomentumBox, n_m: u32) -> BoxSums {
    let cache = SUMS_CACHE.get_or_init(Default::default);
    let key = (bx.n_p(), n_m);
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return *v;
    }
    let v = BoxSums::compute(bx, NuPreparationSpec { n_m, alpha: 1.0 }, true);
    cache.lock().expect("cache lock").insert(key, v);
    v
}

/// lambda_nu = sum over the box of 1/|nu|^2.
pub fn lambda_nu(bx: MomentumBox) -> f64 {
    BoxSums::compute(bx, NuPreparationSpec { n_m: 1, alpha: 1.0 }, false).lambda_nu
}

/// Sum over the box of 1/|nu| (enters the nuclear-position error bound).
pub fn inv_norm_sum(bx: MomentumBox) -> f64 {
    BoxSums::compute(bx, NuPreparationSpec { n_m: 1, alpha: 1.0 }, false).inv_norm
}

/// Success probability of the nested-box preparation of amplitudes 1/|nu|.
pub fn p_nu_success(bx: MomentumBox, spec: NuPreparationSpec) -> f64 {
    BoxSums::compute(bx, spec, false).p_success
}

/// One round of amplitude amplification: sin^2(3 arcsin sqrt(p)).
pub fn amplify(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability out of range: {p}")));
    }
    Ok((3.0 * p.sqrt().asin()).sin().powi(2))
}

/// The ceiling-quantized lambda_nu actually block encoded:
/// alpha * sum of ceil(M (2^{mu-2}/|nu|)^2) / (M 2^{2mu-4}).
pub fn lambda_nu_alpha(bx: MomentumBox, spec: NuPreparationSpec) -> f64 {
    spec.alpha * BoxSums::compute(bx, spec, false).lambda_nu_alpha_base
}

/// Exact eigenvalue-error contribution of the quantized 1/|nu| preparation:
/// (eta / (2 pi Omega^{1/3})) (eta - 1 + 2 lambda_zeta) * sum |1/|nu'|^2 - 1/|nu|^2|.
pub fn eps_m_exact(
    bx: MomentumBox,
    spec: NuPreparationSpec,
    eta: u64,
    lambda_zeta: u64,
    omega: f64,
) -> f64 {
    let sums = BoxSums::compute(bx, spec, false);
    eps_m_exact_from_sums(&sums, eta, lambda_zeta, omega)
}

pub fn eps_m_exact_from_sums(sums: &BoxSums, eta: u64, lambda_zeta: u64, omega: f64) -> f64 {
    let eta = eta as f64;
    (eta / (2.0 * PI * omega.cbrt())) * (eta - 1.0 + 2.0 * lambda_zeta as f64) * sums.eps_m_abs_sum
}

/// Proven bound on the preparation error at alpha = 1:
/// (2 eta / (2^{n_m} pi Omega^{1/3})) (eta - 1 + 2 lambda_zeta)
///   * (7 * 2^{n_p+1} - 9 n_p - 11 - 3 * 2^{-n_p}).
pub fn eps_m_bound(bx: MomentumBox, n_m: u32, eta: u64, lambda_zeta: u64, omega: f64) -> f64 {
    let eta = eta as f64;
    let n_p = bx.n_p as f64;
    let bracket = 7.0 * (n_p + 1.0).exp2() - 9.0 * n_p - 11.0 - 3.0 * (-n_p).exp2();
    (2.0 * eta / ((n_m as f64).exp2() * PI * omega.cbrt()))
        * (eta - 1.0 + 2.0 * lambda_zeta as f64)
        * bracket
}

/// Shell size |B_mu| = (2^mu - 1)^3 - (2^{mu-1} - 1)^3.
pub fn shell_size(mu: u32) -> u64 {
    let outer = (1u64 << mu) - 1;
    let inner = (1u64 << (mu - 1)) - 1;
    outer.pow(3) - inner.pow(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Naive triple-loop reference, deliberately independent of the
    /// symmetry-reduced implementation.
    pub fn brute_force(bx: MomentumBox, spec: NuPreparationSpec) -> BoxSums {
        let l = bx.half_width();
        let m = spec.m();
        let inv_m = 1.0 / m;
        let mut acc = [Neumaier::default(); N_SUMS];
        for x in -l..=l {
            for y in -l..=l {
                for z in -l..=l {
                    if x == 0 && y == 0 && z == 0 {
                        continue;
                    }
                    let terms =
                        point_terms(x.abs(), y.abs(), z.abs(), bx.n_p, m, inv_m, spec.alpha);
                    for (a, t) in acc.iter_mut().zip(terms) {
                        a.add(t);
                    }
                }
            }
        }
        BoxSums {
            lambda_nu: acc[0].value(),
            inv_norm: acc[1].value(),
            lambda_nu_alpha_base: acc[2].value(),
            p_success: acc[3].value(),
            eps_m_abs_sum: acc[4].value(),
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn smallest_box_sums_match_hand_counts() {
        // 26 points: 6 faces (r^2=1), 12 edges (r^2=2), 8 corners (r^2=3).
        let bx = MomentumBox::new(1).unwrap();
        let s = BoxSums::compute(bx, NuPreparationSpec::exact(4).unwrap(), false);
        assert_eq!(s.lambda_nu, 44.0 / 3.0);
        let expected_inv = 6.0 + 12.0 / 2f64.sqrt() + 8.0 / 3f64.sqrt();
        assert!(rel(s.inv_norm, expected_inv) < 1e-15);
    }

    #[test]
    fn symmetry_reduction_matches_brute_force() {
        for n_p in 1..=4u32 {
            let bx = MomentumBox::new(n_p).unwrap();
            for n_m in [4u32, 13] {
                let spec = NuPreparationSpec::exact(n_m).unwrap();
                let fast = BoxSums::compute(bx, spec, false);
                let slow = brute_force(bx, spec);
                assert!(rel(fast.lambda_nu, slow.lambda_nu) < 1e-12);
                assert!(rel(fast.inv_norm, slow.inv_norm) < 1e-12);
                assert!(rel(fast.lambda_nu_alpha_base, slow.lambda_nu_alpha_base) < 1e-12);
                assert!(rel(fast.p_success, slow.p_success) < 1e-12);
                assert!(rel(fast.eps_m_abs_sum, slow.eps_m_abs_sum) < 1e-12);
            }
        }
    }

    #[test]
    fn parallel_path_is_bitwise_identical() {
        let bx = MomentumBox::new(5).unwrap();
        let spec = NuPreparationSpec::exact(12).unwrap();
        let seq = BoxSums::compute(bx, spec, false);
        let par = BoxSums::compute(bx, spec, true);
        assert_eq!(seq.lambda_nu.to_bits(), par.lambda_nu.to_bits());
        assert_eq!(seq.inv_norm.to_bits(), par.inv_norm.to_bits());
        assert_eq!(seq.p_success.to_bits(), par.p_success.to_bits());
        assert_eq!(seq.eps_m_abs_sum.to_bits(), par.eps_m_abs_sum.to_bits());
    }

    #[test]
    fn mu_of_examples() {
        assert_eq!(mu_of(NuVector::new(1, 0, 0).unwrap()), 2);
        assert_eq!(mu_of(NuVector::new(3, -2, 1).unwrap()), 3);
        assert_eq!(mu_of(NuVector::new(8, 0, 0).unwrap()), 5);
        assert!(NuVector::new(0, 0, 0).is_err());
    }

    #[test]
    fn shells_partition_the_box() {
        for n_p in 1..=6u32 {
            let bx = MomentumBox::new(n_p).unwrap();
            let total: u64 = (2..=bx.n_mu()).map(shell_size).sum();
            let w = (2 * bx.half_width() + 1) as u64;
            assert_eq!(total, w * w * w - 1);
        }
        // Spot check the closed form against direct enumeration.
        let mut counts = std::collections::HashMap::new();
        let l = 7i64;
        for x in -l..=l {
            for y in -l..=l {
                for z in -l..=l {
                    if (x, y, z) == (0, 0, 0) {
                        continue;
                    }
                    let mu = mu_of(NuVector::new(x, y, z).unwrap());
                    *counts.entry(mu).or_insert(0u64) += 1;
                }
            }
        }
        for mu in 2..=4 {
            assert_eq!(counts[&mu], shell_size(mu));
        }
    }

    #[test]
    fn lambda_nu_grows_like_box_width() {
        // The sum scales as the box width times the cube-integral constant
        // (between 4 pi for the inscribed ball and ~15.35 for the full cube).
        for n_p in 1..=6u32 {
            let bx = MomentumBox::new(n_p).unwrap();
            let v = lambda_nu(bx);
            let width = bx.half_width() as f64;
            assert!(v > 0.0);
            assert!(v < 15.35 * width + 1.0, "n_p={n_p} v={v}");
            assert!(v > 4.0 * PI * width * 0.9, "n_p={n_p} v={v}");
        }
    }

    #[test]
    fn inv_norm_grows_like_box_area() {
        let a = inv_norm_sum(MomentumBox::new(4).unwrap());
        let b = inv_norm_sum(MomentumBox::new(5).unwrap());
        let ratio = b / a;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn success_probability_window() {
        for n_p in 3..=6u32 {
            for n_m in [10u32, 13] {
                let p = p_nu_success(
                    MomentumBox::new(n_p).unwrap(),
                    NuPreparationSpec::exact(n_m).unwrap(),
                );
                assert!(p > 0.2 && p < 0.35, "p({n_p},{n_m}) = {p}");
                assert!(amplify(p).unwrap() >= 0.95);
            }
        }
        // Frozen brute-force value for the smallest chemistry-like box; the
        // ceiling-free limit is lambda_nu / 2^{n_p + 6}, about 0.21 here
        // rather than the asymptotic ~0.24 of wide boxes.
        let p = p_nu_success(
            MomentumBox::new(3).unwrap(),
            NuPreparationSpec::exact(13).unwrap(),
        );
        assert!((p - 0.207675).abs() < 1e-6, "p(3,13) = {p}");
    }

    #[test]
    fn ceiling_only_raises_success_probability() {
        // The infinite-n_m limit is the ceiling-free value; finite n_m is larger.
        let bx = MomentumBox::new(3).unwrap();
        let limit = p_nu_success(bx, NuPreparationSpec::exact(24).unwrap());
        for n_m in [4u32, 8, 12] {
            let p = p_nu_success(bx, NuPreparationSpec::exact(n_m).unwrap());
            assert!(p >= limit - 1e-12, "n_m={n_m}: {p} < {limit}");
        }
    }

    #[test]
    fn amplify_special_values() {
        assert!((amplify(0.25).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(amplify(0.0).unwrap(), 0.0);
        // Independent algebraic route: sin(3 asin sqrt(p)) = sqrt(p)(3 - 4p),
        // so the amplified probability is p (3 - 4p)^2.
        for p in [0.05, 0.1, 0.2, 0.27, 0.33] {
            let v = amplify(p).unwrap();
            let alg = p * (3.0 - 4.0 * p) * (3.0 - 4.0 * p);
            assert!((v - alg).abs() < 1e-12, "p={p}: {v} vs {alg}");
        }
        let v = amplify(0.27).unwrap();
        assert!((v - 0.995328).abs() < 1e-6, "amplify(0.27) = {v}");
        assert!(amplify(1.2).is_err());
    }

    #[test]
    fn lambda_nu_alpha_converges_and_scales() {
        let bx = MomentumBox::new(2).unwrap();
        let exact = lambda_nu(bx);
        let coarse = lambda_nu_alpha(bx, NuPreparationSpec::exact(6).unwrap());
        let fine = lambda_nu_alpha(bx, NuPreparationSpec::exact(22).unwrap());
        assert!(coarse >= exact);
        assert!((fine - exact).abs() < 1e-4 * exact);
        // Linear in alpha.
        let half = lambda_nu_alpha(bx, NuPreparationSpec::new(6, 0.5).unwrap());
        assert_eq!(half, 0.5 * coarse);
    }

    #[test]
    fn eps_m_exact_below_bound() {
        for n_p in 2..=5u32 {
            let bx = MomentumBox::new(n_p).unwrap();
            for n_m in [8u32, 12, 14] {
                let spec = NuPreparationSpec::exact(n_m).unwrap();
                let exact = eps_m_exact(bx, spec, 46, 46, 1e5);
                let bound = eps_m_bound(bx, n_m, 46, 46, 1e5);
                assert!(exact <= bound, "n_p={n_p} n_m={n_m}: {exact} > {bound}");
                assert!(exact > 0.0);
            }
        }
    }

    #[test]
    fn eps_m_limits() {
        let bx = MomentumBox::new(3).unwrap();
        // Large register: quantization error vanishes.
        let tiny = eps_m_exact(bx, NuPreparationSpec::exact(30).unwrap(), 46, 46, 1e5);
        assert!(tiny < 1e-4);
        // eta = 1, lambda_zeta = 0 zeroes the prefactor.
        assert_eq!(eps_m_bound(bx, 10, 1, 0, 1e5), 0.0);
        // Direct substitution spot check of the bound.
        let b = eps_m_bound(MomentumBox::new(6).unwrap(), 13, 46, 46, 1e5);
        let expect = (2.0 * 46.0 / (8192.0 * PI * 1e5f64.cbrt()))
            * 137.0
            * (7.0 * 128.0 - 54.0 - 11.0 - 3.0 / 64.0);
        assert!(rel(b, expect) < 1e-14);
    }
}
