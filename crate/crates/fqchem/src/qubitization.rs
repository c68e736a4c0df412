//! The qubitization cost model: block-encoding normalization factors, the
//! per-step Toffoli breakdown, the error budget, phase-estimation step count,
//! the logical-qubit ledger, and parameter optimization.

use crate::arith::{self, EqualSuperpositionSpec};
use crate::error::{Error, Result};
use crate::momentum::{self, BoxSums, MomentumBox, NuPreparationSpec};
use crate::report::{Algorithm, BreakdownItem, ConfigSnapshot, CostModel, CostReport};
use crate::scenario::{ceil_log2, derive, DerivedGeometry, System};
use serde::{Deserialize, Serialize};

use std::f64::consts::{E, PI};

/// Free precision parameters of the qubitized walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitizationConfig {
    /// Bits of the inequality-test register for the 1/|nu| preparation.
    pub n_m: u32,
    /// Bits per component of the nuclear positions.
    pub n_r: u32,
    /// Bits of the rotation selecting between kinetic and potential terms.
    pub n_t: u32,
    /// Bits of the ancilla rotations in equal superposition preparations.
    pub b_r: u32,
    /// Whether the 1/|nu| preparation is amplitude amplified.
    pub amplitude_amplification: bool,
}

impl QubitizationConfig {
    pub fn a_amp(&self) -> u64 {
        if self.amplitude_amplification {
            3
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_m < 1 || self.n_r < 1 || self.n_t < 1 || self.b_r < 1 {
            return Err(Error::InvalidWidth(
                "all register widths must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// The block-encoding one-norms of the Hamiltonian components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSet {
    pub lambda_t: f64,
    pub lambda_t_prime: f64,
    pub lambda_u: f64,
    pub lambda_v: f64,
    /// Quantized one-norms actually realized by the block encoding (alpha = 1).
    pub lambda_u_1: f64,
    pub lambda_v_1: f64,
    pub lambda_nu: f64,
    pub lambda_nu_1: f64,
    pub p_eq: f64,
    pub lambda_effective: f64,
}

/// RMS energy error decomposition for the qubitization walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub eps_total: f64,
    pub eps_pha: f64,
    pub eps_m: f64,
    pub eps_r: f64,
    pub eps_t: f64,
}

impl ErrorBudget {
    pub fn satisfies_quadrature(&self) -> bool {
        self.eps_pha.powi(2) + (self.eps_m + self.eps_r + self.eps_t).powi(2)
            <= self.eps_total.powi(2) * (1.0 + 1e-12)
    }
}

/// Success probability of all equal-superposition preparations in one step:
/// Eq(3, 8) * Eq(eta + 2 lambda_zeta, b_r) * Eq(eta, b_r)^2.
pub fn p_eq(eta: u64, lambda_zeta: u64, b_r: u32) -> f64 {
    let w = arith::equal_superposition_success(EqualSuperpositionSpec { n: 3, b_r: 8 });
    let uv = arith::equal_superposition_success(EqualSuperpositionSpec {
        n: eta + 2 * lambda_zeta,
        b_r,
    });
    let ij = arith::equal_superposition_success(EqualSuperpositionSpec { n: eta, b_r });
    w * uv * ij * ij
}

/// Raw one-norms for a system over the given momentum-transfer box.
pub fn lambdas(
    eta: u64,
    lambda_zeta: u64,
    omega: f64,
    bx: MomentumBox,
    sums: &BoxSums,
    spec: NuPreparationSpec,
) -> Result<LambdaSet> {
    if omega <= 0.0 {
        return Err(Error::Domain("cell volume must be positive".into()));
    }
    if eta < 1 {
        return Err(Error::Domain("eta must be >= 1".into()));
    }
    let etaf = eta as f64;
    let n_p = bx.n_p() as f64;
    let om13 = omega.cbrt();
    let om23 = om13 * om13;
    let lambda_t = 6.0 * etaf * PI * PI * ((n_p - 1.0).exp2() - 1.0).powi(2) / om23;
    let lambda_t_prime = 6.0 * etaf * PI * PI * (2.0 * (n_p - 1.0)).exp2() / om23;
    let lambda_nu = sums.lambda_nu;
    let lambda_nu_1 = spec.alpha * sums.lambda_nu_alpha_base;
    let lambda_u = etaf * lambda_zeta as f64 * lambda_nu / (PI * om13);
    let lambda_v = etaf * (etaf - 1.0) * lambda_nu / (2.0 * PI * om13);
    let scale = lambda_nu_1 / lambda_nu;
    Ok(LambdaSet {
        lambda_t,
        lambda_t_prime,
        lambda_u,
        lambda_v,
        lambda_u_1: lambda_u * scale,
        lambda_v_1: lambda_v * scale,
        lambda_nu,
        lambda_nu_1,
        p_eq: 1.0,
        lambda_effective: 0.0,
    })
}

/// The effective one-norm of the full walk:
/// max(lambda_T' + lambda_U^1 + lambda_V^1,
///     (lambda_U^1 + lambda_V^1 / (1 - 1/eta)) / p) / P_eq,
/// where p is the (possibly amplified) 1/|nu| preparation success probability.
pub fn effective_lambda(
    set: &LambdaSet,
    eta: u64,
    p_nu: f64,
    p_eq_value: f64,
    amplified: bool,
) -> Result<f64> {
    if eta < 2 {
        return Err(Error::Domain(
            "eta = 1 makes the electron-pair channel singular; rejected".into(),
        ));
    }
    if !(p_nu > 0.0 && p_nu < 1.0) {
        return Err(Error::Domain(format!("p_nu must lie in (0,1), got {p_nu}")));
    }
    let p = if amplified {
        momentum::amplify(p_nu)?
    } else {
        p_nu
    };
    let branch_direct = set.lambda_t_prime + set.lambda_u_1 + set.lambda_v_1;
    let branch_retry = (set.lambda_u_1 + set.lambda_v_1 / (1.0 - 1.0 / eta as f64)) / p;
    Ok(branch_direct.max(branch_retry) / p_eq_value)
}

/// Labeled per-step Toffoli items of the walk.
pub fn step_cost(
    eta: u64,
    lambda_zeta: u64,
    geom: &DerivedGeometry,
    config: &QubitizationConfig,
) -> (Vec<BreakdownItem>, Vec<String>) {
    let mut flags = Vec::new();
    let n_p = geom.n_p as i64;
    let n_eta = geom.n_eta as i64;
    let n_etazeta = geom.n_etazeta as i64;
    let n_m = config.n_m as i64;
    let n_r = config.n_r as i64;
    let n_t = config.n_t as i64;
    let b_r = config.b_r as i64;
    let a_amp = config.a_amp() as i64;
    let lz = lambda_zeta as i64;

    let qrom = if lambda_zeta == 0 {
        flags.push("no nuclei: nuclear QROM and phase items are zero".into());
        0
    } else {
        lz + arith::qrom_erase_cost(lambda_zeta)
            .map(|c| c.get() as i64)
            .unwrap_or(0)
    };
    let r_phase = if lambda_zeta == 0 { 0 } else { 6 * n_p * n_r };

    let items: Vec<(&str, i64)> = vec![
        (
            "kinetic/potential selection preparation",
            2 * (n_t + 4 * n_etazeta + 2 * b_r - 12),
        ),
        ("electron-index superpositions", 14 * n_eta + 8 * b_r - 36),
        (
            "momentum-transfer state preparation",
            a_amp * (3 * n_p * n_p + 15 * n_p - 7 + 4 * n_m * (n_p + 1)),
        ),
        ("nuclear-position QROM and erasure", qrom),
        ("kinetic bit-index preparation", 2 * (2 * n_p + 2 * b_r - 7)),
        ("momentum register swaps", 12 * eta as i64 * n_p),
        ("kinetic selection", 5 * (n_p - 1) + 2),
        ("momentum-transfer additions", 24 * n_p),
        ("nuclear phase rotations", r_phase),
        ("selection logic", 18),
        ("reflection", n_etazeta + 2 * n_eta + 6 * n_p + n_m + 16),
    ];
    let mut out = Vec::with_capacity(items.len());
    for (label, v) in items {
        if v < 0 {
            flags.push(format!(
                "cost item '{label}' is negative ({v}) at these widths"
            ));
        }
        out.push(BreakdownItem {
            label: label.to_string(),
            count: v.max(0) as u64,
        });
    }
    (out, flags)
}

/// More accurate nuclear-phase item replacing the 6 n_p n_R summary term.
pub fn r_phase_cost_refined(n_p: u32, n_r: u32) -> u64 {
    let n_p = n_p as i64;
    let n_r = n_r as i64;
    let v = if n_r > n_p {
        3 * (2 * n_p * n_r - n_p * (n_p + 1) - 1)
    } else {
        3 * n_r * (n_r - 1)
    };
    v.max(0) as u64
}

/// How the preparation-error contribution to the budget is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EpsMMode {
    /// Proven closed-form bound at alpha = 1 (the default).
    #[default]
    Bound,
    /// Exact quantization-error sum, scanning the amplitude scale over the
    /// recommended window; typically ~30% of the bound.
    ExactTuned,
}

/// Error terms for a config, with the phase budget from the quadrature
/// constraint.
#[allow(clippy::too_many_arguments)]
pub fn error_terms(
    eta: u64,
    lambda_zeta: u64,
    omega: f64,
    bx: MomentumBox,
    sums: &BoxSums,
    config: &QubitizationConfig,
    lambda_effective: f64,
    eps_total: f64,
    mode: EpsMMode,
) -> Result<ErrorBudget> {
    let eps_m = match mode {
        EpsMMode::Bound => momentum::eps_m_bound(bx, config.n_m, eta, lambda_zeta, omega),
        EpsMMode::ExactTuned => {
            let m = (config.n_m as f64).exp2();
            (0..=6)
                .map(|i| {
                    let alpha = 1.0 - 3.0 / (2.0 * m) + (i as f64 / 6.0) / (2.0 * m);
                    let spec = NuPreparationSpec {
                        n_m: config.n_m,
                        alpha,
                    };
                    momentum::eps_m_exact(bx, spec, eta, lambda_zeta, omega)
                })
                .fold(f64::MAX, f64::min)
        }
    };
    let eps_r = eps_r_bound(eta, lambda_zeta, omega, sums.inv_norm, config.n_r);
    let eps_t = PI * lambda_effective / (config.n_t as f64).exp2();
    let rest = eps_m + eps_r + eps_t;
    if rest >= eps_total {
        return Err(Error::InfeasibleBudget(format!(
            "eps_M + eps_R + eps_T = {rest:.3e} >= target {eps_total:.3e}"
        )));
    }
    let eps_pha = (eps_total.powi(2) - rest.powi(2)).sqrt();
    Ok(ErrorBudget {
        eps_total,
        eps_pha,
        eps_m,
        eps_r,
        eps_t,
    })
}

/// eta * lambda_zeta * (sum 1/|nu|) / (2^{n_r} * Omega^{1/3}).
pub fn eps_r_bound(eta: u64, lambda_zeta: u64, omega: f64, inv_norm: f64, n_r: u32) -> f64 {
    eta as f64 * lambda_zeta as f64 * inv_norm / ((n_r as f64).exp2() * omega.cbrt())
}

/// Logical-qubit ledger for the qubitization walk.
pub fn qubit_count(
    eta: u64,
    geom: &DerivedGeometry,
    config: &QubitizationConfig,
    steps: u64,
) -> (u64, Vec<BreakdownItem>) {
    let n_p = geom.n_p as u64;
    let n_eta = geom.n_eta as u64;
    let n_etazeta = geom.n_etazeta as u64;
    let n_m = config.n_m as u64;
    let n_r = config.n_r as u64;
    let n_t = config.n_t as u64;
    let log_steps = ceil_log2(steps.max(2)) as u64;
    let nu_prep = 3 * (n_p + 1)
        + n_p
        + n_m
        + (3 * n_p + 2)
        + (2 * n_p + 1)
        + (3 * n_p * n_p + n_p + 1 + 4 * n_m * (n_p + 1))
        + 1
        + 2;
    // The 3 n_r nuclear-position output plus 2(n_r - 2) phasing temporaries
    // are not live at the same time as the 5 n_p + 1 addition workspace, so
    // only the maximum is kept.
    let r_side = if geom.lambda_zeta == 0 {
        0
    } else {
        (5 * n_r).saturating_sub(4)
    };
    let workspace = (5 * n_p + 1).max(r_side);
    let items: Vec<(&str, u64)> = vec![
        ("system momentum registers", 3 * eta * n_p),
        ("phase estimation control", 2 * log_steps - 1),
        ("phase gradient state", (n_r + 1).max(n_t)),
        ("catalytic T state", 1),
        ("kinetic/potential selector", 1),
        ("potential-channel superposition", n_etazeta + 3),
        ("selection flags", 3),
        ("electron-index superpositions", 2 * n_eta + 5),
        ("momentum-transfer preparation", nu_prep),
        ("component superposition", 4),
        ("kinetic bit-index registers", 2 * n_p),
        ("arithmetic workspace", workspace),
        ("arithmetic overflow", 6),
        ("time-direction control", 1),
    ];
    let ledger: Vec<BreakdownItem> = items
        .into_iter()
        .map(|(label, count)| BreakdownItem {
            label: label.to_string(),
            count,
        })
        .collect();
    let total = ledger.iter().map(|i| i.count).sum();
    (total, ledger)
}

/// Everything needed to price one configuration.
struct Pricing<'a> {
    system: &'a System,
    geom: DerivedGeometry,
    bx: MomentumBox,
}

impl<'a> Pricing<'a> {
    fn new(system: &'a System) -> Result<Self> {
        let geom = derive(system)?;
        Ok(Self {
            system,
            geom,
            bx: geom.spectral_box(),
        })
    }

    fn sums(&self, n_m: u32) -> BoxSums {
        momentum::cached_sums(self.bx, n_m)
    }
}

fn breakdown_total(items: &[BreakdownItem]) -> u64 {
    items.iter().map(|i| i.count).sum()
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    system: &System,
    geom: &DerivedGeometry,
    config: &QubitizationConfig,
    lambda_set: LambdaSet,
    budget: ErrorBudget,
    steps: u64,
    model: CostModel,
    mut flags: Vec<String>,
) -> CostReport {
    let (breakdown, step_flags) = step_cost(system.eta, geom.lambda_zeta, geom, config);
    flags.extend(step_flags);
    flags.push(
        "phase-estimation control preparation overhead of order log(1/eps) is excluded from totals"
            .into(),
    );
    flags.push(
        "the potential-channel register is sized for eta + 2*lambda_zeta basis states".into(),
    );
    let per_step_total = breakdown_total(&breakdown);
    let (logical_qubits, qubit_ledger) = qubit_count(system.eta, geom, config, steps);
    CostReport {
        algorithm: Algorithm::Qubitization,
        cost_model: model,
        steps,
        per_step_breakdown: breakdown,
        per_step_total,
        total_toffolis: steps as u128 * per_step_total as u128,
        logical_qubits,
        qubit_ledger,
        config: ConfigSnapshot::Qubitization(*config),
        lambdas: Some(lambda_set),
        budget: Some(budget),
        interaction_budget: None,
        flags,
    }
}

/// Price one explicit configuration under the rigorous error model.
pub fn total_cost(system: &System, config: &QubitizationConfig) -> Result<CostReport> {
    config.validate()?;
    let pricing = Pricing::new(system)?;
    total_cost_inner(&pricing, config, CostModel::Rigorous)
}

fn total_cost_inner(
    pricing: &Pricing,
    config: &QubitizationConfig,
    model: CostModel,
) -> Result<CostReport> {
    let system = pricing.system;
    let geom = pricing.geom;
    let eps = system.target_error_hartree;
    let sums = pricing.sums(config.n_m);
    let spec = NuPreparationSpec {
        n_m: config.n_m,
        alpha: 1.0,
    };
    let mut set = lambdas(
        system.eta,
        geom.lambda_zeta,
        system.omega_bohr3,
        pricing.bx,
        &sums,
        spec,
    )?;
    let p_eq_value = p_eq(system.eta, geom.lambda_zeta, config.b_r);
    set.p_eq = p_eq_value;
    set.lambda_effective = effective_lambda(
        &set,
        system.eta,
        sums.p_success,
        p_eq_value,
        config.amplitude_amplification,
    )?;
    let budget = error_terms(
        system.eta,
        geom.lambda_zeta,
        system.omega_bohr3,
        pricing.bx,
        &sums,
        config,
        set.lambda_effective,
        eps,
        EpsMMode::Bound,
    )?;
    let steps = (PI * set.lambda_effective / (2.0 * budget.eps_pha)).ceil() as u64;
    Ok(build_report(
        system,
        &geom,
        config,
        set,
        budget,
        steps,
        model,
        Vec::new(),
    ))
}

/// Optional pinned parameters for [`optimize`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overrides {
    pub n_m: Option<u32>,
    pub n_r: Option<u32>,
    pub n_t: Option<u32>,
    pub b_r: Option<u32>,
    pub amplitude_amplification: Option<bool>,
}

/// Grid-search the free parameters under the rigorous error model: each
/// register seed comes from an eps/10 allocation of the target error, the
/// grid spans four bits either side, errors are re-substituted per candidate,
/// and the feasible candidate with the least Toffolis wins (ties broken by
/// lexicographic config order).
pub fn optimize(
    system: &System,
    overrides: &Overrides,
) -> Result<(QubitizationConfig, CostReport)> {
    let pricing = Pricing::new(system)?;
    let eps = system.target_error_hartree;
    let seed = seed_config(system)?;

    let axis = |seed: u32, pin: Option<u32>| -> Vec<u32> {
        match pin {
            Some(v) => vec![v],
            None => (seed.saturating_sub(4).max(1)..=seed + 4).collect(),
        }
    };
    let n_m_axis = axis(seed.n_m, overrides.n_m);
    let n_r_axis = axis(seed.n_r, overrides.n_r);
    let n_t_axis = axis(seed.n_t, overrides.n_t);
    let b_r_axis = match overrides.b_r {
        Some(v) => vec![v],
        None => vec![6, 7, 8],
    };
    let aa_axis = match overrides.amplitude_amplification {
        Some(v) => vec![v],
        None => vec![false, true],
    };

    let mut best: Option<(u128, QubitizationConfig, CostReport)> = None;
    for &n_m in &n_m_axis {
        for &n_r in &n_r_axis {
            for &n_t in &n_t_axis {
                for &b_r in &b_r_axis {
                    for &aa in &aa_axis {
                        let config = QubitizationConfig {
                            n_m,
                            n_r,
                            n_t,
                            b_r,
                            amplitude_amplification: aa,
                        };
                        let Ok(report) = total_cost_inner(&pricing, &config, CostModel::Rigorous)
                        else {
                            continue;
                        };
                        let key = report.total_toffolis;
                        let better = match &best {
                            None => true,
                            Some((t, c, _)) => key < *t || (key == *t && config < *c),
                        };
                        if better {
                            best = Some((key, config, report));
                        }
                    }
                }
            }
        }
    }
    best.map(|(_, c, r)| (c, r)).ok_or_else(|| {
        Error::InfeasibleBudget(format!(
            "no feasible configuration in the search grid (eps = {eps:.3e}, seeds n_m={}, n_r={}, n_t={})",
            seed.n_m, seed.n_r, seed.n_t
        ))
    })
}

/// The eps/10 register allocation that seeds the optimizer grid.
pub fn seed_config(system: &System) -> Result<QubitizationConfig> {
    let pricing = Pricing::new(system)?;
    let geom = pricing.geom;
    let target = system.target_error_hartree / 10.0;
    let n_m = seed_bits(|n| {
        momentum::eps_m_bound(
            pricing.bx,
            n,
            system.eta,
            geom.lambda_zeta,
            system.omega_bohr3,
        ) <= target
    });
    let sums = pricing.sums(n_m);
    let n_r = if geom.lambda_zeta == 0 {
        3
    } else {
        seed_bits(|n| {
            eps_r_bound(
                system.eta,
                geom.lambda_zeta,
                system.omega_bohr3,
                sums.inv_norm,
                n,
            ) <= target
        })
    };
    // One fixed-point pass: lambda does not depend on n_t, so seeding n_t from
    // the lambda at the seed registers is exact.
    let spec = NuPreparationSpec { n_m, alpha: 1.0 };
    let mut set = lambdas(
        system.eta,
        geom.lambda_zeta,
        system.omega_bohr3,
        pricing.bx,
        &sums,
        spec,
    )?;
    set.p_eq = p_eq(system.eta, geom.lambda_zeta, 7);
    let lambda = effective_lambda(&set, system.eta, sums.p_success, set.p_eq, true)?;
    let n_t = seed_bits(|n| PI * lambda / (n as f64).exp2() <= target);
    Ok(QubitizationConfig {
        n_m,
        n_r,
        n_t,
        b_r: 7,
        amplitude_amplification: true,
    })
}

fn seed_bits(ok: impl Fn(u32) -> bool) -> u32 {
    for n in 1..=62 {
        if ok(n) {
            return n;
        }
    }
    62
}

/// Register-error share used by the calibrated sizing: five bits below the
/// total target.
pub(crate) const CALIBRATED_SHARE: f64 = 1.0 / 32.0;

/// Deterministic register sizing that reproduces the published reference
/// resource counts for the benchmark molecules: an inequality register scaled
/// to the squared box width, nuclear-position and rotation registers from a
/// fixed share of the error target, and the full target spent on phase
/// estimation.
pub fn calibrated_config(system: &System) -> Result<QubitizationConfig> {
    let geom = derive(system)?;
    let bx = geom.spectral_box();
    let sums = momentum::cached_sums(bx, 8);
    let target = system.target_error_hartree * CALIBRATED_SHARE;
    let n_m = 2 * geom.n_spectral + 5;
    let n_r = if geom.lambda_zeta == 0 {
        3
    } else {
        seed_bits(|n| {
            system.eta as f64 * geom.lambda_zeta as f64 * sums.inv_norm
                / ((n as f64).exp2() * system.omega_bohr3)
                <= target
        })
    };
    let lambda_plain = plain_lambda(system, &geom, &sums);
    let n_t = seed_bits(|n| PI * lambda_plain / (n as f64).exp2() <= target);
    Ok(QubitizationConfig {
        n_m,
        n_r,
        n_t,
        b_r: 7,
        amplitude_amplification: true,
    })
}

fn plain_lambda(system: &System, geom: &DerivedGeometry, sums: &BoxSums) -> f64 {
    let etaf = system.eta as f64;
    let om13 = system.omega_bohr3.cbrt();
    let n_b = geom.n_spectral as f64;
    let lambda_t = 6.0 * etaf * PI * PI * ((n_b - 1.0).exp2() - 1.0).powi(2) / (om13 * om13);
    let lambda_u = etaf * geom.lambda_zeta as f64 * sums.lambda_nu / (PI * om13);
    let lambda_v = etaf * (etaf - 1.0) * sums.lambda_nu / (2.0 * PI * om13);
    lambda_t + lambda_u + lambda_v
}

/// Price a system under the table-calibrated model.
pub fn calibrated_cost(system: &System, overrides: &Overrides) -> Result<CostReport> {
    let geom = derive(system)?;
    let bx = geom.spectral_box();
    let base = calibrated_config(system)?;
    let config = QubitizationConfig {
        n_m: overrides.n_m.unwrap_or(base.n_m),
        n_r: overrides.n_r.unwrap_or(base.n_r),
        n_t: overrides.n_t.unwrap_or(base.n_t),
        b_r: overrides.b_r.unwrap_or(base.b_r),
        amplitude_amplification: overrides
            .amplitude_amplification
            .unwrap_or(base.amplitude_amplification),
    };
    config.validate()?;
    let spec = NuPreparationSpec {
        n_m: config.n_m,
        alpha: 1.0,
    };
    let sums = momentum::cached_sums(bx, config.n_m);
    let mut set = lambdas(
        system.eta,
        geom.lambda_zeta,
        system.omega_bohr3,
        bx,
        &sums,
        spec,
    )?;
    set.p_eq = p_eq(system.eta, geom.lambda_zeta, config.b_r);
    let lambda_plain = plain_lambda(system, &geom, &sums);
    set.lambda_effective = lambda_plain;
    let eps = system.target_error_hartree;
    let steps = (PI * lambda_plain / (2.0 * eps)).ceil() as u64;
    let budget = ErrorBudget {
        eps_total: eps,
        eps_pha: eps,
        eps_m: momentum::eps_m_bound(
            bx,
            config.n_m,
            system.eta,
            geom.lambda_zeta,
            system.omega_bohr3,
        ),
        eps_r: eps_r_bound(
            system.eta,
            geom.lambda_zeta,
            system.omega_bohr3,
            sums.inv_norm,
            config.n_r,
        ),
        eps_t: PI * lambda_plain / (config.n_t as f64).exp2(),
    };
    let flags = vec![
        "calibrated model: the full error target is spent on phase estimation and the effective \
         lambda omits preparation-success corrections"
            .into(),
        "calibrated model: register sizing follows the published reference tables; the proven \
         register error bounds are reported informationally and may exceed the target"
            .into(),
    ];
    Ok(build_report(
        system,
        &geom,
        &config,
        set,
        budget,
        steps,
        CostModel::Calibrated,
        flags,
    ))
}

/// Dispatch on the cost model.
pub fn estimate(system: &System, model: CostModel, overrides: &Overrides) -> Result<CostReport> {
    match model {
        CostModel::Calibrated => calibrated_cost(system, overrides),
        CostModel::Rigorous => optimize(system, overrides).map(|(_, r)| r),
    }
}

/// Asymptotic check helper: natural-log slope of total Toffolis against eta.
pub fn eta_scaling_exponent(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// e as used by downstream modules (re-exported for convenience).
pub const EULER: f64 = E;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::preset;

    fn ethylene() -> System {
        preset("ethylene_carbonate").unwrap()
    }

    #[test]
    fn lambda_ratio_identities() {
        let bx = MomentumBox::new(1).unwrap();
        let spec = NuPreparationSpec::exact(8).unwrap();
        let sums = BoxSums::compute(bx, spec, false);
        let set = lambdas(2, 2, 1.0, bx, &sums, spec).unwrap();
        // lambda_T = 6 * 2 * pi^2 * (2^0 - 1)^2 = 0 at n_p = 1; use prime form.
        assert!((set.lambda_t_prime - 12.0 * PI * PI).abs() < 1e-9);
        // lambda_U / lambda_V = 2 lambda_zeta / (eta - 1).
        assert!((set.lambda_u / set.lambda_v - 4.0).abs() < 1e-12);
        // lambda_U with the exact 26-point lattice sum.
        let expect_u = 2.0 * 2.0 * (44.0 / 3.0) / PI;
        assert!((set.lambda_u - expect_u).abs() < 1e-9);
    }

    #[test]
    fn p_eq_bounds_and_power_of_two_collapse() {
        // Generic lower bound from the per-factor floor.
        let floor8 = crate::arith::equal_superposition_lower_bound(8);
        let floor7 = crate::arith::equal_superposition_lower_bound(7);
        let v = p_eq(46, 46, 7);
        assert!(v >= floor8 * floor7.powi(3));
        assert!(v <= 1.0);
        // Power-of-two register sizes prepare exactly, so only the
        // three-state factor remains.
        let collapsed = p_eq(64, 96, 7); // eta and eta + 2 lambda_zeta both powers of two
        let w_only =
            crate::arith::equal_superposition_success(crate::arith::EqualSuperpositionSpec {
                n: 3,
                b_r: 8,
            });
        assert!((collapsed - w_only).abs() < 1e-12);
    }

    #[test]
    fn prime_to_plain_lambda_t_ratio() {
        let bx = MomentumBox::new(4).unwrap();
        let spec = NuPreparationSpec::exact(8).unwrap();
        let sums = BoxSums::compute(bx, spec, false);
        let set = lambdas(10, 10, 50.0, bx, &sums, spec).unwrap();
        let n_p = 4.0f64;
        let expect = ((n_p - 1.0).exp2() / ((n_p - 1.0).exp2() - 1.0)).powi(2);
        assert!((set.lambda_t_prime / set.lambda_t - expect).abs() < 1e-12);
    }

    #[test]
    fn effective_lambda_limits() {
        let bx = MomentumBox::new(3).unwrap();
        let spec = NuPreparationSpec::exact(12).unwrap();
        let sums = BoxSums::compute(bx, spec, false);
        let set = lambdas(46, 46, 1e5, bx, &sums, spec).unwrap();
        // With p -> 1 and P_eq -> 1 the direct branch dominates.
        let v = effective_lambda(&set, 46, 0.999_999, 1.0, false).unwrap();
        let direct = set.lambda_t_prime + set.lambda_u_1 + set.lambda_v_1;
        assert!((v - direct).abs() / direct < 1e-3);
        // Amplification can only lower or preserve lambda.
        let p = sums.p_success;
        let with = effective_lambda(&set, 46, p, 1.0, true).unwrap();
        let without = effective_lambda(&set, 46, p, 1.0, false).unwrap();
        assert!(with <= without);
    }

    #[test]
    fn swap_item_value() {
        let sys = ethylene();
        let geom = derive(&sys).unwrap();
        let config = QubitizationConfig {
            n_m: 17,
            n_r: 24,
            n_t: 33,
            b_r: 7,
            amplitude_amplification: true,
        };
        let (items, flags) = step_cost(sys.eta, geom.lambda_zeta, &geom, &config);
        assert!(flags.is_empty());
        let swaps = items.iter().find(|i| i.label.contains("swaps")).unwrap();
        assert_eq!(swaps.count, 12 * 46 * geom.n_p as u64);
    }

    #[test]
    fn amplification_triples_exactly_one_item() {
        let sys = ethylene();
        let geom = derive(&sys).unwrap();
        let mut config = QubitizationConfig {
            n_m: 17,
            n_r: 24,
            n_t: 33,
            b_r: 7,
            amplitude_amplification: false,
        };
        let (off, _) = step_cost(sys.eta, geom.lambda_zeta, &geom, &config);
        config.amplitude_amplification = true;
        let (on, _) = step_cost(sys.eta, geom.lambda_zeta, &geom, &config);
        let mut diffs = 0;
        for (a, b) in off.iter().zip(&on) {
            if a.count != b.count {
                diffs += 1;
                assert_eq!(b.count, 3 * a.count);
            }
        }
        assert_eq!(diffs, 1);
    }

    #[test]
    fn refined_r_phase_cases() {
        // n_r <= n_p: 3 n_r (n_r - 1).
        assert_eq!(r_phase_cost_refined(7, 5), 3 * 5 * 4);
        // n_r > n_p: 3 (2 n_p n_r - n_p(n_p+1) - 1) and never above 6 n_p n_r.
        assert_eq!(r_phase_cost_refined(5, 20), 3 * (200 - 30 - 1));
        assert!(r_phase_cost_refined(5, 20) < 6 * 5 * 20);
    }

    #[test]
    fn budget_infeasible_when_register_errors_exceed_target() {
        let sys = ethylene();
        let config = QubitizationConfig {
            n_m: 4,
            n_r: 4,
            n_t: 4,
            b_r: 7,
            amplitude_amplification: true,
        };
        assert!(matches!(
            total_cost(&sys, &config),
            Err(Error::InfeasibleBudget(_))
        ));
    }

    #[test]
    fn tuned_preparation_error_loosens_the_budget() {
        let sys = ethylene();
        let geom = derive(&sys).unwrap();
        let bx = geom.spectral_box();
        let config = QubitizationConfig {
            n_m: 28,
            n_r: 36,
            n_t: 30,
            b_r: 7,
            amplitude_amplification: true,
        };
        let sums = momentum::cached_sums(bx, config.n_m);
        let args = (sys.eta, geom.lambda_zeta, sys.omega_bohr3);
        let bound = error_terms(
            args.0,
            args.1,
            args.2,
            bx,
            &sums,
            &config,
            2e4,
            0.0016,
            EpsMMode::Bound,
        )
        .unwrap();
        let tuned = error_terms(
            args.0,
            args.1,
            args.2,
            bx,
            &sums,
            &config,
            2e4,
            0.0016,
            EpsMMode::ExactTuned,
        )
        .unwrap();
        assert!(tuned.eps_m < 0.45 * bound.eps_m);
        assert!(tuned.eps_pha > bound.eps_pha);
    }

    #[test]
    fn doubled_phase_budget_halves_steps() {
        let mut sys = ethylene();
        let config = calibrated_config(&sys).unwrap();
        let r1 = calibrated_cost(&sys, &Overrides::default()).unwrap();
        sys.target_error_hartree *= 2.0;
        let r2 = calibrated_cost(&sys, &Overrides::default()).unwrap();
        let ratio = r1.steps as f64 / r2.steps as f64;
        assert!((ratio - 2.0).abs() < 0.02, "ratio {ratio}");
        let _ = config;
    }

    #[test]
    fn calibrated_reproduces_reference_row() {
        let sys = ethylene();
        let report = calibrated_cost(&sys, &Overrides::default()).unwrap();
        let t = report.total_toffolis as f64;
        assert!((t / 1.7e11 - 1.0).abs() < 0.10, "total {t:.3e}");
        let q = report.logical_qubits as f64;
        assert!((q / 2021.0 - 1.0).abs() < 0.02, "qubits {q}");
    }

    #[test]
    fn optimizer_respects_overrides() {
        let mut sys = ethylene();
        sys.num_plane_waves = 1 << 12;
        let (best, _) = optimize(&sys, &Overrides::default()).unwrap();
        let (pinned, _) = optimize(
            &sys,
            &Overrides {
                n_m: Some(best.n_m),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(pinned, best);
    }

    #[test]
    fn optimizer_output_is_feasible_and_at_least_as_good_as_seed() {
        let mut sys = ethylene();
        sys.num_plane_waves = 1 << 12;
        let (_, report) = optimize(&sys, &Overrides::default()).unwrap();
        let budget = report.budget.unwrap();
        assert!(budget.satisfies_quadrature());
        assert!(budget.eps_pha > 0.0);
        // The eps/10 seed allocation is in the grid, so the optimum can only
        // be at least as cheap.
        let seeded = total_cost(&sys, &seed_config(&sys).unwrap()).unwrap();
        assert!(report.total_toffolis <= seeded.total_toffolis);
    }
}
