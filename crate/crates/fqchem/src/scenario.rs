//! System definitions, derived geometry, and the built-in material and
//! molecule presets used by the reproduction targets.

use crate::error::{Error, Result};
use crate::momentum::MomentumBox;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A nuclear species: atomic number and how many such nuclei the cell holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuclearSpecies {
    pub zeta: u32,
    pub count: u32,
}

impl NuclearSpecies {
    pub fn new(zeta: u32, count: u32) -> Result<Self> {
        if zeta < 1 || count < 1 {
            return Err(Error::InvalidSystem(
                "species need zeta >= 1 and count >= 1".into(),
            ));
        }
        Ok(Self { zeta, count })
    }
}

/// The simulated scenario: electrons, nuclei, cell volume, basis size, and
/// the target RMS energy error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub eta: u64,
    #[serde(default)]
    pub species: Vec<NuclearSpecies>,
    pub omega_bohr3: f64,
    pub num_plane_waves: u64,
    pub target_error_hartree: f64,
}

impl System {
    pub fn new(
        eta: u64,
        species: Vec<NuclearSpecies>,
        omega_bohr3: f64,
        num_plane_waves: u64,
        target_error_hartree: f64,
    ) -> Result<Self> {
        let s = Self {
            eta,
            species,
            omega_bohr3,
            num_plane_waves,
            target_error_hartree,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta < 2 {
            return Err(Error::InvalidSystem(format!(
                "eta must be >= 2 (single-electron systems are rejected), got {}",
                self.eta
            )));
        }
        if self.omega_bohr3.is_nan() || self.omega_bohr3 <= 0.0 {
            return Err(Error::InvalidSystem("cell volume must be positive".into()));
        }
        if self.num_plane_waves < 8 {
            return Err(Error::InvalidSystem("need at least 8 plane waves".into()));
        }
        if self.target_error_hartree.is_nan() || self.target_error_hartree <= 0.0 {
            return Err(Error::InvalidSystem("target error must be positive".into()));
        }
        Ok(())
    }

    /// Total nuclear charge sum over species.
    pub fn lambda_zeta(&self) -> u64 {
        self.species
            .iter()
            .map(|s| s.zeta as u64 * s.count as u64)
            .sum()
    }

    /// Number of nuclei.
    pub fn num_nuclei(&self) -> u64 {
        self.species.iter().map(|s| s.count as u64).sum()
    }

    pub fn is_charge_neutral(&self) -> bool {
        self.lambda_zeta() == self.eta
    }

    /// Jellium: no nuclei, so the electron-nucleus channel vanishes.
    pub fn jellium(eta: u64, omega_bohr3: f64, num_plane_waves: u64, eps: f64) -> Result<Self> {
        Self::new(eta, Vec::new(), omega_bohr3, num_plane_waves, eps)
    }
}

/// Build a system from a Wigner-Seitz radius instead of a cell volume:
/// Omega = (4 pi / 3) r_s^3 eta.
pub fn from_rs(
    eta: u64,
    r_s: f64,
    species: Vec<NuclearSpecies>,
    num_plane_waves: u64,
    eps: f64,
) -> Result<System> {
    if r_s.is_nan() || r_s <= 0.0 {
        return Err(Error::InvalidSystem("r_s must be positive".into()));
    }
    let omega = (4.0 * PI / 3.0) * r_s.powi(3) * eta as f64;
    System::new(eta, species, omega, num_plane_waves, eps)
}

/// Geometry and register widths derived from a [`System`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedGeometry {
    /// Bits per momentum component, ceil(log2(N^{1/3} + 1)).
    pub n_p: u32,
    /// Effective cube root after padding to the register size, 2^{n_p} - 1.
    pub n_eff_cuberoot: u64,
    /// Bits checked by the spectral sums: the requested basis spans momentum
    /// transfers up to N^{1/3} - 1, covered by a box with parameter
    /// ceil(log2 N^{1/3}).
    pub n_spectral: u32,
    pub n_eta: u32,
    pub n_etazeta: u32,
    pub lambda_zeta: u64,
    /// Wigner-Seitz radius (3 Omega / 4 pi eta)^{1/3}, in Bohr.
    pub r_s: f64,
    /// Spatial resolution (Omega / N)^{1/3}, in Bohr.
    pub delta: f64,
    /// System register size 3 eta n_p.
    pub n_s: u64,
}

impl DerivedGeometry {
    /// Momentum-transfer box whose sums define the block-encoding norms for
    /// the requested basis.
    pub fn spectral_box(&self) -> MomentumBox {
        MomentumBox::new(self.n_spectral).expect("validated at derive time")
    }

    /// Box padded to the full arithmetic register width.
    pub fn register_box(&self) -> MomentumBox {
        MomentumBox::new(self.n_p).expect("validated at derive time")
    }
}

/// Exact integer cube root when `n` is a perfect cube, else the real root.
pub fn cube_root(n: u64) -> f64 {
    let r = (n as f64).cbrt().round() as u64;
    if r > 0 && r.checked_pow(3) == Some(n) {
        r as f64
    } else {
        (n as f64).cbrt()
    }
}

/// Derive register widths and geometry for a system.
pub fn derive(system: &System) -> Result<DerivedGeometry> {
    system.validate()?;
    let cbrt = cube_root(system.num_plane_waves);
    let n_p = (cbrt + 1.0).log2().ceil() as u32;
    let n_p = n_p.max(2);
    let n_spectral = (cbrt.log2().ceil() as u32).max(1).min(n_p);
    let lambda_zeta = system.lambda_zeta();
    let n_eta = ceil_log2(system.eta);
    let n_etazeta = ceil_log2(system.eta + 2 * lambda_zeta);
    let omega = system.omega_bohr3;
    Ok(DerivedGeometry {
        n_p,
        n_eff_cuberoot: (1u64 << n_p) - 1,
        n_spectral,
        n_eta,
        n_etazeta,
        lambda_zeta,
        r_s: (3.0 * omega / (4.0 * PI * system.eta as f64)).cbrt(),
        delta: (omega / system.num_plane_waves as f64).cbrt(),
        n_s: 3 * system.eta * n_p as u64,
    })
}

pub fn ceil_log2(n: u64) -> u32 {
    n.next_power_of_two().trailing_zeros()
}

/// A named preset scenario. Volumes are conventional-cell values in Bohr^3.
#[derive(Debug, Clone, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub system: System,
}

const DEFAULT_N: u64 = 1 << 18;
const DEFAULT_EPS: f64 = 0.0016;

fn sp(list: &[(u32, u32)]) -> Vec<NuclearSpecies> {
    list.iter()
        .map(|&(zeta, count)| NuclearSpecies { zeta, count })
        .collect()
}

/// All built-in presets: eight conventional-cell materials (total-electron
/// and valence variants), the two benchmark molecules, and jellium.
pub fn presets() -> Vec<Preset> {
    let mk = |name, description, eta, species: Vec<NuclearSpecies>, omega| Preset {
        name,
        description,
        system: System {
            eta,
            species,
            omega_bohr3: omega,
            num_plane_waves: DEFAULT_N,
            target_error_hartree: DEFAULT_EPS,
        },
    };
    vec![
        mk(
            "lithium",
            "metallic lithium, bcc conventional cell",
            6,
            sp(&[(3, 2)]),
            284.94,
        ),
        mk(
            "lithium_valence",
            "metallic lithium, valence electrons only",
            2,
            sp(&[(1, 2)]),
            284.94,
        ),
        mk(
            "potassium",
            "metallic potassium, bcc conventional cell",
            38,
            sp(&[(19, 2)]),
            961.67,
        ),
        mk(
            "potassium_valence",
            "metallic potassium, valence electrons only",
            2,
            sp(&[(1, 2)]),
            961.67,
        ),
        mk(
            "diamond",
            "diamond, cubic conventional cell",
            48,
            sp(&[(6, 8)]),
            307.04,
        ),
        mk(
            "diamond_valence",
            "diamond, valence electrons only",
            32,
            sp(&[(4, 8)]),
            307.04,
        ),
        mk(
            "silicon",
            "crystalline silicon, diamond-cubic cell",
            112,
            sp(&[(14, 8)]),
            1080.43,
        ),
        mk(
            "silicon_valence",
            "crystalline silicon, valence electrons only",
            32,
            sp(&[(4, 8)]),
            1080.43,
        ),
        mk(
            "feo",
            "iron(II) oxide, NaCl-structure cell",
            136,
            sp(&[(26, 4), (8, 4)]),
            539.84,
        ),
        mk(
            "feo_valence",
            "iron(II) oxide, valence electrons only",
            52,
            sp(&[(7, 4), (6, 4)]),
            539.84,
        ),
        mk(
            "coo",
            "cobalt oxide, NaCl-structure cell",
            140,
            sp(&[(27, 4), (8, 4)]),
            522.81,
        ),
        mk(
            "coo_valence",
            "cobalt oxide, valence electrons only",
            60,
            sp(&[(9, 4), (6, 4)]),
            522.81,
        ),
        mk(
            "alas",
            "aluminium arsenide, zincblende cell",
            184,
            sp(&[(13, 4), (33, 4)]),
            1197.86,
        ),
        mk(
            "alas_valence",
            "aluminium arsenide, valence electrons only",
            32,
            sp(&[(3, 4), (5, 4)]),
            1197.86,
        ),
        mk(
            "inp",
            "indium phosphide, zincblende cell",
            256,
            sp(&[(49, 4), (15, 4)]),
            1364.93,
        ),
        mk(
            "inp_valence",
            "indium phosphide, valence electrons only",
            32,
            sp(&[(3, 4), (5, 4)]),
            1364.93,
        ),
        mk(
            "ethylene_carbonate",
            "ethylene carbonate molecule (C3H4O3) in a 10^5 Bohr^3 cell",
            46,
            sp(&[(6, 3), (1, 4), (8, 3)]),
            1e5,
        ),
        mk(
            "lipf6",
            "LiPF6 molecule in a 10^5 Bohr^3 cell",
            72,
            sp(&[(3, 1), (15, 1), (9, 6)]),
            1e5,
        ),
        mk(
            "jellium",
            "uniform electron gas (no nuclei)",
            54,
            Vec::new(),
            1e5,
        ),
    ]
}

pub fn preset(name: &str) -> Result<System> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.system)
        .ok_or_else(|| Error::Parse(format!("unknown preset '{name}'")))
}

/// Reference Wigner-Seitz radii (total, valence) for the material presets.
pub const WIGNER_SEITZ_REFERENCE: [(&str, f64, f64); 8] = [
    ("lithium", 2.25, 3.24),
    ("potassium", 1.82, 4.86),
    ("diamond", 1.15, 1.32),
    ("silicon", 1.32, 2.01),
    ("feo", 0.98, 1.35),
    ("coo", 0.96, 1.28),
    ("alas", 1.16, 2.08),
    ("inp", 1.08, 2.17),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_matches_hand_computation() {
        let s = System::new(46, sp(&[(1, 46)]), 1e5, 1 << 21, 0.0016).unwrap();
        let g = derive(&s).unwrap();
        assert_eq!(g.n_p, 8); // ceil(log2(128 + 1))
        assert_eq!(g.n_spectral, 7);
        assert_eq!(g.n_s, 3 * 46 * 8);
        assert_eq!(g.n_eff_cuberoot, 255);
    }

    #[test]
    fn delta_example() {
        let s = System::new(46, vec![], 1e5, 1 << 18, 0.0016).unwrap();
        let g = derive(&s).unwrap();
        assert!((g.delta - (1e5 / 262144.0f64).cbrt()).abs() < 1e-12);
        assert!((g.delta - 0.7253).abs() < 1e-3);
    }

    #[test]
    fn rs_round_trip() {
        let s = from_rs(54, 10.0, vec![], 1 << 15, 1e-3).unwrap();
        assert!((s.omega_bohr3 - (4.0 * PI / 3.0) * 1000.0 * 54.0).abs() < 1e-9);
        let g = derive(&s).unwrap();
        assert!(((g.r_s - 10.0) / 10.0).abs() < 1e-12);
    }

    #[test]
    fn preset_geometry_matches_reference_radii() {
        for (name, rs_total, rs_valence) in WIGNER_SEITZ_REFERENCE {
            let g = derive(&preset(name).unwrap()).unwrap();
            assert!(
                (g.r_s - rs_total).abs() < 5e-3,
                "{name}: {} vs {rs_total}",
                g.r_s
            );
            let gv = derive(&preset(&format!("{name}_valence")).unwrap()).unwrap();
            assert!(
                (gv.r_s - rs_valence).abs() < 5e-3,
                "{name}_valence: {} vs {rs_valence}",
                gv.r_s
            );
        }
    }

    #[test]
    fn presets_are_consistent() {
        for p in presets() {
            p.system.validate().unwrap();
            if p.name != "jellium" {
                assert!(p.system.is_charge_neutral(), "{} not neutral", p.name);
            }
        }
        let jellium = preset("jellium").unwrap();
        assert_eq!(jellium.lambda_zeta(), 0);
        assert_eq!(preset("diamond").unwrap().lambda_zeta(), 48);
        assert_eq!(preset("lipf6").unwrap().eta, 72);
        assert_eq!(preset("ethylene_carbonate").unwrap().lambda_zeta(), 46);
    }

    #[test]
    fn cube_root_is_exact_for_perfect_cubes() {
        assert_eq!(cube_root(1 << 18), 64.0);
        assert_eq!(cube_root(1 << 21), 128.0);
        assert_eq!(cube_root(27), 3.0);
        let r = cube_root(100);
        assert!((r - 100f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn non_cube_basis_sizes_round_up() {
        // N = 5000: cbrt ~ 17.1, so 5 spectral bits and 5 register bits.
        let s = System::new(10, vec![], 1e3, 5000, 1e-3).unwrap();
        let g = derive(&s).unwrap();
        assert_eq!(g.n_spectral, 5);
        assert_eq!(g.n_p, 5);
    }
}
