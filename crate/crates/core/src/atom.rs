//! Composite-atom mass bookkeeping and the adiabatic-separation parameters.
//!
//! An atom of mass number A is treated as one nucleon of mass m moving
//! against the remaining A-1 nucleons, giving the internal reduced mass
//! mu = (1 - 1/A) m.  Three ratios control whether the internal dynamics
//! decouples from the centre of mass:
//!
//!   kappa1 = m_e / M   (electron vs whole atom)
//!   kappa2 = m_e / mu  (electron vs internal nucleon system)
//!   kappa3 = mu / M    (internal system vs whole atom)
//!
//! Separation needs kappa1 and kappa2 small but kappa3 not small: the first
//! two suppress direct electron back-action, while kappa3 of order one keeps
//! the internal level spacing far above the centre-of-mass recoil scale.  The
//! leading correction to the separated picture enters at max(kappa1, kappa2)
//! to the power 3/4.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Unit system: electron mass, screening length and pair coupling are all 1.
/// Everything else is expressed through these.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub electron_mass: f64,
    /// Nucleon mass in electron masses; protons and neutrons share it.
    pub nucleon_mass: f64,
    /// Length unit of the hydrogen-like orbitals.
    pub bohr_length: f64,
    pub coulomb_constant: f64,
    /// Magnetic moment entering the beam-splitting term.
    pub magneton: f64,
    /// Field gradient along the beam-splitting axis.
    pub field_gradient: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            electron_mass: 1.0,
            nucleon_mass: 1836.15,
            bohr_length: 1.0,
            coulomb_constant: 1.0,
            magneton: 1.0,
            field_gradient: 0.5,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.electron_mass,
            self.nucleon_mass,
            self.bohr_length,
            self.coulomb_constant,
            self.magneton,
            self.field_gradient,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput {
                detail: "physical constants must all be finite and positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomSpec {
    pub name: String,
    pub electron_count: u32,
    pub mass_number: u32,
}

impl AtomSpec {
    pub fn new(name: &str, electron_count: u32, mass_number: u32) -> Self {
        AtomSpec {
            name: name.to_string(),
            electron_count,
            mass_number,
        }
    }
}

/// The survey set: light through heavy, including the canonical beam atom.
pub fn standard_isotopes() -> Vec<AtomSpec> {
    vec![
        AtomSpec::new("He-4", 2, 4),
        AtomSpec::new("Ne-20", 10, 20),
        AtomSpec::new("Fe-56", 26, 56),
        AtomSpec::new("Ag-107", 47, 107),
        AtomSpec::new("Au-197", 79, 197),
        AtomSpec::new("U-238", 92, 238),
    ]
}

/// Internal reduced mass (1 - 1/A) m for a mass-A atom.  A = 1 gives 0:
/// there is no internal system, and consumers must treat it as absent.
pub fn reduced_mass(mass_number: u32, constants: &PhysicalConstants) -> Result<f64> {
    if mass_number == 0 {
        return Err(Error::InvalidInput {
            detail: "mass number must be positive".into(),
        });
    }
    let a = mass_number as f64;
    Ok((1.0 - 1.0 / a) * constants.nucleon_mass)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdiabaticReport {
    pub mu: f64,
    pub total_mass: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    /// max(kappa1, kappa2), the expansion parameter of the separated picture.
    pub kappa: f64,
    /// kappa^(3/4), the relative size of the first correction term.
    pub correction_norm: f64,
}

pub fn adiabatic_parameters(
    mass_number: u32,
    constants: &PhysicalConstants,
) -> Result<AdiabaticReport> {
    if mass_number == 1 {
        return Err(Error::NoRelativeSystem);
    }
    let mu = reduced_mass(mass_number, constants)?;
    let total = mass_number as f64 * constants.nucleon_mass;
    let kappa1 = constants.electron_mass / total;
    let kappa2 = constants.electron_mass / mu;
    let kappa3 = mu / total;
    let kappa = kappa1.max(kappa2);
    Ok(AdiabaticReport {
        mu,
        total_mass: total,
        kappa1,
        kappa2,
        kappa3,
        kappa,
        correction_norm: kappa.powf(0.75),
    })
}

/// Acceptance windows for the three ratios, with ten percent slack on the
/// order-of-magnitude targets 1e-4, 1e-3 and 1e-2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticBounds {
    pub kappa1_max: f64,
    pub kappa2_max: f64,
    pub kappa3_min: f64,
}

impl Default for AdiabaticBounds {
    fn default() -> Self {
        AdiabaticBounds {
            kappa1_max: 1.1e-4,
            kappa2_max: 1.1e-3,
            kappa3_min: 0.9e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdiabaticRow {
    pub atom: AtomSpec,
    pub report: AdiabaticReport,
    pub within_bounds: bool,
    /// Names of the violated ratios, empty when within bounds.
    pub violations: Vec<String>,
}

pub fn check_bounds(p: &AdiabaticReport, bounds: &AdiabaticBounds) -> Vec<String> {
    let mut violations = Vec::new();
    if p.kappa1 > bounds.kappa1_max {
        violations.push(format!(
            "kappa1 = {:.4e} > {:.4e}",
            p.kappa1, bounds.kappa1_max
        ));
    }
    if p.kappa2 > bounds.kappa2_max {
        violations.push(format!(
            "kappa2 = {:.4e} > {:.4e}",
            p.kappa2, bounds.kappa2_max
        ));
    }
    if p.kappa3 < bounds.kappa3_min {
        violations.push(format!(
            "kappa3 = {:.4e} < {:.4e}",
            p.kappa3, bounds.kappa3_min
        ));
    }
    violations
}

/// Evaluate every atom in `atoms` against `bounds`.
pub fn adiabatic_survey(
    atoms: &[AtomSpec],
    constants: &PhysicalConstants,
    bounds: &AdiabaticBounds,
) -> Result<Vec<AdiabaticRow>> {
    atoms
        .iter()
        .map(|atom| {
            let report = adiabatic_parameters(atom.mass_number, constants)?;
            let violations = check_bounds(&report, bounds);
            Ok(AdiabaticRow {
                atom: atom.clone(),
                within_bounds: violations.is_empty(),
                report,
                violations,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_nucleon_reduced_mass_is_half() {
        let c = PhysicalConstants::default();
        assert_eq!(reduced_mass(2, &c).unwrap(), 0.5 * c.nucleon_mass);
    }

    #[test]
    fn single_nucleon_reduced_mass_is_zero() {
        assert_eq!(reduced_mass(1, &PhysicalConstants::default()).unwrap(), 0.0);
    }

    #[test]
    fn silver_fraction_of_nucleon_mass() {
        let c = PhysicalConstants::default();
        assert_relative_eq!(
            reduced_mass(107, &c).unwrap() / c.nucleon_mass,
            106.0 / 107.0,
            max_relative = 1e-15
        );
    }

    // Frozen from an independent evaluation of the defining ratios for A = 107.
    #[test]
    fn silver_parameters() {
        let p = adiabatic_parameters(107, &PhysicalConstants::default()).unwrap();
        assert_relative_eq!(p.mu, 1818.9897196261684, max_relative = 1e-13);
        assert_relative_eq!(p.kappa1, 5.089886116343089e-6, max_relative = 1e-12);
        assert_relative_eq!(p.kappa2, 5.49755718358604e-4, max_relative = 1e-12);
        assert_relative_eq!(p.kappa3, 9.258450519696043e-3, max_relative = 1e-12);
        assert_eq!(p.kappa, p.kappa2);
        assert_relative_eq!(
            p.correction_norm,
            3.5902717063354796e-3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn hydrogen_has_no_relative_system() {
        let err = adiabatic_parameters(1, &PhysicalConstants::default()).unwrap_err();
        assert!(matches!(err, Error::NoRelativeSystem));
        assert_eq!(err.kind(), "no_relative_system");
    }

    #[test]
    fn zero_mass_number_rejected() {
        let err = reduced_mass(0, &PhysicalConstants::default()).unwrap_err();
        assert_eq!(err.kind(), "invalid_input");
    }

    #[test]
    fn reduced_mass_monotone_and_bounded() {
        let c = PhysicalConstants::default();
        let mut prev = -1.0;
        for a in 1..=400u32 {
            let mu = reduced_mass(a, &c).unwrap();
            assert!(mu > prev);
            assert!(mu < c.nucleon_mass);
            prev = mu;
        }
    }

    #[test]
    fn kappa_identities() {
        let c = PhysicalConstants::default();
        for a in 2..=300u32 {
            let p = adiabatic_parameters(a, &c).unwrap();
            assert!(p.mu < p.total_mass);
            assert!(p.kappa1 < p.kappa2);
            // kappa3 = (A - 1) / A^2 exactly, independent of the nucleon mass.
            let af = a as f64;
            assert_relative_eq!(p.kappa3, (af - 1.0) / (af * af), max_relative = 1e-14);
        }
    }

    #[test]
    fn survey_verdicts() {
        let rows = adiabatic_survey(
            &standard_isotopes(),
            &PhysicalConstants::default(),
            &AdiabaticBounds::default(),
        )
        .unwrap();
        let verdicts: Vec<(&str, bool)> = rows
            .iter()
            .map(|r| (r.atom.name.as_str(), r.within_bounds))
            .collect();
        assert_eq!(
            verdicts,
            vec![
                ("He-4", false),
                ("Ne-20", true),
                ("Fe-56", true),
                ("Ag-107", true),
                ("Au-197", false),
                ("U-238", false),
            ]
        );
        // Light atoms break the electron/atom ratio, heavy atoms the mu/M ratio.
        assert!(rows[0].violations[0].starts_with("kappa1"));
        assert!(rows[4].violations[0].starts_with("kappa3"));
        assert!(rows[5].violations[0].starts_with("kappa3"));
    }

    #[test]
    fn constants_validation() {
        assert!(PhysicalConstants::default().validate().is_ok());
        let bad = PhysicalConstants {
            magneton: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
