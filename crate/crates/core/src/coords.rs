//! Coordinate transforms for many-constituent kinetic energy.
//!
//! For constituent masses m_1..m_K and a linear change of coordinates
//! x' = C x, the kinetic form becomes (1/2) p'^T G p' with
//! G = C M^{-1} C^T.  A scheme separates the centre of mass exactly when G
//! is diagonal.  Jacobi coordinates achieve this for any masses; naive
//! pairwise differences against the first constituent do not, because every
//! pair shares the first momentum.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateScheme {
    /// Row j is x_{j+1} minus the centre of mass of the first j constituents;
    /// the last row is the full centre of mass.
    Jacobi,
    /// Row j is x_{j+1} - x_1; the last row is the full centre of mass.
    PairwiseDifference,
}

#[derive(Debug, Clone)]
pub struct SeparationCheck {
    /// Frobenius norm of the off-diagonal part of G over the Frobenius norm
    /// of its diagonal.
    pub residual: f64,
    /// Inverse-mass kinetic matrix G in the transformed coordinates.
    pub kinetic_matrix: DMatrix<f64>,
    /// Diagonal of G; for Jacobi these are the inverse sector reduced masses,
    /// ending with the inverse total mass.
    pub inverse_masses: Vec<f64>,
}

fn transform_matrix(masses: &[f64], scheme: CoordinateScheme) -> DMatrix<f64> {
    let k = masses.len();
    let total: f64 = masses.iter().sum();
    let mut c = DMatrix::zeros(k, k);
    for j in 0..k.saturating_sub(1) {
        match scheme {
            CoordinateScheme::Jacobi => {
                let partial: f64 = masses[..=j].iter().sum();
                for i in 0..=j {
                    c[(j, i)] = -masses[i] / partial;
                }
                c[(j, j + 1)] = 1.0;
            }
            CoordinateScheme::PairwiseDifference => {
                c[(j, 0)] = -1.0;
                c[(j, j + 1)] = 1.0;
            }
        }
    }
    for i in 0..k {
        c[(k - 1, i)] = masses[i] / total;
    }
    c
}

/// Build the transformed kinetic matrix for `masses` under `scheme` and
/// measure how far it is from diagonal.
pub fn kinetic_separation_check(
    masses: &[f64],
    scheme: CoordinateScheme,
) -> Result<SeparationCheck> {
    if masses.is_empty() {
        return Err(Error::InvalidInput {
            detail: "mass list must be nonempty".into(),
        });
    }
    if masses.iter().any(|&m| !m.is_finite() || m <= 0.0) {
        return Err(Error::InvalidInput {
            detail: "constituent masses must be finite and positive".into(),
        });
    }
    let k = masses.len();
    let c = transform_matrix(masses, scheme);
    let m_inv = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 / masses[i] } else { 0.0 });
    let g = &c * m_inv * c.transpose();

    let mut diag_sq = 0.0;
    let mut off_sq = 0.0;
    for i in 0..k {
        for j in 0..k {
            let v = g[(i, j)];
            if i == j {
                diag_sq += v * v;
            } else {
                off_sq += v * v;
            }
        }
    }
    if !(diag_sq > 0.0) || !diag_sq.is_finite() {
        return Err(Error::DegenerateTransform {
            detail: format!("kinetic diagonal degenerate, squared norm {diag_sq}"),
        });
    }
    let inverse_masses = (0..k).map(|i| g[(i, i)]).collect();
    Ok(SeparationCheck {
        residual: (off_sq / diag_sq).sqrt(),
        kinetic_matrix: g,
        inverse_masses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_body_jacobi_gives_reduced_and_total_mass() {
        let (m1, m2) = (3.0, 5.0);
        let check = kinetic_separation_check(&[m1, m2], CoordinateScheme::Jacobi).unwrap();
        let mu = m1 * m2 / (m1 + m2);
        assert!(check.residual < 1e-14);
        assert_relative_eq!(check.inverse_masses[0], 1.0 / mu, max_relative = 1e-14);
        assert_relative_eq!(
            check.inverse_masses[1],
            1.0 / (m1 + m2),
            max_relative = 1e-14
        );
    }

    #[test]
    fn jacobi_diagonal_matches_sector_reduced_masses() {
        let masses = [1.5, 2.0, 7.0, 0.25];
        let check = kinetic_separation_check(&masses, CoordinateScheme::Jacobi).unwrap();
        assert!(check.residual < 1e-13, "residual {}", check.residual);
        let mut partial = 0.0;
        for j in 0..masses.len() - 1 {
            partial += masses[j];
            let mu_j = partial * masses[j + 1] / (partial + masses[j + 1]);
            assert_relative_eq!(check.inverse_masses[j], 1.0 / mu_j, max_relative = 1e-13);
        }
        let total: f64 = masses.iter().sum();
        assert_relative_eq!(
            *check.inverse_masses.last().unwrap(),
            1.0 / total,
            max_relative = 1e-13
        );
    }

    #[test]
    fn four_equal_masses_jacobi_separates() {
        let check = kinetic_separation_check(&[1.0; 4], CoordinateScheme::Jacobi).unwrap();
        assert!(check.residual < 1e-12, "residual {}", check.residual);
    }

    #[test]
    fn pairwise_equal_masses_couples_strongly() {
        let check =
            kinetic_separation_check(&[1.0, 1.0, 1.0], CoordinateScheme::PairwiseDifference)
                .unwrap();
        // G = [[2, 1, 0], [1, 2, 0], [0, 0, 1/3]] here, so the ratio of
        // Frobenius norms is sqrt(2 / (8 + 1/9)) = sqrt(18/73).
        assert_relative_eq!(
            check.residual,
            (18.0f64 / 73.0).sqrt(),
            max_relative = 1e-13
        );
        assert!(check.residual > 0.1);
    }

    #[test]
    fn pairwise_two_body_still_separates() {
        // With only one relative coordinate the pairwise scheme is Jacobi.
        let check =
            kinetic_separation_check(&[2.0, 3.0], CoordinateScheme::PairwiseDifference).unwrap();
        assert!(check.residual < 1e-14);
    }

    #[test]
    fn single_mass_is_pure_centre_of_mass() {
        let check = kinetic_separation_check(&[4.0], CoordinateScheme::Jacobi).unwrap();
        assert_eq!(check.residual, 0.0);
        assert_relative_eq!(check.inverse_masses[0], 0.25, max_relative = 1e-15);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(kinetic_separation_check(&[], CoordinateScheme::Jacobi).is_err());
        assert!(kinetic_separation_check(&[1.0, -2.0], CoordinateScheme::Jacobi).is_err());
        assert!(kinetic_separation_check(&[1.0, 0.0], CoordinateScheme::Jacobi).is_err());
        assert!(kinetic_separation_check(&[1.0, f64::NAN], CoordinateScheme::Jacobi).is_err());
    }
}
