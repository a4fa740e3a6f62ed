//! Hydrogen-like radial orbitals and the summed shell density.
//!
//! R_nl(r) = N_nl exp(-rho/2) rho^l L_{n-l-1}^{2l+1}(rho) with
//! rho = 2 Z r / (n a), normalized so the radial probability
//! integral of R^2 r^2 is one.  The length unit a is the screening length of
//! the internal system, not the bare electron Bohr radius.

use crate::error::{Error, Result};
use crate::shells::ShellConfig;
use crate::special::factorial_exact;

/// Generalized Laguerre polynomial L_k^alpha(x) by the three-term recurrence.
fn laguerre(k: u32, alpha: u32, x: f64) -> f64 {
    let alpha = alpha as f64;
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut curr = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + alpha + 1.0 - x) * curr - (jf + alpha) * prev) / (jf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Radial wavefunction R_nl(r) for effective charge z_eff and length unit a.
pub fn radial_wavefunction(n: u32, l: u32, z_eff: f64, a: f64, r: f64) -> Result<f64> {
    if n == 0 || l >= n {
        return Err(Error::InvalidInput {
            detail: format!("orbital requires 0 <= l < n, got n = {n}, l = {l}"),
        });
    }
    if !(z_eff > 0.0) || !(a > 0.0) {
        return Err(Error::InvalidInput {
            detail: "effective charge and length unit must be positive".into(),
        });
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidInput {
            detail: format!("radius must be finite and non-negative, got {r}"),
        });
    }
    let scale = 2.0 * z_eff / (n as f64 * a);
    let rho = scale * r;
    let norm = (scale.powi(3) * factorial_exact(n - l - 1)?
        / (2.0 * n as f64 * factorial_exact(n + l)?))
    .sqrt();
    Ok(norm * (-0.5 * rho).exp() * rho.powi(l as i32) * laguerre(n - l - 1, 2 * l + 1, rho))
}

/// Total radial density r^2 sum_nl occ_nl R_nl(r)^2 of a closed-shell
/// configuration; integrates to the electron count.
pub struct RadialDensity {
    terms: Vec<(u32, u32, f64)>,
    z_eff: f64,
    a: f64,
    n_max: u32,
}

impl RadialDensity {
    pub fn new(config: &ShellConfig, z_eff: f64, a: f64) -> Result<Self> {
        if !(z_eff > 0.0) || !(a > 0.0) {
            return Err(Error::InvalidInput {
                detail: "effective charge and length unit must be positive".into(),
            });
        }
        Ok(RadialDensity {
            terms: config
                .subshells
                .iter()
                .map(|s| (s.n, s.l, s.occupancy as f64))
                .collect(),
            z_eff,
            a,
            n_max: config.n_max,
        })
    }

    pub fn density(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        for &(n, l, occ) in &self.terms {
            let rad = radial_wavefunction(n, l, self.z_eff, self.a, r)
                .expect("terms validated at construction");
            sum += occ * rad * rad;
        }
        sum * r * r
    }

    /// Decay length of the outermost shell, n_max a / (2 Z); tail quadrature
    /// maps with a multiple of this.
    pub fn decay_length(&self) -> f64 {
        self.n_max as f64 * self.a / (2.0 * self.z_eff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_decaying_tail, QuadConfig};
    use crate::shells::closed_shell_config;
    use approx::assert_relative_eq;

    // Ground and first excited radial functions written out longhand.
    fn r10(z: f64, a: f64, r: f64) -> f64 {
        2.0 * (z / a).powf(1.5) * (-z * r / a).exp()
    }
    fn r20(z: f64, a: f64, r: f64) -> f64 {
        2.0 * (z / (2.0 * a)).powf(1.5) * (1.0 - z * r / (2.0 * a)) * (-z * r / (2.0 * a)).exp()
    }
    fn r21(z: f64, a: f64, r: f64) -> f64 {
        (1.0 / 3.0f64.sqrt()) * (z / (2.0 * a)).powf(1.5) * (z * r / a) * (-z * r / (2.0 * a)).exp()
    }

    #[test]
    fn low_orbitals_match_longhand_forms() {
        let (z, a) = (2.0, 1.0);
        for i in 0..60 {
            let r = 0.05 + 0.2 * i as f64;
            assert_relative_eq!(
                radial_wavefunction(1, 0, z, a, r).unwrap(),
                r10(z, a, r),
                max_relative = 1e-13
            );
            assert_relative_eq!(
                radial_wavefunction(2, 0, z, a, r).unwrap(),
                r20(z, a, r),
                max_relative = 1e-12,
                epsilon = 1e-300
            );
            assert_relative_eq!(
                radial_wavefunction(2, 1, z, a, r).unwrap(),
                r21(z, a, r),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn orbitals_are_normalized() {
        let (z, a) = (10.0, 1.0);
        let cfg = QuadConfig::default();
        for n in 1..=5u32 {
            for l in 0..n {
                let f = |r: f64| {
                    let v = radial_wavefunction(n, l, z, a, r).unwrap();
                    v * v * r * r
                };
                let split = n as f64 * a / z;
                let head = integrate(f, 0.0, split, &cfg).unwrap().value;
                let tail = integrate_decaying_tail(f, split, split, &cfg)
                    .unwrap()
                    .value;
                assert_relative_eq!(head + tail, 1.0, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn same_l_orbitals_are_orthogonal() {
        let (z, a) = (2.0, 1.0);
        let cfg = QuadConfig::default();
        let f = |r: f64| {
            radial_wavefunction(2, 0, z, a, r).unwrap()
                * radial_wavefunction(3, 0, z, a, r).unwrap()
                * r
                * r
        };
        let head = integrate(f, 0.0, 2.0, &cfg).unwrap().value;
        let tail = integrate_decaying_tail(f, 2.0, 2.0, &cfg).unwrap().value;
        assert!((head + tail).abs() < 1e-9);
    }

    #[test]
    fn shell_density_integrates_to_electron_count() {
        let config = closed_shell_config(10).unwrap();
        let density = RadialDensity::new(&config, 10.0, 1.0).unwrap();
        let cfg = QuadConfig::default();
        let split = 4.0 * density.decay_length();
        let head = integrate(|r| density.density(r), 0.0, split, &cfg)
            .unwrap()
            .value;
        let tail =
            integrate_decaying_tail(|r| density.density(r), split, density.decay_length(), &cfg)
                .unwrap()
                .value;
        assert_relative_eq!(head + tail, 10.0, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_quantum_numbers() {
        assert!(radial_wavefunction(0, 0, 1.0, 1.0, 1.0).is_err());
        assert!(radial_wavefunction(2, 2, 1.0, 1.0, 1.0).is_err());
        assert!(radial_wavefunction(2, 3, 1.0, 1.0, 1.0).is_err());
        assert!(radial_wavefunction(2, 1, -1.0, 1.0, 1.0).is_err());
        assert!(radial_wavefunction(2, 1, 1.0, 1.0, -0.1).is_err());
    }
}
