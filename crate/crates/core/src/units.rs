//! Physical constants and the internal unit system.
//!
//! Internally ħ = M = 1 and time is measured in 1/Ω₀ with Ω₀ = 2·sqrt(−α₀/M),
//! the small-oscillation frequency of the initial double-well minima. SI values
//! are converted only at the boundary.

use crate::error::{Error, Result};
use crate::model::PotentialParams;

/// Reduced Planck constant, J·s (CODATA 2018, exact by definition of the SI).
pub const HBAR: f64 = 1.054571817e-34;

/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660539067e-27;

/// Mass of ⁹Be⁺ in atomic mass units.
pub const BE9_MASS_U: f64 = 9.012;

/// Scales tying internal dimensionless quantities to SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub mass_si: f64,
    pub alpha0_si: f64,
    /// Ω₀ in rad/s.
    pub omega_ref: f64,
    pub length_unit: f64,
    pub energy_unit: f64,
    pub time_unit: f64,
    pub force_unit: f64,
}

impl UnitSystem {
    pub fn new(mass_si: f64, alpha0_si: f64) -> Result<Self> {
        if !mass_si.is_finite() || !alpha0_si.is_finite() {
            return Err(Error::NonFinite("unit system"));
        }
        if mass_si <= 0.0 {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass_si}")));
        }
        if alpha0_si >= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "initial quadratic coefficient must be negative, got {alpha0_si}"
            )));
        }
        let omega_ref = 2.0 * (-alpha0_si / mass_si).sqrt();
        let length_unit = (HBAR / (mass_si * omega_ref)).sqrt();
        let energy_unit = HBAR * omega_ref;
        Ok(Self {
            mass_si,
            alpha0_si,
            omega_ref,
            length_unit,
            energy_unit,
            time_unit: 1.0 / omega_ref,
            force_unit: energy_unit / length_unit,
        })
    }

    /// Quadratic coefficient scale, N/m.
    pub fn quadratic_unit(&self) -> f64 {
        self.energy_unit / (self.length_unit * self.length_unit)
    }

    /// Quartic coefficient scale, N/m³.
    pub fn quartic_unit(&self) -> f64 {
        self.energy_unit / self.length_unit.powi(4)
    }

    /// Converts (α [N/m], β [N/m³], γ [N]) to dimensionless coefficients.
    pub fn to_dimensionless(&self, alpha: f64, beta: f64, gamma: f64) -> Result<PotentialParams> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::NonFinite("SI potential coefficients"));
        }
        Ok(PotentialParams::new(
            alpha / self.quadratic_unit(),
            beta / self.quartic_unit(),
            gamma / self.force_unit,
        ))
    }

    /// Inverse of [`UnitSystem::to_dimensionless`].
    pub fn to_si(&self, p: &PotentialParams) -> (f64, f64, f64) {
        (p.a * self.quadratic_unit(), p.b * self.quartic_unit(), p.c * self.force_unit)
    }

    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.time_unit
    }

    pub fn time_from_si(&self, t_si: f64) -> f64 {
        t_si / self.time_unit
    }

    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.length_unit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn be9(alpha0: f64) -> UnitSystem {
        UnitSystem::new(BE9_MASS_U * ATOMIC_MASS_UNIT, alpha0).unwrap()
    }

    #[test]
    fn initial_quadratic_is_minus_quarter() {
        let u = be9(-4.7e-12);
        let p = u.to_dimensionless(-4.7e-12, 0.0, 0.0).unwrap();
        assert!((p.a + 0.25).abs() < 1e-12);
        let p = u.to_dimensionless(9.4e-12, 0.0, 0.0).unwrap();
        assert!((p.a - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quartic_coefficient_of_be_trap() {
        // B = β L⁴ / (ħ Ω₀), evaluated independently from the raw constants.
        let m = 9.012 * 1.660539067e-27_f64;
        let omega = 2.0 * (4.7e-12 / m).sqrt();
        let l2 = 1.054571817e-34 / (m * omega);
        let expected = 0.052 * l2 * l2 / (1.054571817e-34 * omega);
        let p = be9(-4.7e-12).to_dimensionless(0.0, 0.052, 0.0).unwrap();
        assert!((p.b - expected).abs() / expected < 1e-12);
        assert!((p.b - 5.50e-7).abs() < 0.01e-7, "B = {}", p.b);
    }

    #[test]
    fn rejects_bad_units() {
        assert!(UnitSystem::new(1.0, 1.0).is_err());
        assert!(UnitSystem::new(-1.0, -1.0).is_err());
        assert!(UnitSystem::new(f64::NAN, -1.0).is_err());
        assert!(be9(-4.7e-12).to_dimensionless(f64::INFINITY, 0.0, 0.0).is_err());
    }

    #[test]
    fn round_trip() {
        let u = be9(-4.7e-12);
        for &(a, b, g) in &[(-4.7e-12, 0.052, 9.73e-22), (9.4e-12, 1e-3, -4e-20), (1e-15, 0.0, 0.0)] {
            let p = u.to_dimensionless(a, b, g).unwrap();
            let (a2, b2, g2) = u.to_si(&p);
            for (x, y) in [(a, a2), (b, b2), (g, g2)] {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
}
