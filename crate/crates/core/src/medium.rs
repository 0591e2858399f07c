//! Linear propagation in the SNAIL line: dispersion, dielectric loss and
//! linear transmission. Wavevectors are in radians per cell and positions in
//! cells, so the device length enters only through the cell count.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::unitcell::{CellCoefficients, SnailSpec};

/// Fraction of ω_J above which the dispersion relation is refused.
pub const PLASMA_GUARD: f64 = 0.98;

/// A linear dispersion relation used by the phase-matching and coupled-mode
/// code. [`MediumParams`] is the physical line; tests substitute synthetic
/// media through this trait.
pub trait Dispersion: Sync {
    /// Wavevector k(ω) [rad/cell].
    fn wavevector(&self, omega: f64) -> Result<f64>;
    /// The factor ω̃ = 1 − ω²/ω_J² that multiplies ∂A/∂x in the envelope
    /// equations.
    fn omega_tilde(&self, omega: f64) -> f64;
    fn tan_delta(&self) -> f64;
    fn cells(&self) -> usize;
    /// Characteristic impedance [Ω], used for power-amplitude conversion.
    fn impedance(&self) -> f64;
    /// Plasma frequency ω_J [rad/s], if the medium has one.
    fn plasma_frequency(&self) -> Option<f64> {
        None
    }

    /// Imaginary part of the wavevector, k·tanδ/2 [1/cell].
    fn loss_wavevector(&self, omega: f64) -> Result<f64> {
        Ok(self.wavevector(omega)? * self.tan_delta() / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediumParams {
    /// [rad/s]
    pub omega0: f64,
    /// [rad/s]
    pub omega_j: f64,
    /// [Ω]
    pub impedance: f64,
    pub tan_delta: f64,
    pub cells: usize,
}

impl MediumParams {
    pub fn new(omega0: f64, omega_j: f64, impedance: f64, tan_delta: f64, cells: usize) -> Result<Self> {
        let m = MediumParams {
            omega0,
            omega_j,
            impedance,
            tan_delta,
            cells,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_cell(spec: &SnailSpec, coeffs: &CellCoefficients) -> Self {
        MediumParams {
            omega0: coeffs.omega0,
            omega_j: coeffs.omega_j,
            impedance: coeffs.impedance,
            tan_delta: spec.tan_delta,
            cells: spec.cells,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0 < self.omega_j) {
            return Err(Error::InvalidParameter(
                "medium requires 0 < ω0 < ω_J".into(),
            ));
        }
        if !(self.tan_delta >= 0.0 && self.tan_delta.is_finite()) {
            return Err(Error::InvalidParameter("loss tangent must be ≥ 0".into()));
        }
        if !(self.impedance > 0.0) {
            return Err(Error::InvalidParameter("impedance must be positive".into()));
        }
        Ok(())
    }

    /// Upper frequency limit of the model, `PLASMA_GUARD · ω_J`.
    pub fn frequency_limit(&self) -> f64 {
        PLASMA_GUARD * self.omega_j
    }

    fn check(&self, omega: f64) -> Result<()> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive and finite, got {omega}"
            )));
        }
        let limit = self.frequency_limit();
        if omega >= limit {
            return Err(Error::AbovePlasmaCutoff { omega, limit });
        }
        Ok(())
    }

    /// Amplitude transmission over the whole line in dB (always ≤ 0).
    pub fn linear_transmission_db(&self, omega: f64) -> Result<f64> {
        linear_transmission_db(self, omega)
    }
}

impl Dispersion for MediumParams {
    fn wavevector(&self, omega: f64) -> Result<f64> {
        self.check(omega)?;
        let ratio = omega / self.omega_j;
        Ok(omega / (self.omega0 * (1.0 - ratio * ratio).sqrt()))
    }

    fn omega_tilde(&self, omega: f64) -> f64 {
        let ratio = omega / self.omega_j;
        1.0 - ratio * ratio
    }

    fn tan_delta(&self) -> f64 {
        self.tan_delta
    }

    fn cells(&self) -> usize {
        self.cells
    }

    fn impedance(&self) -> f64 {
        self.impedance
    }

    fn plasma_frequency(&self) -> Option<f64> {
        Some(self.omega_j)
    }
}

/// `20 log10(exp(−k″ N))`.
pub fn linear_transmission_db<D: Dispersion + ?Sized>(medium: &D, omega: f64) -> Result<f64> {
    let loss = medium.loss_wavevector(omega)?;
    Ok(-20.0 * std::f64::consts::LOG10_E * loss * medium.cells() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn paper_medium() -> MediumParams {
        let spec = SnailSpec::default();
        let c = crate::unitcell::coefficients_at(&spec, 0.0).unwrap();
        MediumParams::from_cell(&spec, &c)
    }

    #[test]
    fn low_frequency_limit() {
        let m = paper_medium();
        let omega = 1e-4 * m.omega_j;
        let k = m.wavevector(omega).unwrap();
        assert!((k * m.omega0 / omega - 1.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_at_half_point() {
        let m = paper_medium();
        let omega = m.omega_j / 2f64.sqrt();
        let k = m.wavevector(omega).unwrap();
        let expected = 2f64.sqrt() * omega / m.omega0;
        assert!((k - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn seven_gigahertz_fixture() {
        let m = paper_medium();
        let k = m.wavevector(2.0 * PI * 7e9).unwrap();
        // direct evaluation, ω0/2π = 26.914 GHz, ω_J/2π = 71.908 GHz
        assert!((k - 0.2614).abs() < 5e-4, "{k}");
    }

    #[test]
    fn plasma_guard() {
        let m = paper_medium();
        let limit = 0.98 * m.omega_j;
        assert!(matches!(
            m.wavevector(limit),
            Err(Error::AbovePlasmaCutoff { .. })
        ));
        assert!(m.wavevector(limit * (1.0 - 1e-9)).is_ok());
        assert!(m.wavevector(-1.0).is_err());
    }

    #[test]
    fn loss_ratio_and_zero_loss() {
        let mut m = paper_medium();
        for f in [2e9, 5e9, 9e9, 20e9] {
            let w = 2.0 * PI * f;
            let ratio = m.loss_wavevector(w).unwrap() / m.wavevector(w).unwrap();
            assert!((ratio - m.tan_delta / 2.0).abs() < 1e-15);
        }
        m.tan_delta = 0.0;
        assert_eq!(m.loss_wavevector(2.0 * PI * 7e9).unwrap(), 0.0);
        assert_eq!(m.linear_transmission_db(2.0 * PI * 7e9).unwrap(), 0.0);
    }

    #[test]
    fn paper_loss_at_seven_gigahertz() {
        let m = paper_medium();
        let db = m.linear_transmission_db(2.0 * PI * 7e9).unwrap();
        // exp(−k tanδ N / 2) with k ≈ 0.2614, tanδ = 2.9e-3, N = 700
        let expected = 20.0 * (-(0.2614 * 2.9e-3 * 700.0 / 2.0_f64)).exp().log10();
        assert!((db - expected).abs() < 0.01, "{db} vs {expected}");
        assert!((db + 2.3).abs() < 0.05);
    }

    #[test]
    fn loss_monotone_and_linear_in_length() {
        let m = paper_medium();
        let w4 = 2.0 * PI * 4e9;
        let w8 = 2.0 * PI * 8e9;
        assert!(m.linear_transmission_db(w8).unwrap() < m.linear_transmission_db(w4).unwrap());
        let doubled = MediumParams {
            cells: 2 * m.cells,
            ..m.clone()
        };
        let a = m.linear_transmission_db(w8).unwrap();
        let b = doubled.linear_transmission_db(w8).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn rejects_inverted_frequencies() {
        assert!(MediumParams::new(2.0, 1.0, 50.0, 0.0, 10).is_err());
        assert!(MediumParams::new(1.0, 2.0, 50.0, -1.0, 10).is_err());
    }
}
