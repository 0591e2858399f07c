//! Phase mismatch of the four-wave-mixing amplification process
//! `2ω_ap = ω_s + ω_i`, split into dispersion, Kerr and dynamic parts.
//!
//! The dynamic part comes from the non-phase-matched second-harmonic and
//! upconversion processes (`ap → 2ap`, `s + ap → s+ap`, `i + ap → i+ap`),
//! which shift the phase of the pump, signal and idler like an extra Kerr
//! term proportional to β²|A_ap|².

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::FLUX_QUANTUM;
use crate::error::{Error, Result};
use crate::medium::Dispersion;
use crate::unitcell::CellCoefficients;

/// Perturbative validity bound on the phase mismatch of every dynamic
/// process [rad/cell].
pub const EPSILON_DK: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// A traveling tone at the device port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToneConfig {
    /// Angular frequency [rad/s].
    pub freq: f64,
    /// Power at the device port [dBm]; `-inf` switches the tone off.
    pub power_dbm: f64,
    pub direction: Direction,
}

impl ToneConfig {
    pub fn forward(freq: f64, power_dbm: f64) -> Self {
        ToneConfig {
            freq,
            power_dbm,
            direction: Direction::Forward,
        }
    }

    pub fn backward(freq: f64, power_dbm: f64) -> Self {
        ToneConfig {
            freq,
            power_dbm,
            direction: Direction::Backward,
        }
    }

    pub fn is_off(&self) -> bool {
        self.power_dbm == f64::NEG_INFINITY
    }
}

/// Nonlinear couplings of the wave equation together with the global
/// amplitude calibration.
///
/// Defaults come from the unit-cell formulas; the flipped-SNAIL chain is not
/// described by them precisely, so `beta` and `gamma` are usually fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Couplings {
    pub beta: f64,
    pub gamma: f64,
    /// Dimensionless factor applied to every power-to-amplitude conversion.
    pub amp_scale: f64,
}

impl Couplings {
    pub fn new(beta: f64, gamma: f64, amp_scale: f64) -> Self {
        Couplings {
            beta,
            gamma,
            amp_scale,
        }
    }

    pub fn from_cell(coeffs: &CellCoefficients) -> Self {
        Couplings::new(coeffs.beta, coeffs.gamma, 1.0)
    }

    pub fn with_overrides(self, beta: Option<f64>, gamma: Option<f64>) -> Self {
        Couplings {
            beta: beta.unwrap_or(self.beta),
            gamma: gamma.unwrap_or(self.gamma),
            ..self
        }
    }

    /// Wave amplitude of a tone, see [`tone_amplitude`].
    pub fn amplitude<D: Dispersion + ?Sized>(&self, medium: &D, omega: f64, power_dbm: f64) -> f64 {
        tone_amplitude(medium.impedance(), omega, power_dbm, self.amp_scale)
    }
}

pub fn dbm_to_watts(power_dbm: f64) -> f64 {
    1e-3 * 10f64.powf(power_dbm / 10.0)
}

/// Phase-wave amplitude |A| of a tone of power `power_dbm` at `omega`.
///
/// The node flux amplitude Φ_A satisfies P = ω²Φ_A²/(2Z); the phase amplitude
/// is 2πΦ_A/Φ0, multiplied by `amp_scale`.
pub fn tone_amplitude(impedance: f64, omega: f64, power_dbm: f64, amp_scale: f64) -> f64 {
    if power_dbm == f64::NEG_INFINITY {
        return 0.0;
    }
    let flux = (2.0 * impedance * dbm_to_watts(power_dbm)).sqrt() / omega;
    amp_scale * 2.0 * PI * flux / FLUX_QUANTUM
}

/// Inverse of [`tone_amplitude`].
pub fn amplitude_to_dbm(impedance: f64, omega: f64, amplitude: f64, amp_scale: f64) -> f64 {
    let flux = amplitude / amp_scale * FLUX_QUANTUM / (2.0 * PI);
    let watts = (omega * flux).powi(2) / (2.0 * impedance);
    10.0 * (watts / 1e-3).log10()
}

pub fn idler_frequency(omega_s: f64, omega_ap: f64) -> Result<f64> {
    let omega_i = 2.0 * omega_ap - omega_s;
    if omega_i <= 0.0 {
        return Err(Error::NegativeIdler { omega_idler: omega_i });
    }
    Ok(omega_i)
}

/// `2k_ap − k_s − k_i`.
pub fn dk_dispersion<D: Dispersion + ?Sized>(medium: &D, omega_s: f64, omega_ap: f64) -> Result<f64> {
    let omega_i = idler_frequency(omega_s, omega_ap)?;
    let k_s = medium.wavevector(omega_s)?;
    let k_i = medium.wavevector(omega_i)?;
    let k_ap = medium.wavevector(omega_ap)?;
    Ok(2.0 * k_ap - k_s - k_i)
}

/// Self- and cross-Kerr phase rates [rad/cell].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KerrEtas {
    pub signal: f64,
    pub idler: f64,
    pub pump: f64,
}

impl KerrEtas {
    /// `2η_ap − η_s − η_i`.
    pub fn mismatch(&self) -> f64 {
        2.0 * self.pump - self.signal - self.idler
    }
}

pub fn kerr_etas<D: Dispersion + ?Sized>(
    medium: &D,
    gamma: f64,
    omega_s: f64,
    omega_ap: f64,
    pump_amp: f64,
) -> Result<KerrEtas> {
    if pump_amp < 0.0 {
        return Err(Error::InvalidParameter("pump amplitude must be ≥ 0".into()));
    }
    let omega_i = idler_frequency(omega_s, omega_ap)?;
    let k_s = medium.wavevector(omega_s)?;
    let k_i = medium.wavevector(omega_i)?;
    let k_ap = medium.wavevector(omega_ap)?;
    let p2 = pump_amp * pump_amp;
    let cross = |k: f64, omega: f64| 6.0 * gamma / (8.0 * medium.omega_tilde(omega)) * k_ap * k_ap * k * p2;
    Ok(KerrEtas {
        signal: cross(k_s, omega_s),
        idler: cross(k_i, omega_i),
        pump: 3.0 * gamma / (8.0 * medium.omega_tilde(omega_ap)) * k_ap.powi(3) * p2,
    })
}

/// Kerr-like phase rates induced by the dynamic processes [rad/cell].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicEtas {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
    /// Phase mismatches `Δk_2ap`, `Δk_s+ap`, `Δk_i+ap` of the three processes.
    pub denominators: [f64; 3],
}

impl DynamicEtas {
    /// `2η_ap,dyn − η_s,dyn − η_i,dyn`.
    pub fn mismatch(&self) -> f64 {
        2.0 * self.pump - self.signal - self.idler
    }
}

pub fn dynamic_etas<D: Dispersion + ?Sized>(
    medium: &D,
    beta: f64,
    omega_s: f64,
    omega_ap: f64,
    pump_amp: f64,
) -> Result<DynamicEtas> {
    if pump_amp < 0.0 {
        return Err(Error::InvalidParameter("pump amplitude must be ≥ 0".into()));
    }
    let omega_i = idler_frequency(omega_s, omega_ap)?;
    let omega_2ap = 2.0 * omega_ap;
    let omega_sap = omega_s + omega_ap;
    let omega_iap = omega_i + omega_ap;

    let k_s = medium.wavevector(omega_s)?;
    let k_i = medium.wavevector(omega_i)?;
    let k_ap = medium.wavevector(omega_ap)?;
    let k_2ap = medium.wavevector(omega_2ap)?;
    let k_sap = medium.wavevector(omega_sap)?;
    let k_iap = medium.wavevector(omega_iap)?;

    let dk_2ap = 2.0 * k_ap - k_2ap;
    let dk_sap = k_ap + k_s - k_sap;
    let dk_iap = k_ap + k_i - k_iap;
    let denominators = [dk_2ap, dk_sap, dk_iap];

    if beta == 0.0 || pump_amp == 0.0 {
        return Ok(DynamicEtas {
            pump: 0.0,
            signal: 0.0,
            idler: 0.0,
            denominators,
        });
    }
    for (which, value) in [("Δk_2ap", dk_2ap), ("Δk_s+ap", dk_sap), ("Δk_i+ap", dk_iap)] {
        if value.abs() <= EPSILON_DK {
            return Err(Error::SmallDenominator {
                which,
                value,
                threshold: EPSILON_DK,
            });
        }
    }

    let wt = |omega: f64| medium.omega_tilde(omega);
    let b2p2 = beta * beta * pump_amp * pump_amp;
    let pump = b2p2 * k_2ap * k_ap.powi(3) / (8.0 * dk_2ap * wt(omega_ap) * wt(omega_2ap));
    let up = |k: f64, omega: f64, k_up: f64, omega_up: f64, dk: f64| {
        b2p2 * k_ap * k_ap * k_up * k / (4.0 * wt(omega) * wt(omega_up) * dk)
    };
    Ok(DynamicEtas {
        pump,
        signal: up(k_s, omega_s, k_sap, omega_sap, dk_sap),
        idler: up(k_i, omega_i, k_iap, omega_iap, dk_iap),
        denominators,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseMismatchBreakdown {
    pub dk_dispersion: f64,
    pub dk_kerr: f64,
    pub dk_dynamic: f64,
    pub dk_total: f64,
}

impl PhaseMismatchBreakdown {
    fn new(dk_dispersion: f64, dk_kerr: f64, dk_dynamic: f64) -> Self {
        PhaseMismatchBreakdown {
            dk_dispersion,
            dk_kerr,
            dk_dynamic,
            dk_total: dk_dispersion + dk_kerr + dk_dynamic,
        }
    }
}

/// Pump amplitude averaged over the lossy line: `A_0 exp(−k_ap tanδ N / 4)`.
pub fn attenuated_pump_amplitude<D: Dispersion + ?Sized>(medium: &D, omega_ap: f64, amp0: f64) -> Result<f64> {
    let k_ap = medium.wavevector(omega_ap)?;
    Ok(amp0 * (-k_ap * medium.tan_delta() * medium.cells() as f64 / 4.0).exp())
}

/// The three mismatch components for a signal at `omega_s` and the pump
/// tone, with the pump amplitude reduced by the average dielectric loss.
pub fn dk_total<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    omega_s: f64,
    pump: &ToneConfig,
) -> Result<PhaseMismatchBreakdown> {
    let omega_ap = pump.freq;
    let amp0 = couplings.amplitude(medium, omega_ap, pump.power_dbm);
    let amp = attenuated_pump_amplitude(medium, omega_ap, amp0)?;
    let disp = dk_dispersion(medium, omega_s, omega_ap)?;
    let kerr = kerr_etas(medium, couplings.gamma, omega_s, omega_ap, amp)?;
    let dynamic = dynamic_etas(medium, couplings.beta, omega_s, omega_ap, amp)?;
    Ok(PhaseMismatchBreakdown::new(disp, kerr.mismatch(), dynamic.mismatch()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPump {
    /// [rad/s]
    pub omega_ap: f64,
    /// |Δk_total| at `omega_ap` [rad/cell].
    pub abs_dk: f64,
}

/// Number of scan points used by [`find_matched_pump`] before refinement.
pub const MATCH_SCAN_POINTS: usize = 801;

/// Pump frequency in `band` (rad/s) minimizing |Δk_total| for a signal at
/// `omega_s`. Points where the mismatch is undefined are skipped.
pub fn find_matched_pump<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    omega_s: f64,
    pump_power_dbm: f64,
    band: (f64, f64),
    threshold: f64,
) -> Result<MatchedPump> {
    find_matched_pump_with(medium, couplings, omega_s, pump_power_dbm, band, threshold, MATCH_SCAN_POINTS)
}

pub fn find_matched_pump_with<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    omega_s: f64,
    pump_power_dbm: f64,
    band: (f64, f64),
    threshold: f64,
    scan_points: usize,
) -> Result<MatchedPump> {
    let (lo, hi) = band;
    if !(lo < hi) || scan_points < 2 {
        return Err(Error::InvalidParameter("empty pump search band".into()));
    }
    let objective = |omega_ap: f64| -> Option<f64> {
        let pump = ToneConfig::forward(omega_ap, pump_power_dbm);
        dk_total(medium, couplings, omega_s, &pump).ok().map(|b| b.dk_total.abs())
    };
    let step = (hi - lo) / (scan_points - 1) as f64;
    let mut best: Option<(usize, f64)> = None;
    for i in 0..scan_points {
        if let Some(v) = objective(lo + step * i as f64) {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    let (index, mut best_value) =
        best.ok_or_else(|| Error::NotFound("phase mismatch undefined across the band".into()))?;
    let mut best_omega = lo + step * index as f64;

    // golden-section refinement in the neighbouring cells
    let mut a = (best_omega - step).max(lo);
    let mut b = (best_omega + step).min(hi);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        match (objective(c), objective(d)) {
            (Some(fc), Some(fd)) => {
                if fc < fd {
                    b = d;
                } else {
                    a = c;
                }
            }
            _ => break,
        }
    }
    let mid = 0.5 * (a + b);
    if let Some(v) = objective(mid) {
        if v < best_value {
            best_value = v;
            best_omega = mid;
        }
    }
    if best_value > threshold {
        return Err(Error::NotFound(format!(
            "minimum |Δk| = {best_value:e} rad/cell exceeds threshold {threshold:e}"
        )));
    }
    Ok(MatchedPump {
        omega_ap: best_omega,
        abs_dk: best_value,
    })
}
