//! Five-mode three-wave-mixing equations used for isolation: a signal
//! co-propagating with a strong "isolation pump" `ip` is upconverted to
//! `s+ip` and then to `s+2ip`, while the pump also generates its second
//! harmonic.
//!
//! Each process `a + b → c` with mismatch `Δ = k_a + k_b − k_c` contributes
//!
//! ```text
//! A_c' +=  β k_a k_b A_a A_b e^{iΔx} / (2 ω̃_c)      (½ of this when a = b)
//! A_a' −=  β k_c k_b A_c A_b* e^{−iΔx} / (2 ω̃_a)
//! ```
//!
//! so that `k ω̃ |A|²` is a photon flux conserved process by process. Only
//! the quadratic nonlinearity is kept.

use num_complex::Complex64;

use super::fourwave::{absolute_tolerances, CmeOptions};
use super::ode::{dopri5, State, StepControl};
use super::Trajectory;
use crate::error::{Error, Result};
use crate::medium::Dispersion;
use crate::phasematch::{Couplings, ToneConfig};

pub const SIGNAL: usize = 0;
pub const PUMP: usize = 1;
pub const HARMONIC: usize = 2;
pub const UP1: usize = 3;
pub const UP2: usize = 4;

pub const MODE_NAMES: [&str; 5] = ["s", "ip", "2ip", "s+ip", "s+2ip"];

/// Fraction of ω_J that every three-wave mode must stay below.
pub const THREE_WAVE_GUARD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeWaveModes {
    pub omega: [f64; 5],
    pub amps: State<5>,
}

impl ThreeWaveModes {
    pub fn new(omega_s: f64, omega_ip: f64) -> Result<Self> {
        if !(omega_s > 0.0 && omega_ip > 0.0) {
            return Err(Error::InvalidParameter("mode frequencies must be positive".into()));
        }
        Ok(ThreeWaveModes {
            omega: [
                omega_s,
                omega_ip,
                2.0 * omega_ip,
                omega_s + omega_ip,
                omega_s + 2.0 * omega_ip,
            ],
            amps: [Complex64::new(0.0, 0.0); 5],
        })
    }

    pub fn from_tones<D: Dispersion + ?Sized>(
        medium: &D,
        couplings: &Couplings,
        omega_s: f64,
        signal_power_dbm: f64,
        pump: &ToneConfig,
    ) -> Result<Self> {
        let mut modes = ThreeWaveModes::new(omega_s, pump.freq)?;
        modes.amps[SIGNAL] = couplings.amplitude(medium, omega_s, signal_power_dbm).into();
        modes.amps[PUMP] = couplings.amplitude(medium, pump.freq, pump.power_dbm).into();
        Ok(modes)
    }

    pub fn with_amplitude(mut self, mode: usize, amp: Complex64) -> Self {
        self.amps[mode] = amp;
        self
    }
}

#[derive(Debug, Clone)]
pub struct ThreeWaveSystem {
    pub omega: [f64; 5],
    pub k: [f64; 5],
    pub omega_tilde: [f64; 5],
    pub loss: [f64; 5],
    /// `2k_ip − k_2ip`, `k_s + k_ip − k_s+ip`, `k_s+ip + k_ip − k_s+2ip`.
    pub mismatch: [f64; 3],
    // generation and back-coupling coefficients
    shg: f64,
    shg_back: f64,
    up1: f64,
    up1_back_s: f64,
    up1_back_ip: f64,
    up2: f64,
    up2_back_u1: f64,
    up2_back_ip: f64,
}

impl ThreeWaveSystem {
    pub fn new<D: Dispersion + ?Sized>(medium: &D, couplings: &Couplings, omega: [f64; 5]) -> Result<Self> {
        if let Some(omega_j) = medium.plasma_frequency() {
            let limit = THREE_WAVE_GUARD * omega_j;
            if let Some(&bad) = omega.iter().find(|&&o| o >= limit) {
                return Err(Error::AbovePlasmaCutoff { omega: bad, limit });
            }
        }
        let mut k = [0.0; 5];
        let mut wt = [0.0; 5];
        let mut loss = [0.0; 5];
        for m in 0..5 {
            k[m] = medium.wavevector(omega[m])?;
            wt[m] = medium.omega_tilde(omega[m]);
            loss[m] = medium.loss_wavevector(omega[m])?;
        }
        let [ks, kp, kh, k1, k2] = k;
        let b = couplings.beta;
        Ok(ThreeWaveSystem {
            omega,
            k,
            omega_tilde: wt,
            loss,
            mismatch: [2.0 * kp - kh, ks + kp - k1, k1 + kp - k2],
            shg: b * kp * kp / (4.0 * wt[HARMONIC]),
            shg_back: -b * kh * kp / (2.0 * wt[PUMP]),
            up1: b * ks * kp / (2.0 * wt[UP1]),
            up1_back_s: -b * k1 * kp / (2.0 * wt[SIGNAL]),
            up1_back_ip: -b * k1 * ks / (2.0 * wt[PUMP]),
            up2: b * k1 * kp / (2.0 * wt[UP2]),
            up2_back_u1: -b * k2 * kp / (2.0 * wt[UP1]),
            up2_back_ip: -b * k2 * k1 / (2.0 * wt[PUMP]),
        })
    }

    pub fn derivative(&self, x: f64, a: &State<5>) -> State<5> {
        let [s, p, h, u1, u2] = *a;
        let e0 = Complex64::from_polar(1.0, self.mismatch[0] * x);
        let e1 = Complex64::from_polar(1.0, self.mismatch[1] * x);
        let e2 = Complex64::from_polar(1.0, self.mismatch[2] * x);
        let l = &self.loss;
        let pc = p.conj();

        let ds = self.up1_back_s * u1 * pc * e1.conj() - l[SIGNAL] * s;
        let dp = self.shg_back * h * pc * e0.conj()
            + self.up1_back_ip * u1 * s.conj() * e1.conj()
            + self.up2_back_ip * u2 * u1.conj() * e2.conj()
            - l[PUMP] * p;
        let dh = self.shg * p * p * e0 - l[HARMONIC] * h;
        let du1 = self.up1 * s * p * e1 + self.up2_back_u1 * u2 * pc * e2.conj() - l[UP1] * u1;
        let du2 = self.up2 * u1 * p * e2 - l[UP2] * u2;
        [ds, dp, dh, du1, du2]
    }

    /// Photon-flux weights `k ω̃`.
    pub fn photon_weights(&self) -> [f64; 5] {
        let mut w = [0.0; 5];
        for m in 0..5 {
            w[m] = self.k[m] * self.omega_tilde[m];
        }
        w
    }

    pub fn integrate(&self, init: &State<5>, length: f64, options: &CmeOptions) -> Result<Trajectory<5>> {
        options.validate()?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter("integration length must be positive".into()));
        }
        let n = options.sample_count();
        let xs: Vec<f64> = (0..n).map(|j| length * j as f64 / (n - 1) as f64).collect();
        let control = StepControl::new(options.tol, absolute_tolerances(init, options.tol));
        let (amps, stats) = dopri5(|x, y| self.derivative(x, y), 0.0, *init, &xs, &control)?;
        log::debug!(
            "3WM integration: {} accepted, {} rejected steps",
            stats.accepted,
            stats.rejected
        );
        Ok(Trajectory {
            x: xs,
            amps,
            omega: self.omega,
            k: self.k,
            weights: self.photon_weights(),
        })
    }
}

/// Integrate the five-mode equations over the whole line. The projection
/// option is ignored: the three-wave system always uses the symmetric form.
pub fn integrate_3wm<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    init: &ThreeWaveModes,
    options: &CmeOptions,
) -> Result<Trajectory<5>> {
    let system = ThreeWaveSystem::new(medium, couplings, init.omega)?;
    system.integrate(&init.amps, medium.cells() as f64, options)
}

/// Signal-family photon fractions at the output relative to the input
/// signal flux: (transmitted signal, upconverted to `s+ip` and `s+2ip`).
pub fn photon_fractions(traj: &Trajectory<5>) -> (f64, f64) {
    let n0 = traj.photon_flux_at(0)[SIGNAL];
    let n = traj.photon_flux_at(traj.x.len() - 1);
    (n[SIGNAL] / n0, (n[UP1] + n[UP2]) / n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::MediumParams;
    use crate::unitcell::{coefficients_at, SnailSpec};
    use std::f64::consts::PI;

    fn medium(tan_delta: f64) -> MediumParams {
        let spec = SnailSpec::default();
        let c = coefficients_at(&spec, 0.0).unwrap();
        MediumParams {
            tan_delta,
            ..MediumParams::from_cell(&spec, &c)
        }
    }

    fn w(f_ghz: f64) -> f64 {
        2.0 * PI * 1e9 * f_ghz
    }

    #[test]
    fn guard_at_ninety_five_percent() {
        let m = medium(0.0);
        let fj = m.omega_j / (2.0 * PI * 1e9);
        // s+2ip just above 0.95 ω_J
        let ip = 0.3 * fj;
        let s = 0.951 * fj - 2.0 * ip;
        let modes = ThreeWaveModes::new(w(s), w(ip)).unwrap();
        assert!(matches!(
            ThreeWaveSystem::new(&m, &Couplings::new(0.5, 0.0, 1.0), modes.omega),
            Err(Error::AbovePlasmaCutoff { .. })
        ));
        // the usual isolation pumps are well inside the guard
        let modes = ThreeWaveModes::new(w(6.0), w(13.0)).unwrap();
        assert!(ThreeWaveSystem::new(&m, &Couplings::new(0.5, 0.0, 1.0), modes.omega).is_ok());
    }

    #[test]
    fn lossless_signal_family_photon_number_conserved() {
        let m = medium(0.0);
        let init = ThreeWaveModes::new(w(6.0), w(13.0))
            .unwrap()
            .with_amplitude(SIGNAL, Complex64::new(1e-3, 0.0))
            .with_amplitude(PUMP, Complex64::new(2.0, 0.0));
        let opts = CmeOptions { tol: 1e-11, ..Default::default() };
        let traj = integrate_3wm(&m, &Couplings::new(0.8, 0.0, 1.0), &init, &opts).unwrap();
        let n0 = traj.photon_flux_at(0);
        let total0 = n0[SIGNAL] + n0[UP1] + n0[UP2];
        let e0 = traj.energy_flux_at(0);
        for j in 0..traj.x.len() {
            let n = traj.photon_flux_at(j);
            assert!((n[SIGNAL] + n[UP1] + n[UP2] - total0).abs() < 1e-8 * total0);
            assert!((traj.energy_flux_at(j) - e0).abs() < 1e-8 * e0);
        }
        let (t, u) = photon_fractions(&traj);
        assert!((t + u - 1.0).abs() < 1e-8);
        assert!(u > 1e-3, "coupling too weak for a meaningful test: {u}");
    }

    #[test]
    fn no_pump_means_linear_transmission() {
        let m = medium(2.9e-3);
        let init = ThreeWaveModes::new(w(6.0), w(13.0))
            .unwrap()
            .with_amplitude(SIGNAL, Complex64::new(1e-3, 0.0));
        let traj = integrate_3wm(&m, &Couplings::new(0.8, 0.0, 1.0), &init, &CmeOptions::default()).unwrap();
        let expected = m.linear_transmission_db(w(6.0)).unwrap();
        assert!((traj.gain_db(SIGNAL) - expected).abs() < 1e-6);
    }

    #[test]
    fn phase_matched_upconversion_is_complete_conversion() {
        // with a hand-made dispersionless medium the first upconversion is
        // phase matched and the signal oscillates as cos(κx)
        struct Linear;
        impl Dispersion for Linear {
            fn wavevector(&self, omega: f64) -> Result<f64> {
                Ok(omega * 1e-11)
            }
            fn omega_tilde(&self, _omega: f64) -> f64 {
                1.0
            }
            fn tan_delta(&self) -> f64 {
                0.0
            }
            fn cells(&self) -> usize {
                400
            }
            fn impedance(&self) -> f64 {
                50.0
            }
        }
        let beta = 0.05;
        let ap = 0.4;
        let modes = ThreeWaveModes::new(w(5.0), w(11.0)).unwrap();
        let sys = ThreeWaveSystem::new(&Linear, &Couplings::new(beta, 0.0, 1.0), modes.omega).unwrap();
        // linearized (stiff pump, no u2): s'' = −κ² s with
        // κ² = β² k_s k_1 k_ip² / 4
        let [ks, kp, _, k1, _] = sys.k;
        let kappa = (beta * beta * ks * k1 * kp * kp / 4.0).sqrt();
        // quarter of the way to full conversion and beyond
        let mut stiff = sys.clone();
        stiff.up2 = 0.0;
        stiff.up2_back_u1 = 0.0;
        stiff.up2_back_ip = 0.0;
        stiff.up1_back_ip = 0.0;
        stiff.shg = 0.0;
        stiff.shg_back = 0.0;
        let init = ThreeWaveModes::new(w(5.0), w(11.0))
            .unwrap()
            .with_amplitude(SIGNAL, Complex64::new(1e-3, 0.0))
            .with_amplitude(PUMP, Complex64::new(ap, 0.0))
            .amps;
        let rate = kappa * ap;
        let opts = CmeOptions { tol: 1e-11, ..Default::default() };
        for x in [0.4 / rate, 2.0 / rate] {
            let traj = stiff.integrate(&init, x, &opts).unwrap();
            assert!((traj.final_amps()[SIGNAL].re - 1e-3 * (rate * x).cos()).abs() < 1e-10);
        }
    }
}
