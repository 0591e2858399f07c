//! Coupled-mode equations for the envelope amplitudes of a few tones along
//! the line, their integration, and the spectra built from them.

pub mod fit;
pub mod fourwave;
pub mod ode;
pub mod spectra;
pub mod threewave;

use num_complex::Complex64;

pub use fourwave::{integrate_4wm, CmeOptions, FourWaveModes, FourWaveSystem, Projection};
pub use spectra::{gain_spectrum, isolation_spectrum, saturation_curve, GainSpectrum, SaturationCurve};
pub use threewave::{integrate_3wm, ThreeWaveModes, ThreeWaveSystem};

/// Mode amplitudes sampled along the line.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    /// Positions [cells], starting at 0.
    pub x: Vec<f64>,
    pub amps: Vec<[Complex64; N]>,
    /// Mode frequencies [rad/s].
    pub omega: [f64; N],
    /// Mode wavevectors [rad/cell].
    pub k: [f64; N],
    /// Photon-flux weights: `weights[m]·|A_m|²` is conserved-quantity
    /// normalized photon flux of mode m.
    pub weights: [f64; N],
}

impl<const N: usize> Trajectory<N> {
    pub fn final_amps(&self) -> [Complex64; N] {
        *self.amps.last().expect("trajectory has at least one sample")
    }

    /// `20 log10(|A_m(L)| / |A_m(0)|)`.
    pub fn gain_db(&self, mode: usize) -> f64 {
        let a0 = self.amps[0][mode].norm();
        let a1 = self.final_amps()[mode].norm();
        20.0 * (a1 / a0).log10()
    }

    /// Photon flux of every mode at sample `j`.
    pub fn photon_flux_at(&self, j: usize) -> [f64; N] {
        let mut n = [0.0; N];
        for m in 0..N {
            n[m] = self.weights[m] * self.amps[j][m].norm_sqr();
        }
        n
    }

    /// Energy flux `Σ ω_m n_m` at sample `j` (up to a constant factor).
    pub fn energy_flux_at(&self, j: usize) -> f64 {
        let n = self.photon_flux_at(j);
        (0..N).map(|m| self.omega[m] * n[m]).sum()
    }

    /// Unwrapped phase of mode m at every sample.
    pub fn unwrapped_phase(&self, mode: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.x.len());
        let mut last = 0.0;
        let mut offset = 0.0;
        for (j, a) in self.amps.iter().enumerate() {
            let raw = a[mode].arg();
            if j > 0 {
                let delta = raw - last;
                if delta > std::f64::consts::PI {
                    offset -= 2.0 * std::f64::consts::PI;
                } else if delta < -std::f64::consts::PI {
                    offset += 2.0 * std::f64::consts::PI;
                }
            }
            last = raw;
            out.push(raw + offset);
        }
        out
    }

    /// Least-squares slope [rad/cell] of the envelope phase of mode m. With
    /// `include_carrier` the carrier wavevector `k_m` is added, giving the
    /// slope of the total phase `k_m x + arg A_m`.
    pub fn phase_slope(&self, mode: usize, include_carrier: bool) -> f64 {
        let phase = self.unwrapped_phase(mode);
        let n = self.x.len() as f64;
        let mx = self.x.iter().sum::<f64>() / n;
        let my = phase.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (x, y) in self.x.iter().zip(&phase) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        let slope = sxy / sxx;
        if include_carrier {
            slope + self.k[mode]
        } else {
            slope
        }
    }
}
