//! Six-mode coupled-mode equations of the Kerr-dominated four-wave-mixing
//! amplifier: signal, pump, idler, pump second harmonic and the two
//! upconverted tones `s+ap`, `i+ap`.
//!
//! Every term follows from projecting the quadratic (β) and cubic (γ)
//! nonlinearity of the wave equation onto one mode,
//!
//! ```text
//! A_m' = (γ·P·C_m − β·P·D_m) / (2 k_m ω̃_m) − k″_m A_m
//! ```
//!
//! where `C_m`, `D_m` are the resonant parts of `u³` and `u²` with
//! `u = Σ i k A e^{iθ}`, and `P` is a wavevector factor fixed by the
//! [`Projection`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::ode::{dopri5, rk4, State, StepControl};
use super::Trajectory;
use crate::error::{Error, Result};
use crate::medium::Dispersion;
use crate::phasematch::{idler_frequency, Couplings, ToneConfig};

pub const SIGNAL: usize = 0;
pub const PUMP: usize = 1;
pub const IDLER: usize = 2;
pub const HARMONIC: usize = 3;
pub const SIGNAL_UP: usize = 4;
pub const IDLER_UP: usize = 5;

/// Human-readable mode labels in state order.
pub const MODE_NAMES: [&str; 6] = ["s", "ap", "i", "2ap", "s+ap", "i+ap"];

/// Minimum number of stored samples along the line.
pub const MIN_SAMPLES: usize = 64;

/// Wavevector factor `P` applied to each nonlinear product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// `P` is the wavevector of the product wave itself (the mismatch-carrying
    /// combination, e.g. `2k_ap − k_i` for the signal's four-wave term).
    #[default]
    Printed,
    /// `P` is the wavevector `k_m` of the receiving mode. Photon flux
    /// `k ω̃ |A|²` is then conserved for every process.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmeOptions {
    pub projection: Projection,
    /// Multiply the idler's upconversion back-coupling by `2k_i`, as in the
    /// dimensionally inconsistent form sometimes quoted. Off by default.
    pub idler_upconversion_as_printed: bool,
    /// Include four-wave depletion and three-wave back-action on the pump.
    pub pump_back_action: bool,
    /// Relative tolerance of the adaptive integrator, in [1e-12, 1e-6].
    pub tol: f64,
    /// Number of stored samples along the line (at least [`MIN_SAMPLES`]).
    pub samples: usize,
}

impl Default for CmeOptions {
    fn default() -> Self {
        CmeOptions {
            projection: Projection::Printed,
            idler_upconversion_as_printed: false,
            pump_back_action: true,
            tol: 1e-9,
            samples: MIN_SAMPLES,
        }
    }
}

impl CmeOptions {
    pub fn validate(&self) -> Result<()> {
        if !(1e-12..=1e-6).contains(&self.tol) {
            return Err(Error::InvalidParameter(format!(
                "integration tolerance {} outside [1e-12, 1e-6]",
                self.tol
            )));
        }
        Ok(())
    }

    pub(crate) fn sample_count(&self) -> usize {
        self.samples.max(MIN_SAMPLES)
    }
}

/// Frequencies and input amplitudes of the six modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourWaveModes {
    /// Angular frequencies [rad/s] in state order.
    pub omega: [f64; 6],
    /// Complex amplitudes at x = 0.
    #[serde(skip)]
    pub amps: State<6>,
}

impl FourWaveModes {
    /// Mode frequencies for a signal at `omega_s` and pump at `omega_ap`,
    /// with all amplitudes zero.
    pub fn new(omega_s: f64, omega_ap: f64) -> Result<Self> {
        if !(omega_s > 0.0 && omega_ap > 0.0) {
            return Err(Error::InvalidParameter("mode frequencies must be positive".into()));
        }
        let omega_i = idler_frequency(omega_s, omega_ap)?;
        Ok(FourWaveModes {
            omega: [
                omega_s,
                omega_ap,
                omega_i,
                2.0 * omega_ap,
                omega_s + omega_ap,
                omega_i + omega_ap,
            ],
            amps: [Complex64::new(0.0, 0.0); 6],
        })
    }

    /// Real input amplitudes of a signal and a pump tone; the remaining modes
    /// start empty.
    pub fn from_tones<D: Dispersion + ?Sized>(
        medium: &D,
        couplings: &Couplings,
        omega_s: f64,
        signal_power_dbm: f64,
        pump: &ToneConfig,
    ) -> Result<Self> {
        let mut modes = FourWaveModes::new(omega_s, pump.freq)?;
        modes.amps[SIGNAL] = couplings.amplitude(medium, omega_s, signal_power_dbm).into();
        modes.amps[PUMP] = couplings.amplitude(medium, pump.freq, pump.power_dbm).into();
        Ok(modes)
    }

    pub fn with_amplitude(mut self, mode: usize, amp: Complex64) -> Self {
        self.amps[mode] = amp;
        self
    }
}

/// Precomputed coefficients of the six-mode equations.
#[derive(Debug, Clone)]
pub struct FourWaveSystem {
    pub omega: [f64; 6],
    pub k: [f64; 6],
    pub omega_tilde: [f64; 6],
    pub loss: [f64; 6],
    /// `2k_ap − k_s − k_i`, `2k_ap − k_2ap`, `k_s + k_ap − k_s+ap`,
    /// `k_i + k_ap − k_i+ap`.
    pub mismatch: [f64; 4],
    pub projection: Projection,
    c: Coefficients,
}

#[derive(Debug, Clone, Default)]
struct Coefficients {
    kerr_s: Complex64,
    mix_s: Complex64,
    up_s: Complex64,
    kerr_i: Complex64,
    mix_i: Complex64,
    up_i: Complex64,
    kerr_ap: Complex64,
    shg_back: Complex64,
    deplete: Complex64,
    back_u: Complex64,
    back_v: Complex64,
    shg: Complex64,
    kerr_h: Complex64,
    gen_u: Complex64,
    kerr_u: Complex64,
    gen_v: Complex64,
    kerr_v: Complex64,
}

impl FourWaveSystem {
    pub fn new<D: Dispersion + ?Sized>(
        medium: &D,
        couplings: &Couplings,
        omega: [f64; 6],
        options: &CmeOptions,
    ) -> Result<Self> {
        let mut k = [0.0; 6];
        let mut wt = [0.0; 6];
        let mut loss = [0.0; 6];
        for m in 0..6 {
            k[m] = medium.wavevector(omega[m])?;
            wt[m] = medium.omega_tilde(omega[m]);
            loss[m] = medium.loss_wavevector(omega[m])?;
        }
        let [ks, kap, ki, kh, ku, kv] = k;
        let mismatch = [2.0 * kap - ks - ki, 2.0 * kap - kh, ks + kap - ku, ki + kap - kv];

        let symmetric = options.projection == Projection::Symmetric;
        // product wavevector, or the receiving mode's own wavevector
        let p = |product: f64, own: f64| if symmetric { own } else { product };
        let (b, g) = (couplings.beta, couplings.gamma);
        let i = Complex64::i();
        let re = |x: f64| Complex64::new(x, 0.0);

        let idler_scale = if options.idler_upconversion_as_printed {
            2.0 * ki
        } else {
            1.0
        };
        let back = if options.pump_back_action { 1.0 } else { 0.0 };

        let c = Coefficients {
            kerr_s: i * (3.0 * g * ks / (4.0 * wt[SIGNAL])),
            mix_s: i * (3.0 * g / (8.0 * ks * wt[SIGNAL]) * p(2.0 * kap - ki, ks) * kap * kap * ki),
            up_s: re(-b * p(ku - kap, ks) * ku * kap / (2.0 * ks * wt[SIGNAL])),
            kerr_i: i * (3.0 * g * ki / (4.0 * wt[IDLER])),
            mix_i: i * (3.0 * g / (8.0 * ki * wt[IDLER]) * p(2.0 * kap - ks, ki) * kap * kap * ks),
            up_i: re(-b * p(kv - kap, ki) * kv * kap / (2.0 * ki * wt[IDLER]) * idler_scale),
            kerr_ap: i * (3.0 * g * kap / (8.0 * wt[PUMP])),
            shg_back: re(-b * p(kh - kap, kap) * kh * kap / (2.0 * kap * wt[PUMP])),
            deplete: i * (back * 3.0 * g / (4.0 * wt[PUMP]) * p(ks + ki - kap, kap) * ks * ki),
            back_u: re(-back * b * p(ku - ks, kap) * ku * ks / (2.0 * kap * wt[PUMP])),
            back_v: re(-back * b * p(kv - ki, kap) * kv * ki / (2.0 * kap * wt[PUMP])),
            shg: re(b * p(2.0 * kap, kh) * kap * kap / (4.0 * kh * wt[HARMONIC])),
            kerr_h: i * (3.0 * g * kh / (8.0 * wt[HARMONIC])),
            gen_u: re(b * p(ks + kap, ku) * ks * kap / (2.0 * ku * wt[SIGNAL_UP])),
            kerr_u: i * (3.0 * g * ku / (4.0 * wt[SIGNAL_UP])),
            gen_v: re(b * p(ki + kap, kv) * ki * kap / (2.0 * kv * wt[IDLER_UP])),
            kerr_v: i * (3.0 * g * kv / (4.0 * wt[IDLER_UP])),
        };
        Ok(FourWaveSystem {
            omega,
            k,
            omega_tilde: wt,
            loss,
            mismatch,
            projection: options.projection,
            c,
        })
    }

    /// Right-hand side `dA/dx`.
    pub fn derivative(&self, x: f64, a: &State<6>) -> State<6> {
        let c = &self.c;
        let [s, ap, id, h, u, v] = *a;
        let [_, kap, _, kh, _, _] = self.k;
        let e = |d: f64| Complex64::from_polar(1.0, d * x);
        let e4 = e(self.mismatch[0]);
        let eh = e(self.mismatch[1]);
        let eu = e(self.mismatch[2]);
        let ev = e(self.mismatch[3]);

        let pump_int = kap * kap * ap.norm_sqr();
        let harm_int = kh * kh * h.norm_sqr();
        let cross = pump_int + harm_int;
        let ap2 = ap * ap;
        let l = &self.loss;

        let ds = c.kerr_s * cross * s + c.mix_s * ap2 * id.conj() * e4 + c.up_s * u * ap.conj() * eu.conj()
            - l[SIGNAL] * s;
        let di = c.kerr_i * cross * id + c.mix_i * ap2 * s.conj() * e4 + c.up_i * v * ap.conj() * ev.conj()
            - l[IDLER] * id;
        let dap = c.shg_back * ap.conj() * h * eh.conj()
            + c.kerr_ap * (pump_int + 2.0 * harm_int) * ap
            + c.deplete * s * id * ap.conj() * e4.conj()
            + c.back_u * u * s.conj() * eu.conj()
            + c.back_v * v * id.conj() * ev.conj()
            - l[PUMP] * ap;
        let dh = c.shg * ap2 * eh + c.kerr_h * (2.0 * pump_int + harm_int) * h - l[HARMONIC] * h;
        let du = c.gen_u * s * ap * eu + c.kerr_u * cross * u - l[SIGNAL_UP] * u;
        let dv = c.gen_v * id * ap * ev + c.kerr_v * cross * v - l[IDLER_UP] * v;
        [ds, dap, di, dh, du, dv]
    }

    /// Weights `w_m` such that `w_m |A_m|²` is the photon flux of mode m.
    ///
    /// With the symmetric projection the weight is `k ω̃` for every mode. With
    /// the printed projection the signal, idler and pump weights are chosen
    /// so that the Kerr-only (β = 0) equations conserve
    /// `n_s − n_i` and `n_s + n_ap/2`.
    pub fn photon_weights(&self) -> [f64; 6] {
        let mut w = [0.0; 6];
        for m in 0..6 {
            w[m] = self.k[m] * self.omega_tilde[m];
        }
        if self.projection == Projection::Printed {
            let [ks, kap, ki, ..] = self.k;
            w[SIGNAL] = ks * ks * self.omega_tilde[SIGNAL] / (2.0 * kap - ki);
            w[IDLER] = ki * ki * self.omega_tilde[IDLER] / (2.0 * kap - ks);
            w[PUMP] = kap * kap * self.omega_tilde[PUMP] / (ks + ki - kap);
        }
        w
    }

    /// Replace the harmonic and upconverted input amplitudes by the driven
    /// (non-oscillating) solutions of their equations for the given pump,
    /// signal and idler, neglecting Kerr and loss. Starting from this state
    /// suppresses the beat between driven and free waves, so the phase of
    /// each low mode grows at the steady dynamic rate from the first cell.
    pub fn adiabatic_seed(&self, amps: &State<6>) -> Result<State<6>> {
        let c = &self.c;
        let [s, ap, id, ..] = *amps;
        let i = Complex64::i();
        for (which, d) in [("Δk_2ap", self.mismatch[1]), ("Δk_s+ap", self.mismatch[2]), ("Δk_i+ap", self.mismatch[3])] {
            if d.abs() <= crate::phasematch::EPSILON_DK {
                return Err(Error::SmallDenominator {
                    which,
                    value: d,
                    threshold: crate::phasematch::EPSILON_DK,
                });
            }
        }
        let mut out = *amps;
        out[HARMONIC] = c.shg * ap * ap / (i * self.mismatch[1]);
        out[SIGNAL_UP] = c.gen_u * s * ap / (i * self.mismatch[2]);
        out[IDLER_UP] = c.gen_v * id * ap / (i * self.mismatch[3]);
        Ok(out)
    }

    /// Integrate from x = 0 to `length` cells.
    pub fn integrate(&self, init: &State<6>, length: f64, options: &CmeOptions) -> Result<Trajectory<6>> {
        options.validate()?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter("integration length must be positive".into()));
        }
        let n = options.sample_count();
        let xs: Vec<f64> = (0..n).map(|j| length * j as f64 / (n - 1) as f64).collect();
        let control = StepControl::new(options.tol, absolute_tolerances(init, options.tol));
        let (amps, stats) = dopri5(|x, y| self.derivative(x, y), 0.0, *init, &xs, &control)?;
        log::debug!(
            "4WM integration: {} accepted, {} rejected steps",
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

    /// Fixed-step RK4 reference solution at `length`.
    pub fn integrate_reference(&self, init: &State<6>, length: f64, steps: usize) -> State<6> {
        rk4(|x, y| self.derivative(x, y), 0.0, *init, length, steps)
    }
}

/// Absolute tolerance scaled to the weakest nonzero input, so that the
/// growth of a tiny signal next to a strong pump is still resolved.
pub(crate) fn absolute_tolerances<const N: usize>(init: &State<N>, tol: f64) -> [f64; N] {
    let smallest_nonzero = init
        .iter()
        .map(|a| a.norm())
        .filter(|&a| a > 0.0)
        .fold(f64::INFINITY, f64::min);
    let reference = if smallest_nonzero.is_finite() { smallest_nonzero } else { 1.0 };
    let floor = 1e-2 * tol * reference;
    [floor; N]
}

/// Integrate the six-mode equations over the whole line.
pub fn integrate_4wm<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    init: &FourWaveModes,
    options: &CmeOptions,
) -> Result<Trajectory<6>> {
    let system = FourWaveSystem::new(medium, couplings, init.omega, options)?;
    system.integrate(&init.amps, medium.cells() as f64, options)
}

/// Signal power gain in dB for one signal frequency.
pub fn signal_gain_db<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    pump: &ToneConfig,
    omega_s: f64,
    signal_power_dbm: f64,
    options: &CmeOptions,
) -> Result<f64> {
    let init = FourWaveModes::from_tones(medium, couplings, omega_s, signal_power_dbm, pump)?;
    let traj = integrate_4wm(medium, couplings, &init, options)?;
    Ok(traj.gain_db(SIGNAL))
}

/// `ω/2π` helper for log messages.
pub(crate) fn ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e9)
}
