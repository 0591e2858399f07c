//! Gain, saturation and isolation spectra built from repeated integrations.
//! Frequency points are independent and are evaluated in parallel.

use rayon::prelude::*;
use serde::Serialize;

use super::fourwave::{self, integrate_4wm, CmeOptions, FourWaveModes};
use super::threewave::{self, integrate_3wm, photon_fractions, ThreeWaveModes};
use crate::error::{Error, Result};
use crate::medium::Dispersion;
use crate::phasematch::{Couplings, Direction, ToneConfig};

/// Input power used as the small-signal reference [dBm].
pub const SMALL_SIGNAL_DBM: f64 = -180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    /// Signal angular frequency [rad/s].
    pub omega: f64,
    /// Signal power gain [dB].
    pub gain_db: f64,
    /// Output signal photon flux over input signal photon flux.
    pub transmitted_fraction: f64,
    /// Output photon flux in the upconverted tones over input signal flux.
    pub upconverted_fraction: f64,
}

/// A grid point where the model could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumGap {
    pub omega: f64,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSpectrum {
    pub points: Vec<SpectrumPoint>,
    pub gaps: Vec<SpectrumGap>,
    pub pump: ToneConfig,
    pub couplings: Couplings,
}

impl GainSpectrum {
    pub fn peak(&self) -> Option<&SpectrumPoint> {
        self.points
            .iter()
            .max_by(|a, b| a.gain_db.total_cmp(&b.gain_db))
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("frequency grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Evaluate `point` at every grid frequency in parallel, keeping grid order
/// and recording failures as gaps. Fails only if every point fails.
fn collect_points<F>(grid: &[f64], point: F) -> Result<(Vec<SpectrumPoint>, Vec<SpectrumGap>)>
where
    F: Fn(f64) -> Result<SpectrumPoint> + Sync,
{
    let results: Vec<(f64, Result<SpectrumPoint>)> = grid.par_iter().map(|&w| (w, point(w))).collect();
    let mut points = Vec::with_capacity(grid.len());
    let mut gaps = Vec::new();
    let mut first_error = None;
    for (omega, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => {
                log::warn!("no solution at {:.4} GHz: {e}", fourwave::ghz(omega));
                gaps.push(SpectrumGap {
                    omega,
                    kind: e.kind(),
                    message: e.to_string(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    if points.is_empty() {
        return Err(first_error.expect("grid is non-empty"));
    }
    Ok((points, gaps))
}

/// Four-wave signal gain over `signal_grid` for a forward pump.
pub fn gain_spectrum<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    pump: &ToneConfig,
    signal_grid: &[f64],
    signal_power_dbm: f64,
    options: &CmeOptions,
) -> Result<GainSpectrum> {
    check_grid(signal_grid)?;
    options.validate()?;
    if pump.direction != Direction::Forward {
        return Err(Error::InvalidParameter(
            "the amplification pump must co-propagate with the signal (direction = forward)".into(),
        ));
    }
    let (points, gaps) = collect_points(signal_grid, |omega_s| {
        let init = FourWaveModes::from_tones(medium, couplings, omega_s, signal_power_dbm, pump)?;
        let traj = integrate_4wm(medium, couplings, &init, options)?;
        let n0 = traj.photon_flux_at(0);
        let n1 = traj.photon_flux_at(traj.x.len() - 1);
        Ok(SpectrumPoint {
            omega: omega_s,
            gain_db: traj.gain_db(fourwave::SIGNAL),
            transmitted_fraction: n1[fourwave::SIGNAL] / n0[fourwave::SIGNAL],
            upconverted_fraction: n1[fourwave::SIGNAL_UP] / n0[fourwave::SIGNAL],
        })
    })?;
    Ok(GainSpectrum {
        points,
        gaps,
        pump: *pump,
        couplings: *couplings,
    })
}

/// Three-wave transmission of a signal traveling with a backward isolation
/// pump (both moving toward the input port), over `signal_grid`.
/// `gain_db` is the isolation: negative values mean attenuation.
pub fn isolation_spectrum<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    pump: &ToneConfig,
    signal_grid: &[f64],
    signal_power_dbm: f64,
    options: &CmeOptions,
) -> Result<GainSpectrum> {
    check_grid(signal_grid)?;
    options.validate()?;
    if pump.direction != Direction::Backward {
        return Err(Error::InvalidParameter(
            "the isolation pump must travel backward, with the reflected signal".into(),
        ));
    }
    let (points, gaps) = collect_points(signal_grid, |omega_s| {
        let init = ThreeWaveModes::from_tones(medium, couplings, omega_s, signal_power_dbm, pump)?;
        let traj = integrate_3wm(medium, couplings, &init, options)?;
        let (transmitted, upconverted) = photon_fractions(&traj);
        Ok(SpectrumPoint {
            omega: omega_s,
            gain_db: traj.gain_db(threewave::SIGNAL),
            transmitted_fraction: transmitted,
            upconverted_fraction: upconverted,
        })
    })?;
    Ok(GainSpectrum {
        points,
        gaps,
        pump: *pump,
        couplings: *couplings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationCurve {
    pub omega_s: f64,
    /// (input power [dBm], gain [dB]) in input order.
    pub points: Vec<(f64, f64)>,
    /// Gain at [`SMALL_SIGNAL_DBM`].
    pub small_signal_gain_db: f64,
    /// Input power at which the gain has dropped by 1 dB, linearly
    /// interpolated; `None` if not reached on the grid.
    pub p1db_dbm: Option<f64>,
}

/// Signal gain versus input signal power at fixed pump.
pub fn saturation_curve<D: Dispersion + ?Sized>(
    medium: &D,
    couplings: &Couplings,
    pump: &ToneConfig,
    omega_s: f64,
    power_grid: &[f64],
    options: &CmeOptions,
) -> Result<SaturationCurve> {
    check_grid(power_grid)?;
    options.validate()?;
    let gain = |p: f64| fourwave::signal_gain_db(medium, couplings, pump, omega_s, p, options);
    let small_signal_gain_db = gain(SMALL_SIGNAL_DBM)?;
    let gains = power_grid
        .par_iter()
        .map(|&p| gain(p))
        .collect::<Result<Vec<f64>>>()?;
    let points: Vec<(f64, f64)> = power_grid.iter().copied().zip(gains).collect();

    let target = small_signal_gain_db - 1.0;
    let p1db_dbm = points.windows(2).find_map(|w| {
        let ((p0, g0), (p1, g1)) = (w[0], w[1]);
        (g0 > target && g1 <= target).then(|| p0 + (target - g0) * (p1 - p0) / (g1 - g0))
    });
    Ok(SaturationCurve {
        omega_s,
        points,
        small_signal_gain_db,
        p1db_dbm,
    })
}
