//! Grid-search fit of the nonlinear couplings and the amplitude calibration
//! to a measured gain profile.

use rayon::prelude::*;
use serde::Serialize;

use super::fourwave::{signal_gain_db, CmeOptions};
use crate::error::{Error, Result};
use crate::medium::Dispersion;
use crate::phasematch::{Couplings, ToneConfig};

/// Candidate values for each fitted quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct FitGrid {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub amp_scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub couplings: Couplings,
    /// Root-mean-square gain residual [dB].
    pub rms_db: f64,
}

/// Pick the grid point minimizing the RMS difference between the model gain
/// and `target` = (signal ω [rad/s], gain [dB]) pairs. Candidates for which
/// any target point cannot be evaluated are discarded.
pub fn fit_couplings<D: Dispersion + ?Sized>(
    medium: &D,
    pump: &ToneConfig,
    target: &[(f64, f64)],
    grid: &FitGrid,
    signal_power_dbm: f64,
    options: &CmeOptions,
) -> Result<FitResult> {
    if target.is_empty() || grid.beta.is_empty() || grid.gamma.is_empty() || grid.amp_scale.is_empty() {
        return Err(Error::InvalidParameter("fit needs a target and a non-empty grid".into()));
    }
    let mut candidates = Vec::new();
    for &beta in &grid.beta {
        for &gamma in &grid.gamma {
            for &amp_scale in &grid.amp_scale {
                candidates.push(Couplings::new(beta, gamma, amp_scale));
            }
        }
    }
    let rms = |c: &Couplings| -> Option<f64> {
        let mut sum = 0.0;
        for &(omega_s, g) in target {
            let model = signal_gain_db(medium, c, pump, omega_s, signal_power_dbm, options).ok()?;
            sum += (model - g).powi(2);
        }
        Some((sum / target.len() as f64).sqrt())
    };
    candidates
        .par_iter()
        .filter_map(|c| rms(c).map(|r| FitResult { couplings: *c, rms_db: r }))
        .min_by(|a, b| a.rms_db.total_cmp(&b.rms_db))
        .ok_or_else(|| Error::NotFound("no grid point could be evaluated on the whole target".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::MediumParams;
    use crate::unitcell::{coefficients_at, SnailSpec};
    use std::f64::consts::PI;

    #[test]
    fn recovers_generating_parameters() {
        let spec = SnailSpec::default();
        let m = MediumParams::from_cell(&spec, &coefficients_at(&spec, 0.0).unwrap());
        let pump = ToneConfig::forward(2.0 * PI * 9e9, -80.0);
        let truth = Couplings::new(0.0, 0.3, 1.0);
        let options = CmeOptions::default();
        let target: Vec<(f64, f64)> = [6.0e9, 7.0e9, 8.0e9]
            .iter()
            .map(|f| {
                let w = 2.0 * PI * f;
                (w, signal_gain_db(&m, &truth, &pump, w, -120.0, &options).unwrap())
            })
            .collect();
        let grid = FitGrid {
            beta: vec![0.0],
            gamma: vec![0.1, 0.2, 0.3, 0.4],
            amp_scale: vec![0.5, 1.0],
        };
        let fit = fit_couplings(&m, &pump, &target, &grid, -120.0, &options).unwrap();
        assert_eq!(fit.couplings, truth);
        assert!(fit.rms_db < 1e-9);
    }
}
