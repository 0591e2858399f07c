//! Task dispatch: turn a resolved [`RunConfig`] into a result [`Table`].
//!
//! Rows are ordered by scenario, then by grid point. Grid points are
//! evaluated in parallel but never reordered, so identical configurations
//! give identical tables.

use std::f64::consts::PI;
use std::fs::File;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{linspace, pick, RunConfig, Task};
use super::output::Table;
use crate::cme::{gain_spectrum, isolation_spectrum, saturation_curve, CmeOptions, GainSpectrum};
use crate::error::{Error, Result};
use crate::medium::{Dispersion, MediumParams};
use crate::noisecal::{fit_output_line, to_photons, NoiseMeasurement};
use crate::phasematch::{dk_total, Couplings, ToneConfig};
use crate::unitcell::{coefficients_at, flux_sweep, CellCoefficients};

fn hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

fn rad(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Medium and couplings of scenario `i`.
pub struct Scenario {
    pub phi_ext: f64,
    pub cell: CellCoefficients,
    pub medium: MediumParams,
    pub couplings: Couplings,
}

pub fn scenario(config: &RunConfig, i: usize) -> Result<Scenario> {
    let o = &config.operating;
    let phi_ext = pick(&o.phi_ext, i);
    let cell = coefficients_at(&config.device, phi_ext)?;
    let medium = MediumParams::from_cell(&config.device, &cell);
    let couplings = Couplings {
        amp_scale: o.amp_scale,
        ..Couplings::from_cell(&cell).with_overrides(o.beta, o.gamma)
    };
    Ok(Scenario {
        phi_ext,
        cell,
        medium,
        couplings,
    })
}

pub fn cme_options(config: &RunConfig) -> CmeOptions {
    CmeOptions {
        projection: config.operating.projection,
        tol: config.operating.tolerance,
        samples: config.operating.samples,
        ..CmeOptions::default()
    }
}

fn amplification_pump(config: &RunConfig, i: usize) -> ToneConfig {
    let o = &config.operating;
    ToneConfig::forward(rad(pick(&o.pump_freq_hz, i)), pick(&o.pump_power_dbm, i))
}

fn isolation_pump(config: &RunConfig, i: usize) -> ToneConfig {
    let o = &config.operating;
    ToneConfig::backward(
        rad(pick(&o.isolation_pump_freq_hz, i)),
        pick(&o.isolation_pump_power_dbm, i),
    )
}

const CELL_COLUMNS: [&str; 13] = [
    "phi_ext",
    "phi_star_rad",
    "alpha",
    "beta_t",
    "gamma_t",
    "inductance_h",
    "f0_hz",
    "fj_hz",
    "impedance_ohm",
    "g3_rad_per_s",
    "g4_rad_per_s",
    "beta",
    "gamma",
];

fn cell_row(phi_ext: f64, c: &CellCoefficients) -> Vec<Option<f64>> {
    [
        phi_ext,
        c.flux.phi_star,
        c.alpha,
        c.beta_t,
        c.gamma_t,
        c.inductance,
        hz(c.omega0),
        hz(c.omega_j),
        c.impedance,
        c.g3,
        c.g4,
        c.beta,
        c.gamma,
    ]
    .into_iter()
    .map(Some)
    .collect()
}

/// Evaluate `f` over the signal grid in parallel. Points that fail become
/// `None` with a warning; if every point fails the first error is returned.
fn pointwise<T: Send>(grid: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<Option<T>>> {
    let results: Vec<Result<T>> = grid.par_iter().map(|&w| f(w)).collect();
    if results.iter().all(|r| r.is_err()) {
        let first = results.into_iter().next().expect("non-empty grid");
        return Err(first.err().expect("all points failed"));
    }
    Ok(results
        .into_iter()
        .zip(grid)
        .map(|(r, w)| match r {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("no value at {:.6e} Hz: {e}", hz(*w));
                None
            }
        })
        .collect())
}

/// Run the configured task.
pub fn run(config: &RunConfig) -> Result<Table> {
    log::info!("running task {}", config.task);
    match config.task {
        Task::CellParams => cell_params(config),
        Task::Dispersion => dispersion(config),
        Task::PhaseMismatch => phase_mismatch(config),
        Task::Gain => gain(config),
        Task::Isolation => isolation(config),
        Task::Saturation => saturation(config),
        Task::NoiseFit => noise_fit(config),
        Task::FluxSweep => flux_sweep_task(config),
    }
}

fn cell_params(config: &RunConfig) -> Result<Table> {
    let mut t = Table::new(CELL_COLUMNS.to_vec());
    for i in 0..config.operating.phi_ext.len() {
        let s = scenario(config, i)?;
        t.push(cell_row(s.phi_ext, &s.cell));
    }
    Ok(t)
}

fn flux_sweep_task(config: &RunConfig) -> Result<Table> {
    let fx = &config.flux_sweep;
    let grid = linspace(fx.flux_start, fx.flux_stop, fx.flux_points);
    let cells = flux_sweep(&config.device, &grid)?;
    let mut t = Table::new(CELL_COLUMNS.to_vec());
    for (phi, c) in grid.iter().zip(&cells) {
        t.push(cell_row(*phi, c));
    }
    Ok(t)
}

fn signal_grid(config: &RunConfig) -> Vec<f64> {
    config.operating.signal_grid_hz().into_iter().map(rad).collect()
}

fn dispersion(config: &RunConfig) -> Result<Table> {
    let grid = signal_grid(config);
    let mut t = Table::new(vec![
        "freq_hz",
        "k_rad_per_cell",
        "loss_per_cell",
        "transmission_db",
        "scenario",
        "phi_ext",
    ]);
    for i in 0..config.operating.phi_ext.len() {
        let s = scenario(config, i)?;
        let m = &s.medium;
        let values = pointwise(&grid, |w| {
            Ok((m.wavevector(w)?, m.loss_wavevector(w)?, m.linear_transmission_db(w)?))
        })?;
        for (w, v) in grid.iter().zip(values) {
            t.push(vec![
                Some(hz(*w)),
                v.map(|v| v.0),
                v.map(|v| v.1),
                v.map(|v| v.2),
                Some(i as f64),
                Some(s.phi_ext),
            ]);
        }
    }
    Ok(t)
}

fn phase_mismatch(config: &RunConfig) -> Result<Table> {
    let grid = signal_grid(config);
    let mut t = Table::new(vec![
        "freq_hz",
        "dk_dispersion_rad_per_cell",
        "dk_kerr_rad_per_cell",
        "dk_dynamic_rad_per_cell",
        "dk_total_rad_per_cell",
        "scenario",
        "pump_freq_hz",
        "phi_ext",
    ]);
    for i in 0..config.operating.scenarios() {
        let s = scenario(config, i)?;
        let pump = amplification_pump(config, i);
        let values = pointwise(&grid, |w| dk_total(&s.medium, &s.couplings, w, &pump))?;
        for (w, b) in grid.iter().zip(values) {
            t.push(vec![
                Some(hz(*w)),
                b.map(|b| b.dk_dispersion),
                b.map(|b| b.dk_kerr),
                b.map(|b| b.dk_dynamic),
                b.map(|b| b.dk_total),
                Some(i as f64),
                Some(hz(pump.freq)),
                Some(s.phi_ext),
            ]);
        }
    }
    Ok(t)
}

fn spectrum_summary(spec: &GainSpectrum, scenario: usize) -> Value {
    let peak = spec.peak();
    json!({
        "scenario": scenario,
        "peak_gain_db": peak.map(|p| p.gain_db),
        "peak_freq_hz": peak.map(|p| hz(p.omega)),
        "gaps": spec.gaps.iter().map(|g| json!({
            "freq_hz": hz(g.omega),
            "kind": g.kind,
            "message": g.message,
        })).collect::<Vec<_>>(),
    })
}

fn gain(config: &RunConfig) -> Result<Table> {
    let grid = signal_grid(config);
    let options = cme_options(config);
    let mut t = Table::new(vec![
        "freq_hz",
        "gain_db",
        "dk_total_rad_per_cell",
        "loss_db",
        "transmitted_fraction",
        "upconverted_fraction",
        "scenario",
        "pump_freq_hz",
        "phi_ext",
    ]);
    let mut summaries = Vec::new();
    for i in 0..config.operating.scenarios() {
        let s = scenario(config, i)?;
        let pump = amplification_pump(config, i);
        let spec = gain_spectrum(
            &s.medium,
            &s.couplings,
            &pump,
            &grid,
            config.operating.signal_power_dbm,
            &options,
        )?;
        summaries.push(spectrum_summary(&spec, i));
        let mut points = spec.points.iter().peekable();
        for &w in &grid {
            let p = points.next_if(|p| p.omega == w);
            let dk = dk_total(&s.medium, &s.couplings, w, &pump).ok().map(|b| b.dk_total);
            t.push(vec![
                Some(hz(w)),
                p.map(|p| p.gain_db),
                dk,
                s.medium.linear_transmission_db(w).ok(),
                p.map(|p| p.transmitted_fraction),
                p.map(|p| p.upconverted_fraction),
                Some(i as f64),
                Some(hz(pump.freq)),
                Some(s.phi_ext),
            ]);
        }
    }
    t.summary.insert("spectra".into(), Value::Array(summaries));
    Ok(t)
}

fn isolation(config: &RunConfig) -> Result<Table> {
    let grid = signal_grid(config);
    let options = cme_options(config);
    let mut t = Table::new(vec![
        "freq_hz",
        "isolation_db",
        "loss_db",
        "transmitted_fraction",
        "upconverted_fraction",
        "scenario",
        "isolation_pump_freq_hz",
        "phi_ext",
    ]);
    let mut summaries = Vec::new();
    for i in 0..config.operating.scenarios() {
        let s = scenario(config, i)?;
        let pump = isolation_pump(config, i);
        let spec = isolation_spectrum(
            &s.medium,
            &s.couplings,
            &pump,
            &grid,
            config.operating.signal_power_dbm,
            &options,
        )?;
        summaries.push(spectrum_summary(&spec, i));
        let mut points = spec.points.iter().peekable();
        for &w in &grid {
            let p = points.next_if(|p| p.omega == w);
            t.push(vec![
                Some(hz(w)),
                p.map(|p| p.gain_db),
                s.medium.linear_transmission_db(w).ok(),
                p.map(|p| p.transmitted_fraction),
                p.map(|p| p.upconverted_fraction),
                Some(i as f64),
                Some(hz(pump.freq)),
                Some(s.phi_ext),
            ]);
        }
    }
    t.summary.insert("spectra".into(), Value::Array(summaries));
    Ok(t)
}

fn saturation(config: &RunConfig) -> Result<Table> {
    let sat = &config.saturation;
    let powers = linspace(sat.power_start_dbm, sat.power_stop_dbm, sat.power_points);
    let options = cme_options(config);
    let mut t = Table::new(vec![
        "signal_power_dbm",
        "gain_db",
        "compression_db",
        "scenario",
        "pump_freq_hz",
        "phi_ext",
    ]);
    let mut summaries = Vec::new();
    for i in 0..config.operating.scenarios() {
        let s = scenario(config, i)?;
        let pump = amplification_pump(config, i);
        let curve = saturation_curve(&s.medium, &s.couplings, &pump, rad(sat.signal_freq_hz), &powers, &options)?;
        for &(p, g) in &curve.points {
            t.push(vec![
                Some(p),
                Some(g),
                Some(curve.small_signal_gain_db - g),
                Some(i as f64),
                Some(hz(pump.freq)),
                Some(s.phi_ext),
            ]);
        }
        summaries.push(json!({
            "scenario": i,
            "small_signal_gain_db": curve.small_signal_gain_db,
            "p1db_dbm": curve.p1db_dbm,
        }));
    }
    t.summary.insert("curves".into(), Value::Array(summaries));
    Ok(t)
}

fn noise_fit(config: &RunConfig) -> Result<Table> {
    let path = config
        .noise
        .data
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("noise-fit needs a data file".into()))?;
    let file = File::open(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot open {}: {e}", path.display())))?;
    let data = NoiseMeasurement::from_csv(file)?;
    let model = fit_output_line(&data, config.noise.bandwidth_hz)?;
    let mut t = Table::new(vec![
        "freq_hz",
        "g_out",
        "g_out_stderr",
        "n_out_w_per_hz",
        "n_out_stderr_w_per_hz",
        "n_out_photons",
        "rms_residual_w",
    ]);
    for f in &model.fits {
        let rms = (f.residuals.iter().map(|r| r * r).sum::<f64>() / f.residuals.len() as f64).sqrt();
        t.push(vec![
            Some(hz(f.omega)),
            Some(f.g_out),
            Some(f.g_out_stderr),
            Some(f.n_out),
            Some(f.n_out_stderr),
            Some(to_photons(f.omega, f.n_out)),
            Some(rms),
        ]);
    }
    let mut summary = Map::new();
    summary.insert("bandwidth_hz".into(), json!(model.bandwidth));
    summary.insert("bins".into(), json!(model.fits.len()));
    t.summary = summary;
    Ok(t)
}
