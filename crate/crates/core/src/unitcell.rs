//! SNAIL unit cell: equilibrium phase, Taylor coefficients of the
//! current-phase relation and the derived line parameters.
//!
//! External flux is given in units of Φ0 at the API boundary and converted
//! to radians (2π Φ_ext/Φ0) internally.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{ELEMENTARY_CHARGE, FLUX_QUANTUM, HBAR, RESISTANCE_QUANTUM};
use crate::error::{Error, Result};

/// Which expression is used for the first-order coefficient α̃.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaForm {
    /// `r cos φ* + cos((φ* − φ_ext)/3)`.
    #[default]
    AsPrinted,
    /// `r cos φ* + (1/3) cos((φ* − φ_ext)/3)`, the derivative of the
    /// three-junction arm current, consistent with β̃ and γ̃.
    ConsistentDerivatives,
}

/// Physical parameters of one SNAIL cell and of the chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnailSpec {
    /// Critical current of the large junctions [A].
    pub critical_current: f64,
    /// Small-to-large junction critical current ratio r.
    pub asymmetry: f64,
    /// Ground capacitance per cell [F].
    pub ground_capacitance: f64,
    /// Junction capacitance per cell [F].
    pub junction_capacitance: f64,
    /// Number of cells.
    pub cells: usize,
    /// Dielectric loss tangent.
    pub tan_delta: f64,
    pub alpha_form: AlphaForm,
}

impl Default for SnailSpec {
    fn default() -> Self {
        SnailSpec {
            critical_current: 2.2e-6,
            asymmetry: 0.07,
            ground_capacitance: 250e-15,
            junction_capacitance: 35e-15,
            cells: 700,
            tan_delta: 2.9e-3,
            alpha_form: AlphaForm::AsPrinted,
        }
    }
}

impl SnailSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.critical_current > 0.0 && self.critical_current.is_finite()) {
            return bad("critical current must be positive");
        }
        if !(self.asymmetry > 0.0 && self.asymmetry < 1.0) {
            return bad("asymmetry ratio r must lie in (0, 1)");
        }
        if !(self.ground_capacitance > 0.0 && self.ground_capacitance.is_finite()) {
            return bad("ground capacitance must be positive");
        }
        if !(self.junction_capacitance > 0.0 && self.junction_capacitance.is_finite()) {
            return bad("junction capacitance must be positive");
        }
        if self.cells == 0 {
            return bad("cell count must be at least 1");
        }
        if !(self.tan_delta >= 0.0 && self.tan_delta.is_finite()) {
            return bad("loss tangent must be non-negative");
        }
        Ok(())
    }
}

/// An operating point: external flux and the equilibrium phase across the
/// small junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxPoint {
    /// External flux [Φ0].
    pub phi_ext: f64,
    /// Equilibrium phase φ* [rad].
    pub phi_star: f64,
}

/// Flux-dependent cell quantities at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellCoefficients {
    pub flux: FluxPoint,
    /// α̃
    pub alpha: f64,
    /// β̃
    pub beta_t: f64,
    /// γ̃
    pub gamma_t: f64,
    /// Inductance per cell [H].
    pub inductance: f64,
    /// 1/√(L C_g) [rad/s].
    pub omega0: f64,
    /// Plasma frequency 1/√(L C_J) [rad/s].
    pub omega_j: f64,
    /// √(L/C_g) [Ω].
    pub impedance: f64,
    /// Three-wave-mixing rate [rad/s].
    pub g3: f64,
    /// Four-wave-mixing rate [rad/s].
    pub g4: f64,
    /// Scaled three-wave coupling of the wave equation.
    pub beta: f64,
    /// Scaled four-wave coupling of the wave equation.
    pub gamma: f64,
}

fn equilibrium_residual(r: f64, phi: f64, phi_ext_rad: f64) -> f64 {
    r * phi.sin() + ((phi - phi_ext_rad) / 3.0).sin()
}

fn equilibrium_slope(r: f64, phi: f64, phi_ext_rad: f64) -> f64 {
    r * phi.cos() + ((phi - phi_ext_rad) / 3.0).cos() / 3.0
}

const RESIDUAL_TOL: f64 = 1e-13;
const CONTINUATION_STEP: f64 = 0.05;
const MAX_ITER: usize = 200;

/// Safeguarded Newton iteration inside the bracket that always contains the
/// continuously connected root: |(φ − φ_ext)/3| ≤ asin r.
fn solve_bracketed(r: f64, phi_ext_rad: f64, guess: f64) -> Option<f64> {
    let half_width = 3.0 * r.asin();
    let mut lo = phi_ext_rad - half_width;
    let mut hi = phi_ext_rad + half_width;
    let f = |p: f64| equilibrium_residual(r, p, phi_ext_rad);
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f(hi) == 0.0 {
        return Some(hi);
    }
    let mut phi = guess.clamp(lo, hi);
    for _ in 0..MAX_ITER {
        let value = f(phi);
        if value.abs() < RESIDUAL_TOL {
            return Some(phi);
        }
        if value.signum() == f_lo.signum() {
            lo = phi;
            f_lo = value;
        } else {
            hi = phi;
        }
        let slope = equilibrium_slope(r, phi, phi_ext_rad);
        let newton = phi - value / slope;
        phi = if slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 4.0 * f64::EPSILON * phi.abs().max(1.0) {
            let value = f(phi);
            return (value.abs() < RESIDUAL_TOL).then_some(phi);
        }
    }
    None
}

/// Equilibrium phase φ* at external flux `phi_ext` (in Φ0), i.e. the root of
/// `r sin φ* + sin((φ* − φ_ext)/3) = 0` on the branch through φ* = 0 at zero
/// flux. The branch is followed by continuation in steps of 0.05 rad.
pub fn equilibrium_phase(spec: &SnailSpec, phi_ext: f64) -> Result<FluxPoint> {
    spec.validate()?;
    if !phi_ext.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "external flux must be finite, got {phi_ext}"
        )));
    }
    let r = spec.asymmetry;
    let target = 2.0 * PI * phi_ext;
    let steps = ((target.abs() / CONTINUATION_STEP).ceil() as usize).max(1);
    let mut phi = 0.0;
    for step in 1..=steps {
        let phi_ext_rad = target * step as f64 / steps as f64;
        match solve_bracketed(r, phi_ext_rad, phi) {
            Some(root) => phi = root,
            None => {
                return Err(Error::NonConvergence {
                    phi_ext,
                    residual: equilibrium_residual(r, phi, phi_ext_rad).abs(),
                })
            }
        }
    }
    Ok(FluxPoint {
        phi_ext,
        phi_star: phi,
    })
}

/// Taylor coefficients (α̃, β̃, γ̃) of the current-phase relation around φ*.
pub fn taylor_coefficients(spec: &SnailSpec, fp: FluxPoint) -> (f64, f64, f64) {
    let r = spec.asymmetry;
    let phi = fp.phi_star;
    let arm = (phi - 2.0 * PI * fp.phi_ext) / 3.0;
    let alpha = match spec.alpha_form {
        AlphaForm::AsPrinted => r * phi.cos() + arm.cos(),
        AlphaForm::ConsistentDerivatives => r * phi.cos() + arm.cos() / 3.0,
    };
    let beta_t = 0.5 * (r * phi.sin() + arm.sin() / 9.0);
    let gamma_t = (r * phi.cos() + arm.cos() / 27.0) / 6.0;
    (alpha, beta_t, gamma_t)
}

pub fn cell_coefficients(spec: &SnailSpec, fp: FluxPoint) -> Result<CellCoefficients> {
    spec.validate()?;
    let (alpha, beta_t, gamma_t) = taylor_coefficients(spec, fp);
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveInductance { alpha });
    }
    let inductance = FLUX_QUANTUM / (2.0 * PI * spec.critical_current * alpha);
    let omega0 = 1.0 / (inductance * spec.ground_capacitance).sqrt();
    let omega_j = 1.0 / (inductance * spec.junction_capacitance).sqrt();
    let impedance = (inductance / spec.ground_capacitance).sqrt();

    let charging_energy = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * spec.ground_capacitance);
    let g3 = beta_t / (3.0 * alpha) * (charging_energy * omega0 / HBAR).sqrt();
    let g4 = gamma_t / (2.0 * alpha) * charging_energy / HBAR;
    let beta = 6.0 * g3 * (RESISTANCE_QUANTUM / (PI * omega0 * omega0 * impedance)).sqrt();
    let gamma = 8.0 * g4 * RESISTANCE_QUANTUM / (PI * omega0 * impedance);

    Ok(CellCoefficients {
        flux: fp,
        alpha,
        beta_t,
        gamma_t,
        inductance,
        omega0,
        omega_j,
        impedance,
        g3,
        g4,
        beta,
        gamma,
    })
}

/// Equilibrium phase followed by [`cell_coefficients`].
pub fn coefficients_at(spec: &SnailSpec, phi_ext: f64) -> Result<CellCoefficients> {
    let fp = equilibrium_phase(spec, phi_ext)?;
    cell_coefficients(spec, fp)
}

fn gamma_t_at(spec: &SnailSpec, phi_ext: f64) -> Result<f64> {
    let fp = equilibrium_phase(spec, phi_ext)?;
    Ok(taylor_coefficients(spec, fp).2)
}

const KERR_FREE_SCAN_POINTS: usize = 2000;

/// Smallest flux in (0, 0.5] Φ0 where γ̃ changes sign.
pub fn kerr_free_flux(spec: &SnailSpec) -> Result<f64> {
    spec.validate()?;
    let mut prev_flux = 0.0;
    let mut prev = gamma_t_at(spec, 0.0)?;
    for i in 1..=KERR_FREE_SCAN_POINTS {
        let flux = 0.5 * i as f64 / KERR_FREE_SCAN_POINTS as f64;
        let value = gamma_t_at(spec, flux)?;
        if value == 0.0 {
            return Ok(flux);
        }
        if value.signum() != prev.signum() {
            return bisect_gamma(spec, prev_flux, flux, prev);
        }
        prev_flux = flux;
        prev = value;
    }
    Err(Error::NotFound(format!(
        "γ̃ does not change sign in (0, 0.5] Φ0 for r = {}",
        spec.asymmetry
    )))
}

fn bisect_gamma(spec: &SnailSpec, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let f_mid = gamma_t_at(spec, mid)?;
        if f_mid.abs() < 1e-12 || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Cell coefficients over a grid of external fluxes [Φ0], in grid order.
pub fn flux_sweep(spec: &SnailSpec, flux_grid: &[f64]) -> Result<Vec<CellCoefficients>> {
    if flux_grid.is_empty() {
        return Err(Error::InvalidParameter("flux grid is empty".into()));
    }
    flux_grid
        .iter()
        .enumerate()
        .map(|(i, &flux)| coefficients_at(spec, flux).map_err(|e| Error::at(i, e)))
        .collect()
}
