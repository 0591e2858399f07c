//! Measurement-chain noise model: thermal source noise, per-frequency
//! calibration of the output line from variable-temperature data, and the
//! system noise of a chain containing the amplifier.
//!
//! The calibration model for a thermal source at temperature T is
//!
//! ```text
//! P(ω) = (N_source(ω, T) + N_out(ω)) · G_out(ω) · B_w
//! ```
//!
//! so at each frequency P is linear in N_source with slope `G_out·B_w` and
//! intercept `N_out·G_out·B_w`.

use std::collections::BTreeMap;
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};

/// Symmetrized thermal noise spectral density of a matched source,
/// `(ħω/2)·coth(ħω / 2k_B T)` [W/Hz]. At T = 0 this is exactly `ħω/2`.
pub fn source_noise(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be ≥ 0, got {temperature}"
        )));
    }
    let half = HBAR * omega / 2.0;
    if temperature == 0.0 {
        return Ok(half);
    }
    let x = half / (BOLTZMANN * temperature);
    Ok(half / x.tanh())
}

/// Standard-quantum-limit reference: one photon of total system noise,
/// `ħω` [W/Hz] (half a photon of vacuum plus half a photon of minimum
/// added noise).
pub fn sql_reference(omega_grid: &[f64]) -> Result<Vec<f64>> {
    omega_grid
        .iter()
        .map(|&w| {
            if w > 0.0 && w.is_finite() {
                Ok(HBAR * w)
            } else {
                Err(Error::InvalidParameter(format!(
                    "frequency must be positive, got {w}"
                )))
            }
        })
        .collect()
}

/// Noise spectral density [W/Hz] expressed in photons at the same frequency.
pub fn to_photons(omega: f64, density: f64) -> f64 {
    density / (HBAR * omega)
}

/// One spectrum-analyzer reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseRecord {
    /// [rad/s]
    pub omega: f64,
    /// Source temperature [K].
    pub temperature: f64,
    /// Measured power [W].
    pub power: f64,
    /// Inverse-variance weight; `None` means uniform.
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NoiseMeasurement {
    pub records: Vec<NoiseRecord>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    freq_hz: f64,
    temp_k: f64,
    power_w: f64,
    #[serde(default)]
    weight: Option<f64>,
}

impl NoiseMeasurement {
    pub fn new(records: Vec<NoiseRecord>) -> Self {
        NoiseMeasurement { records }
    }

    /// Read comma-separated records with header
    /// `freq_hz,temp_k,power_w[,weight]`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::InvalidParameter(format!("noise data header: {e}")))?
            .clone();
        let names: Vec<&str> = headers.iter().collect();
        let expected = ["freq_hz", "temp_k", "power_w"];
        if names.len() < 3 || names[..3] != expected || (names.len() == 4 && names[3] != "weight") || names.len() > 4 {
            return Err(Error::InvalidParameter(format!(
                "noise data header must be freq_hz,temp_k,power_w[,weight], got {}",
                names.join(",")
            )));
        }
        let mut records = Vec::new();
        for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
            // header is line 1
            let line = i + 2;
            let row = row.map_err(|e| Error::InvalidParameter(format!("noise data line {line}: {e}")))?;
            if !(row.freq_hz > 0.0 && row.temp_k >= 0.0 && row.power_w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "noise data line {line}: need freq_hz > 0, temp_k ≥ 0 and finite power_w"
                )));
            }
            if let Some(w) = row.weight {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "noise data line {line}: weight must be positive"
                    )));
                }
            }
            records.push(NoiseRecord {
                omega: 2.0 * std::f64::consts::PI * row.freq_hz,
                temperature: row.temp_k,
                power: row.power_w,
                weight: row.weight,
            });
        }
        if records.is_empty() {
            return Err(Error::InvalidParameter("noise data has no records".into()));
        }
        Ok(NoiseMeasurement { records })
    }

    /// Records grouped by exact frequency, in ascending frequency order.
    fn bins(&self) -> Vec<(f64, Vec<NoiseRecord>)> {
        let mut map: BTreeMap<u64, Vec<NoiseRecord>> = BTreeMap::new();
        for r in &self.records {
            // positive floats order like their bit patterns
            map.entry(r.omega.to_bits()).or_default().push(*r);
        }
        map.into_iter().map(|(bits, rs)| (f64::from_bits(bits), rs)).collect()
    }
}

/// Calibration result for one frequency bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinFit {
    /// [rad/s]
    pub omega: f64,
    /// Output-line power gain (linear).
    pub g_out: f64,
    /// Added noise referred to the line input [W/Hz].
    pub n_out: f64,
    pub g_out_stderr: f64,
    pub n_out_stderr: f64,
    /// Measured minus fitted power [W], in record order.
    pub residuals: Vec<f64>,
}

/// Calibrated output line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseChainModel {
    /// [rad/s]
    pub omega: Vec<f64>,
    /// Linear power gain.
    pub g_out: Vec<f64>,
    /// Added noise referred to the line input [W/Hz].
    pub n_out: Vec<f64>,
    /// Resolution bandwidth [Hz].
    pub bandwidth: f64,
    /// Per-bin fit diagnostics; empty for models built directly.
    pub fits: Vec<BinFit>,
}

impl NoiseChainModel {
    pub fn new(omega: Vec<f64>, g_out: Vec<f64>, n_out: Vec<f64>, bandwidth: f64) -> Result<Self> {
        if omega.len() != g_out.len() || omega.len() != n_out.len() {
            return Err(Error::InvalidParameter(
                "frequency, gain and noise grids differ in length".into(),
            ));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter("bandwidth must be positive".into()));
        }
        if let Some(&g) = g_out.iter().find(|&&g| !(g > 0.0)) {
            return Err(Error::NonPositiveGain(g));
        }
        if n_out.iter().any(|&n| !(n >= 0.0)) {
            return Err(Error::InvalidParameter("added noise must be ≥ 0".into()));
        }
        Ok(NoiseChainModel {
            omega,
            g_out,
            n_out,
            bandwidth,
            fits: Vec::new(),
        })
    }
}

fn fit_bin(omega: f64, records: &[NoiseRecord], bandwidth: f64) -> Result<BinFit> {
    let xs = records
        .iter()
        .map(|r| source_noise(omega, r.temperature))
        .collect::<Result<Vec<f64>>>()?;
    let ws: Vec<f64> = records.iter().map(|r| r.weight.unwrap_or(1.0)).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.power).collect();

    let sw: f64 = ws.iter().sum();
    let mx = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - mx) * (x - mx)).sum();
    let sxy: f64 = ws
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(w, (x, y))| w * (x - mx) * (y - my))
        .sum();
    // relative spread of the regressor; equal source noise means no slope
    if !(sxx > 1e-20 * sw * mx * mx) {
        return Err(Error::SingularFit {
            omega,
            reason: "all source temperatures in the bin give the same noise".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if !(slope > 0.0) {
        return Err(Error::NonPositiveGain(slope / bandwidth));
    }
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();

    let n = records.len();
    let (se_slope, se_intercept, cov) = if n > 2 {
        let s2 = ws
            .iter()
            .zip(&residuals)
            .map(|(w, r)| w * r * r)
            .sum::<f64>()
            / (n - 2) as f64;
        let var_slope = s2 / sxx;
        let var_intercept = s2 * (1.0 / sw + mx * mx / sxx);
        (var_slope.sqrt(), var_intercept.sqrt(), -mx * var_slope)
    } else {
        (0.0, 0.0, 0.0)
    };
    let n_out = intercept / slope;
    if n_out < 0.0 {
        log::warn!(
            "negative added noise {n_out:e} W/Hz at {omega:e} rad/s; data may be under-resolved"
        );
    }
    // delta method for the ratio intercept/slope
    let var_ratio = (se_intercept / slope).powi(2) + (intercept * se_slope / (slope * slope)).powi(2)
        - 2.0 * intercept / slope.powi(3) * cov;
    Ok(BinFit {
        omega,
        g_out: slope / bandwidth,
        n_out,
        g_out_stderr: se_slope / bandwidth,
        n_out_stderr: var_ratio.max(0.0).sqrt(),
        residuals,
    })
}

/// Weighted straight-line fit of measured power against source noise in
/// every frequency bin.
pub fn fit_output_line(data: &NoiseMeasurement, bandwidth: f64) -> Result<NoiseChainModel> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidParameter("bandwidth must be positive".into()));
    }
    let bins = data.bins();
    if bins.is_empty() {
        return Err(Error::InvalidParameter("no measurement records".into()));
    }
    let fits = bins
        .par_iter()
        .map(|(omega, records)| fit_bin(*omega, records, bandwidth))
        .collect::<Result<Vec<BinFit>>>()?;
    Ok(NoiseChainModel {
        omega: fits.iter().map(|f| f.omega).collect(),
        g_out: fits.iter().map(|f| f.g_out).collect(),
        n_out: fits.iter().map(|f| f.n_out).collect(),
        bandwidth,
        fits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemNoise {
    /// [rad/s]
    pub omega: Vec<f64>,
    /// [W/Hz]
    pub density: Vec<f64>,
    /// Same quantity in photons, `density / ħω`.
    pub photons: Vec<f64>,
}

/// System noise referred to the amplifier input,
/// `N = P / (G_twpai · G_out · B_w)`, on the chain's frequency grid.
/// `g_twpai` is the linear power gain of the amplifier.
pub fn system_noise_twpai(p_out: &[f64], g_twpai: &[f64], chain: &NoiseChainModel) -> Result<SystemNoise> {
    let n = chain.omega.len();
    if p_out.len() != n || g_twpai.len() != n {
        return Err(Error::InvalidParameter(format!(
            "power and gain grids must have {n} points like the chain model"
        )));
    }
    if let Some(&g) = g_twpai.iter().chain(&chain.g_out).find(|&&g| !(g > 0.0)) {
        return Err(Error::NonPositiveGain(g));
    }
    let density: Vec<f64> = (0..n)
        .map(|j| p_out[j] / (g_twpai[j] * chain.g_out[j] * chain.bandwidth))
        .collect();
    let photons = (0..n).map(|j| to_photons(chain.omega[j], density[j])).collect();
    Ok(SystemNoise {
        omega: chain.omega.clone(),
        density,
        photons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn w(f_ghz: f64) -> f64 {
        2.0 * PI * 1e9 * f_ghz
    }

    /// coth(x) from its Laurent series, valid for |x| < π.
    fn coth_series(x: f64) -> f64 {
        // 2^{2n} B_{2n} / (2n)! for n = 0..
        let bernoulli = [
            1.0,
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
            7.0 / 6.0,
        ];
        let mut sum = 0.0;
        let mut fact = 1.0;
        for (n, b) in bernoulli.iter().enumerate() {
            if n > 0 {
                fact *= (2 * n - 1) as f64 * (2 * n) as f64;
            }
            sum += 4f64.powi(n as i32) * b / fact * x.powi(2 * n as i32 - 1);
        }
        sum
    }

    #[test]
    fn zero_temperature_is_half_photon() {
        let omega = w(6.0);
        assert_eq!(source_noise(omega, 0.0).unwrap(), HBAR * omega / 2.0);
    }

    #[test]
    fn high_temperature_limit() {
        let omega = w(6.0);
        let t = HBAR * omega / (0.01 * BOLTZMANN);
        let n = source_noise(omega, t).unwrap();
        assert!((n / (BOLTZMANN * t) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn series_oracle_six_gigahertz_one_kelvin() {
        let omega = w(6.0);
        let x = HBAR * omega / (2.0 * BOLTZMANN * 1.0);
        let expected = HBAR * omega / 2.0 * coth_series(x);
        let got = source_noise(omega, 1.0).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(source_noise(0.0, 1.0).is_err());
        assert!(source_noise(1.0, -1.0).is_err());
        assert!(sql_reference(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn sql_is_one_photon() {
        let grid = [w(4.0), w(8.0)];
        let sql = sql_reference(&grid).unwrap();
        assert!((sql[1] / sql[0] - 2.0).abs() < 1e-15);
        for (o, s) in grid.iter().zip(&sql) {
            assert!((to_photons(*o, *s) - 1.0).abs() < 1e-15);
        }
        let hand = 1.054_571_817e-34 * 2.0 * PI * 6e9;
        assert!((sql_reference(&[w(6.0)]).unwrap()[0] / hand - 1.0).abs() < 1e-9);
    }

    fn synthetic(omega: f64, g: f64, n_out: f64, bw: f64, temps: &[f64]) -> NoiseMeasurement {
        NoiseMeasurement::new(
            temps
                .iter()
                .map(|&t| NoiseRecord {
                    omega,
                    temperature: t,
                    power: (source_noise(omega, t).unwrap() + n_out) * g * bw,
                    weight: None,
                })
                .collect(),
        )
    }

    #[test]
    fn exact_recovery_without_noise() {
        let omega = w(6.0);
        let n_out = 10.0 * HBAR * omega;
        let data = synthetic(omega, 1e6, n_out, 1e6, &[0.04, 0.1, 0.3, 1.0]);
        let m = fit_output_line(&data, 1e6).unwrap();
        assert!((m.g_out[0] / 1e6 - 1.0).abs() < 1e-10);
        assert!((m.n_out[0] / n_out - 1.0).abs() < 1e-10);
        assert!(m.fits[0].residuals.iter().all(|r| r.abs() < 1e-20));
    }

    #[test]
    fn single_temperature_is_singular() {
        let omega = w(6.0);
        let data = synthetic(omega, 1e6, 1e-23, 1e6, &[0.1, 0.1, 0.1]);
        let err = fit_output_line(&data, 1e6).unwrap_err();
        assert_eq!(err.kind(), "SingularFit");
    }

    #[test]
    fn scale_equivariance() {
        let omega = w(5.0);
        let data = synthetic(omega, 3e5, 4e-23, 1e6, &[0.05, 0.2, 0.7]);
        let mut scaled = data.clone();
        for r in &mut scaled.records {
            r.power *= 7.0;
        }
        let a = fit_output_line(&data, 1e6).unwrap();
        let b = fit_output_line(&scaled, 1e6).unwrap();
        assert!((b.g_out[0] / a.g_out[0] - 7.0).abs() < 1e-10);
        assert!((b.n_out[0] / a.n_out[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bins_sorted_by_frequency() {
        let mut data = synthetic(w(7.0), 1e6, 1e-23, 1.0, &[0.1, 1.0]);
        data.records.extend(synthetic(w(3.0), 2e6, 1e-23, 1.0, &[0.1, 1.0]).records);
        let m = fit_output_line(&data, 1.0).unwrap();
        assert_eq!(m.omega, vec![w(3.0), w(7.0)]);
        assert!((m.g_out[0] / 2e6 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_ingest() {
        let text = "freq_hz,temp_k,power_w,weight\n6e9,0.05,1e-12,2\n6e9,1.0,2e-12,1\n";
        let data = NoiseMeasurement::from_csv(text.as_bytes()).unwrap();
        assert_eq!(data.records.len(), 2);
        assert_eq!(data.records[0].weight, Some(2.0));
        assert!((data.records[0].omega - w(6.0)).abs() < 1e-3);

        let bad = "freq,temp_k,power_w\n6e9,0.05,1e-12\n";
        assert!(NoiseMeasurement::from_csv(bad.as_bytes()).is_err());
        let bad_row = "freq_hz,temp_k,power_w\n6e9,-1,1e-12\n";
        let err = NoiseMeasurement::from_csv(bad_row.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn pass_through_and_gain_scaling() {
        let omega = w(6.0);
        let chain = NoiseChainModel::new(vec![omega], vec![1e6], vec![2e-23], 1e6).unwrap();
        let p = 2e-23 * 1e6 * 1e6;
        let a = system_noise_twpai(&[p], &[1.0], &chain).unwrap();
        assert!((a.density[0] / 2e-23 - 1.0).abs() < 1e-14);
        let b = system_noise_twpai(&[p], &[2.0], &chain).unwrap();
        assert!((b.density[0] / a.density[0] - 0.5).abs() < 1e-15);
        assert_eq!(
            system_noise_twpai(&[p], &[0.0], &chain).unwrap_err().kind(),
            "NonPositiveGain"
        );
    }
}
