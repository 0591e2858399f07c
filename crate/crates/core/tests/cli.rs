//! End-to-end runs of the `twpai` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn twpai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twpai"))
        .args(args)
        .env_remove("TWPAI_LOG")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "exactly one diagnostic line: {text}");
    serde_json::from_str(lines[0]).unwrap()
}

const PINNED: &str = "beta = 0.30\ngamma = 0.40\n";

#[test]
fn gain_csv_columns_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "gain.cfg",
        &format!("task = gain\n[operating]\n{PINNED}signal_points = 33\n"),
    );
    let a = twpai(&["gain", "--config", &cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = twpai(&["gain", "--config", &cfg, "--threads", "1"]);
    assert_eq!(a.stdout, b.stdout, "byte-identical output");

    let text = String::from_utf8(a.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("freq_hz,gain_db,dk_total_rad_per_cell,"), "{header}");
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 33);
    let peak = rows
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(peak > 15.0, "{peak}");
}

#[test]
fn json_output_to_file_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "task = cell-params\n[operating]\nphi_ext = 0\n");
    let out = dir.path().join("out.json");
    let r = twpai(&["cell-params", "--config", &cfg, "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(r.status.success());
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["metadata"]["task"], "cell-params");
    assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["metadata"]["constants"]["flux_quantum_wb"].is_number());
    let row = &v["rows"][0];
    assert_eq!(row["beta_t"], 0.0);
    // ω0/2π ≈ 27 GHz and ω_J/2π ≈ 72 GHz at zero flux
    assert!((row["f0_hz"].as_f64().unwrap() / 26.91e9 - 1.0).abs() < 1e-3);
    assert!((row["fj_hz"].as_f64().unwrap() / 71.91e9 - 1.0).abs() < 1e-3);
}

#[test]
fn config_errors_exit_2_with_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "task = gain\n[device]\ncells = many\nwhat = 1\n");
    let r = twpai(&["gain", "--config", &cfg]);
    assert_eq!(r.status.code(), Some(2));
    let v = stderr_json(&r);
    assert_eq!(v["error"]["kind"], "ConfigError");
    let lines: Vec<u64> = v["error"]["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["line"].as_u64().unwrap())
        .collect();
    assert_eq!(lines, vec![3, 4]);

    let missing = twpai(&["gain", "--config", "/nonexistent/file.cfg"]);
    assert_eq!(missing.status.code(), Some(2));
    stderr_json(&missing);

    let unknown_task = twpai(&["bake", "--config", &cfg]);
    assert_eq!(unknown_task.status.code(), Some(2));
    stderr_json(&unknown_task);

    let no_args = twpai(&[]);
    assert_eq!(no_args.status.code(), Some(2));
    stderr_json(&no_args);
}

#[test]
fn numeric_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.cfg",
        "task = dispersion\n[operating]\nsignal_start_hz = 80e9\nsignal_stop_hz = 90e9\nsignal_points = 3\n",
    );
    let r = twpai(&["dispersion", "--config", &cfg]);
    assert_eq!(r.status.code(), Some(3));
    assert_eq!(stderr_json(&r)["error"]["kind"], "AbovePlasmaCutoff");
}

#[test]
fn flux_sweep_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "f.cfg", "task = flux-sweep\n[flux_sweep]\nflux_points = 21\n");
    let r = twpai(&["flux-sweep", "--config", &cfg]);
    assert!(r.status.success());
    let mut rdr = csv::Reader::from_reader(r.stdout.as_slice());
    let beta_t: Vec<f64> = rdr.records().map(|r| r.unwrap()[3].parse().unwrap()).collect();
    assert_eq!(beta_t.len(), 21);
    assert!(beta_t[0].abs() < 1e-12 && beta_t[20].abs() < 1e-12);
}

fn spectra_by_scenario(v: &Value, gain_key: &str) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
    for row in v["rows"].as_array().unwrap() {
        let s = row["scenario"].as_f64().unwrap() as usize;
        if out.len() <= s {
            out.resize(s + 1, Vec::new());
        }
        if let Some(g) = row[gain_key].as_f64() {
            out[s].push((row["freq_hz"].as_f64().unwrap(), g));
        }
    }
    out
}

#[test]
fn tunability_band_follows_pump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.cfg",
        &format!(
            "task = gain\n[operating]\n{PINNED}pump_freq_hz = 8.6e9, 9.2e9, 9.8e9\n\
             signal_start_hz = 1e9\nsignal_stop_hz = 19e9\nsignal_points = 91\n"
        ),
    );
    let r = twpai(&["gain", "--config", &cfg, "--format", "json"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    let spectra = spectra_by_scenario(&v, "gain_db");
    assert_eq!(spectra.len(), 3);
    // gain-weighted centroid of the amplified band
    let centroid = |s: &[(f64, f64)]| {
        let lin: Vec<(f64, f64)> = s
            .iter()
            .filter(|(_, g)| *g > 0.0)
            .map(|(f, g)| (*f, 10f64.powf(g / 10.0)))
            .collect();
        lin.iter().map(|(f, g)| f * g).sum::<f64>() / lin.iter().map(|(_, g)| g).sum::<f64>()
    };
    let c: Vec<f64> = spectra.iter().map(|s| centroid(s)).collect();
    assert!(c[0] < c[1] && c[1] < c[2], "{c:?}");
}

#[test]
fn published_tuning_pairs_emit_three_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.cfg",
        "task = isolation\n[operating]\nphi_ext = 0.26, 0.19, 0.35\n\
         pump_freq_hz = 9.0e9, 9.5e9, 9.15e9\nisolation_pump_freq_hz = 13.71e9, 13.85e9, 7.57e9\n\
         isolation_pump_power_dbm = -79\nsignal_start_hz = 4e9\nsignal_stop_hz = 10e9\nsignal_points = 13\n",
    );
    let r = twpai(&["isolation", "--config", &cfg, "--format", "json"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    let spectra = spectra_by_scenario(&v, "isolation_db");
    assert_eq!(spectra.len(), 3);
    assert!(spectra.iter().all(|s| s.len() == 13));
}

#[test]
fn noise_fit_end_to_end() {
    use twpai::noisecal::source_noise;
    let dir = tempfile::tempdir().unwrap();
    let mut data = String::from("freq_hz,temp_k,power_w\n");
    let (g, bw) = (2e6, 1e6);
    for f in [4e9, 5e9] {
        let omega = 2.0 * std::f64::consts::PI * f;
        let n_out = 10.0 * twpai::constants::HBAR * omega;
        for t in [0.04, 0.1, 0.3, 1.0] {
            let p = (source_noise(omega, t).unwrap() + n_out) * g * bw;
            data.push_str(&format!("{f:e},{t},{p:e}\n"));
        }
    }
    write(dir.path(), "cal.csv", &data);
    // relative path resolves against the config's directory
    let cfg = write(dir.path(), "n.cfg", "task = noise-fit\n[noise]\ndata = cal.csv\n[output]\nprecision = 12\n");
    let r = twpai(&["noise-fit", "--config", &cfg]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let mut rdr = csv::Reader::from_reader(r.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert!((row[1].parse::<f64>().unwrap() / g - 1.0).abs() < 1e-9);
        assert!((row[5].parse::<f64>().unwrap() - 10.0).abs() < 1e-8);
    }
}

#[test]
fn pump_off_gain_column_equals_loss_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.cfg",
        &format!("task = gain\n[operating]\n{PINNED}pump_power_dbm = -1000\nsignal_points = 11\n"),
    );
    let r = twpai(&["gain", "--config", &cfg, "--format", "json"]);
    assert!(r.status.success());
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    for row in v["rows"].as_array().unwrap() {
        let (g, l) = (row["gain_db"].as_f64().unwrap(), row["loss_db"].as_f64().unwrap());
        assert!((g - l).abs() < 1e-6, "{g} vs {l}");
    }
}
