//! Run configuration: a flat, sectioned `key = value` text format.
//!
//! ```text
//! task = gain            # keys before the first section belong to [run]
//!
//! [device]
//! asymmetry = 0.07
//!
//! [operating]
//! phi_ext = 0.35
//! pump_freq_hz = 9.0e9, 9.2e9   # comma-separated lists define scenarios
//! ```
//!
//! Frequencies are in Hz, powers in dBm, flux in Φ0. Unknown sections and
//! keys are rejected; every problem is reported with its line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cme::Projection;
use crate::unitcell::{AlphaForm, SnailSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    CellParams,
    Dispersion,
    PhaseMismatch,
    Gain,
    Isolation,
    Saturation,
    NoiseFit,
    FluxSweep,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::CellParams,
        Task::Dispersion,
        Task::PhaseMismatch,
        Task::Gain,
        Task::Isolation,
        Task::Saturation,
        Task::NoiseFit,
        Task::FluxSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::CellParams => "cell-params",
            Task::Dispersion => "dispersion",
            Task::PhaseMismatch => "phase-mismatch",
            Task::Gain => "gain",
            Task::Isolation => "isolation",
            Task::Saturation => "saturation",
            Task::NoiseFit => "noise-fit",
            Task::FluxSweep => "flux-sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One configuration problem. `line` is 1-based; `None` for problems that
/// are not tied to a line, such as a missing key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Operating point and tone settings. Lists of length > 1 define scenarios;
/// every list has length 1 or the common scenario count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Operating {
    /// [Φ0]
    pub phi_ext: Vec<f64>,
    /// Forward amplification pump [Hz].
    pub pump_freq_hz: Vec<f64>,
    pub pump_power_dbm: Vec<f64>,
    /// Backward isolation pump [Hz].
    pub isolation_pump_freq_hz: Vec<f64>,
    pub isolation_pump_power_dbm: Vec<f64>,
    pub signal_start_hz: f64,
    pub signal_stop_hz: f64,
    pub signal_points: usize,
    pub signal_power_dbm: f64,
    pub amp_scale: f64,
    /// Overrides of the unit-cell couplings.
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub projection: Projection,
    pub tolerance: f64,
    pub samples: usize,
}

impl Default for Operating {
    fn default() -> Self {
        Operating {
            phi_ext: vec![0.35],
            pump_freq_hz: vec![9.2e9],
            pump_power_dbm: vec![-78.0],
            isolation_pump_freq_hz: vec![7.57e9],
            isolation_pump_power_dbm: vec![-79.0],
            signal_start_hz: 1e9,
            signal_stop_hz: 17e9,
            signal_points: 161,
            signal_power_dbm: -130.0,
            amp_scale: 1.0,
            beta: None,
            gamma: None,
            projection: Projection::Printed,
            tolerance: 1e-9,
            samples: 64,
        }
    }
}

impl Operating {
    /// Number of scenarios defined by the list-valued keys.
    pub fn scenarios(&self) -> usize {
        [
            self.phi_ext.len(),
            self.pump_freq_hz.len(),
            self.pump_power_dbm.len(),
            self.isolation_pump_freq_hz.len(),
            self.isolation_pump_power_dbm.len(),
        ]
        .into_iter()
        .max()
        .unwrap_or(1)
    }

    /// Evenly spaced signal grid [Hz].
    pub fn signal_grid_hz(&self) -> Vec<f64> {
        linspace(self.signal_start_hz, self.signal_stop_hz, self.signal_points)
    }
}

/// Element `i` of a scenario list (lists of length 1 broadcast).
pub fn pick(list: &[f64], i: usize) -> f64 {
    if list.len() == 1 {
        list[0]
    } else {
        list[i]
    }
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    let step = (stop - start) / (points - 1) as f64;
    (0..points)
        .map(|j| if j + 1 == points { stop } else { start + step * j as f64 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationSettings {
    pub signal_freq_hz: f64,
    pub power_start_dbm: f64,
    pub power_stop_dbm: f64,
    pub power_points: usize,
}

impl Default for SaturationSettings {
    fn default() -> Self {
        SaturationSettings {
            signal_freq_hz: 6e9,
            power_start_dbm: -160.0,
            power_stop_dbm: -60.0,
            power_points: 51,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxSweepSettings {
    pub flux_start: f64,
    pub flux_stop: f64,
    pub flux_points: usize,
}

impl Default for FluxSweepSettings {
    fn default() -> Self {
        FluxSweepSettings {
            flux_start: 0.0,
            flux_stop: 0.5,
            flux_points: 51,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseSettings {
    /// Measurement records, `freq_hz,temp_k,power_w[,weight]`.
    pub data: Option<PathBuf>,
    pub bandwidth_hz: f64,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        NoiseSettings {
            data: None,
            bandwidth_hz: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Significant digits of emitted numbers.
    pub precision: usize,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            path: None,
            format: Format::Csv,
            precision: 10,
        }
    }
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub task: Task,
    pub device: SnailSpec,
    pub operating: Operating,
    pub saturation: SaturationSettings,
    pub flux_sweep: FluxSweepSettings,
    pub noise: NoiseSettings,
    pub output: OutputSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    FloatList,
    Count,
    Bool,
    Text,
}

/// Every accepted (section, key) pair and its value kind.
const KEYS: &[(&str, &str, Kind)] = &[
    ("run", "task", Kind::Text),
    ("device", "critical_current_a", Kind::Float),
    ("device", "asymmetry", Kind::Float),
    ("device", "ground_capacitance_f", Kind::Float),
    ("device", "junction_capacitance_f", Kind::Float),
    ("device", "cells", Kind::Count),
    ("device", "tan_delta", Kind::Float),
    ("device", "consistent_derivatives", Kind::Bool),
    ("operating", "phi_ext", Kind::FloatList),
    ("operating", "pump_freq_hz", Kind::FloatList),
    ("operating", "pump_power_dbm", Kind::FloatList),
    ("operating", "isolation_pump_freq_hz", Kind::FloatList),
    ("operating", "isolation_pump_power_dbm", Kind::FloatList),
    ("operating", "signal_start_hz", Kind::Float),
    ("operating", "signal_stop_hz", Kind::Float),
    ("operating", "signal_points", Kind::Count),
    ("operating", "signal_power_dbm", Kind::Float),
    ("operating", "amp_scale", Kind::Float),
    ("operating", "beta", Kind::Float),
    ("operating", "gamma", Kind::Float),
    ("operating", "projection", Kind::Text),
    ("operating", "tolerance", Kind::Float),
    ("operating", "samples", Kind::Count),
    ("saturation", "signal_freq_hz", Kind::Float),
    ("saturation", "power_start_dbm", Kind::Float),
    ("saturation", "power_stop_dbm", Kind::Float),
    ("saturation", "power_points", Kind::Count),
    ("flux_sweep", "flux_start", Kind::Float),
    ("flux_sweep", "flux_stop", Kind::Float),
    ("flux_sweep", "flux_points", Kind::Count),
    ("noise", "data", Kind::Text),
    ("noise", "bandwidth_hz", Kind::Float),
    ("output", "path", Kind::Text),
    ("output", "format", Kind::Text),
    ("output", "precision", Kind::Count),
];

/// Names of all accepted keys as `section.key`.
pub fn known_keys() -> Vec<String> {
    KEYS.iter().map(|(s, k, _)| format!("{s}.{k}")).collect()
}

#[derive(Debug, Clone)]
enum Value {
    Float(f64),
    FloatList(Vec<f64>),
    Count(usize),
    Bool(bool),
    Text(String),
}

/// Parse and validate `text`, resolving relative file paths against the
/// current directory.
pub fn validate(text: &str) -> Result<RunConfig, Vec<Diagnostic>> {
    validate_with(text, None, Path::new("."))
}

/// Parse and validate `text`. `task` supplies the task when the text has
/// none; if both are given they must agree. Relative paths in the text are
/// resolved against `base_dir`.
pub fn validate_with(text: &str, task: Option<Task>, base_dir: &Path) -> Result<RunConfig, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let values = parse_lines(text, &mut diags);
    let config = resolve(&values, task, base_dir, &mut diags);
    if diags.is_empty() {
        Ok(config.expect("resolved without diagnostics"))
    } else {
        Err(diags)
    }
}

fn parse_lines(text: &str, diags: &mut Vec<Diagnostic>) -> BTreeMap<(String, String), (usize, Value)> {
    let mut values = BTreeMap::new();
    let mut section = "run".to_string();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut err = |message: String| diags.push(Diagnostic { line: Some(line), message });
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                err(format!("malformed section header '{content}'"));
                continue;
            };
            let name = name.trim();
            if KEYS.iter().any(|(s, _, _)| *s == name) {
                section = name.to_string();
            } else {
                err(format!("unknown section [{name}]"));
                // keys of an unknown section are skipped, not reported again
                section = String::new();
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            err(format!("expected 'key = value', got '{content}'"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if section.is_empty() {
            continue;
        }
        let Some(&(_, _, kind)) = KEYS.iter().find(|(s, k, _)| *s == section && *k == key) else {
            err(format!("unknown key '{key}' in [{section}]"));
            continue;
        };
        let parsed = match parse_value(kind, value) {
            Ok(v) => v,
            Err(m) => {
                err(format!("{key}: {m}"));
                continue;
            }
        };
        if let Some((first, _)) = values.get(&(section.clone(), key.to_string())) {
            err(format!("duplicate key '{key}' (first set on line {first})"));
            continue;
        }
        values.insert((section.clone(), key.to_string()), (line, parsed));
    }
    values
}

fn parse_float(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_value(kind: Kind, s: &str) -> Result<Value, String> {
    if s.is_empty() {
        return Err("missing value".into());
    }
    match kind {
        Kind::Float => parse_float(s).map(Value::Float),
        Kind::FloatList => s
            .split(',')
            .map(|p| parse_float(p.trim()))
            .collect::<Result<Vec<f64>, String>>()
            .map(Value::FloatList),
        Kind::Count => s
            .parse::<usize>()
            .map(Value::Count)
            .map_err(|_| format!("'{s}' is not a non-negative integer")),
        Kind::Bool => match s {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(format!("'{s}' is not true or false")),
        },
        Kind::Text => Ok(Value::Text(s.trim_matches('"').to_string())),
    }
}

/// Typed access to the parsed values, recording range violations.
struct Fields<'a> {
    values: &'a BTreeMap<(String, String), (usize, Value)>,
    diags: &'a mut Vec<Diagnostic>,
}

impl Fields<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&(usize, Value)> {
        self.values.get(&(section.to_string(), key.to_string()))
    }

    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.get(section, key).map(|(l, _)| *l)
    }

    fn fail(&mut self, section: &str, key: &str, message: String) {
        let line = self.line(section, key);
        self.diags.push(Diagnostic {
            line,
            message: format!("{key}: {message}"),
        });
    }

    fn float(&mut self, section: &str, key: &str, default: f64, ok: impl Fn(f64) -> bool, rule: &str) -> f64 {
        match self.get(section, key) {
            Some((_, Value::Float(v))) => {
                let v = *v;
                if !ok(v) {
                    self.fail(section, key, format!("{v} violates {rule}"));
                }
                v
            }
            _ => default,
        }
    }

    fn opt_float(&mut self, section: &str, key: &str) -> Option<f64> {
        match self.get(section, key) {
            Some((_, Value::Float(v))) => Some(*v),
            _ => None,
        }
    }

    fn list(&mut self, section: &str, key: &str, default: &[f64], ok: impl Fn(f64) -> bool, rule: &str) -> Vec<f64> {
        match self.get(section, key) {
            Some((_, Value::FloatList(v))) => {
                let v = v.clone();
                if let Some(bad) = v.iter().find(|x| !ok(**x)) {
                    self.fail(section, key, format!("{bad} violates {rule}"));
                }
                v
            }
            _ => default.to_vec(),
        }
    }

    fn count(&mut self, section: &str, key: &str, default: usize, min: usize) -> usize {
        match self.get(section, key) {
            Some((_, Value::Count(v))) => {
                let v = *v;
                if v < min {
                    self.fail(section, key, format!("{v} is below the minimum {min}"));
                }
                v
            }
            _ => default,
        }
    }

    fn boolean(&self, section: &str, key: &str, default: bool) -> bool {
        match self.get(section, key) {
            Some((_, Value::Bool(v))) => *v,
            _ => default,
        }
    }

    fn text(&self, section: &str, key: &str) -> Option<String> {
        match self.get(section, key) {
            Some((_, Value::Text(v))) => Some(v.clone()),
            _ => None,
        }
    }
}

fn positive(v: f64) -> bool {
    v > 0.0
}

fn resolve(
    values: &BTreeMap<(String, String), (usize, Value)>,
    task_arg: Option<Task>,
    base_dir: &Path,
    diags: &mut Vec<Diagnostic>,
) -> Option<RunConfig> {
    let mut f = Fields { values, diags };

    let text_task = match f.text("run", "task") {
        Some(name) => match Task::parse(&name) {
            Some(t) => Some(t),
            None => {
                let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
                f.fail("run", "task", format!("unknown task '{name}' (expected one of {})", names.join(", ")));
                None
            }
        },
        None => None,
    };
    let task = match (text_task, task_arg) {
        (Some(a), Some(b)) if a != b => {
            f.fail("run", "task", format!("config task '{a}' conflicts with requested task '{b}'"));
            Some(a)
        }
        (Some(a), _) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => {
            if f.get("run", "task").is_none() {
                f.diags.push(Diagnostic {
                    line: None,
                    message: "missing task".into(),
                });
            }
            None
        }
    };

    let d = SnailSpec::default();
    let device = SnailSpec {
        critical_current: f.float("device", "critical_current_a", d.critical_current, positive, "> 0"),
        asymmetry: f.float("device", "asymmetry", d.asymmetry, |r| r > 0.0 && r < 1.0, "0 < r < 1"),
        ground_capacitance: f.float("device", "ground_capacitance_f", d.ground_capacitance, positive, "> 0"),
        junction_capacitance: f.float("device", "junction_capacitance_f", d.junction_capacitance, positive, "> 0"),
        cells: f.count("device", "cells", d.cells, 1),
        tan_delta: f.float("device", "tan_delta", d.tan_delta, |t| t >= 0.0, ">= 0"),
        alpha_form: if f.boolean("device", "consistent_derivatives", false) {
            AlphaForm::ConsistentDerivatives
        } else {
            AlphaForm::AsPrinted
        },
    };

    let o = Operating::default();
    let power = |p: f64| p.is_finite();
    let mut operating = Operating {
        phi_ext: f.list("operating", "phi_ext", &o.phi_ext, |x| x.abs() <= 10.0, "|phi_ext| <= 10"),
        pump_freq_hz: f.list("operating", "pump_freq_hz", &o.pump_freq_hz, positive, "> 0"),
        pump_power_dbm: f.list("operating", "pump_power_dbm", &o.pump_power_dbm, power, "finite"),
        isolation_pump_freq_hz: f.list(
            "operating",
            "isolation_pump_freq_hz",
            &o.isolation_pump_freq_hz,
            positive,
            "> 0",
        ),
        isolation_pump_power_dbm: f.list(
            "operating",
            "isolation_pump_power_dbm",
            &o.isolation_pump_power_dbm,
            power,
            "finite",
        ),
        signal_start_hz: f.float("operating", "signal_start_hz", o.signal_start_hz, positive, "> 0"),
        signal_stop_hz: f.float("operating", "signal_stop_hz", o.signal_stop_hz, positive, "> 0"),
        signal_points: f.count("operating", "signal_points", o.signal_points, 1),
        signal_power_dbm: f.float("operating", "signal_power_dbm", o.signal_power_dbm, power, "finite"),
        amp_scale: f.float("operating", "amp_scale", o.amp_scale, positive, "> 0"),
        beta: f.opt_float("operating", "beta"),
        gamma: f.opt_float("operating", "gamma"),
        projection: o.projection,
        tolerance: f.float("operating", "tolerance", o.tolerance, |t| (1e-12..=1e-6).contains(&t), "1e-12 <= tolerance <= 1e-6"),
        samples: f.count("operating", "samples", o.samples, crate::cme::fourwave::MIN_SAMPLES),
    };
    if let Some(p) = f.text("operating", "projection") {
        match p.as_str() {
            "printed" => operating.projection = Projection::Printed,
            "symmetric" => operating.projection = Projection::Symmetric,
            other => f.fail("operating", "projection", format!("'{other}' is not printed or symmetric")),
        }
    }
    if operating.signal_points > 1 && !(operating.signal_stop_hz > operating.signal_start_hz) {
        f.fail("operating", "signal_stop_hz", "must exceed signal_start_hz".into());
    }
    let n = operating.scenarios();
    for (key, len) in [
        ("phi_ext", operating.phi_ext.len()),
        ("pump_freq_hz", operating.pump_freq_hz.len()),
        ("pump_power_dbm", operating.pump_power_dbm.len()),
        ("isolation_pump_freq_hz", operating.isolation_pump_freq_hz.len()),
        ("isolation_pump_power_dbm", operating.isolation_pump_power_dbm.len()),
    ] {
        if len != 1 && len != n {
            f.fail("operating", key, format!("has {len} entries; scenario lists need 1 or {n}"));
        }
    }

    let s = SaturationSettings::default();
    let saturation = SaturationSettings {
        signal_freq_hz: f.float("saturation", "signal_freq_hz", s.signal_freq_hz, positive, "> 0"),
        power_start_dbm: f.float("saturation", "power_start_dbm", s.power_start_dbm, power, "finite"),
        power_stop_dbm: f.float("saturation", "power_stop_dbm", s.power_stop_dbm, power, "finite"),
        power_points: f.count("saturation", "power_points", s.power_points, 2),
    };
    if !(saturation.power_stop_dbm > saturation.power_start_dbm) {
        f.fail("saturation", "power_stop_dbm", "must exceed power_start_dbm".into());
    }

    let x = FluxSweepSettings::default();
    let flux_sweep = FluxSweepSettings {
        flux_start: f.float("flux_sweep", "flux_start", x.flux_start, |v| v.abs() <= 10.0, "|flux| <= 10"),
        flux_stop: f.float("flux_sweep", "flux_stop", x.flux_stop, |v| v.abs() <= 10.0, "|flux| <= 10"),
        flux_points: f.count("flux_sweep", "flux_points", x.flux_points, 1),
    };
    if flux_sweep.flux_points > 1 && !(flux_sweep.flux_stop > flux_sweep.flux_start) {
        f.fail("flux_sweep", "flux_stop", "must exceed flux_start".into());
    }

    let ns = NoiseSettings::default();
    let noise = NoiseSettings {
        data: f.text("noise", "data").map(|p| base_dir.join(p)),
        bandwidth_hz: f.float("noise", "bandwidth_hz", ns.bandwidth_hz, positive, "> 0"),
    };
    if task == Some(Task::NoiseFit) {
        match &noise.data {
            None => f.diags.push(Diagnostic {
                line: None,
                message: "task noise-fit needs [noise] data".into(),
            }),
            Some(p) if !p.is_file() => f.fail("noise", "data", format!("file {} does not exist", p.display())),
            _ => {}
        }
    }

    let out = OutputSettings::default();
    let mut output = OutputSettings {
        path: f.text("output", "path").map(|p| base_dir.join(p)),
        format: out.format,
        precision: f.count("output", "precision", out.precision, 1),
    };
    if output.precision > 17 {
        f.fail("output", "precision", "at most 17 significant digits".into());
    }
    if let Some(name) = f.text("output", "format") {
        match Format::parse(&name) {
            Some(fmt) => output.format = fmt,
            None => f.fail("output", "format", format!("'{name}' is not csv or json")),
        }
    }

    Some(RunConfig {
        task: task?,
        device,
        operating,
        saturation,
        flux_sweep,
        noise,
        output,
    })
}

fn list_text(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Canonical text of the resolved configuration: every key, in a fixed
    /// order, with defaults filled in. Re-parsing it yields the same config.
    pub fn render(&self) -> String {
        let d = &self.device;
        let o = &self.operating;
        let mut s = String::new();
        let mut put = |line: String| {
            s.push_str(&line);
            s.push('\n');
        };
        put(format!("task = {}", self.task));
        put("\n[device]".into());
        put(format!("critical_current_a = {:e}", d.critical_current));
        put(format!("asymmetry = {:e}", d.asymmetry));
        put(format!("ground_capacitance_f = {:e}", d.ground_capacitance));
        put(format!("junction_capacitance_f = {:e}", d.junction_capacitance));
        put(format!("cells = {}", d.cells));
        put(format!("tan_delta = {:e}", d.tan_delta));
        put(format!(
            "consistent_derivatives = {}",
            d.alpha_form == AlphaForm::ConsistentDerivatives
        ));
        put("\n[operating]".into());
        put(format!("phi_ext = {}", list_text(&o.phi_ext)));
        put(format!("pump_freq_hz = {}", list_text(&o.pump_freq_hz)));
        put(format!("pump_power_dbm = {}", list_text(&o.pump_power_dbm)));
        put(format!("isolation_pump_freq_hz = {}", list_text(&o.isolation_pump_freq_hz)));
        put(format!("isolation_pump_power_dbm = {}", list_text(&o.isolation_pump_power_dbm)));
        put(format!("signal_start_hz = {:e}", o.signal_start_hz));
        put(format!("signal_stop_hz = {:e}", o.signal_stop_hz));
        put(format!("signal_points = {}", o.signal_points));
        put(format!("signal_power_dbm = {:e}", o.signal_power_dbm));
        put(format!("amp_scale = {:e}", o.amp_scale));
        if let Some(b) = o.beta {
            put(format!("beta = {b:e}"));
        }
        if let Some(g) = o.gamma {
            put(format!("gamma = {g:e}"));
        }
        put(format!(
            "projection = {}",
            match o.projection {
                Projection::Printed => "printed",
                Projection::Symmetric => "symmetric",
            }
        ));
        put(format!("tolerance = {:e}", o.tolerance));
        put(format!("samples = {}", o.samples));
        let sat = &self.saturation;
        put("\n[saturation]".into());
        put(format!("signal_freq_hz = {:e}", sat.signal_freq_hz));
        put(format!("power_start_dbm = {:e}", sat.power_start_dbm));
        put(format!("power_stop_dbm = {:e}", sat.power_stop_dbm));
        put(format!("power_points = {}", sat.power_points));
        let fx = &self.flux_sweep;
        put("\n[flux_sweep]".into());
        put(format!("flux_start = {:e}", fx.flux_start));
        put(format!("flux_stop = {:e}", fx.flux_stop));
        put(format!("flux_points = {}", fx.flux_points));
        put("\n[noise]".into());
        if let Some(p) = &self.noise.data {
            put(format!("data = {}", p.display()));
        }
        put(format!("bandwidth_hz = {:e}", self.noise.bandwidth_hz));
        put("\n[output]".into());
        if let Some(p) = &self.output.path {
            put(format!("path = {}", p.display()));
        }
        put(format!("format = {}", self.output.format.name()));
        put(format!("precision = {}", self.output.precision));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_missing_task() {
        let err = validate("").unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].message, "missing task");
    }

    #[test]
    fn minimal_cell_params_takes_defaults() {
        let c = validate("task = cell-params\n[operating]\nphi_ext = 0\n").unwrap();
        assert_eq!(c.task, Task::CellParams);
        assert_eq!(c.device, SnailSpec::default());
        assert_eq!(c.operating.phi_ext, vec![0.0]);
        assert_eq!(c.output.format, Format::Csv);
    }

    #[test]
    fn gain_scenario_echoes_values() {
        let text = "task = gain\n[operating]\nphi_ext = 0.19\npump_freq_hz = 9.5e9\npump_power_dbm = -77\n";
        let c = validate(text).unwrap();
        assert_eq!(c.operating.phi_ext, vec![0.19]);
        assert_eq!(c.operating.pump_freq_hz, vec![9.5e9]);
        assert_eq!(c.operating.pump_power_dbm, vec![-77.0]);
        let echoed = c.render();
        assert!(echoed.contains("pump_freq_hz = 9.5e9"), "{echoed}");
        assert!(echoed.contains("phi_ext = 1.9e-1"), "{echoed}");
    }

    #[test]
    fn render_round_trips() {
        let text = "task = isolation\n[operating]\nphi_ext = 0.26, 0.19, 0.35\nisolation_pump_freq_hz = 13.71e9, 13.85e9, 7.57e9\nbeta = 0.3\n[output]\nformat = json\n";
        let c = validate(text).unwrap();
        assert_eq!(validate(&c.render()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_sections_with_lines() {
        let text = "task = gain\n[device]\nfoo = 1\n[nonsense]\nbar = 2\n[operating]\npump_freq_hz = abc\n";
        let err = validate(text).unwrap_err();
        let lines: Vec<Option<usize>> = err.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![Some(3), Some(4), Some(7)], "{err:?}");
        assert!(err[0].message.contains("unknown key 'foo'"));
    }

    #[test]
    fn range_and_duplicate_errors() {
        let text = "task = gain\n[device]\nasymmetry = 1.5\nasymmetry = 0.1\n[output]\nformat = xml\n";
        let err = validate(text).unwrap_err();
        assert_eq!(err.len(), 3, "{err:?}");
        assert_eq!(err[0].line, Some(4));
        assert_eq!(err[1].line, Some(3));
        assert_eq!(err[2].line, Some(6));
    }

    #[test]
    fn scenario_lengths_must_agree() {
        let text = "task = gain\n[operating]\npump_freq_hz = 9e9, 9.5e9\nphi_ext = 0.1, 0.2, 0.3\n";
        let err = validate(text).unwrap_err();
        assert!(err[0].message.contains("scenario lists"));
    }

    #[test]
    fn task_argument_supplies_or_conflicts() {
        let c = validate_with("", Some(Task::Gain), Path::new(".")).unwrap();
        assert_eq!(c.task, Task::Gain);
        let err = validate_with("task = gain\n", Some(Task::Isolation), Path::new(".")).unwrap_err();
        assert!(err[0].message.contains("conflicts"));
    }

    #[test]
    fn noise_fit_requires_existing_file() {
        let err = validate("task = noise-fit\n").unwrap_err();
        assert!(err[0].message.contains("data"));
        let err = validate("task = noise-fit\n[noise]\ndata = /nonexistent/x.csv\n").unwrap_err();
        assert_eq!(err[0].line, Some(3));
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(1.0, 2.0, 11);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[10], 2.0);
        assert_eq!(linspace(3.0, 4.0, 1), vec![3.0]);
    }
}
