use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::config::{ExperimentKind, Scenario, SweepConfig};
use crate::dispersion::{group_delay, propagate_pulse, Pulse, TransferFunction};
use crate::error::{Error, Result};
use crate::maxwell_bloch::{simulate, sir_scan, steady_rotation, storage_efficiency};
use crate::units::rad_to_hz;

/// Schema tag written as the first line of every dataset.
pub const SCHEMA: &str = "vaporlight-sweep v1";

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub value: f64,
    pub outcome: std::result::Result<Vec<f64>, String>,
}

impl Row {
    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }
}

/// Result of re-running one randomly chosen row.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotCheck {
    pub index: usize,
    /// Empty when the rerun reproduced the row bit for bit and the values
    /// satisfy the producing module's guarantees.
    pub problems: Vec<String>,
}

impl SpotCheck {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub kind: ExperimentKind,
    pub parameter: String,
    pub rows: Vec<Row>,
    pub metadata: BTreeMap<String, String>,
    pub spot_check: Option<SpotCheck>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
            + usize::from(self.spot_check.as_ref().is_some_and(|s| !s.passed()))
    }

    /// 0 on full success, 2 when any row or the spot check failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures() == 0 { 0 } else { 2 }
    }

    /// Values of one result column, `NaN` for failed rows.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.kind.columns().iter().position(|c| *c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.outcome.as_ref().map(|v| v[idx]).unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {SCHEMA}");
        let _ = writeln!(out, "# kind = {}", self.kind.name());
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let mut header = vec![self.parameter.as_str()];
        header.extend_from_slice(self.kind.columns());
        header.push("status");
        let _ = writeln!(out, "{}", header.join(","));
        let width = self.kind.columns().len();
        for row in &self.rows {
            let _ = write!(out, "{}", fmt(row.value));
            match &row.outcome {
                Ok(values) => {
                    for v in values {
                        let _ = write!(out, ",{}", fmt(*v));
                    }
                    let _ = writeln!(out, ",ok");
                }
                Err(msg) => {
                    for _ in 0..width {
                        let _ = write!(out, ",nan");
                    }
                    let _ = writeln!(out, ",failed: {}", msg.replace([',', '\n'], ";"));
                }
            }
        }
        out
    }
}

/// Nine significant digits.
pub fn fmt(v: f64) -> String {
    if v.is_nan() { "nan".into() } else { format!("{v:.8e}") }
}

/// Runs every grid point on a pool of `workers` threads (all cores when
/// `None`). Rows come back in grid order whatever the scheduling.
pub fn run_sweep(config: &SweepConfig, workers: Option<usize>) -> Result<SweepOutcome> {
    config.validate()?;
    let base = Scenario::from_config(config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::Usage("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Configuration(e.to_string()))?;

    let run = |value: f64| -> Row {
        let outcome = base
            .clone()
            .apply(&config.parameter, value)
            .and_then(|s| evaluate(config.kind, &s))
            .map_err(|e| e.to_string());
        Row { value, outcome }
    };
    let rows: Vec<Row> = pool.install(|| config.values.par_iter().map(|&v| run(v)).collect());

    let spot_check = if config.spot_check {
        let ok: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_ok()).collect();
        if ok.is_empty() {
            None
        } else {
            let mut rng = StdRng::seed_from_u64(config.seed);
            let index = ok[rng.random_range(0..ok.len())];
            let again = pool.install(|| run(rows[index].value));
            let mut problems = Vec::new();
            if again != rows[index] {
                problems.push(format!("row {index} is not reproducible"));
            }
            if let Ok(values) = &rows[index].outcome {
                problems.extend(check_row(config.kind, values));
            }
            Some(SpotCheck { index, problems })
        }
    } else {
        None
    };

    Ok(SweepOutcome {
        kind: config.kind,
        parameter: config.parameter.clone(),
        rows,
        metadata: metadata(config, &base)?,
        spot_check,
    })
}

fn metadata(config: &SweepConfig, s: &Scenario) -> Result<BTreeMap<String, String>> {
    let p = s.medium_params()?;
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    put("seed", config.seed.to_string());
    put("isotope", format!("{:?}", s.cell.isotope));
    put("temperature_k", fmt(s.cell.temperature));
    put("length_m", fmt(s.cell.length));
    put("resonant_fraction", fmt(s.resonant_fraction));
    put("optical_depth", fmt(s.optical_depth()?));
    put("window_hz", fmt(rad_to_hz(s.window()?)));
    put("control_rabi_hz", fmt(rad_to_hz(s.control_rabi)));
    put("coherence_decay_rad_s", fmt(p.gamma));
    put("carrier_rad_s", fmt(p.carrier));
    put("gamma0_hz", fmt(rad_to_hz(s.atom.gamma0)));
    put("z_steps", s.z_steps.to_string());
    put("grid_scale", fmt(s.grid_scale));
    Ok(m)
}

/// Measures one scenario; the values follow [`ExperimentKind::columns`].
pub fn evaluate(kind: ExperimentKind, s: &Scenario) -> Result<Vec<f64>> {
    match kind {
        ExperimentKind::Slowing => {
            let (delay, width, peak, analytic) = slow_pulse(s)?;
            Ok(vec![delay, width, peak, analytic])
        }
        ExperimentKind::DelayVsDensity => {
            let (delay, width, peak, analytic) = slow_pulse(s)?;
            Ok(vec![s.resonant_density()?, delay, analytic, width, peak])
        }
        ExperimentKind::Storage => {
            let protocol = s.storage_protocol()?;
            let opts = s.mb_options();
            let run = simulate(&protocol, &s.cell, &s.atom, s.b_field, &opts)?;
            let leak = simulate(&s.leakage_protocol()?, &s.cell, &s.atom, s.b_field, &opts)?;
            let e = storage_efficiency(&run.trace, &protocol, &leak.trace)?;
            let (_, pre) = run
                .trace
                .signal_peak(0.0, protocol.control_off)
                .ok_or_else(|| Error::Model("no samples before the switch-off".into()))?;
            Ok(vec![e.eta, e.trace_wise, e.peak_wise, pre / e.input_peak, f64::from(u8::from(e.negative))])
        }
        ExperimentKind::RotationSteady => {
            let signal = Complex64::from_polar(s.signal_fraction * s.control_rabi, s.signal_phase);
            let r = steady_rotation(&s.atom, &s.cell, s.control_rabi, signal, s.b_field, &s.mb_options())?;
            Ok(vec![
                r.delta_theta,
                r.output_angle,
                r.signal_port / r.input_total,
                r.signal_ideal / r.input_total,
                r.control_port / r.input_total,
            ])
        }
        ExperimentKind::Sir => {
            let protocol = s.leakage_protocol()?;
            let points = sir_scan(&[s.b_field], &protocol, &s.cell, &s.atom, &s.mb_options())?;
            Ok(vec![points[0].relative])
        }
    }
}

/// `(delay, width ratio, peak ratio, analytic delay)` of a unit Gaussian.
fn slow_pulse(s: &Scenario) -> Result<(f64, f64, f64, f64)> {
    let params = s.medium_params()?;
    let analytic = group_delay(&params);
    let pulse = Pulse::gaussian_for_medium(s.duration, Complex64::new(1.0, 0.0), analytic, s.grid_scale)?;
    let h = TransferFunction::for_pulse(&pulse, &params)?;
    let m = propagate_pulse(&pulse, &h)?.metrics;
    Ok((m.delay, m.width_ratio, m.peak_ratio, analytic))
}

/// Postconditions a row must satisfy.
pub fn check_row(kind: ExperimentKind, values: &[f64]) -> Vec<String> {
    let mut problems = Vec::new();
    if values.len() != kind.columns().len() {
        problems.push(format!("expected {} values, got {}", kind.columns().len(), values.len()));
        return problems;
    }
    if values.iter().any(|v| !v.is_finite()) {
        problems.push("non-finite value".into());
        return problems;
    }
    let mut require = |ok: bool, what: &str| {
        if !ok {
            problems.push(what.to_string());
        }
    };
    match kind {
        ExperimentKind::Slowing => {
            require(values[1] > 0.0, "width ratio must be positive");
            require(values[2] > 0.0, "peak ratio must be positive");
        }
        ExperimentKind::DelayVsDensity => {
            require(values[0] > 0.0, "density must be positive");
            require(values[3] > 0.0, "width ratio must be positive");
        }
        ExperimentKind::Storage => {
            require((0.0..=1.0).contains(&values[0]), "efficiency outside [0, 1]");
            require(values[3] >= 0.0, "negative transmitted peak");
        }
        ExperimentKind::RotationSteady => {
            require(values[2] >= 0.0 && values[4] >= 0.0, "negative port intensity");
            require(values[2] + values[4] <= 1.0 + 1e-9, "detected power exceeds the input");
        }
        ExperimentKind::Sir => require(values[0] >= 0.0, "negative SIR peak"),
    }
    problems
}

/// Parsed sweep dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    /// Numeric cells per row; the status column is kept separately.
    pub rows: Vec<Vec<f64>>,
    pub status: Vec<String>,
}

impl Dataset {
    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = BTreeMap::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        let mut status = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    metadata.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let Some(cols) = &columns else {
                columns = Some(cells.iter().map(|c| c.to_string()).collect());
                continue;
            };
            if cells.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} cells, found {}",
                    lineno + 1,
                    cols.len(),
                    cells.len()
                )));
            }
            let has_status = cols.last().is_some_and(|c| c == "status");
            let numeric = if has_status { &cells[..cells.len() - 1] } else { &cells[..] };
            let values = numeric
                .iter()
                .map(|c| c.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: `{c}`: {e}", lineno + 1))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(values);
            status.push(if has_status { cells[cells.len() - 1].to_string() } else { "ok".into() });
        }
        let mut columns = columns.ok_or_else(|| Error::Parse("dataset has no header row".into()))?;
        if columns.last().is_some_and(|c| c == "status") {
            columns.pop();
        }
        Ok(Self { metadata, columns, rows, status })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        let v = self
            .metadata
            .get(key)
            .ok_or_else(|| Error::Parse(format!("dataset metadata lacks `{key}`")))?;
        v.parse().map_err(|e| Error::Parse(format!("metadata `{key}` = `{v}`: {e}")))
    }
}
