use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Photodiode intensities behind the polarizing splitter, in units of
/// `|Ω|²` ((rad/s)²) of the transmitted field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorTrace {
    pub time: Vec<f64>,
    pub signal: Vec<f64>,
    pub control: Vec<f64>,
    /// Run description written to the sidecar file.
    pub metadata: BTreeMap<String, String>,
}

impl DetectorTrace {
    pub fn new(time: Vec<f64>, signal: Vec<f64>, control: Vec<f64>) -> Result<Self> {
        if time.len() != signal.len() || time.len() != control.len() {
            return Err(Error::InvalidInput("trace columns differ in length".into()));
        }
        for (k, (s, c)) in signal.iter().zip(&control).enumerate() {
            if !(s.is_finite() && c.is_finite() && *s >= 0.0 && *c >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "intensities must be finite and non-negative (row {k})"
                )));
            }
        }
        Ok(Self { time, signal, control, metadata: BTreeMap::new() })
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Index range of samples with `t0 ≤ t ≤ t1`.
    pub fn window(&self, t0: f64, t1: f64) -> std::ops::Range<usize> {
        let a = self.time.partition_point(|&t| t < t0);
        let b = self.time.partition_point(|&t| t <= t1);
        a..b.max(a)
    }

    /// Largest signal-port intensity in `[t0, t1]` and its time.
    pub fn signal_peak(&self, t0: f64, t1: f64) -> Option<(f64, f64)> {
        self.window(t0, t1)
            .map(|k| (self.time[k], self.signal[k]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// CSV with columns `time_s,i_signal,i_control`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(40 * self.len() + 32);
        out.push_str("time_s,i_signal,i_control\n");
        for k in 0..self.len() {
            let _ = writeln!(out, "{:.8e},{:.8e},{:.8e}", self.time[k], self.signal[k], self.control[k]);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = crate::dispersion::parse_three_columns(text, "time_s")?;
        Self::new(
            rows.iter().map(|r| r[0]).collect(),
            rows.iter().map(|r| r[1]).collect(),
            rows.iter().map(|r| r[2]).collect(),
        )
    }

    /// `key = value` lines describing the run.
    pub fn sidecar(&self) -> String {
        let mut out = String::from("# detector trace metadata\n");
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Writes `path` and the sidecar `path.meta`; returns the sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        std::fs::write(path, self.to_csv())?;
        let mut meta = path.as_os_str().to_owned();
        meta.push(".meta");
        let meta = PathBuf::from(meta);
        std::fs::write(&meta, self.sidecar())?;
        Ok(meta)
    }
}
