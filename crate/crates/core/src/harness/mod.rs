//! Configuration-driven sweeps that regenerate figure datasets as CSV, and
//! the transparency-window fit.
//!
//! A sweep file is TOML: `kind` names the experiment, `[sweep]` gives the
//! parameter and its grid, and the optional `[cell]`, `[atom]`, `[medium]`,
//! `[protocol]`, `[detection]` and `[grid]` sections override defaults.
//! Rows are computed in parallel and written in grid order, so a config
//! always produces the same bytes.

mod config;
mod fit;
mod selftest;
mod sweep;

pub use config::{
    AtomSection, CellSection, DetectionSection, ExperimentKind, GridSection, MediumSection,
    ProtocolSection, Scenario, SweepConfig, PARAMETERS,
};
pub use fit::{fit_transparency_window, fit_window, SlowingData, WindowFit, FIT_RANGE_HZ};
pub use selftest::{selftest, Check};
pub use sweep::{check_row, evaluate, fmt, run_sweep, Dataset, Row, SpotCheck, SweepOutcome, SCHEMA};
