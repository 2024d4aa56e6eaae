//! Report schema shared by all commands, with CSV and JSON emission.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Bumped whenever a field changes meaning or disappears.
pub const REPORT_VERSION: u32 = 1;

/// Per-row and family-wise thresholds of `compare`.
pub const Z_THRESHOLD: f64 = 4.0;
pub const P_THRESHOLD: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureConfig {
    Beta { alpha: f64 },
    File { path: String, description: String },
}

/// Everything needed to re-run a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub target: String,
    pub measure: MeasureConfig,
    pub seed: u64,
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// Primary index: a state, level or block count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u64>,
    /// Secondary index for two-index tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<u64>,
    /// Real argument (generating-function variable, grid point).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    /// Extra reference column, e.g. a large-j asymptote.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

impl Row {
    pub fn indexed(j: usize) -> Self {
        Self {
            j: Some(j as u64),
            ..Self::default()
        }
    }

    pub fn at(x: f64) -> Self {
        Self {
            x: Some(x),
            ..Self::default()
        }
    }

    pub fn exact(mut self, v: f64) -> Self {
        self.exact = Some(v);
        self
    }

    pub fn empirical(mut self, v: f64, se: f64) -> Self {
        self.empirical = Some(v);
        self.std_error = Some(se);
        self
    }

    pub fn flag(mut self, f: impl Into<String>) -> Self {
        self.flag = Some(f.into());
        self
    }

    /// Fills `z_score` and `pass` from `exact`, `empirical` and `std_error`.
    pub fn scored(mut self) -> Self {
        if let (Some(e), Some(m), Some(se)) = (self.exact, self.empirical, self.std_error) {
            let z = (m - e) / se;
            self.z_score = Some(z);
            self.pass = Some(z.abs() <= Z_THRESHOLD);
        }
        self
    }
}

/// A family-wise goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofTest {
    pub name: String,
    pub statistic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    /// Acceptance rule in words, e.g. `p >= 0.001` or `D < 0.05`.
    pub rule: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub z_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<GofTest>,
}

impl Verdict {
    /// Overall verdict: every scored row and every test must pass.
    pub fn from_rows(rows: &[Row], tests: Vec<GofTest>) -> Self {
        let max_abs_z = rows
            .iter()
            .filter_map(|r| r.z_score.map(f64::abs))
            .fold(None, |acc: Option<f64>, z| Some(acc.map_or(z, |a| a.max(z))));
        let pass = rows.iter().all(|r| r.pass != Some(false)) && tests.iter().all(|t| t.pass);
        Self {
            pass,
            z_threshold: Z_THRESHOLD,
            max_abs_z,
            tests,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub config: RunConfig,
    pub rows: Vec<Row>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub runtime_ms: u64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are all serializable") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Header plus one line per row; only columns used by some row are written.
    pub fn to_csv(&self) -> String {
        let has = |f: &dyn Fn(&Row) -> bool| self.rows.iter().any(f);
        let mut cols: Vec<(&str, Box<dyn Fn(&Row) -> String>)> = Vec::new();
        if has(&|r| r.j.is_some()) {
            cols.push(("j", Box::new(|r: &Row| opt_int(r.j))));
        }
        if has(&|r| r.i.is_some()) {
            cols.push(("i", Box::new(|r: &Row| opt_int(r.i))));
        }
        if has(&|r| r.x.is_some()) {
            cols.push(("x", Box::new(|r: &Row| opt_real(r.x))));
        }
        if has(&|r| r.exact.is_some()) {
            cols.push(("exact", Box::new(|r: &Row| opt_real(r.exact))));
        }
        if has(&|r| r.empirical.is_some()) {
            cols.push(("empirical", Box::new(|r: &Row| opt_real(r.empirical))));
            cols.push(("std_error", Box::new(|r: &Row| opt_real(r.std_error))));
        }
        if has(&|r| r.z_score.is_some()) {
            cols.push(("z_score", Box::new(|r: &Row| opt_real(r.z_score))));
        }
        if has(&|r| r.reference.is_some()) {
            cols.push(("reference", Box::new(|r: &Row| opt_real(r.reference))));
        }
        if has(&|r| r.pass.is_some()) {
            cols.push(("pass", Box::new(|r: &Row| r.pass.map(|p| p.to_string()).unwrap_or_default())));
        }
        if has(&|r| r.flag.is_some()) {
            cols.push(("flag", Box::new(|r: &Row| r.flag.clone().unwrap_or_default())));
        }
        let mut out = String::new();
        let header: Vec<&str> = cols.iter().map(|(name, _)| *name).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let line: Vec<String> = cols.iter().map(|(_, f)| f(row)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    /// Plot columns `(x, exact, empirical, band)` with `band = z_threshold · std_error`.
    pub fn to_plot_csv(&self) -> String {
        let mut out = String::from("x,exact,empirical,band\n");
        for r in &self.rows {
            let x = r.x.or(r.j.map(|j| j as f64));
            let band = r.std_error.map(|se| Z_THRESHOLD * se);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                opt_real(x),
                opt_real(r.exact),
                opt_real(r.empirical),
                opt_real(band)
            );
        }
        out
    }
}

fn opt_int(v: Option<u64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// 17 significant digits.
fn opt_real(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}
