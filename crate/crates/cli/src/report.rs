//! Machine-readable run reports: JSON with top-level keys
//! `meta / rows / fits / verdicts`, and a CSV of sweep rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sdheat_core::error_lab::{OrderFit, SweepRow};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 7] = ["delta", "T_gap", "ctrl_err_min_norm", "norm_gap", "family_err", "in_A", "k"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub rows: Vec<RowRecord>,
    pub fits: Vec<FitRecord>,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub command: String,
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub config: RunConfig,
    /// Named scalar outputs (optimal times, norms, margins).
    pub results: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// A sweep row; non-finite values serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    pub delta: f64,
    pub t_gap: Option<f64>,
    pub ctrl_err_min_norm: Option<f64>,
    pub norm_gap: Option<f64>,
    pub family_err: Option<f64>,
    pub beta_max: Option<f64>,
    pub in_a: bool,
    pub k: Option<usize>,
    pub error: Option<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<&SweepRow> for RowRecord {
    fn from(r: &SweepRow) -> Self {
        RowRecord {
            delta: r.delta,
            t_gap: finite(r.t_gap),
            ctrl_err_min_norm: finite(r.ctrl_err_min_norm),
            norm_gap: finite(r.norm_gap),
            family_err: r.family_err.and_then(finite),
            beta_max: r.beta_max.and_then(finite),
            in_a: r.in_a_set,
            k: r.blocks,
            error: r.error.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    pub excluded: usize,
    /// `(δ, value)` pairs when the fit is not over report rows.
    pub points: Vec<(f64, f64)>,
}

impl FitRecord {
    pub fn new(name: impl Into<String>, fit: &OrderFit, points: Vec<(f64, f64)>) -> Self {
        FitRecord {
            name: name.into(),
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            used: fit.used,
            excluded: fit.excluded,
            points,
        }
    }
}

/// One checked inequality. `measured` is compared against `bound` in the
/// sense stated by `name`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
}

impl Verdict {
    /// Passes when `measured ≤ bound`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Verdict {
            name: name.into(),
            bound,
            measured,
            pass: measured <= bound,
        }
    }

    /// Passes when `measured ≥ bound`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Verdict {
            name: name.into(),
            bound,
            measured,
            pass: measured >= bound,
        }
    }

    /// Passes when `lo ≤ measured ≤ hi`; `bound` records the violated side
    /// or the nearer one.
    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        let bound = if (measured - lo).abs() < (hi - measured).abs() { lo } else { hi };
        Verdict {
            name: name.into(),
            bound,
            measured,
            pass: lo <= measured && measured <= hi,
        }
    }

    pub fn failed(name: impl Into<String>, reason: &str) -> Self {
        Verdict {
            name: format!("{}: {reason}", name.into()),
            bound: f64::NAN,
            measured: f64::NAN,
            pass: false,
        }
    }
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Report {
            meta: Meta {
                command: command.into(),
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                created_unix,
                config: config.clone(),
                results: BTreeMap::new(),
                notes: Vec::new(),
            },
            rows: Vec::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn result(&mut self, key: impl Into<String>, value: f64) {
        self.meta.results.insert(key.into(), value);
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV of the rows in the fixed column order, floats at 17 significant
    /// digits, missing values empty.
    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        let num = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
        for r in &self.rows {
            w.write_record([
                num(Some(r.delta)),
                num(r.t_gap),
                num(r.ctrl_err_min_norm),
                num(r.norm_gap),
                num(r.family_err),
                r.in_a.to_string(),
                r.k.map_or(String::new(), |k| k.to_string()),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    /// Writes the JSON report and, when there are rows, the CSV into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let write = |path: PathBuf, text: String| -> Result<PathBuf> {
            std::fs::write(&path, text).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        };
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = vec![write(dir.join(&self.meta.config.output.json), self.to_json()?)?];
        if !self.rows.is_empty() {
            written.push(write(dir.join(&self.meta.config.output.csv), self.rows_csv()?)?);
        }
        Ok(written)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}: {}", self.meta.tool, self.meta.version, self.meta.command);
        if !self.meta.results.is_empty() {
            let _ = writeln!(out, "\nresults:");
            for (k, v) in &self.meta.results {
                let _ = writeln!(out, "  {k:<40} {v:.12e}");
            }
        }
        if !self.rows.is_empty() {
            let _ = writeln!(out, "\nrows:");
            let _ = writeln!(
                out,
                "  {:>12} {:>5} {:>12} {:>12} {:>12} {:>12} {:>5}",
                "delta", "k", "T_gap/delta", "ctrl_err", "norm_gap", "family_err", "in_A"
            );
            let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.5e}"));
            for r in &self.rows {
                let ratio = r.t_gap.map(|g| g / r.delta);
                let _ = writeln!(
                    out,
                    "  {:>12.5e} {:>5} {:>12} {:>12} {:>12} {:>12} {:>5}{}",
                    r.delta,
                    r.k.map_or("-".into(), |k| k.to_string()),
                    ratio.map_or("-".into(), |x| format!("{x:.6}")),
                    cell(r.ctrl_err_min_norm),
                    cell(r.norm_gap),
                    cell(r.family_err),
                    r.in_a,
                    r.error.as_ref().map_or(String::new(), |e| format!("  error: {e}")),
                );
            }
        }
        if !self.fits.is_empty() {
            let _ = writeln!(out, "\nfits (log-log):");
            for f in &self.fits {
                let _ = writeln!(
                    out,
                    "  {:<36} slope {:>8.4}  R² {:.6}  n = {}",
                    f.name, f.slope, f.r_squared, f.used
                );
            }
        }
        if !self.verdicts.is_empty() {
            let _ = writeln!(out, "\nverdicts:");
            for v in &self.verdicts {
                let _ = writeln!(
                    out,
                    "  [{}] {}  (measured {:.6e}, bound {:.6e})",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.name,
                    v.measured,
                    v.bound
                );
            }
        }
        for n in &self.meta.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("sweep", &RunConfig::default());
        r.rows.push(RowRecord {
            delta: 0.001,
            t_gap: Some(0.00075),
            ctrl_err_min_norm: Some(0.1),
            norm_gap: None,
            family_err: None,
            beta_max: None,
            in_a: true,
            k: Some(43),
            error: None,
        });
        r.verdicts.push(Verdict::at_most("0 ≤ T_gap ≤ 2δ", 0.75, 2.0));
        r
    }

    #[test]
    fn csv_layout() {
        let csv = sample().rows_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "delta,T_gap,ctrl_err_min_norm,norm_gap,family_err,in_A,k");
        assert_eq!(
            lines.next().unwrap(),
            "1.0000000000000000e-3,7.5000000000000002e-4,1.0000000000000001e-1,,,true,43"
        );
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["meta", "rows", "fits", "verdicts"] {
            assert!(v.get(key).is_some());
        }
    }

    #[test]
    fn verdict_senses() {
        assert!(Verdict::within("slope", 2.0, 1.8, 2.2).pass);
        assert!(!Verdict::within("slope", 2.3, 1.8, 2.2).pass);
        assert!(!Verdict::at_least("x", f64::NAN, 0.0).pass);
        assert!(sample().render_text().contains("[PASS]"));
    }
}
