//! Run configuration: one TOML file per run with dotted sections
//! (`[domain]`, `[problem]`, `[sampling]`, `[sweep]`, `[tolerances]`,
//! `[output]`). Every field has a default, so an empty file describes the
//! reference instance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sdheat_core::{BallTarget, DomainSpec, SpectralVec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub problem: ProblemConfig,
    pub sampling: SamplingConfig,
    pub sweep: SweepConfig,
    pub tolerances: ToleranceConfig,
    pub output: OutputConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(alias = "L")]
    pub length: f64,
    /// Control window `(a, b)`.
    pub omega: [f64; 2],
    /// Retained sine modes `J`.
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    /// Leading sine coefficients of `y₀`; missing modes are zero.
    pub y0: Vec<f64>,
    pub radius: f64,
    pub horizons: Vec<f64>,
    pub budgets: Vec<f64>,
    /// Used when `budgets` is empty: `M = N(f·T*)`.
    pub budget_from_exit_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub delta: Option<f64>,
    pub blocks: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eta: f64,
    /// Rows at `δ = T/(k + offset·η)` for `points` values of `k`, spaced
    /// geometrically in `[k_min, k_max]`.
    pub k_min: usize,
    pub k_max: usize,
    pub points: usize,
    pub offset: f64,
    /// Extra rows at these sampling periods.
    pub deltas: Vec<f64>,
    /// Components of `A` listed and probed for the cutoff.
    pub eta_k_min: usize,
    pub eta_k_max: usize,
    /// Matched-horizon norm-gap ladder `δ = T/(k₀ 2^l)`.
    pub ladder_k0: usize,
    pub ladder_levels: usize,
    pub family: bool,
    pub hunt_k_min: usize,
    pub hunt_k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Stationarity residual, relative to `max(1, ‖q‖)`.
    pub residual: f64,
    /// Relative tolerance for `N ∘ T` and `T ∘ N` round trips.
    pub round_trip: f64,
    /// Additive slack on the time-gap bracket.
    pub bracket: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub csv: String,
    pub json: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainConfig::default(),
            problem: ProblemConfig::default(),
            sampling: SamplingConfig::default(),
            sweep: SweepConfig::default(),
            tolerances: ToleranceConfig::default(),
            output: OutputConfig::default(),
            seed: 7,
        }
    }
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            length: 1.0,
            omega: [0.25, 0.75],
            modes: 64,
        }
    }
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            y0: vec![2.0, 0.5],
            radius: 1.0,
            horizons: Vec::new(),
            budgets: Vec::new(),
            budget_from_exit_fraction: 0.6,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            eta: 0.5,
            k_min: 8,
            k_max: 512,
            points: 25,
            offset: 0.5,
            deltas: Vec::new(),
            eta_k_min: 3,
            eta_k_max: 40,
            ladder_k0: 4,
            ladder_levels: 10,
            family: true,
            hunt_k_min: 10,
            hunt_k_max: 15,
        }
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            residual: 1e-10,
            round_trip: 1e-8,
            bracket: 1e-10,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            csv: "rows.csv".into(),
            json: "report.json".into(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn open_unit(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must lie in (0, 1), got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let field = e.message().split('`').nth(1).unwrap_or("config").to_string();
            CliError::config(field, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// Checks every field against the solver preconditions; the error names
    /// the offending field.
    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        positive("domain.length", d.length)?;
        let [a, b] = d.omega;
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b > d.length || a >= b {
            return Err(CliError::config(
                "domain.omega",
                format!("need 0 ≤ a < b ≤ L, got [{a}, {b}] with L = {}", d.length),
            ));
        }
        if d.modes == 0 {
            return Err(CliError::config("domain.modes", "need at least one mode"));
        }
        let p = &self.problem;
        if p.y0.is_empty() || p.y0.len() > d.modes || p.y0.iter().any(|v| !v.is_finite()) {
            return Err(CliError::config(
                "problem.y0",
                format!("need 1..={} finite coefficients, got {}", d.modes, p.y0.len()),
            ));
        }
        positive("problem.radius", p.radius)?;
        let y_norm = p.y0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if y_norm <= p.radius {
            return Err(CliError::config(
                "problem.y0",
                format!("‖y0‖ = {y_norm} already inside the target ball of radius {}", p.radius),
            ));
        }
        for t in &p.horizons {
            positive("problem.horizons", *t)?;
        }
        for m in &p.budgets {
            if !(*m >= 0.0 && m.is_finite()) {
                return Err(CliError::config("problem.budgets", format!("must be ≥ 0, got {m}")));
            }
        }
        open_unit("problem.budget_from_exit_fraction", p.budget_from_exit_fraction)?;
        if let Some(delta) = self.sampling.delta {
            positive("sampling.delta", delta)?;
        }
        if let Some(k) = self.sampling.blocks {
            if k < 2 {
                return Err(CliError::config("sampling.blocks", format!("need k ≥ 2, got {k}")));
            }
            if self.sampling.delta.is_none() {
                return Err(CliError::config("sampling.delta", "required when sampling.blocks is set"));
            }
        }
        let s = &self.sweep;
        open_unit("sweep.eta", s.eta)?;
        open_unit("sweep.offset", s.offset)?;
        if s.k_min == 0 || s.k_min > s.k_max {
            return Err(CliError::config("sweep.k_min", format!("need 1 ≤ k_min ≤ k_max, got {}..={}", s.k_min, s.k_max)));
        }
        if s.points == 0 {
            return Err(CliError::config("sweep.points", "need at least one row"));
        }
        for delta in &s.deltas {
            positive("sweep.deltas", *delta)?;
        }
        if s.eta_k_min == 0 || s.eta_k_min > s.eta_k_max {
            return Err(CliError::config("sweep.eta_k_min", "need 1 ≤ eta_k_min ≤ eta_k_max"));
        }
        if s.ladder_k0 < 2 {
            return Err(CliError::config("sweep.ladder_k0", "need k₀ ≥ 2"));
        }
        if s.ladder_levels < 4 || s.ladder_levels > 24 {
            return Err(CliError::config("sweep.ladder_levels", "need 4 ≤ levels ≤ 24"));
        }
        if s.hunt_k_min < 2 || s.hunt_k_min > s.hunt_k_max {
            return Err(CliError::config("sweep.hunt_k_min", "need 2 ≤ hunt_k_min ≤ hunt_k_max"));
        }
        let t = &self.tolerances;
        positive("tolerances.residual", t.residual)?;
        positive("tolerances.round_trip", t.round_trip)?;
        positive("tolerances.bracket", t.bracket)?;
        Ok(())
    }

    pub fn build_domain(&self) -> Result<DomainSpec> {
        let d = &self.domain;
        Ok(DomainSpec::build(d.length, d.omega[0], d.omega[1], d.modes)?)
    }

    pub fn initial_state(&self) -> SpectralVec {
        SpectralVec::padded(&self.problem.y0, self.domain.modes)
    }

    pub fn target(&self) -> Result<BallTarget> {
        Ok(BallTarget::new(self.problem.radius)?)
    }

    /// Sweep `k` values, geometric in `[k_min, k_max]`, deduplicated.
    pub fn sweep_ks(&self) -> Vec<usize> {
        let s = &self.sweep;
        if s.points == 1 || s.k_min == s.k_max {
            return vec![s.k_min];
        }
        let ratio = s.k_max as f64 / s.k_min as f64;
        let mut ks: Vec<usize> = (0..s.points)
            .map(|i| (s.k_min as f64 * ratio.powf(i as f64 / (s.points - 1) as f64)).round() as usize)
            .collect();
        ks.dedup();
        ks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn length_alias() {
        let cfg = RunConfig::from_toml_str("[domain]\nL = 2.0\nomega = [0.5, 1.5]\n").unwrap();
        assert_eq!(cfg.domain.length, 2.0);
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.problem.budgets = vec![0.0, 1.5];
        cfg.sampling.delta = Some(0.004);
        cfg.output.dir = Some("out".into());
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    fn field_of(text: &str) -> String {
        match RunConfig::from_toml_str(text) {
            Err(CliError::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn field_precise_errors() {
        assert_eq!(field_of("[domain]\nomega = [0.7, 0.2]\n"), "domain.omega");
        assert_eq!(field_of("[domain]\nlength = -1.0\n"), "domain.length");
        assert_eq!(field_of("[problem]\ny0 = [0.5]\n"), "problem.y0");
        assert_eq!(field_of("[sweep]\neta = 1.5\n"), "sweep.eta");
        assert_eq!(field_of("[sampling]\nblocks = 1\ndelta = 0.01\n"), "sampling.blocks");
        assert_eq!(field_of("[domain]\nbogus = 1\n"), "bogus");
    }

    #[test]
    fn sweep_ks_span_range() {
        let ks = RunConfig::default().sweep_ks();
        assert_eq!(ks.first(), Some(&8));
        assert_eq!(ks.last(), Some(&512));
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
    }
}
