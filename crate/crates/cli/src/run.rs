//! The `solve-norm`, `solve-time` and `sweep` commands.

use rayon::prelude::*;

use sdheat_core::error_lab::{self, EtaSet, Field, Scenario, SweepRow};
use sdheat_core::min_norm::{self, NormSolution};
use sdheat_core::time_optimal;
use sdheat_core::{BallTarget, Control, DomainSpec, SamplingGrid, SpectralVec};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{FitRecord, Report, RowRecord, Verdict};

/// Domain, initial state and target of a run, with the free exit time `T*`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub domain: DomainSpec,
    pub y0: SpectralVec,
    pub target: BallTarget,
    pub exit_time: f64,
}

impl Instance {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let domain = cfg.build_domain()?;
        let y0 = cfg.initial_state();
        let target = cfg.target()?;
        let exit_time = domain.exit_time(&y0, &target)?;
        Ok(Instance {
            domain,
            y0,
            target,
            exit_time,
        })
    }

    /// Horizons from the config, or `f·T*` when none are given.
    pub fn horizons(&self, cfg: &RunConfig) -> Vec<f64> {
        if cfg.problem.horizons.is_empty() {
            vec![cfg.problem.budget_from_exit_fraction * self.exit_time]
        } else {
            cfg.problem.horizons.clone()
        }
    }

    /// Budgets from the config, or `N(f·T*)` when none are given.
    pub fn budgets(&self, cfg: &RunConfig) -> Result<Vec<f64>> {
        if cfg.problem.budgets.is_empty() {
            let t = cfg.problem.budget_from_exit_fraction * self.exit_time;
            Ok(vec![min_norm::solve_jp_continuous(&self.domain, &self.y0, &self.target, t)?.norm])
        } else {
            Ok(cfg.problem.budgets.clone())
        }
    }

    pub fn scenario(&self, cfg: &RunConfig) -> Result<Scenario> {
        let (d, y0, target) = (self.domain.clone(), self.y0.clone(), self.target);
        Ok(match cfg.problem.budgets.first() {
            Some(m) => Scenario::new(d, y0, target, *m)?,
            None => Scenario::from_exit_fraction(d, y0, target, cfg.problem.budget_from_exit_fraction)?,
        })
    }
}

/// Relative defects of one minimal-norm solve. The final state is rebuilt
/// from the control, independently of the dual solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveDefects {
    /// Stationarity residual over `max(1, ‖q‖)`.
    pub residual: f64,
    /// `|V + ½N²| / (½N²)`.
    pub value: f64,
    /// `‖y(T) + r z/‖z‖‖ / r`.
    pub direction: f64,
    /// `|‖y(T)‖ − r| / r`.
    pub radius: f64,
}

pub fn solve_defects(inst: &Instance, horizon: f64, sol: &NormSolution) -> Result<SolveDefects> {
    let q = inst.domain.semigroup_apply(horizon, &inst.y0)?;
    let pushed = match &sol.control {
        Control::Distributed(u) => u.final_state_contribution(),
        Control::Sampled(u) => u.final_state_contribution(),
        Control::Zero { .. } => SpectralVec::zeros(inst.domain.modes()),
    };
    let y_end = &q + &pushed;
    let r = inst.target.radius();
    let half_n2 = 0.5 * sol.norm * sol.norm;
    let z = &sol.minimizer;
    Ok(SolveDefects {
        residual: sol.residual / q.norm().max(1.0),
        value: (sol.value + half_n2).abs() / half_n2,
        direction: (&y_end + &z.scale(r / z.norm())).norm() / r,
        radius: (y_end.norm() - r).abs() / r,
    })
}

fn push_defect_verdicts(report: &mut Report, label: &str, d: &SolveDefects, cfg: &RunConfig) {
    let tol = &cfg.tolerances;
    report.verdicts.push(Verdict::at_most(
        format!("{label}: Euler-Lagrange residual ≤ tol·max(1,‖q‖)"),
        d.residual,
        tol.residual,
    ));
    report.verdicts.push(Verdict::at_most(format!("{label}: |V + ½N²| ≤ tol·½N²"), d.value, tol.residual));
    report.verdicts.push(Verdict::at_most(
        format!("{label}: ‖y(T) + r z/‖z‖‖ ≤ 1e-8·r"),
        d.direction,
        1e-8,
    ));
    report.verdicts.push(Verdict::at_most(format!("{label}: |‖y(T)‖ − r| ≤ 1e-8·r"), d.radius, 1e-8));
}

/// Minimal-norm controls at each configured horizon, distributed and, when
/// `sampling.delta` is set, sampled.
pub fn run_solve_norm(cfg: &RunConfig) -> Result<Report> {
    let inst = Instance::from_config(cfg)?;
    let mut report = Report::new("solve-norm", cfg);
    report.result("exit_time", inst.exit_time);
    for (i, t) in inst.horizons(cfg).into_iter().enumerate() {
        let label = format!("T[{i}]");
        let sol = min_norm::solve_jp_continuous(&inst.domain, &inst.y0, &inst.target, t)?;
        report.result(format!("{label}.horizon"), t);
        report.result(format!("{label}.N"), sol.norm);
        report.result(format!("{label}.V"), sol.value);
        report.result(format!("{label}.residual"), sol.residual);
        push_defect_verdicts(&mut report, &label, &solve_defects(&inst, t, &sol)?, cfg);

        let Some(delta) = cfg.sampling.delta else { continue };
        let blocks = cfg.sampling.blocks.unwrap_or_else(|| (t / delta).round() as usize);
        let grid = SamplingGrid::new(delta, blocks)?;
        let slabel = format!("{label}.sampled");
        let s = min_norm::solve_jp_sampled(&inst.domain, &inst.y0, &inst.target, &grid)?;
        report.result(format!("{slabel}.delta"), delta);
        report.result(format!("{slabel}.k"), blocks as f64);
        report.result(format!("{slabel}.N"), s.norm);
        report.result(format!("{slabel}.V"), s.value);
        push_defect_verdicts(&mut report, &slabel, &solve_defects(&inst, grid.horizon(), &s)?, cfg);
        let n_same = min_norm::solve_jp_continuous(&inst.domain, &inst.y0, &inst.target, grid.horizon())?.norm;
        report.result(format!("{slabel}.N_distributed_at_kdelta"), n_same);
        report.verdicts.push(Verdict::at_least(
            format!("{slabel}: N_δ(kδ) − N(kδ) ≥ −tol"),
            s.norm - n_same,
            -cfg.tolerances.residual * n_same.max(1.0),
        ));
    }
    Ok(report)
}

/// Minimal times for each configured budget, with round-trip checks, and
/// the sampled minimal time when `sampling.delta` is set.
pub fn run_solve_time(cfg: &RunConfig) -> Result<Report> {
    let inst = Instance::from_config(cfg)?;
    let mut report = Report::new("solve-time", cfg);
    let (d, y0, target) = (&inst.domain, &inst.y0, &inst.target);
    let tol = cfg.tolerances.round_trip;
    report.result("exit_time", inst.exit_time);
    for (i, m) in inst.budgets(cfg)?.into_iter().enumerate() {
        let label = format!("M[{i}]");
        let ts = time_optimal::optimal_time_distributed(d, y0, target, m)?;
        report.result(format!("{label}.budget"), m);
        report.result(format!("{label}.T"), ts.optimal_time);
        if m == 0.0 {
            report.verdicts.push(Verdict::at_most(
                format!("{label}: T(0) = T* exactly"),
                (ts.optimal_time - inst.exit_time).abs(),
                0.0,
            ));
            continue;
        }
        report.result(format!("{label}.N_at_T"), ts.control_norm);
        report.verdicts.push(Verdict::at_most(
            format!("{label}: |N(T(M)) − M| ≤ tol·M"),
            (ts.control_norm - m).abs() / m,
            tol,
        ));

        let Some(delta) = cfg.sampling.delta else { continue };
        let s = time_optimal::optimal_time_sampled_from(d, y0, target, m, delta, ts.optimal_time, inst.exit_time)?;
        let slabel = format!("{label}.sampled");
        report.result(format!("{slabel}.delta"), delta);
        report.result(format!("{slabel}.T"), s.optimal_time);
        report.result(format!("{slabel}.T_gap"), s.optimal_time - ts.optimal_time);
        if let Some(k) = s.blocks {
            report.result(format!("{slabel}.k"), k as f64);
        }
        match s.sandwich {
            Some((at, below)) => {
                report.result(format!("{slabel}.N_at_T_delta"), at);
                report.result(format!("{slabel}.N_at_T_delta_minus_delta"), below);
                report.verdicts.push(Verdict::at_least(format!("{slabel}: M − N_δ(T_δ) ≥ 0"), m - at, 0.0));
                report.verdicts.push(Verdict {
                    name: format!("{slabel}: N_δ(T_δ − δ) − M > 0"),
                    bound: 0.0,
                    measured: below - m,
                    pass: below > m,
                });
            }
            None => report
                .meta
                .notes
                .push(format!("{slabel}: T_δ = 2δ, the lower sandwich side is not defined")),
        }
    }
    for (i, t) in inst.horizons(cfg).into_iter().enumerate() {
        let label = format!("T[{i}]");
        let n = min_norm::solve_jp_continuous(d, y0, target, t)?.norm;
        let back = time_optimal::optimal_time_distributed(d, y0, target, n)?.optimal_time;
        report.result(format!("{label}.horizon"), t);
        report.result(format!("{label}.N"), n);
        report.result(format!("{label}.T_of_N"), back);
        report.verdicts.push(Verdict::at_most(
            format!("{label}: |T(N(T)) − T| ≤ tol·T"),
            (back - t).abs() / t,
            tol,
        ));
    }
    Ok(report)
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` = all cores).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config("--threads", e.to_string()))?;
    Ok(pool.install(f))
}

/// Sweep rows in input order, computed in parallel.
pub fn parallel_sweep(scn: &Scenario, deltas: &[f64], eta_set: Option<&EtaSet>, family: bool) -> Vec<SweepRow> {
    deltas
        .par_iter()
        .map(|d| error_lab::sweep_row(scn, *d, eta_set, family))
        .collect()
}

/// Extremes over rows inside `A`, as `(min T_gap/δ, max T_gap/δ, min ctrl_err/δ)`.
fn a_row_extremes(rows: &[SweepRow]) -> Option<(f64, f64, f64)> {
    let a: Vec<&SweepRow> = rows.iter().filter(|r| r.in_a_set && r.error.is_none()).collect();
    if a.is_empty() {
        return None;
    }
    let ratio = |r: &&SweepRow| r.t_gap / r.delta;
    Some((
        a.iter().map(ratio).fold(f64::INFINITY, f64::min),
        a.iter().map(ratio).fold(f64::NEG_INFINITY, f64::max),
        a.iter().map(|r| r.ctrl_err_min_norm / r.delta).fold(f64::INFINITY, f64::min),
    ))
}

fn fit_verdict(report: &mut Report, name: &str, fit: sdheat_core::Result<error_lab::OrderFit>, window: (f64, f64), points: Vec<(f64, f64)>) {
    match fit {
        Ok(f) => {
            report.fits.push(FitRecord::new(name, &f, points));
            report
                .verdicts
                .push(Verdict::within(format!("{name}: slope in [{}, {}]", window.0, window.1), f.slope, window.0, window.1));
        }
        Err(e) => report.verdicts.push(Verdict::failed(name, &e.to_string())),
    }
}

/// The error study: A-set, sweep rows, matched-horizon ladder, order fits
/// and the quadratic time-gap hunt.
pub fn run_error_lab(cfg: &RunConfig, threads: usize) -> Result<Report> {
    let inst = Instance::from_config(cfg)?;
    let scn = inst.scenario(cfg)?;
    let s = &cfg.sweep;
    let mut report = Report::new("sweep", cfg);
    let t = scn.optimal_time;
    report.result("exit_time", scn.exit_time);
    report.result("budget", scn.budget);
    report.result("optimal_time", t);
    report.result("lambda1", scn.lambda1());

    let eta_set = error_lab::build_eta_set(&scn, s.eta, (s.eta_k_min, s.eta_k_max))?;
    report.result("a_set.cutoff", eta_set.cutoff);
    let h = scn.exit_time / 50.0;
    let density = eta_set.density(h);
    report.result("a_set.density_at_exit_over_50", density);
    report.verdicts.push(Verdict::at_most(
        "|A ∩ (0,h)|/h within 0.02 of η at h = T*/50",
        (density - s.eta).abs(),
        0.02,
    ));

    let mut deltas: Vec<f64> = cfg
        .sweep_ks()
        .into_iter()
        .map(|k| t / (k as f64 + s.offset * s.eta))
        .collect();
    deltas.extend_from_slice(&s.deltas);
    let (rows, ladder, hunt) = with_threads(threads, || {
        let rows = parallel_sweep(&scn, &deltas, Some(&eta_set), s.family);
        let (ladder, hunt) = rayon::join(
            || error_lab::matched_horizon_ladder(&scn, t, s.ladder_k0, s.ladder_levels),
            || error_lab::quadratic_gap_hunt(&scn, (s.hunt_k_min, s.hunt_k_max)),
        );
        (rows, ladder, hunt)
    })?;

    let bracket = cfg.tolerances.bracket;
    if let Some(d0) = error_lab::empirical_delta0(&rows, bracket) {
        report.result("delta0_empirical", d0);
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    report.verdicts.push(Verdict::at_most("rows with solver errors", failed as f64, 0.0));
    let ok_rows = rows.iter().filter(|r| r.error.is_none());
    let worst_low = ok_rows.clone().map(|r| -r.t_gap).fold(f64::NEG_INFINITY, f64::max);
    let worst_high = ok_rows.clone().map(|r| r.t_gap - 2.0 * r.delta).fold(f64::NEG_INFINITY, f64::max);
    let worst_norm = ok_rows.map(|r| -r.norm_gap).fold(f64::NEG_INFINITY, f64::max);
    report.verdicts.push(Verdict::at_most("all rows: −T_gap ≤ tol", worst_low, bracket));
    report.verdicts.push(Verdict::at_most("all rows: T_gap − 2δ ≤ tol", worst_high, bracket));
    report.verdicts.push(Verdict::at_most("all rows: −norm_gap ≤ tol", worst_norm, bracket));
    match a_row_extremes(&rows) {
        Some((lo, hi, ce)) => {
            report.verdicts.push(Verdict {
                name: "A rows: T_gap/δ > 1 − η".into(),
                bound: 1.0 - s.eta,
                measured: lo,
                pass: lo > 1.0 - s.eta,
            });
            report.verdicts.push(Verdict {
                name: "A rows: T_gap/δ < 1".into(),
                bound: 1.0,
                measured: hi,
                pass: hi < 1.0,
            });
            report.verdicts.push(Verdict::at_least(
                "A rows: ctrl_err/δ ≥ ½λ₁^{3/2}r(1−η)",
                ce,
                scn.lower_bound_slope(s.eta),
            ));
        }
        None => report.verdicts.push(Verdict::failed("A rows", "no sweep row falls in A")),
    }

    let ladder_points = ladder?;
    fit_verdict(
        &mut report,
        "norm_gap at matched horizon",
        error_lab::fit_order(&ladder_points),
        (1.8, 2.2),
        ladder_points.clone(),
    );
    fit_verdict(&mut report, "ctrl_err_min_norm on A", error_lab::fit_rows(&rows, Field::CtrlErrMinNorm, true), (0.8, 1.2), Vec::new());
    if s.family {
        fit_verdict(&mut report, "family_err on A", error_lab::fit_rows(&rows, Field::FamilyErr, true), (0.4, 0.6), Vec::new());
        fit_verdict(&mut report, "beta_max on A", error_lab::fit_rows(&rows, Field::BetaMax, true), (0.4, 0.6), Vec::new());
    }
    if let Ok(f) = error_lab::fit_rows(&rows, Field::TGap, true) {
        report.fits.push(FitRecord::new("T_gap on A", &f, Vec::new()));
    }

    let hits = hunt?;
    let expected = s.hunt_k_max - s.hunt_k_min + 1;
    report.verdicts.push(Verdict::at_least("hunt: k values with a hit", hits.len() as f64, expected as f64));
    if !hits.is_empty() {
        let mut ratios: Vec<f64> = hits.iter().map(|h| h.ratio()).collect();
        ratios.sort_by(f64::total_cmp);
        let median = ratios[ratios.len() / 2];
        report.result("hunt.median_T_gap_over_delta_sq", median);
        for h in &hits {
            report.result(format!("hunt.k{}.delta", h.k), h.delta);
            report.result(format!("hunt.k{}.T_gap", h.k), h.t_gap);
        }
        report.verdicts.push(Verdict::at_most(
            "hunt: max (T_gap/δ²)/median ≤ 10",
            ratios[ratios.len() - 1] / median,
            10.0,
        ));
        let witness = hits.iter().map(|h| h.t_gap / h.delta).fold(f64::INFINITY, f64::min);
        report.verdicts.push(Verdict {
            name: "hunt: min T_gap/δ < (1−η)/2".into(),
            bound: 0.5 * (1.0 - s.eta),
            measured: witness,
            pass: witness < 0.5 * (1.0 - s.eta),
        });
    }
    report.rows = rows.iter().map(RowRecord::from).collect();
    Ok(report)
}
