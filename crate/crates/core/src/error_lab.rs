//! Sampling-period error study: time gaps `T_δ − T`, control errors,
//! matched-horizon norm gaps, the sets `A_{M,η}` on which the time gap is of
//! exact order `δ`, a constructive family of sampled optimal controls, and
//! sampling periods with quadratically small time gaps.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::control::{AdjointControl, SampledControl};
use crate::error::{Error, Result};
use crate::gramians::{self, SamplingGrid};
use crate::min_norm;
use crate::roots;
use crate::spectral::{BallTarget, DomainSpec, SpectralVec};
use crate::time_optimal::{self, TimeSolution};

/// A fixed problem instance with its distributed optimal time and control.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub domain: DomainSpec,
    pub y0: SpectralVec,
    pub target: BallTarget,
    pub budget: f64,
    pub exit_time: f64,
    /// `T(M, y₀)`.
    pub optimal_time: f64,
    /// `u*_M`.
    pub optimal_control: AdjointControl,
}

impl Scenario {
    pub fn new(domain: DomainSpec, y0: SpectralVec, target: BallTarget, budget: f64) -> Result<Self> {
        if !(budget > 0.0) {
            return Err(Error::config("problem.budget", "must be positive for the error study"));
        }
        let t = time_optimal::optimal_time_distributed(&domain, &y0, &target, budget)?;
        let control = t
            .control
            .as_distributed()
            .cloned()
            .ok_or_else(|| Error::Consistency("distributed solve returned no adjoint control".into()))?;
        Ok(Scenario {
            exit_time: t.exit_time,
            optimal_time: t.optimal_time,
            optimal_control: control,
            domain,
            y0,
            target,
            budget,
        })
    }

    /// Budget chosen as `M = N(f·T*, y₀)`.
    pub fn from_exit_fraction(domain: DomainSpec, y0: SpectralVec, target: BallTarget, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::config("problem.budget_from_exit_fraction", "must lie in (0, 1)"));
        }
        let exit = domain.exit_time(&y0, &target)?;
        let m = min_norm::solve_jp_continuous(&domain, &y0, &target, fraction * exit)?.norm;
        Self::new(domain, y0, target, m)
    }

    pub fn lambda1(&self) -> f64 {
        self.domain.lambda1()
    }

    /// `½ λ₁^{3/2} r (1 − η)`, the slope of the order-`δ` lower bounds.
    pub fn lower_bound_slope(&self, eta: f64) -> f64 {
        let l = self.lambda1();
        0.5 * l * libm::sqrt(l) * self.target.radius() * (1.0 - eta)
    }

    pub fn sampled_time(&self, delta: f64) -> Result<TimeSolution> {
        time_optimal::optimal_time_sampled_from(
            &self.domain,
            &self.y0,
            &self.target,
            self.budget,
            delta,
            self.optimal_time,
            self.exit_time,
        )
    }

    /// `N(T, y₀)` for `0 < T < T*`.
    pub fn distributed_norm(&self, horizon: f64) -> Result<f64> {
        Ok(min_norm::solve_continuous_below_exit(&self.domain, &self.y0, &self.target, horizon, self.exit_time)?.norm)
    }

    /// `N_δ(kδ, y₀)` for `2 ≤ k`, `kδ < T*`.
    pub fn sampled_norm(&self, grid: &SamplingGrid) -> Result<f64> {
        Ok(min_norm::solve_sampled_below_exit(&self.domain, &self.y0, &self.target, grid, self.exit_time)?.norm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    /// `k = T_δ/δ`.
    pub blocks: Option<usize>,
    /// `T_δ − T`.
    pub t_gap: f64,
    /// `‖u*_{M,δ} − u*_M‖_{L²(0, T)}`.
    pub ctrl_err_min_norm: f64,
    /// `N_δ(T_δ) − N(T_δ)`.
    pub norm_gap: f64,
    /// Largest `‖u − u*_M‖_{L²(0,T)}` over the constructed family.
    pub family_err: Option<f64>,
    /// Largest family coefficient `β`, a lower bound for the family diameter.
    pub beta_max: Option<f64>,
    pub in_a_set: bool,
    /// Solver failure for this row; numeric fields are NaN when set.
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(delta: f64, in_a_set: bool, e: &Error) -> Self {
        SweepRow {
            delta,
            blocks: None,
            t_gap: f64::NAN,
            ctrl_err_min_norm: f64::NAN,
            norm_gap: f64::NAN,
            family_err: None,
            beta_max: None,
            in_a_set,
            error: Some(e.to_string()),
        }
    }

    pub fn field(&self, f: Field) -> Option<f64> {
        match f {
            Field::TGap => Some(self.t_gap),
            Field::CtrlErrMinNorm => Some(self.ctrl_err_min_norm),
            Field::NormGap => Some(self.norm_gap),
            Field::FamilyErr => self.family_err,
            Field::BetaMax => self.beta_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    TGap,
    CtrlErrMinNorm,
    NormGap,
    FamilyErr,
    BetaMax,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::TGap => "T_gap",
            Field::CtrlErrMinNorm => "ctrl_err_min_norm",
            Field::NormGap => "norm_gap",
            Field::FamilyErr => "family_err",
            Field::BetaMax => "beta_max",
        }
    }
}

/// `A_{M,η} = B ∩ (0, δ¹)` with `B = ∪_{k≥1} (T/(k+η), T/k)` and `T = T(M, y₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaSet {
    pub budget: f64,
    pub eta: f64,
    pub time: f64,
    /// Listed components `(T/(k+η), T/k)`, descending.
    pub intervals: Vec<(usize, f64, f64)>,
    /// `δ¹`.
    pub cutoff: f64,
}

impl EtaSet {
    /// Fractional part `a_δ` of `T/δ` when `δ ∈ B`.
    pub fn a_delta(&self, delta: f64) -> Option<f64> {
        if !(delta > 0.0) {
            return None;
        }
        let x = self.time / delta;
        let k = libm::floor(x);
        let a = x - k;
        (k >= 1.0 && a > 0.0 && a < self.eta).then_some(a)
    }

    pub fn contains(&self, delta: f64) -> bool {
        delta < self.cutoff && self.a_delta(delta).is_some()
    }

    /// `|A ∩ (0, h)|`, summed in closed form over all components.
    pub fn measure_below(&self, h: f64) -> f64 {
        let h = h.min(self.cutoff);
        if !(h > 0.0) {
            return 0.0;
        }
        let t = self.time;
        // Components with T/k ≤ h lie wholly inside (0, h).
        let first = libm::ceil(t / h).max(1.0);
        let mut m = t * (digamma(first + self.eta) - digamma(first));
        let k = first - 1.0;
        if k >= 1.0 {
            m += (h.min(t / k) - t / (k + self.eta)).max(0.0);
        }
        m
    }

    pub fn density(&self, h: f64) -> f64 {
        self.measure_below(h) / h
    }
}

/// `ψ(x)` for `x > 0`: upward recurrence then the asymptotic series.
pub fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli terms B_{2n}/(2n x^{2n}).
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    acc + libm::log(x) - 0.5 * inv - series
}

/// Builds `A_{M,η}`. The cutoff `δ¹` is the smallest sampled `δ` (three per
/// listed component) violating `M ≥ N_δ(T_δ) + ½λ₁^{3/2} r (1−η) δ`, capped by
/// `min(T/2, (T*−T)/2, 1)`.
pub fn build_eta_set(scn: &Scenario, eta: f64, k_range: (usize, usize)) -> Result<EtaSet> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::config("sweep.eta", alloc::format!("must lie in (0, 1), got {eta}")));
    }
    let (k_min, k_max) = k_range;
    if k_min == 0 || k_min > k_max {
        return Err(Error::config("sweep.k_range", alloc::format!("empty or invalid range {k_min}..={k_max}")));
    }
    let t = scn.optimal_time;
    let intervals: Vec<(usize, f64, f64)> = (k_min..=k_max)
        .map(|k| (k, t / (k as f64 + eta), t / k as f64))
        .collect();
    let mut cutoff = (0.5 * t).min(0.5 * (scn.exit_time - t)).min(1.0);
    let slope = scn.lower_bound_slope(eta);
    for &(k, _, _) in &intervals {
        for frac in [0.25, 0.5, 0.75] {
            let delta = t / (k as f64 + frac * eta);
            if delta >= cutoff {
                continue;
            }
            let holds = match scn.sampled_time(delta) {
                Ok(s) => scn.budget >= s.control_norm + slope * delta,
                Err(_) => false,
            };
            if !holds {
                cutoff = delta;
            }
        }
    }
    Ok(EtaSet {
        budget: scn.budget,
        eta,
        time: t,
        intervals,
        cutoff,
    })
}

/// Sampled optimal controls `α u*_δ + β v̂` that all reach the ball at `T_δ`
/// within budget `M`.
#[derive(Debug, Clone)]
pub struct OptimalFamily {
    pub delta: f64,
    pub optimal_time: f64,
    /// `u*_δ`, the minimal-norm member direction.
    pub minimal: SampledControl,
    /// `v̂`: unit norm, supported on the first block, orthogonal to `u*_δ`.
    pub direction: SampledControl,
    pub alpha: f64,
    pub lambda_hat: f64,
    pub betas: Vec<f64>,
    pub members: Vec<SampledControl>,
    /// Largest admissible `β`.
    pub beta_max: f64,
}

/// Number of family members emitted, evenly spaced in `β ∈ [0, β_max]`.
pub const FAMILY_SIZE: usize = 5;

pub fn build_optimal_family(scn: &Scenario, delta: f64) -> Result<OptimalFamily> {
    let ts = scn.sampled_time(delta)?;
    let u_star = ts
        .control
        .as_sampled()
        .cloned()
        .ok_or_else(|| Error::Consistency("sampled solve returned no sampled control".into()))?;
    let z = ts
        .minimizer
        .clone()
        .ok_or_else(|| Error::Consistency("sampled solve returned no minimizer".into()))?;
    let m = scn.budget;
    let m_d = ts.control_norm;
    if !(m > m_d) {
        return Err(Error::Construction(alloc::format!(
            "budget {m} not strictly above N_δ(T_δ) = {m_d}"
        )));
    }
    if delta > scn.optimal_time {
        return Err(Error::Construction("no sampling block inside (0, T(M))".into()));
    }
    let d = &scn.domain;
    let grid = *u_star.grid();
    let gram = d.gram();
    let g1 = &u_star.generators()[0];
    let g1_sq = gram.quad_form(g1.as_slice());

    let mut direction = None;
    for seed in 1..=d.modes().min(2) {
        let e = SpectralVec::mode(d.modes(), seed, 1.0);
        let v = if g1_sq > 0.0 {
            e.axpy(-gram.bilinear(e.as_slice(), g1.as_slice()) / g1_sq, g1)
        } else {
            e
        };
        let n2 = delta * gram.quad_form(v.as_slice());
        if n2 > 1e-12 * delta {
            direction = Some(v.scale(1.0 / libm::sqrt(n2)));
            break;
        }
    }
    let mut v = direction.ok_or_else(|| Error::Construction("first-block direction degenerates".into()))?;

    let a1 = gramians::block_average_operator(d, &grid, 1);
    let gv = gram.mul_vec(v.as_slice());
    let mut y_v = SpectralVec::new(a1.iter().zip(&gv).map(|(a, g)| delta * a * g).collect());
    let y_u = u_star.final_state_contribution();
    let mut b = y_u.dot(&y_v);
    if b > 0.0 {
        v = v.scale(-1.0);
        y_v = y_v.scale(-1.0);
        b = -b;
    }
    let a = y_v.norm();
    let c = y_u.norm();
    let zn = z.norm();
    let r = scn.target.radius();
    let gap = m - m_d;
    let lambda_hat = (r * m_d * m_d * m_d / (zn * c * c * gap)).min(0.5);
    let alpha = 1.0 + lambda_hat * gap / m_d;
    let beta_max = libm::sqrt((m * (1.0 - lambda_hat) * gap).min(lambda_hat * r * m_d * gap / (a * a * zn)));

    let mut blocks = alloc::vec![SpectralVec::zeros(d.modes()); grid.blocks()];
    blocks[0] = v;
    let direction = SampledControl::new(d, grid, blocks)?;
    let free = d.semigroup_apply(grid.horizon(), &scn.y0)?;
    let y_star = &free + &y_u;
    let _ = b;

    let mut betas = Vec::with_capacity(FAMILY_SIZE);
    let mut members = Vec::with_capacity(FAMILY_SIZE);
    for i in 0..FAMILY_SIZE {
        let beta = beta_max * i as f64 / (FAMILY_SIZE - 1) as f64;
        let u = u_star.combine(alpha, &direction, beta)?;
        let norm = u.norm();
        let y = y_star.axpy(alpha - 1.0, &y_u).axpy(beta, &y_v);
        if norm > m + 1e-10 || y.norm() > r + 1e-8 {
            return Err(Error::Consistency(alloc::format!(
                "family member β = {beta}: ‖u‖ = {norm} (M = {m}), ‖y(T_δ)‖ = {} (r = {r})",
                y.norm()
            )));
        }
        betas.push(beta);
        members.push(u);
    }
    Ok(OptimalFamily {
        delta,
        optimal_time: ts.optimal_time,
        minimal: u_star,
        direction,
        alpha,
        lambda_hat,
        betas,
        members,
        beta_max,
    })
}

/// Largest `‖u − u*_M‖_{L²(0, T(M))}` over the family members.
pub fn family_vs_distributed_error(scn: &Scenario, delta: f64) -> Result<f64> {
    let fam = build_optimal_family(scn, delta)?;
    family_error(scn, &fam)
}

fn family_error(scn: &Scenario, fam: &OptimalFamily) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for u in &fam.members {
        worst = worst.max(u.distance_to_adjoint(&scn.optimal_control, scn.optimal_time)?);
    }
    Ok(worst)
}

/// One row of the error study. With `family`, rows inside `A` also carry the
/// family statistics.
pub fn sweep_row(scn: &Scenario, delta: f64, eta_set: Option<&EtaSet>, family: bool) -> SweepRow {
    let in_a = eta_set.is_some_and(|a| a.contains(delta));
    let compute = || -> Result<SweepRow> {
        let ts = scn.sampled_time(delta)?;
        let u = ts
            .control
            .as_sampled()
            .ok_or_else(|| Error::Consistency("sampled solve returned no sampled control".into()))?;
        let ctrl = u.distance_to_adjoint(&scn.optimal_control, scn.optimal_time)?;
        let norm_gap = ts.control_norm - scn.distributed_norm(ts.optimal_time)?;
        let (family_err, beta_max) = if family && in_a {
            let fam = build_optimal_family(scn, delta)?;
            (Some(family_error(scn, &fam)?), Some(fam.beta_max))
        } else {
            (None, None)
        };
        Ok(SweepRow {
            delta,
            blocks: ts.blocks,
            t_gap: ts.optimal_time - scn.optimal_time,
            ctrl_err_min_norm: ctrl,
            norm_gap,
            family_err,
            beta_max,
            in_a_set: in_a,
            error: None,
        })
    };
    compute().unwrap_or_else(|e| SweepRow::failed(delta, in_a, &e))
}

pub fn sweep(scn: &Scenario, deltas: &[f64], eta_set: Option<&EtaSet>, family: bool) -> Vec<SweepRow> {
    deltas.iter().map(|d| sweep_row(scn, *d, eta_set, family)).collect()
}

/// Largest swept `δ` such that every row with `δ' ≤ δ` satisfies
/// `0 ≤ T_gap ≤ 2δ'` up to `tol`; `None` if even the smallest row fails.
pub fn empirical_delta0(rows: &[SweepRow], tol: f64) -> Option<f64> {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let mut best = None;
    for row in sorted {
        let ok = row.error.is_none() && row.t_gap >= -tol && row.t_gap <= 2.0 * row.delta + tol;
        if !ok {
            break;
        }
        best = Some(row.delta);
    }
    best
}

/// `N_δ(T) − N(T)` for `δ = T/(k₀ 2^l)`, `l = 0..levels`. Norms are taken
/// from the dual value, `N = √(−2V)`, which is stationary in the minimizer.
pub fn matched_horizon_ladder(scn: &Scenario, horizon: f64, k0: usize, levels: usize) -> Result<Vec<(f64, f64)>> {
    let n = min_norm::solve_continuous_below_exit(&scn.domain, &scn.y0, &scn.target, horizon, scn.exit_time)?;
    let n_ref = libm::sqrt(-2.0 * n.value);
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let k = k0 << l;
        let grid = SamplingGrid::new(horizon / k as f64, k)?;
        let s = min_norm::solve_sampled_below_exit(&scn.domain, &scn.y0, &scn.target, &grid, scn.exit_time)?;
        out.push((grid.delta(), libm::sqrt(-2.0 * s.value) - n_ref));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    /// Points dropped for nonpositive or non-finite values.
    pub excluded: usize,
}

/// Least-squares fit of `log v = slope · log δ + intercept`.
pub fn fit_order(points: &[(f64, f64)]) -> Result<OrderFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(d, v)| *d > 0.0 && *v > 0.0 && d.is_finite() && v.is_finite())
        .map(|(d, v)| (libm::log(*d), libm::log(*v)))
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 4 {
        return Err(Error::domain(alloc::format!(
            "order fit needs ≥ 4 positive points, got {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("order fit needs at least two distinct δ"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(OrderFit {
        slope,
        intercept,
        r_squared,
        used: usable.len(),
        excluded,
    })
}

/// Fit over rows, optionally restricted to rows inside `A`.
pub fn fit_rows(rows: &[SweepRow], field: Field, only_a: bool) -> Result<OrderFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error.is_none() && (!only_a || r.in_a_set))
        .filter_map(|r| r.field(field).map(|v| (r.delta, v)))
        .collect();
    fit_order(&pts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapHit {
    pub k: usize,
    pub delta: f64,
    /// `T_δ − T = (k+1)δ − T`.
    pub t_gap: f64,
}

impl GapHit {
    pub fn ratio(&self) -> f64 {
        self.t_gap / (self.delta * self.delta)
    }
}

/// For each `k`, the smallest `δ ∈ (T/(k+1), T/k)` with
/// `N_δ((k+1)δ) ≤ M`. There `T_δ = (k+1)δ`, and the gap `(k+1)δ − T` is of
/// order `δ²`. A `k` whose bracket does not change sign is skipped.
pub fn quadratic_gap_hunt(scn: &Scenario, k_range: (usize, usize)) -> Result<Vec<GapHit>> {
    let (k_min, k_max) = k_range;
    if k_min < 2 || k_min > k_max {
        return Err(Error::config("hunt.k_range", alloc::format!("need 2 ≤ k_min ≤ k_max, got {k_min}..={k_max}")));
    }
    let t = scn.optimal_time;
    let mut hits = Vec::new();
    for k in k_min..=k_max {
        let excess = |delta: f64| -> Result<f64> {
            let grid = SamplingGrid::new(delta, k + 1)?;
            Ok(scn.sampled_norm(&grid)? - scn.budget)
        };
        let lo = t / (k as f64 + 1.0);
        let hi = t / k as f64;
        let Ok((_, top)) = roots::bisect(excess, lo, hi, 1e-16 * t) else {
            continue;
        };
        let ts = scn.sampled_time(top)?;
        if ts.blocks != Some(k + 1) {
            return Err(Error::Consistency(alloc::format!(
                "hunted δ = {top} gives k = {:?}, expected {}",
                ts.blocks,
                k + 1
            )));
        }
        hits.push(GapHit {
            k,
            delta: top,
            t_gap: ts.optimal_time - t,
        });
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(modes: usize) -> Scenario {
        let d = DomainSpec::build(1.0, 0.25, 0.75, modes).unwrap();
        let y0 = SpectralVec::padded(&[2.0, 0.5], modes);
        Scenario::from_exit_fraction(d, y0, BallTarget::new(1.0).unwrap(), 0.6).unwrap()
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-14);
        assert!((digamma(0.5) + euler + 2.0 * core::f64::consts::LN_2).abs() < 1e-14);
        assert!((digamma(101.0) - digamma(100.0) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn fit_exact_power_law() {
        let pts: Vec<(f64, f64)> = (0..8).map(|i| {
            let d = 0.1 / (1u32 << i) as f64;
            (d, 3.5 * libm::pow(d, 1.7))
        }).collect();
        let f = fit_order(&pts).unwrap();
        assert!((f.slope - 1.7).abs() < 1e-12);
        assert!((f.intercept - libm::log(3.5)).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let mut bad = pts.clone();
        bad.push((0.3, 0.0));
        bad.push((0.4, -1.0));
        assert_eq!(fit_order(&bad).unwrap().excluded, 2);
        assert!(fit_order(&pts[..3]).is_err());
    }

    #[test]
    fn eta_set_membership_and_density() {
        let set = EtaSet {
            budget: 1.0,
            eta: 0.5,
            time: 1.0,
            intervals: Vec::new(),
            cutoff: 1.0,
        };
        assert!(set.contains(1.0 / 10.25));
        assert!(!set.contains(1.0 / 10.75));
        assert!(!set.contains(0.1));
        let a = set.a_delta(1.0 / 10.25).unwrap();
        assert!((a - 0.25).abs() < 1e-12);
        // Brute-force measure over explicit components.
        let h = 1.0 / 37.3;
        let mut brute = 0.0;
        for k in 1..10_000_000u64 {
            let (lo, hi) = (1.0 / (k as f64 + 0.5), 1.0 / k as f64);
            if lo >= h {
                continue;
            }
            brute += hi.min(h) - lo;
        }
        // The brute sum misses a tail of about 0.5e-7.
        assert!((set.measure_below(h) - brute).abs() < 1e-7);
        assert!((set.density(1.0 / 500.0) - 0.5).abs() < 0.01);
    }

    #[test]
    fn sweep_row_brackets() {
        let scn = scenario(16);
        let t = scn.optimal_time;
        for k in [5usize, 12, 30] {
            let delta = t / (k as f64 + 0.25);
            let row = sweep_row(&scn, delta, None, false);
            assert!(row.error.is_none(), "{:?}", row.error);
            assert!(row.t_gap >= -1e-10 && row.t_gap <= 2.0 * delta);
            assert_eq!(row.blocks, Some(k + 1));
            assert!(((row.t_gap - 0.75 * delta) / delta).abs() < 1e-9);
            assert!(row.norm_gap >= 0.0);
        }
    }

    #[test]
    fn family_members_verified() {
        let scn = scenario(16);
        let delta = scn.optimal_time / 20.25;
        let fam = build_optimal_family(&scn, delta).unwrap();
        assert_eq!(fam.members.len(), FAMILY_SIZE);
        assert!(fam.beta_max > 0.0);
        assert!(fam.direction.inner(&fam.minimal).unwrap().abs() < 1e-12);
        assert!((fam.direction.norm() - 1.0).abs() < 1e-12);
        let free = scn.domain.semigroup_apply(fam.optimal_time, &scn.y0).unwrap();
        for u in &fam.members {
            let y = &free + &u.final_state_contribution();
            assert!(u.norm() <= scn.budget + 1e-10);
            assert!(y.norm() <= 1.0 + 1e-8);
        }
        let e = family_vs_distributed_error(&scn, delta).unwrap();
        let row = sweep_row(&scn, delta, None, false);
        assert!(e + 1e-12 >= fam.beta_max - row.ctrl_err_min_norm - (fam.alpha - 1.0) * fam.minimal.norm());
    }

    #[test]
    fn gap_hunt_is_quadratic() {
        let scn = scenario(16);
        let hits = quadratic_gap_hunt(&scn, (8, 11)).unwrap();
        assert_eq!(hits.len(), 4);
        for h in &hits {
            assert!(h.t_gap >= 0.0);
            assert!(h.t_gap < 0.1 * h.delta, "{h:?}");
        }
    }
}
