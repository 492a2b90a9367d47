//! Optimal times under an `L²` control budget `M`.
//!
//! `T(M, y₀)` inverts the strictly decreasing map `T ↦ N(T, y₀)`, and
//! `T_δ(M, y₀)` is the first sampling instant `kδ` (with `k ≥ 2`) at which the
//! sampled minimal norm drops to `M`. Optimal controls are the minimal-norm
//! controls at those horizons.

use crate::control::Control;
use crate::error::{Error, Result};
use crate::gramians::SamplingGrid;
use crate::min_norm::{self, NormSolution};
use crate::roots;
use crate::spectral::{BallTarget, DomainSpec, SpectralVec};

/// Absolute tolerance on `T(M, y₀)`.
pub const TIME_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeKind {
    Distributed,
    Sampled { delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSolution {
    pub optimal_time: f64,
    pub budget: f64,
    /// Norm of the returned control: `N(T, y₀)` or `N_δ(T_δ, y₀)`.
    pub control_norm: f64,
    pub control: Control,
    pub kind: TimeKind,
    pub exit_time: f64,
    /// Number of sampling blocks `k = T_δ/δ` for the sampled kind.
    pub blocks: Option<usize>,
    /// `(N_δ(T_δ), N_δ(T_δ − δ))` when `k ≥ 3`; the first is `≤ M`, the
    /// second `> M`.
    pub sandwich: Option<(f64, f64)>,
    /// `k = 2`: whether `k = 1` would also work is not decided.
    pub boundary_ambiguous: bool,
    /// Minimizer of the dual problem at the optimal horizon, if any.
    pub minimizer: Option<SpectralVec>,
}

fn check_budget(m: f64) -> Result<()> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::config("problem.budget", alloc::format!("must be finite and ≥ 0, got {m}")));
    }
    Ok(())
}

/// `N(T, y₀)`, or zero once the free evolution reaches the ball.
fn distributed_norm(d: &DomainSpec, y0: &SpectralVec, target: &BallTarget, t: f64, exit: f64) -> Result<f64> {
    match min_norm::solve_continuous_below_exit(d, y0, target, t, exit) {
        Ok(s) => Ok(s.norm),
        Err(Error::ReachableByFreeDynamics { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// `T(M, y₀)` by bisection of `N(T) = M` on `(t_lo, T*)`.
pub fn optimal_time_distributed(d: &DomainSpec, y0: &SpectralVec, target: &BallTarget, budget: f64) -> Result<TimeSolution> {
    check_budget(budget)?;
    let exit = d.exit_time(y0, target)?;
    if budget == 0.0 {
        return Ok(TimeSolution {
            optimal_time: exit,
            budget,
            control_norm: 0.0,
            control: Control::Zero { horizon: exit },
            kind: TimeKind::Distributed,
            exit_time: exit,
            blocks: None,
            sandwich: None,
            boundary_ambiguous: false,
            minimizer: None,
        });
    }
    let mut lo = 0.5 * exit;
    let mut halvings = 0;
    while distributed_norm(d, y0, target, lo, exit)? <= budget {
        lo *= 0.5;
        halvings += 1;
        if halvings > 200 {
            return Err(Error::NonConvergence {
                what: "optimal-time lower bracket",
                iterations: halvings,
                residual: lo,
            });
        }
    }
    let (_, hi) = roots::bisect(
        |t| Ok(distributed_norm(d, y0, target, t, exit)? - budget),
        lo,
        exit,
        TIME_TOLERANCE,
    )?;
    // `hi` is on the side N(hi) ≤ M.
    let sol = min_norm::solve_continuous_below_exit(d, y0, target, hi, exit)?;
    Ok(TimeSolution {
        optimal_time: hi,
        budget,
        control_norm: sol.norm,
        control: sol.control,
        kind: TimeKind::Distributed,
        exit_time: exit,
        blocks: None,
        sandwich: None,
        boundary_ambiguous: false,
        minimizer: Some(sol.minimizer),
    })
}

/// `T_δ(M, y₀) = min{kδ : k ≥ 2, kδ < T*, N_δ(kδ, y₀) ≤ M}` with its
/// minimal-norm sampled control.
pub fn optimal_time_sampled(
    d: &DomainSpec,
    y0: &SpectralVec,
    target: &BallTarget,
    budget: f64,
    delta: f64,
) -> Result<TimeSolution> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::config("problem.budget", alloc::format!("must be positive, got {budget}")));
    }
    let continuous = optimal_time_distributed(d, y0, target, budget)?;
    optimal_time_sampled_from(d, y0, target, budget, delta, continuous.optimal_time, continuous.exit_time)
}

/// Largest `k` with `kδ < T*`.
pub fn max_admissible_blocks(delta: f64, exit_time: f64) -> usize {
    let mut k = libm::ceil(exit_time / delta) as usize;
    while k > 0 && k as f64 * delta >= exit_time {
        k -= 1;
    }
    k
}

/// As [`optimal_time_sampled`], reusing a known `T(M, y₀)` and `T*`.
///
/// Since `jδ < T(M)` implies `N_δ(jδ) ≥ N(jδ) > M`, the scan starts at
/// `⌊T(M)/δ⌋`; the step below the answer is always solved to certify the
/// sandwich `N_δ(T_δ) ≤ M < N_δ(T_δ − δ)`.
pub fn optimal_time_sampled_from(
    d: &DomainSpec,
    y0: &SpectralVec,
    target: &BallTarget,
    budget: f64,
    delta: f64,
    time_budget: f64,
    exit_time: f64,
) -> Result<TimeSolution> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::config("sampling.delta", alloc::format!("must be positive, got {delta}")));
    }
    let coarse = Error::SamplingTooCoarse {
        delta,
        budget,
        exit_time,
    };
    let k_max = max_admissible_blocks(delta, exit_time);
    if k_max < 2 {
        return Err(coarse);
    }
    let solve = |k: usize| -> Result<NormSolution> {
        let grid = SamplingGrid::new(delta, k)?;
        min_norm::solve_sampled_below_exit(d, y0, target, &grid, exit_time)
    };
    let mut k = (libm::floor(time_budget / delta) as usize).max(2);
    if k > k_max {
        return Err(coarse);
    }
    let mut sol = solve(k)?;
    while sol.norm > budget {
        k += 1;
        if k > k_max {
            return Err(coarse);
        }
        sol = solve(k)?;
    }
    let mut sandwich = None;
    while k > 2 {
        let below = solve(k - 1)?;
        if below.norm <= budget {
            k -= 1;
            sol = below;
        } else {
            sandwich = Some((sol.norm, below.norm));
            break;
        }
    }
    Ok(TimeSolution {
        optimal_time: k as f64 * delta,
        budget,
        control_norm: sol.norm,
        control: sol.control,
        kind: TimeKind::Sampled { delta },
        exit_time,
        blocks: Some(k),
        sandwich,
        boundary_ambiguous: k == 2,
        minimizer: Some(sol.minimizer),
    })
}

/// `(|T(M, y₁) − T(M, y₂)|, ‖y₁ − y₂‖/(λ₁ r))`.
pub fn time_lipschitz_check(
    d: &DomainSpec,
    y1: &SpectralVec,
    y2: &SpectralVec,
    target: &BallTarget,
    budget: f64,
) -> Result<(f64, f64)> {
    let t1 = optimal_time_distributed(d, y1, target, budget)?.optimal_time;
    let t2 = optimal_time_distributed(d, y2, target, budget)?.optimal_time;
    let bound = (y1 - y2).norm() / (d.lambda1() * target.radius());
    Ok(((t1 - t2).abs(), bound))
}

/// `(λ₁^{3/2} r (T₂ − T₁), N(T₁) − N(T₂), (N(T₁) − N(T₂))/(T₂ − T₁))`.
pub fn norm_lipschitz_check(
    d: &DomainSpec,
    y0: &SpectralVec,
    target: &BallTarget,
    t1: f64,
    t2: f64,
) -> Result<(f64, f64, f64)> {
    let exit = d.exit_time(y0, target)?;
    if !(0.0 < t1 && t1 < t2 && t2 < exit) {
        return Err(Error::domain(alloc::format!(
            "need 0 < T1 < T2 < T* = {exit}, got T1 = {t1}, T2 = {t2}"
        )));
    }
    let n1 = min_norm::solve_continuous_below_exit(d, y0, target, t1, exit)?.norm;
    let n2 = min_norm::solve_continuous_below_exit(d, y0, target, t2, exit)?.norm;
    let l1 = d.lambda1();
    let lower = l1 * libm::sqrt(l1) * target.radius() * (t2 - t1);
    Ok((lower, n1 - n2, (n1 - n2) / (t2 - t1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn reference() -> (DomainSpec, SpectralVec, BallTarget) {
        let d = DomainSpec::build(1.0, 0.25, 0.75, 16).unwrap();
        let y0 = SpectralVec::padded(&[2.0, 0.5], 16);
        (d, y0, BallTarget::new(1.0).unwrap())
    }

    #[test]
    fn zero_budget_gives_exit_time() {
        let (d, y0, target) = reference();
        let s = optimal_time_distributed(&d, &y0, &target, 0.0).unwrap();
        assert_eq!(s.optimal_time, d.exit_time(&y0, &target).unwrap());
        assert_eq!(s.control, Control::Zero { horizon: s.optimal_time });
    }

    #[test]
    fn scalar_time_matches_oracle() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 1).unwrap();
        let target = BallTarget::new(1.0).unwrap();
        let y0 = SpectralVec::new(alloc::vec![2.0]);
        let m = 3.0;
        let l = PI * PI;
        let n = |t: f64| {
            let w = (1.0 - libm::exp(-2.0 * l * t)) / (2.0 * l);
            (2.0 * libm::exp(-l * t) - 1.0) / libm::sqrt(w)
        };
        // Plain bisection oracle on the scalar closed form.
        let (mut lo, mut hi) = (1e-6, libm::log(2.0) / l);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if n(mid) > m {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = optimal_time_distributed(&d, &y0, &target, m).unwrap();
        assert!((s.optimal_time - hi).abs() < 1e-11);
        assert!((s.control_norm - m).abs() < 1e-8);
    }

    #[test]
    fn sampled_time_is_multiple_and_dominates() {
        let (d, y0, target) = reference();
        let exit = d.exit_time(&y0, &target).unwrap();
        let m = min_norm::solve_jp_continuous(&d, &y0, &target, 0.6 * exit).unwrap().norm;
        let t = optimal_time_distributed(&d, &y0, &target, m).unwrap();
        for delta in [exit / 7.3, exit / 20.1, exit / 55.5] {
            let s = optimal_time_sampled(&d, &y0, &target, m, delta).unwrap();
            let k = s.blocks.unwrap();
            assert_eq!(s.optimal_time, k as f64 * delta);
            assert!(s.optimal_time >= t.optimal_time);
            assert!(s.control_norm <= m);
            let (lo, hi) = s.sandwich.unwrap();
            assert!(lo <= m && m < hi);
            assert!((s.control.norm() - s.control_norm).abs() < 1e-12 * m);
        }
    }

    #[test]
    fn coarse_sampling_rejected() {
        let (d, y0, target) = reference();
        let exit = d.exit_time(&y0, &target).unwrap();
        assert!(matches!(
            optimal_time_sampled(&d, &y0, &target, 1.0, 0.6 * exit),
            Err(Error::SamplingTooCoarse { .. })
        ));
    }

    #[test]
    fn admissible_block_count() {
        assert_eq!(max_admissible_blocks(0.1, 0.35), 3);
        assert_eq!(max_admissible_blocks(0.125, 0.5), 3);
    }

    #[test]
    fn lipschitz_checks() {
        let (d, y0, target) = reference();
        let (diff, bound) = time_lipschitz_check(&d, &y0, &y0, &target, 1.5).unwrap();
        assert_eq!((diff, bound), (0.0, 0.0));
        let y2 = y0.scale(1.001);
        let (diff, bound) = time_lipschitz_check(&d, &y0, &y2, &target, 1.5).unwrap();
        assert!(diff <= bound + 1e-8);
        let exit = d.exit_time(&y0, &target).unwrap();
        let (lower, drop, _) = norm_lipschitz_check(&d, &y0, &target, 0.3 * exit, 0.5 * exit).unwrap();
        assert!(lower <= drop);
        assert!(norm_lipschitz_check(&d, &y0, &target, 0.5 * exit, 0.3 * exit).is_err());
    }
}
