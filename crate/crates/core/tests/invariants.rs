//! Structural properties that hold for every admissible input.

use proptest::prelude::*;

use sdheat_core::gramians::{self, SamplingGrid, TimeSignal};
use sdheat_core::min_norm;
use sdheat_core::time_optimal;
use sdheat_core::{BallTarget, DomainSpec, SpectralVec};

const MODES: usize = 12;

fn domain() -> impl Strategy<Value = DomainSpec> {
    (0.0..0.45f64, 0.1..0.55f64).prop_map(|(a, w)| DomainSpec::build(1.0, a, (a + w).min(1.0), MODES).unwrap())
}

fn state() -> impl Strategy<Value = SpectralVec> {
    prop::collection::vec(-3.0..3.0f64, MODES).prop_map(SpectralVec::new)
}

/// A signal from a random piecewise polynomial in time.
fn signal(grid: &SamplingGrid, coeffs: &[f64]) -> TimeSignal {
    let horizon = grid.horizon();
    TimeSignal::sample(grid, 5, |t| {
        let s = t / horizon;
        SpectralVec::new(
            (0..MODES)
                .map(|j| {
                    let c = &coeffs[3 * (j % 4)..3 * (j % 4) + 3];
                    c[0] + c[1] * s + c[2] * s * s + if s > 0.61 { c[0] } else { 0.0 }
                })
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_composes(d in domain(), y in state(), t in 1e-4..0.2f64, s in 1e-4..0.2f64) {
        let once = d.semigroup_apply(t + s, &y).unwrap();
        let twice = d.semigroup_apply(t, &d.semigroup_apply(s, &y).unwrap()).unwrap();
        prop_assert!((&once - &twice).norm() <= 1e-14 * y.norm().max(1.0));
    }

    #[test]
    fn semigroup_decays_at_first_rate(d in domain(), y in state(), t in 0.0..0.5f64) {
        let out = d.semigroup_apply(t, &y).unwrap();
        prop_assert!(out.norm() <= (-d.lambda1() * t).exp() * y.norm() * (1.0 + 1e-14));
    }

    #[test]
    fn block_average_is_self_adjoint_projection(
        delta in 1e-3..0.05f64,
        blocks in 1usize..10,
        cf in prop::collection::vec(-2.0..2.0f64, 12),
        cg in prop::collection::vec(-2.0..2.0f64, 12),
    ) {
        let grid = SamplingGrid::new(delta, blocks).unwrap();
        let f = signal(&grid, &cf);
        let g = signal(&grid, &cg);
        let fa = gramians::block_average(&f, &grid).unwrap();
        let faa = gramians::block_average(&fa, &grid).unwrap();
        let scale = f.norm_sq().sqrt().max(1e-300);
        prop_assert!(faa.sub(&fa).unwrap().norm_sq().sqrt() <= 1e-14 * scale);
        prop_assert!(fa.norm_sq() <= f.norm_sq() * (1.0 + 1e-14));
        let lhs = fa.inner(&g).unwrap();
        let rhs = f.inner(&gramians::block_average(&g, &grid).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * scale * g.norm_sq().sqrt());
    }

    #[test]
    fn sampled_gramian_is_dominated(d in domain(), delta in 1e-3..0.02f64, blocks in 2usize..20) {
        let grid = SamplingGrid::new(delta, blocks).unwrap();
        let w = gramians::continuous_gramian(&d, grid.horizon()).unwrap().matrix;
        let wd = gramians::sampled_gramian(&d, &grid).matrix;
        let gap = w.sub(&wd).sym_eigen();
        prop_assert!(gap.min() >= -1e-13 * w.max_abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_norm_dominates(frac in 0.1..0.9f64, blocks in 2usize..40) {
        let d = DomainSpec::build(1.0, 0.25, 0.75, MODES).unwrap();
        let y0 = SpectralVec::padded(&[2.0, 0.5], MODES);
        let target = BallTarget::new(1.0).unwrap();
        let horizon = frac * d.exit_time(&y0, &target).unwrap();
        let grid = SamplingGrid::new(horizon / blocks as f64, blocks).unwrap();
        let n = min_norm::solve_jp_continuous(&d, &y0, &target, horizon).unwrap().norm;
        let nd = min_norm::solve_jp_sampled(&d, &y0, &target, &grid).unwrap().norm;
        prop_assert!(nd >= n * (1.0 - 1e-12));
    }

    #[test]
    fn sampled_time_is_later(u in 3.0..60.0f64) {
        let d = DomainSpec::build(1.0, 0.25, 0.75, MODES).unwrap();
        let y0 = SpectralVec::padded(&[2.0, 0.5], MODES);
        let target = BallTarget::new(1.0).unwrap();
        let exit = d.exit_time(&y0, &target).unwrap();
        let m = min_norm::solve_jp_continuous(&d, &y0, &target, 0.6 * exit).unwrap().norm;
        let t = time_optimal::optimal_time_distributed(&d, &y0, &target, m).unwrap().optimal_time;
        let s = time_optimal::optimal_time_sampled_from(&d, &y0, &target, m, t / u, t, exit).unwrap();
        prop_assert!(s.optimal_time >= t - 1e-10);
        prop_assert!(s.optimal_time - t <= 2.0 * t / u + 1e-10);
        prop_assert!(s.control_norm <= m);
    }
}
