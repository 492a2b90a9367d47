//! Controllability Gramians of the continuous adjoint `φ(t;T,z) = e^{Δ(T−t)}z`
//! and of its block-averaged version `φ̄_δ`, plus the averaging operator on
//! generic time signals.
//!
//! Both Gramians are assembled in closed form, so that `zᵀWz` equals the
//! time integral of `‖χ_ω φ‖²` (resp. `‖χ_ω φ̄_δ‖²`) up to rounding.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::quadrature;
use crate::spectral::{DomainSpec, SpectralVec};

/// Sampling instants `δ, 2δ, …, kδ`; block `i` (1-based) is `((i−1)δ, iδ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    delta: f64,
    blocks: usize,
}

impl SamplingGrid {
    pub fn new(delta: f64, blocks: usize) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::config("sampling.delta", alloc::format!("must be positive, got {delta}")));
        }
        if blocks == 0 {
            return Err(Error::config("sampling.blocks", "need at least one block"));
        }
        Ok(SamplingGrid { delta, blocks })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn horizon(&self) -> f64 {
        self.blocks as f64 * self.delta
    }

    pub fn instants(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.blocks).map(move |i| i as f64 * self.delta)
    }

    /// 1-based index of the block containing `t ∈ (0, kδ]`.
    pub fn block_of(&self, t: f64) -> Option<usize> {
        if !(t > 0.0) || t > self.horizon() * (1.0 + 1e-15) {
            return None;
        }
        let i = libm::ceil(t / self.delta) as usize;
        Some(i.clamp(1, self.blocks))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GramianKind {
    Continuous,
    Sampled { delta: f64, blocks: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gramian {
    pub matrix: Mat,
    pub horizon: f64,
    pub kind: GramianKind,
}

impl Gramian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn quad_form(&self, z: &SpectralVec) -> f64 {
        self.matrix.quad_form(z.as_slice())
    }

    pub fn apply(&self, z: &SpectralVec) -> SpectralVec {
        SpectralVec::new(self.matrix.mul_vec(z.as_slice()))
    }
}

/// `W_ij = G_ij (1 − e^{−(λ_i+λ_j)T}) / (λ_i+λ_j)`.
pub fn continuous_gramian(d: &DomainSpec, horizon: f64) -> Result<Gramian> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(alloc::format!("Gramian horizon must be positive, got {horizon}")));
    }
    let lam = d.lambdas();
    let g = d.gram();
    let matrix = Mat::from_fn(d.modes(), |i, j| {
        let s = lam[i] + lam[j];
        g[(i, j)] * (-libm::expm1(-s * horizon)) / s
    });
    Ok(Gramian {
        matrix,
        horizon,
        kind: GramianKind::Continuous,
    })
}

/// Block-averaging factors `μ_j = (1 − e^{−λ_j δ}) / (λ_j δ)`.
pub fn averaging_factors(d: &DomainSpec, delta: f64) -> Vec<f64> {
    d.lambdas()
        .iter()
        .map(|l| {
            let x = l * delta;
            if x == 0.0 {
                1.0
            } else {
                -libm::expm1(-x) / x
            }
        })
        .collect()
}

/// Diagonal of `Ā_i = diag(μ_j e^{−λ_j (k−i) δ})`, the map from the terminal
/// datum `z` to the block-`i` mean of `φ(·; kδ, z)`.
pub fn block_average_operator(d: &DomainSpec, grid: &SamplingGrid, block: usize) -> Vec<f64> {
    let mu = averaging_factors(d, grid.delta());
    let lag = (grid.blocks() - block) as f64 * grid.delta();
    d.lambdas()
        .iter()
        .zip(&mu)
        .map(|(l, m)| m * libm::exp(-l * lag))
        .collect()
}

/// `W_δ = δ Σ_i Ā_i G Ā_i`, summed in closed form as a geometric series.
pub fn sampled_gramian(d: &DomainSpec, grid: &SamplingGrid) -> Gramian {
    let lam = d.lambdas();
    let g = d.gram();
    let delta = grid.delta();
    let k = grid.blocks() as f64;
    let mu = averaging_factors(d, delta);
    let matrix = Mat::from_fn(d.modes(), |i, j| {
        let s = lam[i] + lam[j];
        let series = if s * delta == 0.0 {
            k
        } else {
            libm::expm1(-s * k * delta) / libm::expm1(-s * delta)
        };
        delta * g[(i, j)] * mu[i] * mu[j] * series
    });
    Gramian {
        matrix,
        horizon: grid.horizon(),
        kind: GramianKind::Sampled {
            delta,
            blocks: grid.blocks(),
        },
    }
}

/// A function of time with values in `L²(Ω)`, known at quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<SpectralVec>,
}

impl TimeSignal {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, values: Vec<SpectralVec>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() != values.len() {
            return Err(Error::domain("time signal nodes, weights and values differ in length"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("time signal nodes must be strictly increasing"));
        }
        if let Some(first) = values.first() {
            if values.iter().any(|v| v.len() != first.len()) {
                return Err(Error::domain("time signal values have mixed dimensions"));
            }
        }
        Ok(TimeSignal {
            nodes,
            weights,
            values,
        })
    }

    /// Samples `f` at `nodes_per_block` Gauss-Legendre nodes in every block.
    pub fn sample(
        grid: &SamplingGrid,
        nodes_per_block: usize,
        mut f: impl FnMut(f64) -> SpectralVec,
    ) -> Self {
        let (nodes, weights) =
            quadrature::composite(0.0, grid.horizon(), grid.blocks(), nodes_per_block);
        let values = nodes.iter().map(|t| f(*t)).collect();
        TimeSignal {
            nodes,
            weights,
            values,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[SpectralVec] {
        &self.values
    }

    /// `∫ ⟨f(t), g(t)⟩ dt` by the shared quadrature.
    pub fn inner(&self, other: &TimeSignal) -> Result<f64> {
        if self.nodes != other.nodes || self.weights != other.weights {
            return Err(Error::domain("time signals live on different quadrature grids"));
        }
        Ok(self
            .weights
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * a.dot(b))
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sq())
            .sum()
    }

    pub fn sub(&self, other: &TimeSignal) -> Result<TimeSignal> {
        if self.nodes != other.nodes {
            return Err(Error::domain("time signals live on different quadrature grids"));
        }
        Ok(TimeSignal {
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// Replaces `f` on each sampling block by its block mean.
pub fn block_average(f: &TimeSignal, grid: &SamplingGrid) -> Result<TimeSignal> {
    let horizon = grid.horizon();
    let total: f64 = f.weights.iter().sum();
    if (total - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(Error::domain(alloc::format!(
            "signal covers length {total}, grid horizon is {horizon}"
        )));
    }
    let dim = f.values.first().map_or(0, |v| v.len());
    let mut sums = alloc::vec![alloc::vec![0.0; dim]; grid.blocks()];
    let mut mass = alloc::vec![0.0; grid.blocks()];
    let mut owner = Vec::with_capacity(f.nodes.len());
    for ((t, w), v) in f.nodes.iter().zip(&f.weights).zip(&f.values) {
        let b = grid.block_of(*t).ok_or_else(|| {
            Error::domain(alloc::format!("node {t} outside (0, {horizon}]"))
        })? - 1;
        owner.push(b);
        mass[b] += w;
        for (s, c) in sums[b].iter_mut().zip(v.iter()) {
            *s += w * c;
        }
    }
    for (b, m) in mass.iter().enumerate() {
        if (m - grid.delta()).abs() > 1e-10 * grid.delta() {
            return Err(Error::domain(alloc::format!(
                "block {} carries quadrature mass {m}, expected δ = {}",
                b + 1,
                grid.delta()
            )));
        }
    }
    let means: Vec<SpectralVec> = sums
        .into_iter()
        .map(|s| SpectralVec::new(s).scale(1.0 / grid.delta()))
        .collect();
    Ok(TimeSignal {
        nodes: f.nodes.clone(),
        weights: f.weights.clone(),
        values: owner.into_iter().map(|b| means[b].clone()).collect(),
    })
}

/// `(‖f‖², ‖f̄_δ‖², ‖f − f̄_δ‖²)`; the first equals the sum of the others.
pub fn pythagoras_check(f: &TimeSignal, grid: &SamplingGrid) -> Result<(f64, f64, f64)> {
    let avg = block_average(f, grid)?;
    let rest = f.sub(&avg)?;
    Ok((f.norm_sq(), avg.norm_sq(), rest.norm_sq()))
}

/// `‖φ(0;T,z)‖ / (‖z‖^{1/2} ‖(1/S)∫₀^S φ(t;T,z) dt‖_ω^{1/2})`.
pub fn interpolation_ratio(d: &DomainSpec, horizon: f64, window: f64, z: &SpectralVec) -> Result<f64> {
    if !(window > 0.0 && window < horizon) {
        return Err(Error::domain(alloc::format!(
            "need 0 < S < T, got S = {window}, T = {horizon}"
        )));
    }
    d.check_len(z, "z")?;
    let at_zero = d.semigroup_apply(horizon, z)?;
    let mean = SpectralVec::new(
        d.lambdas()
            .iter()
            .zip(z.iter())
            .map(|(l, zj)| {
                // (1/S)∫₀^S e^{−λ(T−t)} dt = e^{−λ(T−S)} (1 − e^{−λS}) / (λS)
                zj * libm::exp(-l * (horizon - window)) * (-libm::expm1(-l * window)) / (l * window)
            })
            .collect(),
    );
    let denom = libm::sqrt(z.norm()) * libm::sqrt(mean.omega_norm(d));
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Singular(alloc::format!(
            "interpolation ratio denominator is {denom}"
        )));
    }
    Ok(at_zero.norm() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn grid_blocks() {
        let g = SamplingGrid::new(0.25, 4).unwrap();
        assert_eq!(g.block_of(0.25), Some(1));
        assert_eq!(g.block_of(0.2500001), Some(2));
        assert_eq!(g.block_of(1.0), Some(4));
        assert_eq!(g.block_of(0.0), None);
        assert!(SamplingGrid::new(0.0, 3).is_err());
        assert!(SamplingGrid::new(0.1, 0).is_err());
    }

    #[test]
    fn full_control_gramian_is_diagonal() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 5).unwrap();
        let w = continuous_gramian(&d, 0.3).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i == j {
                    let l = d.lambdas()[i];
                    let expect = (1.0 - libm::exp(-2.0 * l * 0.3)) / (2.0 * l);
                    assert!((w.matrix[(i, i)] - expect).abs() < 1e-16);
                } else {
                    assert_eq!(w.matrix[(i, j)], 0.0);
                }
            }
        }
        let far = continuous_gramian(&d, 1e3).unwrap();
        assert!((far.matrix[(0, 0)] - 1.0 / (2.0 * PI * PI)).abs() < 1e-16);
        assert!(continuous_gramian(&d, 0.0).is_err());
    }

    #[test]
    fn scalar_sampled_gramian() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 1).unwrap();
        let delta = 0.05;
        let w = sampled_gramian(&d, &SamplingGrid::new(delta, 1).unwrap());
        let l = PI * PI;
        let mu = (1.0 - libm::exp(-l * delta)) / (l * delta);
        assert!((w.matrix[(0, 0)] - delta * mu * mu).abs() < 1e-17);
    }

    #[test]
    fn averaging_factor_small_lambda_limit() {
        let d = DomainSpec::build(1e4, 0.0, 1e4, 1).unwrap();
        let mu = averaging_factors(&d, 1e-6);
        assert!((mu[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_gramian_matches_block_sum() {
        let d = DomainSpec::build(1.0, 0.2, 0.7, 6).unwrap();
        let grid = SamplingGrid::new(0.01, 7).unwrap();
        let w = sampled_gramian(&d, &grid);
        let mut direct = Mat::zeros(6);
        for i in 1..=7 {
            let a = block_average_operator(&d, &grid, i);
            for p in 0..6 {
                for q in 0..6 {
                    direct[(p, q)] += 0.01 * a[p] * d.gram()[(p, q)] * a[q];
                }
            }
        }
        assert!(w.matrix.sub(&direct).max_abs() < 1e-16);
    }

    #[test]
    fn constant_signal_is_fixed_point() {
        let grid = SamplingGrid::new(0.1, 3).unwrap();
        let c = SpectralVec::new(vec![1.5, -2.0]);
        let f = TimeSignal::sample(&grid, 8, |_| c.clone());
        let avg = block_average(&f, &grid).unwrap();
        for v in avg.values() {
            assert!((v - &c).norm() < 1e-14);
        }
        let (all, mean, rest) = pythagoras_check(&f, &grid).unwrap();
        assert!((all - c.norm_sq() * 0.3).abs() < 1e-14);
        assert!((mean - all).abs() < 1e-14);
        assert!(rest < 1e-28);
    }

    #[test]
    fn linear_signal_single_block() {
        let delta = 0.3;
        let grid = SamplingGrid::new(delta, 1).unwrap();
        let f = TimeSignal::sample(&grid, 8, |t| SpectralVec::new(vec![t]));
        let avg = block_average(&f, &grid).unwrap();
        for v in avg.values() {
            assert!((v[0] - delta / 2.0).abs() < 1e-15);
        }
        let (all, mean, rest) = pythagoras_check(&f, &grid).unwrap();
        let d3 = delta * delta * delta;
        assert!((all - d3 / 3.0).abs() < 1e-15);
        assert!((mean - d3 / 4.0).abs() < 1e-15);
        assert!((rest - d3 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn horizon_mismatch_rejected() {
        let grid = SamplingGrid::new(0.1, 3).unwrap();
        let f = TimeSignal::sample(&grid, 4, |t| SpectralVec::new(vec![t]));
        let other = SamplingGrid::new(0.1, 4).unwrap();
        assert!(block_average(&f, &other).is_err());
    }

    #[test]
    fn interpolation_ratio_single_mode() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 3).unwrap();
        let z = SpectralVec::mode(3, 1, 1.0);
        let (t, s) = (0.2, 0.05);
        let l = PI * PI;
        let phi0 = libm::exp(-l * t);
        let mean = (libm::exp(-l * (t - s)) - libm::exp(-l * t)) / (l * s);
        let expect = phi0 / libm::sqrt(mean);
        let got = interpolation_ratio(&d, t, s, &z).unwrap();
        assert!((got - expect).abs() < 1e-14 * expect);
        let scaled = interpolation_ratio(&d, t, s, &z.scale(-7.5)).unwrap();
        assert!((scaled - got).abs() < 1e-13 * got);
        assert!(interpolation_ratio(&d, t, t, &z).is_err());
        assert!(matches!(
            interpolation_ratio(&d, t, s, &SpectralVec::zeros(3)),
            Err(Error::Singular(_))
        ));
    }
}
