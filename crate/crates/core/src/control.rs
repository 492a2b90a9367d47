//! Control representations.
//!
//! A control is stored through its generator `g(t)` in the retained sine
//! span; the control itself is `χ_ω g(t)`. With this convention
//! `‖u‖² = ∫ gᵀGg dt` and the forcing seen by mode `i` is `(G g)_i`, both
//! exact for the truncated system.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gramians::{self, SamplingGrid};
use crate::spectral::{DomainSpec, SpectralVec};

/// `v(t) = χ_ω φ(t; T, z)` on `(0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointControl {
    horizon: f64,
    generator: SpectralVec,
    domain: DomainSpec,
}

impl AdjointControl {
    pub fn new(domain: &DomainSpec, horizon: f64, generator: SpectralVec) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(alloc::format!("control horizon must be positive, got {horizon}")));
        }
        domain.check_len(&generator, "adjoint generator")?;
        if generator.norm() == 0.0 || !generator.is_finite() {
            return Err(Error::domain("adjoint generator must be finite and nonzero"));
        }
        Ok(AdjointControl {
            horizon,
            generator,
            domain: domain.clone(),
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// The terminal datum `z` of the adjoint.
    pub fn generator(&self) -> &SpectralVec {
        &self.generator
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    /// `φ(t; T, z) = e^{Δ(T−t)} z`, zero outside `(0, T]`.
    pub fn generator_at(&self, t: f64) -> SpectralVec {
        if !(t > 0.0 && t <= self.horizon) {
            return SpectralVec::zeros(self.generator.len());
        }
        SpectralVec::new(
            self.domain
                .lambdas()
                .iter()
                .zip(self.generator.iter())
                .map(|(l, z)| z * libm::exp(-l * (self.horizon - t)))
                .collect(),
        )
    }

    pub fn norm_sq(&self) -> f64 {
        self.adjoint_energy(0.0, self.horizon)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    /// `y(T; 0, v) = W z`.
    pub fn final_state_contribution(&self) -> SpectralVec {
        let lam = self.domain.lambdas();
        let g = self.domain.gram();
        let z = self.generator.as_slice();
        let t = self.horizon;
        SpectralVec::new(
            (0..lam.len())
                .map(|i| {
                    (0..lam.len())
                        .map(|j| {
                            let s = lam[i] + lam[j];
                            g[(i, j)] * (-libm::expm1(-s * t)) / s * z[j]
                        })
                        .sum()
                })
                .collect(),
        )
    }

    /// `∫_{t0}^{t1} φᵀGφ dt` for `0 ≤ t0 ≤ t1 ≤ T`.
    fn adjoint_energy(&self, t0: f64, t1: f64) -> f64 {
        let lam = self.domain.lambdas();
        let g = self.domain.gram();
        let z = self.generator.as_slice();
        let mut acc = 0.0;
        for i in 0..lam.len() {
            if z[i] == 0.0 {
                continue;
            }
            for j in 0..lam.len() {
                let s = lam[i] + lam[j];
                let kernel = libm::exp(-s * (self.horizon - t1)) * (-libm::expm1(-s * (t1 - t0))) / s;
                acc += g[(i, j)] * z[i] * z[j] * kernel;
            }
        }
        acc
    }

    /// `∫_{t0}^{t1} φ dt` componentwise.
    fn adjoint_integral(&self, t0: f64, t1: f64) -> SpectralVec {
        SpectralVec::new(
            self.domain
                .lambdas()
                .iter()
                .zip(self.generator.iter())
                .map(|(l, z)| z * libm::exp(-l * (self.horizon - t1)) * (-libm::expm1(-l * (t1 - t0))) / l)
                .collect(),
        )
    }
}

/// Piecewise constant control `Σ_i χ_{((i−1)δ, iδ]} χ_ω g_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledControl {
    grid: SamplingGrid,
    generators: Vec<SpectralVec>,
    domain: DomainSpec,
}

impl SampledControl {
    pub fn new(domain: &DomainSpec, grid: SamplingGrid, generators: Vec<SpectralVec>) -> Result<Self> {
        if generators.len() != grid.blocks() {
            return Err(Error::domain(alloc::format!(
                "{} block generators for a grid of {} blocks",
                generators.len(),
                grid.blocks()
            )));
        }
        for g in &generators {
            domain.check_len(g, "block generator")?;
            if !g.is_finite() {
                return Err(Error::domain("block generator has non-finite entries"));
            }
        }
        Ok(SampledControl {
            grid,
            generators,
            domain: domain.clone(),
        })
    }

    pub fn zero(domain: &DomainSpec, grid: SamplingGrid) -> Self {
        SampledControl {
            grid,
            generators: alloc::vec![SpectralVec::zeros(domain.modes()); grid.blocks()],
            domain: domain.clone(),
        }
    }

    /// Block means of the adjoint: `g_i = Ā_i z`, i.e. `χ_ω φ̄_δ(·; kδ, z)`.
    pub fn from_averaged_adjoint(domain: &DomainSpec, grid: SamplingGrid, z: &SpectralVec) -> Result<Self> {
        domain.check_len(z, "adjoint datum")?;
        let generators = (1..=grid.blocks())
            .map(|i| {
                let a = gramians::block_average_operator(domain, &grid, i);
                SpectralVec::new(a.iter().zip(z.iter()).map(|(ai, zi)| ai * zi).collect())
            })
            .collect();
        Self::new(domain, grid, generators)
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn generators(&self) -> &[SpectralVec] {
        &self.generators
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    /// Sine coefficients of `χ_ω g_i` on each block (truncated to `J` modes).
    pub fn masked_blocks(&self) -> Vec<SpectralVec> {
        self.generators
            .iter()
            .map(|g| SpectralVec::new(self.domain.gram().mul_vec(g.as_slice())))
            .collect()
    }

    /// `δ Σ_i g_iᵀ G h_i`.
    pub fn inner(&self, other: &SampledControl) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::domain("sampled controls live on different grids"));
        }
        let g = self.domain.gram();
        Ok(self.grid.delta()
            * self
                .generators
                .iter()
                .zip(&other.generators)
                .map(|(a, b)| g.bilinear(a.as_slice(), b.as_slice()))
                .sum::<f64>())
    }

    pub fn norm_sq(&self) -> f64 {
        let g = self.domain.gram();
        self.grid.delta()
            * self
                .generators
                .iter()
                .map(|a| g.quad_form(a.as_slice()))
                .sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq().max(0.0))
    }

    /// `a·self + b·other` on the same grid.
    pub fn combine(&self, a: f64, other: &SampledControl, b: f64) -> Result<SampledControl> {
        if self.grid != other.grid {
            return Err(Error::domain("sampled controls live on different grids"));
        }
        Ok(SampledControl {
            grid: self.grid,
            generators: self
                .generators
                .iter()
                .zip(&other.generators)
                .map(|(x, y)| x.scale(a).axpy(b, y))
                .collect(),
            domain: self.domain.clone(),
        })
    }

    /// `y(kδ; 0, u) = δ Σ_i Ā_i G g_i`.
    pub fn final_state_contribution(&self) -> SpectralVec {
        let n = self.domain.modes();
        let mut out = alloc::vec![0.0; n];
        for (i, g) in self.generators.iter().enumerate() {
            let a = gramians::block_average_operator(&self.domain, &self.grid, i + 1);
            let forced = self.domain.gram().mul_vec(g.as_slice());
            for ((o, ai), f) in out.iter_mut().zip(&a).zip(&forced) {
                *o += self.grid.delta() * ai * f;
            }
        }
        SpectralVec::new(out)
    }

    /// Generator value at `t`, zero outside `(0, kδ]`.
    pub fn generator_at(&self, t: f64) -> SpectralVec {
        match self.grid.block_of(t) {
            Some(b) => self.generators[b - 1].clone(),
            None => SpectralVec::zeros(self.domain.modes()),
        }
    }

    /// `‖self − v‖_{L²(0, t_end; L²(Ω))}` with both controls zero-extended,
    /// integrated in closed form block by block. Requires `t_end ≤ T_v`.
    pub fn distance_to_adjoint(&self, v: &AdjointControl, t_end: f64) -> Result<f64> {
        if !(t_end > 0.0) || t_end > v.horizon() {
            return Err(Error::domain(alloc::format!(
                "distance window (0, {t_end}) must lie inside (0, {}]",
                v.horizon()
            )));
        }
        if v.domain() != &self.domain {
            return Err(Error::domain("controls built on different domains"));
        }
        let g = self.domain.gram();
        let delta = self.grid.delta();
        let mut acc = 0.0;
        let mut covered = 0.0;
        for (i, gi) in self.generators.iter().enumerate() {
            let t0 = i as f64 * delta;
            if t0 >= t_end {
                break;
            }
            let t1 = ((i + 1) as f64 * delta).min(t_end);
            let len = t1 - t0;
            let h = v.adjoint_integral(t0, t1);
            acc += len * g.quad_form(gi.as_slice()) - 2.0 * g.bilinear(gi.as_slice(), h.as_slice())
                + v.adjoint_energy(t0, t1);
            covered = t1;
        }
        if covered < t_end {
            acc += v.adjoint_energy(covered, t_end);
        }
        Ok(libm::sqrt(acc.max(0.0)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    /// No control is needed up to `horizon`.
    Zero { horizon: f64 },
    Distributed(AdjointControl),
    Sampled(SampledControl),
}

impl Control {
    pub fn horizon(&self) -> f64 {
        match self {
            Control::Zero { horizon } => *horizon,
            Control::Distributed(c) => c.horizon(),
            Control::Sampled(c) => c.grid().horizon(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Control::Zero { .. } => 0.0,
            Control::Distributed(c) => c.norm(),
            Control::Sampled(c) => c.norm(),
        }
    }

    pub fn as_sampled(&self) -> Option<&SampledControl> {
        match self {
            Control::Sampled(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_distributed(&self) -> Option<&AdjointControl> {
        match self {
            Control::Distributed(c) => Some(c),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramians::{continuous_gramian, sampled_gramian};
    use crate::quadrature;
    use alloc::vec;

    fn domain() -> DomainSpec {
        DomainSpec::build(1.0, 0.25, 0.75, 8).unwrap()
    }

    fn datum() -> SpectralVec {
        SpectralVec::new(vec![0.7, -1.2, 0.3, 0.05, -0.4, 0.2, 0.1, -0.02])
    }

    #[test]
    fn adjoint_norm_is_gramian_form() {
        let d = domain();
        let v = AdjointControl::new(&d, 0.04, datum()).unwrap();
        let w = continuous_gramian(&d, 0.04).unwrap();
        let n2 = w.quad_form(&datum());
        assert!((v.norm_sq() - n2).abs() < 1e-15 * n2.max(1.0));
        let fs = v.final_state_contribution();
        assert!((&fs - &w.apply(&datum())).norm() < 1e-15);
    }

    #[test]
    fn averaged_adjoint_matches_sampled_gramian() {
        let d = domain();
        let grid = SamplingGrid::new(0.005, 9).unwrap();
        let u = SampledControl::from_averaged_adjoint(&d, grid, &datum()).unwrap();
        let w = sampled_gramian(&d, &grid);
        let n2 = w.quad_form(&datum());
        assert!((u.norm_sq() - n2).abs() < 1e-12 * n2);
        assert!((&u.final_state_contribution() - &w.apply(&datum())).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        let d = domain();
        let grid = SamplingGrid::new(0.01, 3).unwrap();
        assert!(SampledControl::new(&d, grid, vec![datum(); 2]).is_err());
        assert!(AdjointControl::new(&d, 0.1, SpectralVec::zeros(8)).is_err());
        assert!(AdjointControl::new(&d, 0.1, SpectralVec::zeros(3)).is_err());
    }

    #[test]
    fn distance_matches_quadrature() {
        let d = domain();
        let horizon = 0.043;
        let v = AdjointControl::new(&d, horizon, datum()).unwrap();
        let grid = SamplingGrid::new(0.01, 5).unwrap();
        let u = SampledControl::from_averaged_adjoint(&d, grid, &datum().scale(1.3)).unwrap();
        for t_end in [0.043, 0.03, 0.025] {
            let exact = u.distance_to_adjoint(&v, t_end).unwrap();
            // Panels aligned with the block edges so the integrand is smooth per panel.
            let mut edges: Vec<f64> = (0..=5).map(|i| i as f64 * 0.01).filter(|t| *t < t_end).collect();
            edges.push(t_end);
            let mut quad = 0.0;
            for w in edges.windows(2) {
                quad += quadrature::integrate(w[0], w[1], 4, 8, |t| {
                    let diff = &u.generator_at(t) - &v.generator_at(t);
                    d.gram().quad_form(diff.as_slice())
                });
            }
            let quad = libm::sqrt(quad);
            assert!((exact - quad).abs() < 1e-10 * quad, "{t_end}: {exact} vs {quad}");
        }
    }

    #[test]
    fn distance_to_itself_through_fine_sampling_vanishes() {
        let d = domain();
        let v = AdjointControl::new(&d, 0.04, datum()).unwrap();
        let coarse = SampledControl::from_averaged_adjoint(&d, SamplingGrid::new(0.004, 10).unwrap(), &datum()).unwrap();
        let fine = SampledControl::from_averaged_adjoint(&d, SamplingGrid::new(0.0005, 80).unwrap(), &datum()).unwrap();
        let e1 = coarse.distance_to_adjoint(&v, 0.04).unwrap();
        let e2 = fine.distance_to_adjoint(&v, 0.04).unwrap();
        assert!(e2 < e1 / 6.0, "{e1} {e2}");
    }

    #[test]
    fn combine_is_linear() {
        let d = domain();
        let grid = SamplingGrid::new(0.01, 3).unwrap();
        let a = SampledControl::from_averaged_adjoint(&d, grid, &datum()).unwrap();
        let b = SampledControl::new(&d, grid, vec![SpectralVec::mode(8, 1, 1.0), SpectralVec::zeros(8), SpectralVec::zeros(8)]).unwrap();
        let c = a.combine(2.0, &b, -0.5).unwrap();
        let expect = 4.0 * a.norm_sq() - 2.0 * a.inner(&b).unwrap() + 0.25 * b.norm_sq();
        assert!((c.norm_sq() - expect).abs() < 1e-14);
    }
}
