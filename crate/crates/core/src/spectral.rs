//! Dirichlet eigenbasis on `(0, L)`, the actuator Gram matrix of `χ_ω`,
//! the heat semigroup and the free-dynamics exit time.
//!
//! Eigenfunctions are `e_j(x) = √(2/L) sin(jπx/L)` with eigenvalues
//! `λ_j = (jπ/L)²`, `j = 1..=J`. An element of `L²(0, L)` is represented by
//! its first `J` coefficients.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};
use crate::roots;

/// Coefficients of an `L²(Ω)` element in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVec(Vec<f64>);

impl SpectralVec {
    pub fn new(coeffs: Vec<f64>) -> Self {
        SpectralVec(coeffs)
    }

    pub fn zeros(modes: usize) -> Self {
        SpectralVec(vec![0.0; modes])
    }

    /// `c · e_{mode}` with a 1-based mode index.
    pub fn mode(modes: usize, mode: usize, c: f64) -> Self {
        let mut v = vec![0.0; modes];
        v[mode - 1] = c;
        SpectralVec(v)
    }

    /// Copies `prefix` and pads with zeros up to `modes` coefficients.
    pub fn padded(prefix: &[f64], modes: usize) -> Self {
        let mut v = vec![0.0; modes];
        for (dst, src) in v.iter_mut().zip(prefix) {
            *dst = *src;
        }
        SpectralVec(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &SpectralVec) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// `L²(Ω)` norm (Parseval).
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn scale(&self, c: f64) -> SpectralVec {
        SpectralVec(self.0.iter().map(|v| c * v).collect())
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &SpectralVec) -> SpectralVec {
        SpectralVec(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `‖·‖_ω` for the function with these coefficients: `√(vᵀ G v)`.
    pub fn omega_norm(&self, d: &DomainSpec) -> f64 {
        libm::sqrt(d.gram().quad_form(&self.0).max(0.0))
    }
}

impl Index<usize> for SpectralVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for SpectralVec {
    fn from(v: Vec<f64>) -> Self {
        SpectralVec(v)
    }
}

impl Add for &SpectralVec {
    type Output = SpectralVec;
    fn add(self, rhs: &SpectralVec) -> SpectralVec {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralVec {
    type Output = SpectralVec;
    fn sub(self, rhs: &SpectralVec) -> SpectralVec {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<&SpectralVec> for f64 {
    type Output = SpectralVec;
    fn mul(self, rhs: &SpectralVec) -> SpectralVec {
        rhs.scale(self)
    }
}

impl Neg for &SpectralVec {
    type Output = SpectralVec;
    fn neg(self) -> SpectralVec {
        self.scale(-1.0)
    }
}

/// The closed ball `B_r(0)` in `L²(Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallTarget {
    radius: f64,
}

impl BallTarget {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::config("radius", alloc::format!("must be positive, got {radius}")));
        }
        Ok(BallTarget { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, v: &SpectralVec) -> bool {
        v.norm() <= self.radius
    }
}

/// Spatial discretization: interval, control window and truncated eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    length: f64,
    omega: (f64, f64),
    lambdas: Vec<f64>,
    gram: Mat,
}

impl DomainSpec {
    /// Interval `(0, L)`, control window `ω = (a, b)` and `J` modes. The Gram
    /// matrix `G_ij = ∫_ω e_i e_j dx` is evaluated from the antiderivatives of
    /// sine products.
    pub fn build(length: f64, a: f64, b: f64, modes: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::config("domain.length", alloc::format!("must be positive, got {length}")));
        }
        if modes == 0 {
            return Err(Error::config("domain.modes", "need at least one mode"));
        }
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b > length || a >= b {
            return Err(Error::config(
                "domain.omega",
                alloc::format!("need 0 ≤ a < b ≤ L, got a = {a}, b = {b}, L = {length}"),
            ));
        }
        let lambdas = (1..=modes)
            .map(|j| {
                let k = j as f64 * PI / length;
                k * k
            })
            .collect();
        let gram = if a == 0.0 && b == length {
            Mat::identity(modes)
        } else {
            sine_gram(length, a, b, modes)
        };
        Ok(DomainSpec {
            length,
            omega: (a, b),
            lambdas,
            gram,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn omega(&self) -> (f64, f64) {
        self.omega
    }

    pub fn modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda1(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn full_control(&self) -> bool {
        self.omega == (0.0, self.length)
    }

    /// Value of the function with coefficients `v` at `x`.
    pub fn evaluate(&self, v: &SpectralVec, x: f64) -> f64 {
        let c = libm::sqrt(2.0 / self.length);
        v.iter()
            .enumerate()
            .map(|(j, vj)| vj * c * sin_pi((j + 1) as f64 * x / self.length))
            .sum()
    }

    pub(crate) fn check_len(&self, v: &SpectralVec, what: &str) -> Result<()> {
        if v.len() != self.modes() {
            return Err(Error::domain(alloc::format!(
                "{what} has {} coefficients, domain has {} modes",
                v.len(),
                self.modes()
            )));
        }
        Ok(())
    }

    /// `e^{Δt} v`.
    pub fn semigroup_apply(&self, t: f64, v: &SpectralVec) -> Result<SpectralVec> {
        if !(t >= 0.0) {
            return Err(Error::domain(alloc::format!("semigroup time must be ≥ 0, got {t}")));
        }
        self.check_len(v, "state")?;
        Ok(SpectralVec(
            self.lambdas
                .iter()
                .zip(v.iter())
                .map(|(l, c)| c * libm::exp(-l * t))
                .collect(),
        ))
    }

    /// Exit time `T* = sup{t > 0 : ‖e^{Δt} y0‖ > r}`.
    pub fn exit_time(&self, y0: &SpectralVec, target: &BallTarget) -> Result<f64> {
        self.check_len(y0, "y0")?;
        let r = target.radius();
        let norm = y0.norm();
        if norm <= r {
            return Err(Error::AlreadyInTarget { norm, radius: r });
        }
        let excess = |t: f64| -> f64 {
            let s: f64 = self
                .lambdas
                .iter()
                .zip(y0.iter())
                .map(|(l, c)| c * c * libm::exp(-2.0 * l * t))
                .sum();
            s - r * r
        };
        let mut hi = 1.0 / self.lambda1();
        let mut guard = 0;
        while excess(hi) > 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(Error::NonConvergence {
                    what: "exit-time bracket expansion",
                    iterations: guard,
                    residual: excess(hi),
                });
            }
        }
        let (lo, hi) = roots::bisect(|t| Ok(excess(t)), 0.0, hi, 1e-15)?;
        Ok(0.5 * (lo + hi))
    }
}

/// `sin(π t)` with the argument reduced modulo 2 so that integer `t` gives
/// exactly zero.
pub(crate) fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * libm::floor(t / 2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    libm::sin(PI * r)
}

fn sine_gram(length: f64, a: f64, b: f64, modes: usize) -> Mat {
    // Antiderivatives of (2/L) sin(iπx/L) sin(jπx/L).
    let prim = |i: usize, j: usize, x: f64| -> f64 {
        let u = x / length;
        if i == j {
            let m = (2 * i) as f64;
            (2.0 / length) * (0.5 * x - length * sin_pi(m * u) / (2.0 * m * PI))
        } else {
            let dm = i as f64 - j as f64;
            let sm = (i + j) as f64;
            sin_pi(dm * u) / (dm * PI) - sin_pi(sm * u) / (sm * PI)
        }
    };
    let mut g = Mat::zeros(modes);
    for i in 1..=modes {
        for j in i..=modes {
            let v = prim(i, j, b) - prim(i, j, a);
            g[(i - 1, j - 1)] = v;
            g[(j - 1, i - 1)] = v;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    #[test]
    fn full_window_gives_identity() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 4).unwrap();
        assert_eq!(d.gram(), &Mat::identity(4));
    }

    #[test]
    fn half_window_entries() {
        let d = DomainSpec::build(1.0, 0.0, 0.5, 2).unwrap();
        assert!((d.gram()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((d.gram()[(0, 1)] - 4.0 / (3.0 * PI)).abs() < 1e-15);
        assert!((d.gram()[(0, 1)] - 0.42441).abs() < 1e-5);
    }

    #[test]
    fn gram_matches_quadrature() {
        let (l, a, b) = (2.0, 0.3, 1.1);
        let d = DomainSpec::build(l, a, b, 6).unwrap();
        for i in 1..=6 {
            for j in 1..=6 {
                let q = quadrature::integrate(a, b, 16, 12, |x| {
                    (2.0 / l) * libm::sin(i as f64 * PI * x / l) * libm::sin(j as f64 * PI * x / l)
                });
                assert!((q - d.gram()[(i - 1, j - 1)]).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn gram_is_contractive_psd() {
        let d = DomainSpec::build(1.0, 0.25, 0.75, 32).unwrap();
        let e = d.gram().sym_eigen();
        assert!(e.min() >= -1e-12);
        assert!(e.max() <= 1.0 + 1e-12);
        assert_eq!(d.gram().asymmetry(), 0.0);
    }

    #[test]
    fn invalid_windows_rejected() {
        for (a, b) in [(0.5, 0.5), (0.6, 0.2), (0.0, 1.5), (-0.1, 0.5)] {
            let err = DomainSpec::build(1.0, a, b, 4).unwrap_err();
            assert!(matches!(err, Error::Config { field: "domain.omega", .. }), "{a} {b}");
        }
        assert!(DomainSpec::build(1.0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn eigenvalues_ascending() {
        let d = DomainSpec::build(2.0, 0.0, 1.0, 5).unwrap();
        assert!((d.lambda1() - PI * PI / 4.0).abs() < 1e-15);
        assert!(d.lambdas().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn semigroup_examples() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 2).unwrap();
        let v = SpectralVec::new(vec![2.0, 0.5]);
        assert_eq!(d.semigroup_apply(0.0, &v).unwrap(), v);
        let w = d.semigroup_apply(0.1, &v).unwrap();
        assert!((w[0] - 2.0 * libm::exp(-0.1 * PI * PI)).abs() < 1e-15);
        assert!((w[1] - 0.5 * libm::exp(-0.4 * PI * PI)).abs() < 1e-15);
        assert!(d.semigroup_apply(-1e-3, &v).is_err());
    }

    #[test]
    fn exit_time_single_mode() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 3).unwrap();
        let y0 = SpectralVec::mode(3, 1, 2.0);
        let t = d.exit_time(&y0, &BallTarget::new(1.0).unwrap()).unwrap();
        assert!((t - libm::log(2.0) / (PI * PI)).abs() < 1e-14);
        assert!((t - 0.070231).abs() < 1e-6);
    }

    #[test]
    fn exit_time_near_boundary_goes_to_zero() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 1).unwrap();
        let target = BallTarget::new(1.0).unwrap();
        let t = d.exit_time(&SpectralVec::mode(1, 1, 1.0 + 1e-9), &target).unwrap();
        assert!(t > 0.0 && t < 1e-9);
        let err = d.exit_time(&SpectralVec::mode(1, 1, 1.0), &target).unwrap_err();
        assert!(matches!(err, Error::AlreadyInTarget { .. }));
    }

    #[test]
    fn exit_time_two_modes() {
        let d = DomainSpec::build(1.0, 0.0, 1.0, 2).unwrap();
        let y0 = SpectralVec::new(vec![2.0, 0.5]);
        let t = d.exit_time(&y0, &BallTarget::new(1.0).unwrap()).unwrap();
        // Independent root of 4e^{-2π²t} + 0.25e^{-8π²t} = 1 by plain bisection.
        let f = |t: f64| 4.0 * libm::exp(-2.0 * PI * PI * t) + 0.25 * libm::exp(-8.0 * PI * PI * t) - 1.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if f(m) > 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        assert!((t - lo).abs() < 1e-12);
        assert!((t - 0.070_279_797_768_699_79).abs() < 1e-12);
    }
}
