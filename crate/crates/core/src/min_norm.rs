//! Minimal-norm controls through the dual functional
//! `J(z) = ½ zᵀWz + qᵀz + r‖z‖`, with `q` the free evolution of `y₀` to the
//! horizon and `W` the continuous or sampled Gramian.
//!
//! At the unique minimizer `z*`:
//! `W z* + q + r z*/‖z*‖ = 0`, `N = √(z*ᵀWz*)`, `J(z*) = −N²/2`, and the
//! controlled final state `q + W z*` equals `−r z*/‖z*‖`.

use alloc::vec::Vec;

use crate::control::{AdjointControl, Control, SampledControl};
use crate::error::{Error, Result};
use crate::gramians::{self, Gramian, SamplingGrid};
use crate::linalg::{self, Mat, SymEigen};
use crate::roots;
use crate::spectral::{BallTarget, DomainSpec, SpectralVec};

const SECULAR_MAX_ITER: usize = 300;
const PROX_MAX_ITER: usize = 500_000;

#[derive(Debug, Clone, PartialEq)]
pub struct NormSolution {
    pub minimizer: SpectralVec,
    /// `V = J(z*)`.
    pub value: f64,
    /// `N = √(z*ᵀWz*)`, the norm of the minimal-norm control.
    pub norm: f64,
    /// `‖Wz* + q + r z*/‖z*‖‖`.
    pub residual: f64,
    pub final_state: SpectralVec,
    pub control: Control,
}

/// Residual bound accepted from the secular solve.
pub fn residual_tolerance(q_norm: f64) -> f64 {
    1e-10 * q_norm.max(1.0)
}

/// Stationarity residual `‖Wz + q + r z/‖z‖‖`.
pub fn euler_lagrange_residual(w: &Mat, q: &[f64], r: f64, z: &[f64]) -> f64 {
    let wz = w.mul_vec(z);
    let nz = linalg::norm(z);
    let scale = if nz > 0.0 { r / nz } else { 0.0 };
    libm::sqrt(
        wz.iter()
            .zip(q)
            .zip(z)
            .map(|((a, b), c)| {
                let v = a + b + scale * c;
                v * v
            })
            .sum(),
    )
}

/// `J(z) = ½ zᵀWz + qᵀz + r‖z‖`.
pub fn dual_value(w: &Mat, q: &[f64], r: f64, z: &[f64]) -> f64 {
    0.5 * w.quad_form(z) + linalg::dot(q, z) + r * linalg::norm(z)
}

/// Minimizes `½ zᵀWz + qᵀz + r‖z‖` for symmetric PSD `W`.
///
/// With `W = QΛQᵀ` and `c = Qᵀq`, the minimizer is
/// `z(σ) = −Q (Λ + σ)^{-1} c` where `σ = r/‖z(σ)‖`; the scalar equation
/// `σ‖z(σ)‖ = r` has an increasing left side and is solved by safeguarded
/// Newton in `log σ`. Proximal gradient takes over if the residual bound is
/// missed.
pub fn secular_solve(w: &Gramian, q: &SpectralVec, r: f64) -> Result<SpectralVec> {
    solve_ball_quadratic(&w.matrix, q.as_slice(), r).map(SpectralVec::new)
}

pub(crate) fn solve_ball_quadratic(w: &Mat, q: &[f64], r: f64) -> Result<Vec<f64>> {
    // Full-window control makes W diagonal; skip the eigensolver then.
    let eig = if w.is_diagonal() { w.diagonal_eigen() } else { w.sym_eigen() };
    solve_with_eigen(w, &eig, q, r)
}

fn solve_with_eigen(w: &Mat, eig: &SymEigen, q: &[f64], r: f64) -> Result<Vec<f64>> {
    if w.dim() != q.len() {
        return Err(Error::domain("Gramian and linear term differ in dimension"));
    }
    if !(r > 0.0) {
        return Err(Error::config("problem.radius", "must be positive"));
    }
    let q_norm = linalg::norm(q);
    if q_norm <= r {
        return Err(Error::ZeroMinimizer { q_norm, radius: r });
    }
    let tol = residual_tolerance(q_norm);
    let lam: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let c = eig.project(q);

    // s(σ) = σ‖z(σ)‖ = ‖σ (Λ+σ)^{-1} c‖ increases from ‖P₀c‖ to ‖q‖.
    let s_of = |sigma: f64| -> f64 {
        libm::sqrt(
            lam.iter()
                .zip(&c)
                .map(|(l, ci)| {
                    let v = sigma * ci / (l + sigma);
                    v * v
                })
                .sum(),
        )
    };
    let lam_max = lam.last().copied().unwrap_or(0.0);
    let mut hi = (r * lam_max / (q_norm - r)).max(f64::MIN_POSITIVE);
    while s_of(hi) < r {
        hi *= 2.0;
    }
    let lam_min_pos = lam.iter().copied().find(|l| *l > 0.0).unwrap_or(lam_max);
    let mut lo = (r * lam_min_pos / (q_norm - r)).min(hi);
    let mut shrink = 0;
    while s_of(lo) > r {
        lo *= 0.5;
        shrink += 1;
        if lo == 0.0 || shrink > 4000 {
            // The null-space component of q alone exceeds r: unbounded below.
            return Err(Error::Singular(alloc::format!(
                "Gramian null space carries ‖P₀q‖ ≥ r = {r}"
            )));
        }
    }

    let mut t = 0.5 * (libm::log(lo) + libm::log(hi));
    let (mut t_lo, mut t_hi) = (libm::log(lo), libm::log(hi));
    for _ in 0..SECULAR_MAX_ITER {
        let sigma = libm::exp(t);
        let (mut num, mut den) = (0.0, 0.0);
        for (l, ci) in lam.iter().zip(&c) {
            let a = l + sigma;
            let c2 = ci * ci / (a * a);
            den += c2;
            num += c2 * l / a;
        }
        let s = sigma * libm::sqrt(den);
        let f = libm::log(s) - libm::log(r);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            t_lo = t;
        } else {
            t_hi = t;
        }
        if t_hi - t_lo <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            break;
        }
        // d log s / d log σ = Σ c²λ/(λ+σ)³ / Σ c²/(λ+σ)² ∈ (0, 1].
        let slope = num / den;
        let mut next = if slope > 0.0 { t - f / slope } else { f64::NAN };
        if !(next > t_lo && next < t_hi) {
            next = 0.5 * (t_lo + t_hi);
        }
        let done = (next - t).abs() <= 1e-16 * t.abs().max(1.0);
        t = next;
        if done {
            break;
        }
    }
    let sigma = libm::exp(t);
    let coeffs: Vec<f64> = lam.iter().zip(&c).map(|(l, ci)| -ci / (l + sigma)).collect();
    let z = eig.expand(&coeffs);
    let res = euler_lagrange_residual(w, q, r, &z);
    if res <= tol {
        return Ok(z);
    }
    proximal_gradient(w, q, r, z, lam_max, tol)
}

/// Proximal gradient with step `1/‖W‖₂`; the prox of `t r‖·‖` is block
/// soft-thresholding.
fn proximal_gradient(w: &Mat, q: &[f64], r: f64, start: Vec<f64>, lam_max: f64, tol: f64) -> Result<Vec<f64>> {
    let step = 1.0 / lam_max.max(f64::MIN_POSITIVE);
    let mut z = start;
    for _ in 0..PROX_MAX_ITER {
        let grad = w.mul_vec(&z);
        let v: Vec<f64> = z
            .iter()
            .zip(grad.iter().zip(q))
            .map(|(zi, (gi, qi))| zi - step * (gi + qi))
            .collect();
        let nv = linalg::norm(&v);
        let shrink = if nv > step * r { 1.0 - step * r / nv } else { 0.0 };
        let next: Vec<f64> = v.iter().map(|x| shrink * x).collect();
        let moved = libm::sqrt(next.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum());
        z = next;
        if moved < 1e-12 {
            break;
        }
    }
    let res = euler_lagrange_residual(w, q, r, &z);
    if res <= tol {
        Ok(z)
    } else {
        Err(Error::NonConvergence {
            what: "ball-regularized quadratic",
            iterations: PROX_MAX_ITER,
            residual: res,
        })
    }
}

struct DualSolve {
    z: SpectralVec,
    value: f64,
    norm: f64,
    residual: f64,
    final_state: SpectralVec,
}

fn solve_dual(w: &Gramian, q: &SpectralVec, r: f64) -> Result<DualSolve> {
    let z = secular_solve(w, q, r)?;
    let wz = w.apply(&z);
    let n2 = z.dot(&wz);
    Ok(DualSolve {
        value: dual_value(&w.matrix, q.as_slice(), r, z.as_slice()),
        norm: libm::sqrt(n2.max(0.0)),
        residual: euler_lagrange_residual(&w.matrix, q.as_slice(), r, z.as_slice()),
        final_state: q + &wz,
        z,
    })
}

/// Minimal-norm control steering `y₀` into the ball at time `T` with
/// distributed controls.
pub fn solve_jp_continuous(d: &DomainSpec, y0: &SpectralVec, target: &BallTarget, horizon: f64) -> Result<NormSolution> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(alloc::format!("horizon must be positive, got {horizon}")));
    }
    let exit = d.exit_time(y0, target)?;
    solve_continuous_below_exit(d, y0, target, horizon, exit)
}

pub(crate) fn solve_continuous_below_exit(
    d: &DomainSpec,
    y0: &SpectralVec,
    target: &BallTarget,
    horizon: f64,
    exit_time: f64,
) -> Result<NormSolution> {
    if horizon >= exit_time {
        return Err(Error::ReachableByFreeDynamics { horizon, exit_time });
    }
    let w = gramians::continuous_gramian(d, horizon)?;
    let q = d.semigroup_apply(horizon, y0)?;
    let sol = solve_dual(&w, &q, target.radius()).map_err(|e| match e {
        Error::ZeroMinimizer { .. } => Error::ReachableByFreeDynamics { horizon, exit_time },
        other => other,
    })?;
    let control = AdjointControl::new(d, horizon, sol.z.clone())?;
    Ok(NormSolution {
        minimizer: sol.z,
        value: sol.value,
        norm: sol.norm,
        residual: sol.residual,
        final_state: sol.final_state,
        control: Control::Distributed(control),
    })
}

/// Minimal-norm sampled control steering `y₀` into the ball at `kδ`.
/// Requires `2δ ≤ kδ < T*`.
pub fn solve_jp_sampled(d: &DomainSpec, y0: &SpectralVec, target: &BallTarget, grid: &SamplingGrid) -> Result<NormSolution> {
    let exit = d.exit_time(y0, target)?;
    solve_sampled_below_exit(d, y0, target, grid, exit)
}

pub(crate) fn solve_sampled_below_exit(
    d: &DomainSpec,
    y0: &SpectralVec,
    target: &BallTarget,
    grid: &SamplingGrid,
    exit_time: f64,
) -> Result<NormSolution> {
    let outside = Error::OutsideAdmissible {
        delta: grid.delta(),
        blocks: grid.blocks(),
        exit_time,
    };
    if grid.blocks() < 2 || grid.horizon() >= exit_time {
        return Err(outside);
    }
    let w = gramians::sampled_gramian(d, grid);
    let q = d.semigroup_apply(grid.horizon(), y0)?;
    let sol = solve_dual(&w, &q, target.radius()).map_err(|e| match e {
        Error::ZeroMinimizer { .. } => outside,
        other => other,
    })?;
    let control = SampledControl::from_averaged_adjoint(d, *grid, &sol.z)?;
    Ok(NormSolution {
        minimizer: sol.z,
        value: sol.value,
        norm: sol.norm,
        residual: sol.residual,
        final_state: sol.final_state,
        control: Control::Sampled(control),
    })
}

/// Exact minimizer of `(1/C)‖u‖² + (1/ε)‖y(kδ; y₀, u)‖²` over sampled
/// controls, and the attained value.
///
/// The minimizer is `g_i = −(C/ε) Ā_i y` with `y` the final state, which
/// solves `(I + (C/ε) W_δ) y = e^{Δkδ} y₀`.
pub fn l2_approx_null_control(
    d: &DomainSpec,
    y0: &SpectralVec,
    grid: &SamplingGrid,
    eps: f64,
    cost: f64,
) -> Result<(SampledControl, f64)> {
    if grid.blocks() < 2 {
        return Err(Error::config("sampling.blocks", "need k ≥ 2"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config("problem.eps", alloc::format!("must be positive, got {eps}")));
    }
    if !(cost > 0.0 && cost.is_finite()) {
        return Err(Error::config("problem.cost", alloc::format!("must be positive, got {cost}")));
    }
    d.check_len(y0, "y0")?;
    let w = gramians::sampled_gramian(d, grid);
    let free = d.semigroup_apply(grid.horizon(), y0)?;
    let ratio = cost / eps;
    let n = d.modes();
    let sys = Mat::from_fn(n, |i, j| ratio * w.matrix[(i, j)] + if i == j { 1.0 } else { 0.0 });
    let y = SpectralVec::new(sys.cholesky_solve(free.as_slice())?);
    let u = SampledControl::from_averaged_adjoint(d, *grid, &y.scale(-ratio))?;
    let value = u.norm_sq() / cost + y.norm_sq() / eps;
    Ok((u, value))
}

/// Smallest cost `C` with `min_u (1/C)‖u‖² + (1/ε)‖y(kδ)‖² ≤ ‖y₀‖²`; zero
/// when the free evolution already satisfies the inequality.
pub fn approx_null_cost(d: &DomainSpec, y0: &SpectralVec, grid: &SamplingGrid, eps: f64) -> Result<f64> {
    d.check_len(y0, "y0")?;
    let budget = y0.norm_sq();
    let free = d.semigroup_apply(grid.horizon(), y0)?;
    if free.norm_sq() / eps <= budget {
        return Ok(0.0);
    }
    let excess = |log_c: f64| -> Result<f64> {
        let (_, v) = l2_approx_null_control(d, y0, grid, eps, libm::exp(log_c))?;
        Ok(v - budget)
    };
    let mut hi = 0.0;
    let mut guard = 0;
    while excess(hi)? > 0.0 {
        hi += 4.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::NonConvergence {
                what: "approximate null-control cost bracket",
                iterations: guard,
                residual: excess(hi)?,
            });
        }
    }
    let mut lo = hi - 4.0;
    while excess(lo)? <= 0.0 {
        lo -= 4.0;
        if lo < -700.0 {
            return Ok(0.0);
        }
    }
    let (_, top) = roots::bisect(excess, lo, hi, 1e-12)?;
    Ok(libm::exp(top))
}
