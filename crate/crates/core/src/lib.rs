//! Spectral toolkit for time-optimal and minimal-norm control of the heat
//! equation on an interval, with distributed controls and with sampled-data
//! (piecewise constant in time) controls.
//!
//! Everything is expressed in the Dirichlet sine eigenbasis of `(0, L)`:
//! states are [`SpectralVec`]s, the semigroup is diagonal, and all time
//! integrals of exponential kernels (Gramians, control distances) are
//! evaluated in closed form.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// Guards like `!(x > 0.0)` reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod control;
pub mod error;
pub mod error_lab;
pub mod gramians;
pub mod linalg;
pub mod min_norm;
pub mod quadrature;
pub mod roots;
pub mod spectral;
pub mod time_optimal;

pub use control::{AdjointControl, Control, SampledControl};
pub use error::{Error, Result};
pub use gramians::{Gramian, GramianKind, SamplingGrid, TimeSignal};
pub use linalg::Mat;
pub use min_norm::NormSolution;
pub use spectral::{BallTarget, DomainSpec, SpectralVec};
pub use time_optimal::{TimeKind, TimeSolution};
