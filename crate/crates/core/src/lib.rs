//! Monte Carlo laboratory for recurrence of cocycles over measure-preserving
//! systems: rotations, odometers, i.i.d. and Markov shifts, and products.
//!
//! The building blocks are [`systems::System`] (a sampled point process with
//! an invertible step), [`cocycle::Cocycle`] (partial sums f(n, x) along
//! orbits), [`empirics::EmpiricalMeasure`] (laws of normalized sums) and the
//! recurrence estimators in [`diagnostics`].  Every stochastic quantity is a
//! pure function of a 64-bit seed.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod config;
pub mod diagnostics;
pub mod empirics;
pub mod error;
pub mod kernels;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod systems;
pub mod vector;

pub use error::{LabError, Result};
