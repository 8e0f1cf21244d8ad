//! Numerical laboratory for correlation decay and central limit behaviour of
//! chaotic dynamical systems.
//!
//! The crate is organised by system family and by the estimate being
//! computed:
//!
//! * [`dynamics`]: the [`DynamicalSystem`](dynamics::DynamicalSystem) trait,
//!   the doubling map, general piecewise expanding interval maps and
//!   hyperbolic toral automorphisms, plus orbit and Birkhoff-sum helpers.
//! * [`billiard`]: the periodic Lorentz gas with circular scatterers:
//!   collision map, SRB sampling, homogeneity strips, separation times and
//!   empirical dynamical Hölder constants.
//! * [`regularity`]: calculus on regularity budgets and evaluation of the
//!   pair/multiple correlation bounds.
//! * [`correlations`]: Monte Carlo pair, auto and multiple correlations,
//!   decay fits and the telescoping block decomposition.
//! * [`clt`]: Bernstein block schedules, block variables, Green-Kubo
//!   variance and Kolmogorov-Smirnov based CLT checks.
//! * [`transfer`]: transfer operators on grid functions, total variation,
//!   Lasota-Yorke residuals, Ulam densities and the variation recursion.
//!
//! All randomness flows through [`rng::StreamSeed`], so every ensemble is a
//! pure function of its root seed and independent of the worker count.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiard;
pub mod clt;
pub mod correlations;
pub mod dynamics;
pub mod ensemble;
pub mod regularity;
pub mod rng;
pub mod stats;
pub mod transfer;

pub use num_complex::Complex64;
