//! Periodic Lorentz gas: circular scatterers on the unit torus, the billiard
//! map on the collision space, homogeneity strips, separation times and
//! empirical dynamical Holder envelopes.
//!
//! [`BilliardGeometry`] implements [`DynamicalSystem`](crate::dynamics::DynamicalSystem)
//! with the collision map as `F` and the invariant measure
//! `cos(phi) dr dphi / (2 |dQ|)`.

mod checks;
mod collision;
mod geometry;
mod holder;
mod horizon;
mod separation;
mod strips;

use thiserror::Error;

use crate::dynamics::DynamicsError;

pub use checks::{
    involution_check, mean_free_path_check, srb_invariance, FreePathCheck, InvolutionCheck,
    SrbInvariance, INVARIANCE_LEVEL,
};
pub use collision::{free_path, reflection_angle, CollisionCoordinate, Flight, SINGULAR_MARGIN};
pub use geometry::{BilliardGeometry, HorizonStatus, Scatterer, DEFAULT_CAP};
pub use holder::{
    budget_violation_fraction, estimate_dynamical_holder, fit_envelope, sample_pairs,
    EnvelopeBin, HolderEstimate, HolderSettings, PairSample, ENVELOPE_QUANTILE, MIN_BIN,
};
pub use horizon::{find_corridor, validate_geometry, HorizonReport};
pub use separation::{separation_time, SeparationOutcome, TimeDirection};
pub use strips::{h_strip_label, HStripParams, StripLabel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BilliardError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid settings: {0}")]
    Settings(String),
}
