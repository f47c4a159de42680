//! Analysis and simulation of networks of diffusively coupled Goodwin oscillators.
//!
//! - [`model`]: parameter records, the network vector field and the coupling Laplacian.
//! - [`analysis`]: equilibrium, oscillation index `R`, the synchronization
//!   condition, harmonic-balance period prediction and marginal-stability checks.
//! - [`simulation`]: fixed-step RK4 integration and trajectory measurements
//!   (period, synchronization error, oscillation verdict).

pub mod analysis;
pub mod error;
pub mod model;
pub mod simulation;

pub use error::{Error, Result};
pub use model::{
    hill_repression, hill_repression_slope, nondimensionalize, vector_field, CouplingTopology,
    DimensionalParams, GoodwinParams, NetworkState,
};
