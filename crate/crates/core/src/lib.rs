//! Structured-grid solver for the advection-diffusion-reaction (ADR) wildfire
//! model, with travelling-wave front analysis.
//!
//! The crate is organised bottom-up:
//!
//! * [`physics`] holds the pointwise closures (diffusivity, combustion rates,
//!   cooling, two-phase bulk velocity, virtual wind, moisture heat capacity).
//! * [`grid`] and [`ops`] provide uniform Cartesian grids with ghost layers and
//!   the spatial operators (central gradients, conservative variable-coefficient
//!   diffusion, upwind and WENO5 advection).
//! * [`integrate`] assembles the semi-discrete right-hand side and advances it
//!   with forward Euler or SSPRK3 under a CFL rule.
//! * [`front`] and [`wave`] measure front speeds from PDE runs and compute
//!   travelling-wave speeds with a shooting method.
//! * [`config`], [`scenario`], [`driver`], [`output`] and [`bench`] wire everything
//!   into reproducible runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod driver;
pub mod error;
pub mod front;
pub mod grid;
pub mod integrate;
pub mod ode;
pub mod ops;
pub mod output;
pub mod physics;
pub mod scenario;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{Boundaries, BoundaryKind, Field, Grid, VectorField};
pub use physics::{CombustionSpec, ModelParameters, MoistureParameters, TwoPhaseParameters};
