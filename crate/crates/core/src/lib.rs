//! Energy-function safe control and an interactive-safety benchmark.
//!
//! The crate is organised bottom-up:
//!
//! * [`dynamics`]: the four robot models (planar ball, unicycle, SCARA,
//!   4-DoF arm), their kinematics, closest points and Jacobians, and a
//!   fixed-step integrator.
//! * [`safety_index`]: the energy function `phi = d_min^2 - d^2 - k * d_dot`
//!   together with its gradient and Lie derivatives.
//! * [`controllers`]: the common `u_s = alpha * Lg_phi^T` decomposition and
//!   the PFM, SMA, SSA, BFM and SSS safe control laws, each in a direct and a
//!   unified form.
//! * [`estimation`]: a linear Kalman filter used for sensing.
//! * [`benchmark`]: scenarios, human agents, the episode loop, metrics,
//!   parameter sweeps and phase portraits.
//! * [`io`]: scenario JSON, results CSV and trajectory JSONL formats.

pub mod benchmark;
pub mod controllers;
pub mod dynamics;
pub mod estimation;
pub mod io;
pub mod safety_index;

mod error;
mod rng;

pub use error::{Error, Result};
pub use rng::{mix_seed, splitmix64};

/// Cartesian point or vector. Planar models live in the `z = 0` plane.
pub type Point = nalgebra::Vector3<f64>;
