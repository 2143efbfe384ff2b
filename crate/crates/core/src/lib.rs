//! Brownian motion in truncated Weyl chambers.
//!
//! Survival probabilities and transition densities of k-dimensional
//! Brownian motion killed on leaving `W_Z ∩ rI^k` (Z ∈ {A, C, D},
//! `I = (-π/2, π/2)`), computed three ways: a truncated eigenfunction
//! expansion with a certified error budget ([`spectral`]), Karlin–McGregor
//! determinants of the one-dimensional killed kernel ([`kmgr`]), and Monte
//! Carlo ([`stochastic`]). On top sit the large-time regime constants
//! ([`asymptotics`]) and the limiting endpoint ensemble ([`ensemble`]).

// `!(v > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod chamber;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod kmgr;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod stochastic;

pub use chamber::{reduite, vandermonde, ChamberPoint, ChamberSpec, WeylType};
pub use error::{Result, WeylError};
pub use spectral::{Method, MultiIndex, SeriesBudget, SurvivalResult};
