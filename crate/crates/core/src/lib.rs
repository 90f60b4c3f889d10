//! Vessel-following control for inland waterways.
//!
//! * [`vessel`]: longitudinal vessel physics.
//! * [`env`]: the stochastic river training environment and reward.
//! * [`rl`]: DDPG with hand-written networks.
//! * [`ais`]: following-event extraction from vessel tracks and the
//!   lognormal headway fit.
//! * [`validation`]: scenario harness and safety/comfort/string-stability
//!   metrics.
//! * [`config`]: the run configuration file.

pub mod ais;
pub mod config;
pub mod env;
pub mod rl;
pub mod rng;
pub mod validation;
pub mod vessel;
