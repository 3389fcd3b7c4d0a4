//! Downlink system-level simulation of an urban-micro (UMi) street-canyon
//! deployment at 2–100 GHz.
//!
//! The crate is organised bottom-up:
//!
//! * [`deployment`] builds the 19-site / 57-sector hexagonal layout with
//!   wrap-around and drops mobile stations.
//! * [`propagation`] holds the close-in (LoS) and alpha-beta-gamma (NLoS)
//!   path-loss models, LoS probability, outdoor-to-indoor penetration and
//!   oxygen absorption.
//! * [`antenna`] is the synthesized sector beam and the MS element.
//! * [`linkbudget`] combines the above into coupling loss and received power
//!   and picks the serving sector.
//! * [`metrics`] computes the geometry metric (long-term SINR) and empirical
//!   CDFs.
//! * [`engine`] runs seeded Monte Carlo drops and writes results.

pub mod antenna;
pub mod deployment;
pub mod engine;
pub mod error;
pub mod linkbudget;
pub mod metrics;
pub mod propagation;
pub mod units;

pub use error::{Result, SimError};
