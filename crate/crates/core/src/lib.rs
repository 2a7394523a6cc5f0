//! Simulation and inference for age- and population-dependent birth–death
//! processes observed as measure-valued paths.
//!
//! The crate is organised bottom-up:
//!
//! - [`popcore`]: age intervals, the age measure `A_t`, the four rate
//!   families and symbolic test functions `x^p t^m 1_S(x)`.
//! - [`sim`]: exact event-driven simulation and the event-log file format.
//! - [`pathfn`]: closed-form time integrals of pairings along a simulated path.
//! - [`estimators`]: rate estimators obtained by pairing test functions with
//!   the observed path and solving the resulting linear systems.
//! - [`confidence`]: martingale-CLT confidence intervals and 2-D regions.
//! - [`harness`]: config-driven Monte Carlo experiments with CSV output.

pub mod confidence;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod pathfn;
pub mod popcore;
mod regions;
pub mod sim;

pub use error::{Error, Result};
pub use popcore::{AgeMeasure, Interval, IntervalUnion, RateModel, TestFn};
pub use sim::{simulate, EventLog};
