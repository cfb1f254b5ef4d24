//! Lower-bound energy-dissipation estimates for AI training on
//! learning-in-memory (LIM) hardware.
//!
//! A LIM memory cell is a bistable well whose barrier height is modulated
//! to follow the learning dynamics, so state transitions are driven
//! thermodynamically instead of being paid for at a fixed per-write cost.
//! This crate implements the kinetics of such a cell, the schedule
//! families that drive it, and the resulting whole-training energy
//! estimators, together with Monte Carlo machinery that validates the
//! analytic results.
//!
//! Module map:
//!
//! - [`thermo`] — constants, kT conversion, bistable-well kinetics;
//! - [`schedules`] — learning-rate and update-rate schedule families;
//! - [`analysis`] — zeta functions and the certified series engine;
//! - [`estimators`] — the energy estimators and trajectory profiles;
//! - [`workloads`] — model-trend fitting and baseline comparisons;
//! - [`stochastic`] — Monte Carlo kinetics and descent-walk experiments.
//!
//! Internally every energy is a dimensionless kT multiple; joules appear
//! only when results are assembled against a [`thermo::ThermalEnvironment`].

// Validation is written `!(x > 0.0)` rather than `x <= 0.0` so NaN fails
// the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod estimators;
pub mod schedules;
pub mod stochastic;
pub mod thermo;
pub mod workloads;

pub use analysis::{zeta, zeta_prime, Integrand, SeriesError, SeriesResult};
pub use estimators::{EnergyEstimate, EstimatorError, LimCalibration, Method, Workload};
pub use schedules::{LearningRateSchedule, ScheduleError, UpdateRateSchedule};
pub use thermo::{BistableCellParams, ThermalEnvironment, ThermoError, BOLTZMANN};
pub use workloads::{BaselineSpec, ModelRecord, TrendModel, WorkloadError};
