//! Monte Carlo validation of the bistable kinetics and a quantized
//! descent-walk demonstration.
//!
//! The kinetics estimator draws forward and backward hop events as
//! independent Bernoulli streams with per-step probability
//! `1 - exp(-rate * dt)`, the discrete-time approximation of the
//! continuous transition rates. Its bias relative to the analytic net
//! rate is O(rate * dt / 2), kept under 2.5% by the construction-time cap
//! on per-step probabilities; halving `dt` halves the bias.
//!
//! The descent walk moves two quantized parameters on a grid. At each
//! step one axis is drawn, the energetically favorable direction along it
//! is found from the loss difference of a one-grid-step move, and a hop
//! occurs with probability `min(1, 2 exp(-E0_n) tanh(tilt/2))`, the net
//! drift of the tilted cell. Uphill moves have no net drift and never
//! hop, so a zero-gradient start stays put.
//!
//! All randomness comes from per-trial ChaCha12 generators keyed by
//! (seed, trial index); results are independent of scheduling order and
//! bit-identical for a fixed seed.

use crate::estimators::EstimatorError;
use crate::schedules::{LearningRateSchedule, UpdateRateSchedule};
use crate::thermo::{log_tanh_half, BistableCellParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::f64::consts::LN_2;
use thiserror::Error;

/// Pseudo-random generator recorded in output metadata.
pub const GENERATOR: &str = "chacha12";

/// Per-step hop probabilities above this break the discrete-time
/// approximation budget.
pub const MAX_STEP_PROBABILITY: f64 = 0.05;

#[derive(Debug, Error)]
pub enum StochasticError {
    #[error("dt must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("steps must be >= 1")]
    NoSteps,
    #[error("trials must be >= 1")]
    NoTrials,
    #[error("r_max * dt = {0} exceeds 0.1; the discrete-time approximation breaks down")]
    StepTooCoarse(f64),
    #[error("per-step hop probability {0:.4} exceeds {MAX_STEP_PROBABILITY}; shrink dt")]
    HopProbabilityTooLarge(f64),
    #[error("loss matrix is not positive-definite")]
    LossNotPositiveDefinite,
    #[error("grid step must be positive, got {0}")]
    NonPositiveGridStep(f64),
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

// ---------------------------------------------------------------------------
// Two-state kinetics
// ---------------------------------------------------------------------------

/// A seeded simulation of one tilted bistable cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KineticsExperiment {
    cell: BistableCellParams,
    steps: u64,
    dt: f64,
    seed: u64,
}

impl KineticsExperiment {
    pub fn new(
        cell: BistableCellParams,
        steps: u64,
        dt: f64,
        seed: u64,
    ) -> Result<Self, StochasticError> {
        if !(dt > 0.0) {
            return Err(StochasticError::NonPositiveDt(dt));
        }
        if steps == 0 {
            return Err(StochasticError::NoSteps);
        }
        if cell.r_max() * dt > 0.1 {
            return Err(StochasticError::StepTooCoarse(cell.r_max() * dt));
        }
        let (lf, lb) = split_rates(&cell);
        let worst = lf.max(lb) * dt;
        if worst > MAX_STEP_PROBABILITY {
            return Err(StochasticError::HopProbabilityTooLarge(worst));
        }
        Ok(Self {
            cell,
            steps,
            dt,
            seed,
        })
    }

    pub fn cell(&self) -> &BistableCellParams {
        &self.cell
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Forward and backward transition rates `R0 (1 ± tanh(tilt/2))`.
fn split_rates(cell: &BistableCellParams) -> (f64, f64) {
    let baseline = cell.r_max() * (-cell.barrier()).exp();
    let drift = (cell.tilt() / 2.0).tanh();
    (baseline * (1.0 + drift), baseline * (1.0 - drift))
}

/// Net-rate estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateEstimate {
    pub rate_per_sec: f64,
    pub std_error_per_sec: f64,
    pub forward_events: u64,
    pub backward_events: u64,
    pub analytic_rate_per_sec: f64,
    pub generator: &'static str,
}

/// Estimate the net forward rate by counting independent forward and
/// backward events over `steps` intervals of width `dt`.
pub fn mc_estimate_net_rate(exp: &KineticsExperiment) -> RateEstimate {
    let (lf, lb) = split_rates(&exp.cell);
    let p_f = -(-lf * exp.dt).exp_m1();
    let p_b = -(-lb * exp.dt).exp_m1();

    let mut rng = trial_rng(exp.seed, 0);
    let mut forward = 0u64;
    let mut backward = 0u64;
    for _ in 0..exp.steps {
        if rng.random::<f64>() < p_f {
            forward += 1;
        }
        if rng.random::<f64>() < p_b {
            backward += 1;
        }
    }
    let window = exp.steps as f64 * exp.dt;
    let net = forward as f64 - backward as f64;
    let variance = exp.steps as f64 * (p_f * (1.0 - p_f) + p_b * (1.0 - p_b));
    RateEstimate {
        rate_per_sec: net / window,
        std_error_per_sec: variance.sqrt() / window,
        forward_events: forward,
        backward_events: backward,
        analytic_rate_per_sec: crate::thermo::net_update_rate(&exp.cell),
        generator: GENERATOR,
    }
}

// ---------------------------------------------------------------------------
// Quantized descent walk
// ---------------------------------------------------------------------------

/// Positive-definite quadratic loss `L(w) = (q11 x^2 + 2 q12 x y + q22 y^2) / 2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadraticLoss {
    q11: f64,
    q12: f64,
    q22: f64,
}

impl QuadraticLoss {
    pub fn new(q11: f64, q12: f64, q22: f64) -> Result<Self, StochasticError> {
        if !(q11 > 0.0 && q11 * q22 - q12 * q12 > 0.0) {
            return Err(StochasticError::LossNotPositiveDefinite);
        }
        Ok(Self { q11, q12, q22 })
    }

    pub fn identity() -> Self {
        Self {
            q11: 1.0,
            q12: 0.0,
            q22: 1.0,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        0.5 * (self.q11 * x * x + 2.0 * self.q12 * x * y + self.q22 * y * y)
    }
}

/// How the walk's barrier height evolves over steps.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BarrierPolicy {
    /// Follow the schedule-driven profile
    /// `E0_n = log(2/r(n)) + log(tanh(eps_n / (2 delta)))`.
    ScheduleDriven {
        lr: LearningRateSchedule,
        ur: UpdateRateSchedule,
        delta: f64,
    },
    /// Hold the barrier fixed; 50 kT freezes the walk outright.
    Frozen { barrier_kt: f64 },
}

impl BarrierPolicy {
    fn barrier_at(&self, n: u64) -> Result<f64, StochasticError> {
        match self {
            BarrierPolicy::ScheduleDriven { lr, ur, delta } => {
                let eps = lr.eval(n).map_err(EstimatorError::from)?;
                ur.eval(n).map_err(EstimatorError::from)?;
                Ok(LN_2 + ur.neg_log_rate(n as f64) + log_tanh_half(eps / delta))
            }
            BarrierPolicy::Frozen { barrier_kt } => Ok(*barrier_kt),
        }
    }
}

/// Configuration of a descent-walk ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct DescentWalkConfig {
    pub loss: QuadraticLoss,
    /// Quantized parameter step (grid pitch).
    pub grid_step: f64,
    /// Algorithmic-to-physical energy conversion: tilt = beta * |dL|.
    pub beta: f64,
    pub barrier: BarrierPolicy,
    /// Start position in grid coordinates.
    pub start: (i64, i64),
    pub steps: u64,
    pub trials: u64,
    pub seed: u64,
    /// Success radius around the minimizer, in grid units.
    pub success_radius_grid: f64,
    /// Keep per-step samples for trajectory dumps.
    pub record_trajectories: bool,
}

impl DescentWalkConfig {
    fn validate(&self) -> Result<(), StochasticError> {
        if !(self.grid_step > 0.0) {
            return Err(StochasticError::NonPositiveGridStep(self.grid_step));
        }
        if !(self.beta > 0.0) {
            return Err(StochasticError::NonPositiveBeta(self.beta));
        }
        if self.steps == 0 {
            return Err(StochasticError::NoSteps);
        }
        if self.trials == 0 {
            return Err(StochasticError::NoTrials);
        }
        Ok(())
    }
}

/// One recorded walk sample (for optional trajectory dumps).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WalkSample {
    pub trial: u64,
    pub step: u64,
    pub wx: f64,
    pub wy: f64,
    pub loss: f64,
    pub hop: u8,
}

/// Ensemble statistics of a descent walk.
#[derive(Debug, Clone, Serialize)]
pub struct WalkSummary {
    /// Ensemble mean loss after each step (length = steps).
    pub mean_loss_per_step: Vec<f64>,
    /// Final distance to the minimizer per trial, in grid units.
    pub final_distance_grid: Vec<f64>,
    pub fraction_within_tol: f64,
    pub total_hops: u64,
    pub generator: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<Vec<WalkSample>>,
}

/// Per-update dissipation accounting for the energy audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipationAccounting {
    /// Sum the applied tilt (gradient energy) of each realized hop.
    GradientEnergy,
    /// Sum the barrier height at each realized hop.
    BarrierEnergy,
}

/// Realized dissipation across an ensemble, in kT.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyAudit {
    pub accounting: DissipationAccounting,
    pub per_trial_kt: Vec<f64>,
    pub mean_kt: f64,
    pub std_error_kt: f64,
    pub total_hops: u64,
    pub mean_per_hop_kt: f64,
    pub generator: &'static str,
}

struct WalkOutcome {
    mean_loss_per_step: Vec<f64>,
    final_distance_grid: Vec<f64>,
    total_hops: u64,
    dissipation_tilt: Vec<f64>,
    dissipation_barrier: Vec<f64>,
    trajectories: Option<Vec<WalkSample>>,
}

fn run_walk(cfg: &DescentWalkConfig) -> Result<WalkOutcome, StochasticError> {
    cfg.validate()?;
    // barrier profile is trial-independent; precompute once
    let mut barriers = Vec::with_capacity(cfg.steps as usize);
    for n in 1..=cfg.steps {
        barriers.push(cfg.barrier.barrier_at(n)?);
    }

    let g = cfg.grid_step;
    let mut mean_loss = vec![0.0f64; cfg.steps as usize];
    let mut final_distance = Vec::with_capacity(cfg.trials as usize);
    let mut dissipation_tilt = Vec::with_capacity(cfg.trials as usize);
    let mut dissipation_barrier = Vec::with_capacity(cfg.trials as usize);
    let mut trajectories = cfg.record_trajectories.then(Vec::new);
    let mut total_hops = 0u64;

    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let (mut ix, mut iy) = cfg.start;
        let mut diss_tilt = 0.0;
        let mut diss_barrier = 0.0;
        for (step_idx, &barrier) in barriers.iter().enumerate() {
            let (x, y) = (ix as f64 * g, iy as f64 * g);
            let l_here = cfg.loss.eval(x, y);
            // pick an axis, then the favorable direction along it
            let along_x = rng.random_bool(0.5);
            let (lp, lm) = if along_x {
                (cfg.loss.eval(x + g, y), cfg.loss.eval(x - g, y))
            } else {
                (cfg.loss.eval(x, y + g), cfg.loss.eval(x, y - g))
            };
            let (best, dir) = if lp <= lm { (lp, 1i64) } else { (lm, -1i64) };
            let tilt = cfg.beta * (l_here - best);
            let mut hopped = 0u8;
            if tilt > 0.0 {
                let p = (2.0 * (-barrier).exp() * (tilt / 2.0).tanh()).min(1.0);
                if rng.random::<f64>() < p {
                    if along_x {
                        ix += dir;
                    } else {
                        iy += dir;
                    }
                    diss_tilt += tilt;
                    diss_barrier += barrier;
                    total_hops += 1;
                    hopped = 1;
                }
            }
            let (x, y) = (ix as f64 * g, iy as f64 * g);
            let loss_now = cfg.loss.eval(x, y);
            mean_loss[step_idx] += loss_now;
            if let Some(t) = trajectories.as_mut() {
                t.push(WalkSample {
                    trial,
                    step: step_idx as u64 + 1,
                    wx: x,
                    wy: y,
                    loss: loss_now,
                    hop: hopped,
                });
            }
        }
        final_distance.push(((ix * ix + iy * iy) as f64).sqrt());
        dissipation_tilt.push(diss_tilt);
        dissipation_barrier.push(diss_barrier);
    }

    let trials = cfg.trials as f64;
    for v in &mut mean_loss {
        *v /= trials;
    }
    Ok(WalkOutcome {
        mean_loss_per_step: mean_loss,
        final_distance_grid: final_distance,
        total_hops,
        dissipation_tilt,
        dissipation_barrier,
        trajectories,
    })
}

/// Run the descent-walk ensemble and report convergence statistics.
pub fn mc_descent_walk(cfg: &DescentWalkConfig) -> Result<WalkSummary, StochasticError> {
    let outcome = run_walk(cfg)?;
    let within = outcome
        .final_distance_grid
        .iter()
        .filter(|&&d| d <= cfg.success_radius_grid)
        .count();
    Ok(WalkSummary {
        fraction_within_tol: within as f64 / cfg.trials as f64,
        mean_loss_per_step: outcome.mean_loss_per_step,
        final_distance_grid: outcome.final_distance_grid,
        total_hops: outcome.total_hops,
        generator: GENERATOR,
        trajectories: outcome.trajectories,
    })
}

/// Sum realized per-hop dissipation over the ensemble.
pub fn mc_energy_audit(
    cfg: &DescentWalkConfig,
    accounting: DissipationAccounting,
) -> Result<EnergyAudit, StochasticError> {
    let outcome = run_walk(cfg)?;
    let per_trial = match accounting {
        DissipationAccounting::GradientEnergy => outcome.dissipation_tilt,
        DissipationAccounting::BarrierEnergy => outcome.dissipation_barrier,
    };
    let n = per_trial.len() as f64;
    let mean = per_trial.iter().sum::<f64>() / n;
    let var = per_trial
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / n;
    let std_error = (var / n).sqrt();
    let mean_per_hop = if outcome.total_hops > 0 {
        per_trial.iter().sum::<f64>() / outcome.total_hops as f64
    } else {
        0.0
    };
    Ok(EnergyAudit {
        accounting,
        per_trial_kt: per_trial,
        mean_kt: mean,
        std_error_kt: std_error,
        total_hops: outcome.total_hops,
        mean_per_hop_kt: mean_per_hop,
        generator: GENERATOR,
    })
}
