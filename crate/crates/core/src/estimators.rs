//! Energy-dissipation estimators for learning-in-memory training.
//!
//! Two accounting variants are covered. In variant A the per-update
//! dissipation is the harvested gradient energy `(kT/delta) * eps_n`; in
//! variant B it is the instantaneous barrier height `E0_n`. Totals follow
//! the ratio form
//!
//! ```text
//! E_total = flops * [sum w(n) r(n) / sum r(n)] * kT  +  M * log(1/delta) * kT
//! ```
//!
//! which eliminates the step duration and the switching ceiling from the
//! energy account; those reappear only in [`trajectory`] power output.
//! Closed forms (zeta ratios for the polynomial family, elementary forms
//! for the exponential family) sit next to their numeric counterparts so
//! each route can check the other.

use crate::analysis::{self, zeta, zeta_prime, Integrand, SeriesError, SeriesResult};
use crate::schedules::{LearningRateSchedule, ScheduleError, UpdateRateSchedule};
use crate::thermo::{log_tanh_half, ThermalEnvironment};
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

/// Default retention precision, 2^-16.
pub const DEFAULT_DELTA: f64 = 1.52587890625e-5;
/// Default polynomial decay exponent.
pub const DEFAULT_GAMMA: f64 = 2.0;
/// Default switching ceiling, ~1 THz.
pub const DEFAULT_R_MAX: f64 = 1e12;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("precision delta must lie in (0, 1], got {0}")]
    DeltaOutOfRange(f64),
    #[error("bits must be positive, got {0}")]
    NonPositiveBits(f64),
    #[error("flops must be positive, got {0}")]
    NonPositiveFlops(f64),
    #[error("parameter count must be positive, got {0}")]
    NonPositiveParams(f64),
    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("energy per bit must be positive, got {0}")]
    NonPositiveEnergyPerBit(f64),
    #[error("r_max must be positive, got {0}")]
    NonPositiveRMax(f64),
    #[error("calibration factors must be positive")]
    BadCalibration,
    #[error("truncation length must be >= 1")]
    BadTruncation,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// One training job: operation count, memory size, retention precision.
#[derive(Debug, Clone, Serialize)]
pub struct Workload {
    label: String,
    flops: f64,
    params: f64,
    delta: f64,
}

impl Workload {
    /// Build from an explicit precision `delta` in (0, 1].
    pub fn with_delta(
        label: impl Into<String>,
        flops: f64,
        params: f64,
        delta: f64,
    ) -> Result<Self, EstimatorError> {
        if !(flops > 0.0) {
            return Err(EstimatorError::NonPositiveFlops(flops));
        }
        if !(params > 0.0) {
            return Err(EstimatorError::NonPositiveParams(params));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(EstimatorError::DeltaOutOfRange(delta));
        }
        Ok(Self {
            label: label.into(),
            flops,
            params,
            delta,
        })
    }

    /// Build from a bit precision; `delta = 2^-bits` exactly.
    pub fn with_bits(
        label: impl Into<String>,
        flops: f64,
        params: f64,
        bits: f64,
    ) -> Result<Self, EstimatorError> {
        if !(bits > 0.0) {
            return Err(EstimatorError::NonPositiveBits(bits));
        }
        Self::with_delta(label, flops, params, 2f64.powf(-bits))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flops(&self) -> f64 {
        self.flops
    }

    pub fn params(&self) -> f64 {
        self.params
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `log2(1/delta)`; zero when delta = 1.
    pub fn bits(&self) -> f64 {
        // + 0.0 normalizes the -0.0 that -log2(1.0) produces
        -self.delta.log2() + 0.0
    }
}

/// Tilt calibration `dE_n = C * eps_n * kT`.
///
/// The asymptotic mode equates the limiting barrier to the retention
/// floor, giving `C = 1/delta`; the manual mode exposes the underlying
/// conversion factor, smallest curvature eigenvalue, and gradient
/// precision.
#[derive(Debug, Clone, Copy, Default, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LimCalibration {
    #[default]
    Asymptotic,
    Manual {
        beta: f64,
        lambda_min: f64,
        precision_bits: f64,
    },
}

impl LimCalibration {
    pub fn manual(beta: f64, lambda_min: f64, precision_bits: f64) -> Result<Self, EstimatorError> {
        if !(beta > 0.0 && lambda_min > 0.0 && precision_bits > 0.0) {
            return Err(EstimatorError::BadCalibration);
        }
        Ok(Self::Manual {
            beta,
            lambda_min,
            precision_bits,
        })
    }

    /// Effective tilt factor for a workload precision.
    pub fn c(&self, delta: f64) -> f64 {
        match *self {
            Self::Asymptotic => 1.0 / delta,
            Self::Manual {
                beta,
                lambda_min,
                precision_bits,
            } => beta * lambda_min * 2f64.powf(-2.0 * precision_bits),
        }
    }
}

/// Estimator identity tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    LimANum,
    LimAClosed,
    LimBNum,
    LimBUb,
    LimBLbFinite,
    LimBLbClosed,
    LimAExpClosed,
    LimBExpClosed,
    Ceb,
    LandauerMeas,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self {
            Method::LimANum => "LIM_A_NUM",
            Method::LimAClosed => "LIM_A_CLOSED",
            Method::LimBNum => "LIM_B_NUM",
            Method::LimBUb => "LIM_B_UB",
            Method::LimBLbFinite => "LIM_B_LB_FINITE",
            Method::LimBLbClosed => "LIM_B_LB_CLOSED",
            Method::LimAExpClosed => "LIM_A_EXP_CLOSED",
            Method::LimBExpClosed => "LIM_B_EXP_CLOSED",
            Method::Ceb => "CEB",
            Method::LandauerMeas => "LANDAUER_MEAS",
        };
        f.write_str(tag)
    }
}

/// Convergence record for one series behind an estimate.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesDiagnostic {
    pub series: String,
    pub terms_used: u64,
    pub tail_bound: f64,
    pub converged: bool,
}

impl SeriesDiagnostic {
    fn from_result(label: &str, r: &SeriesResult) -> Self {
        Self {
            series: label.to_string(),
            terms_used: r.terms_used,
            tail_bound: r.tail_bound,
            converged: r.converged,
        }
    }
}

/// Method-tagged energy estimate with the dynamic/retention split.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyEstimate {
    pub method: Method,
    /// Per-operation dynamic dissipation in kT.
    pub dynamic_kt_per_op: f64,
    /// Retention energy stored in the final barriers, in kT.
    pub retention_kt: f64,
    pub dynamic_joules: f64,
    pub retention_joules: f64,
    pub total_joules: f64,
    pub diagnostics: Vec<SeriesDiagnostic>,
}

fn assemble(
    method: Method,
    w: &Workload,
    per_op_kt: f64,
    retention_kt: f64,
    env: &ThermalEnvironment,
    diagnostics: Vec<SeriesDiagnostic>,
) -> EnergyEstimate {
    let dynamic_joules = w.flops * per_op_kt * env.kt();
    let retention_joules = retention_kt * env.kt();
    EnergyEstimate {
        method,
        dynamic_kt_per_op: per_op_kt,
        retention_kt,
        dynamic_joules,
        retention_joules,
        total_joules: dynamic_joules + retention_joules,
        diagnostics,
    }
}

/// Retention floor `M log(1/delta)` in kT.
fn retention_floor(w: &Workload) -> f64 {
    w.params * (1.0 / w.delta).ln()
}

/// Limiting barrier height `log(1/delta)` in kT for a precision in (0, 1].
pub fn asymptotic_barrier(delta: f64) -> Result<f64, EstimatorError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(EstimatorError::DeltaOutOfRange(delta));
    }
    Ok(-(delta.ln()))
}

/// Barrier height at one schedule step, equality case of the bound:
/// `E0_n = log(2 / r(n)) + log(tanh(eps_n / (2 delta)))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BarrierSample {
    pub kt: f64,
    /// Negative barrier requirement means the requested operating point is
    /// inadmissible; the value is still reported.
    pub feasible: bool,
}

pub fn barrier_profile(
    lr: &LearningRateSchedule,
    ur: &UpdateRateSchedule,
    delta: f64,
    n: u64,
) -> Result<BarrierSample, EstimatorError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(EstimatorError::DeltaOutOfRange(delta));
    }
    let eps = lr.eval(n)?;
    ur.eval(n)?;
    let kt = LN_2 + ur.neg_log_rate(n as f64) + log_tanh_half(eps / delta);
    Ok(BarrierSample {
        kt,
        feasible: kt >= 0.0,
    })
}

/// Variant-A numeric estimate: per-op `= (1/delta) sum(eps r) / sum(r)`.
pub fn lim_a_numeric(
    w: &Workload,
    lr: &LearningRateSchedule,
    ur: &UpdateRateSchedule,
    env: &ThermalEnvironment,
    rel_tol: f64,
) -> Result<EnergyEstimate, EstimatorError> {
    let unit = analysis::sum_weighted(ur, &Integrand::Unit, rel_tol)?;
    let weighted = analysis::sum_weighted(ur, &Integrand::LearningRate(*lr), rel_tol)?;
    let per_op = weighted.value / unit.value / w.delta;
    Ok(assemble(
        Method::LimANum,
        w,
        per_op,
        retention_floor(w),
        env,
        vec![
            SeriesDiagnostic::from_result("learning_rate", &weighted),
            SeriesDiagnostic::from_result("unit", &unit),
        ],
    ))
}

/// Variant-A closed form for the polynomial family:
/// per-op `= (1/delta) zeta(2+gamma) / zeta(1+gamma)`.
pub fn lim_a_closed_poly(
    w: &Workload,
    gamma: f64,
    env: &ThermalEnvironment,
) -> Result<EnergyEstimate, EstimatorError> {
    if !(gamma > 0.0) {
        return Err(EstimatorError::NonPositiveGamma(gamma));
    }
    let per_op = zeta(2.0 + gamma)? / zeta(1.0 + gamma)? / w.delta;
    Ok(assemble(
        Method::LimAClosed,
        w,
        per_op,
        retention_floor(w),
        env,
        Vec::new(),
    ))
}

/// Variant-B numeric estimate: per-op `= sum(E0 r) / sum(r)` at the
/// equality case of the barrier bound, tilt calibrated by `calibration`.
pub fn lim_b_numeric(
    w: &Workload,
    lr: &LearningRateSchedule,
    ur: &UpdateRateSchedule,
    env: &ThermalEnvironment,
    calibration: &LimCalibration,
    rel_tol: f64,
) -> Result<EnergyEstimate, EstimatorError> {
    let unit = analysis::sum_weighted(ur, &Integrand::Unit, rel_tol)?;
    let barrier = analysis::sum_weighted(
        ur,
        &Integrand::BarrierProfile {
            lr: *lr,
            c: calibration.c(w.delta),
        },
        rel_tol,
    )?;
    let per_op = barrier.value / unit.value;
    Ok(assemble(
        Method::LimBNum,
        w,
        per_op,
        retention_floor(w),
        env,
        vec![
            SeriesDiagnostic::from_result("lim_b_barrier", &barrier),
            SeriesDiagnostic::from_result("unit", &unit),
        ],
    ))
}

/// Variant-B asymptotic ceiling: per-op `= log(1/delta)`, the constant
/// energy barrier regime.
pub fn lim_b_upper(w: &Workload, env: &ThermalEnvironment) -> EnergyEstimate {
    let per_op = -(w.delta.ln());
    assemble(
        Method::LimBUb,
        w,
        per_op,
        retention_floor(w),
        env,
        Vec::new(),
    )
}

/// Variant-B closed lower bound:
/// per-op `= log 2 - gamma zeta'(1+gamma) / zeta(1+gamma)`.
pub fn lim_b_lower_closed(
    w: &Workload,
    gamma: f64,
    env: &ThermalEnvironment,
) -> Result<EnergyEstimate, EstimatorError> {
    if !(gamma > 0.0) {
        return Err(EstimatorError::NonPositiveGamma(gamma));
    }
    let per_op = LN_2 - gamma * zeta_prime(1.0 + gamma)? / zeta(1.0 + gamma)?;
    Ok(assemble(
        Method::LimBLbClosed,
        w,
        per_op,
        retention_floor(w),
        env,
        Vec::new(),
    ))
}

/// Variant-B truncated lower bound:
/// per-op `= log 2 + (1+gamma) [sum_{n<=N} log(n)/n^(1+gamma)] / zeta(1+gamma)`.
///
/// Reported alongside [`lim_b_lower_closed`]; the two carry a
/// `(1+gamma)` versus `gamma` prefactor and are intentionally both kept.
/// `n_trunc` defaults to `floor(1/delta)`.
pub fn lim_b_lower_finite(
    w: &Workload,
    gamma: f64,
    env: &ThermalEnvironment,
    n_trunc: Option<u64>,
) -> Result<EnergyEstimate, EstimatorError> {
    if !(gamma > 0.0) {
        return Err(EstimatorError::NonPositiveGamma(gamma));
    }
    let n = match n_trunc {
        Some(0) => return Err(EstimatorError::BadTruncation),
        Some(n) => n,
        None => (1.0 / w.delta).floor().max(1.0) as u64,
    };
    let partial = analysis::log_power_partial_sum(1.0 + gamma, n)?;
    let per_op = LN_2 + (1.0 + gamma) * partial / zeta(1.0 + gamma)?;
    Ok(assemble(
        Method::LimBLbFinite,
        w,
        per_op,
        retention_floor(w),
        env,
        Vec::new(),
    ))
}

/// Variant-A closed form for the exponential family:
/// per-op `= (1/delta) (e^gamma - 1) (-log(1 - e^-gamma))`.
pub fn lim_a_exp_closed(
    w: &Workload,
    gamma: f64,
    env: &ThermalEnvironment,
) -> Result<EnergyEstimate, EstimatorError> {
    if !(gamma > 0.0) {
        return Err(EstimatorError::NonPositiveGamma(gamma));
    }
    let per_op = gamma.exp_m1() * -(-(-gamma).exp()).ln_1p() / w.delta;
    Ok(assemble(
        Method::LimAExpClosed,
        w,
        per_op,
        retention_floor(w),
        env,
        Vec::new(),
    ))
}

/// Variant-B closed form for the exponential family:
/// per-op `= log 2 + gamma / (1 - e^-gamma)`.
pub fn lim_b_exp_closed(
    w: &Workload,
    gamma: f64,
    env: &ThermalEnvironment,
) -> Result<EnergyEstimate, EstimatorError> {
    if !(gamma > 0.0) {
        return Err(EstimatorError::NonPositiveGamma(gamma));
    }
    let per_op = LN_2 + gamma / -(-gamma).exp_m1();
    Ok(assemble(
        Method::LimBExpClosed,
        w,
        per_op,
        retention_floor(w),
        env,
        Vec::new(),
    ))
}

/// Constant-energy-barrier estimate: `total = (flops + M) * bits * e_bit`.
///
/// `e_bit` defaults to `kT log(1/delta)` at `delta = 2^-bits`; device
/// figures (typically 1 fJ to 1 pJ) may be supplied instead.
pub fn ceb_energy(
    w: &Workload,
    e_bit_joules: Option<f64>,
    bits: Option<f64>,
    env: &ThermalEnvironment,
) -> Result<EnergyEstimate, EstimatorError> {
    let bits = bits.unwrap_or_else(|| w.bits());
    if !(bits > 0.0) {
        return Err(EstimatorError::NonPositiveBits(bits));
    }
    let e_bit = e_bit_joules.unwrap_or(env.kt() * bits * LN_2);
    if !(e_bit > 0.0) {
        return Err(EstimatorError::NonPositiveEnergyPerBit(e_bit));
    }
    let per_op_kt = bits * e_bit / env.kt();
    let retention_kt = w.params * bits * e_bit / env.kt();
    Ok(assemble(
        Method::Ceb,
        w,
        per_op_kt,
        retention_kt,
        env,
        Vec::new(),
    ))
}

/// Shannon capacity of a binary symmetric channel clocked at `f_c`:
/// `C(p) = f_c [1 + p log2 p + (1-p) log2(1-p)]`.
pub fn shannon_capacity(p: f64, f_c: f64) -> f64 {
    let h = |x: f64| if x == 0.0 { 0.0 } else { x * x.log2() };
    f_c * (1.0 + h(p) + h(1.0 - p))
}

/// Thermal-noise readout limit per bit, in kT: the drive power over the
/// near-zero-margin channel capacity. The measurement parameters cancel
/// exactly, leaving `2 pi ln 2 ~ 4.3552 kT`.
pub fn measurement_limit_from_params(c_meas: f64, w_meas: f64, f_c: f64) -> f64 {
    // P = f_c * (1/2) C_meas W^2; C = W^2 f_c / (4 pi ln2 * kT/C_meas).
    // Formed so the shared parameter block divides out exactly.
    let block = c_meas * (w_meas * w_meas) * f_c;
    #[allow(clippy::eq_op)]
    let cancelled = block / block;
    0.5 * (4.0 * PI * LN_2) * cancelled
}

/// `2 pi ln 2` kT per bit.
pub fn measurement_limit_per_bit() -> f64 {
    2.0 * PI * LN_2
}

/// Landauer erasure plus readout limit:
/// `total = (flops + M) * bits * (log 2 + 2 pi ln 2) kT`.
pub fn landauer_measurement_total(
    w: &Workload,
    bits: Option<f64>,
    env: &ThermalEnvironment,
) -> Result<EnergyEstimate, EstimatorError> {
    let bits = bits.unwrap_or_else(|| w.bits());
    if !(bits > 0.0) {
        return Err(EstimatorError::NonPositiveBits(bits));
    }
    let per_bit = LN_2 + measurement_limit_per_bit();
    let per_op_kt = bits * per_bit;
    let retention_kt = w.params * bits * per_bit;
    Ok(assemble(
        Method::LandauerMeas,
        w,
        per_op_kt,
        retention_kt,
        env,
        Vec::new(),
    ))
}

/// One sampled point of a schedule trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryPoint {
    pub n: u64,
    pub epsilon: f64,
    pub r: f64,
    pub tilt_kt: f64,
    pub barrier_kt: f64,
    pub power_watts: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Barrier non-decreasing across the sampled points.
    pub barrier_monotone: bool,
}

/// Sample barrier height, tilt, and instantaneous power
/// `P_n = E0_n * kT * R_max * r(n)` over a logarithmic step grid.
pub fn trajectory(
    lr: &LearningRateSchedule,
    ur: &UpdateRateSchedule,
    delta: f64,
    r_max: f64,
    n_points: usize,
    n_max: u64,
    env: &ThermalEnvironment,
) -> Result<Trajectory, EstimatorError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(EstimatorError::DeltaOutOfRange(delta));
    }
    if !(r_max > 0.0) {
        return Err(EstimatorError::NonPositiveRMax(r_max));
    }
    let n_points = n_points.max(1);
    let n_max = n_max.max(1);
    let lmax = (n_max as f64).ln();
    let mut points: Vec<TrajectoryPoint> = Vec::with_capacity(n_points);
    let mut barrier_monotone = true;
    let mut last_n = 0u64;
    let mut last_barrier = f64::NEG_INFINITY;
    let denom = (n_points.max(2) - 1) as f64;
    for i in 0..n_points {
        let n = (lmax * i as f64 / denom).exp().round() as u64;
        let n = n.clamp(1, n_max);
        if n == last_n {
            continue;
        }
        last_n = n;
        let epsilon = lr.eval(n)?;
        let r = ur.eval(n)?;
        let tilt = epsilon / delta;
        let barrier = LN_2 + ur.neg_log_rate(n as f64) + log_tanh_half(tilt);
        if barrier < last_barrier {
            barrier_monotone = false;
        }
        last_barrier = barrier;
        points.push(TrajectoryPoint {
            n,
            epsilon,
            r,
            tilt_kt: tilt,
            barrier_kt: barrier,
            power_watts: barrier * env.kt() * r_max * r,
            feasible: barrier >= 0.0,
        });
    }
    Ok(Trajectory {
        points,
        barrier_monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env300() -> ThermalEnvironment {
        ThermalEnvironment::new(300.0).unwrap()
    }

    fn brain(bits: f64) -> Workload {
        Workload::with_bits("brain-scale", 1e28, 1e15, bits).unwrap()
    }

    #[test]
    fn asymptotic_barrier_examples() {
        assert!((asymptotic_barrier(0.5).unwrap() - LN_2).abs() < 1e-15);
        assert!((asymptotic_barrier(2f64.powi(-16)).unwrap() - 16.0 * LN_2).abs() < 1e-12);
        assert_eq!(asymptotic_barrier(1.0).unwrap(), 0.0);
        assert!(asymptotic_barrier(0.0).is_err());
        assert!(asymptotic_barrier(1.5).is_err());
    }

    #[test]
    fn workload_bits_delta_relation() {
        let w = Workload::with_bits("x", 1.0, 1.0, 16.0).unwrap();
        assert_eq!(w.delta(), 2f64.powi(-16));
        assert_eq!(w.bits(), 16.0);
        assert!(Workload::with_delta("x", 1.0, 1.0, 0.0).is_err());
        assert!(Workload::with_delta("x", 1.0, 1.0, 1.0).is_ok());
        assert!(Workload::with_bits("x", 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn barrier_profile_spec_points() {
        let lr = LearningRateSchedule::harmonic();
        let delta = 2f64.powi(-16);

        let p10 = UpdateRateSchedule::polynomial(10.0).unwrap();
        let b = barrier_profile(&lr, &p10, delta, 1).unwrap();
        assert!((b.kt - LN_2).abs() < 1e-12);
        assert!(b.feasible);

        // frozen: ln2 + 2 ln(2^20) + ln tanh(2^-5) = 24.952973053479
        let p1 = UpdateRateSchedule::polynomial(1.0).unwrap();
        let b = barrier_profile(&lr, &p1, delta, 1 << 20).unwrap();
        assert!((b.kt - 24.952973053479).abs() < 1e-9, "{}", b.kt);

        // frozen: ln2 + 10 + ln tanh(2^15/10) = 10.693147180560
        let eu = UpdateRateSchedule::exp_unit();
        let b = barrier_profile(&lr, &eu, delta, 10).unwrap();
        assert!((b.kt - 10.693147180560).abs() < 1e-9);
    }

    #[test]
    fn barrier_profile_landauer_recovery() {
        // eps = 1, r = 1, tilt -> inf: the Landauer floor
        let lr = LearningRateSchedule::harmonic();
        let p = UpdateRateSchedule::polynomial(3.0).unwrap();
        let b = barrier_profile(&lr, &p, 1e-300, 1).unwrap();
        assert!((b.kt - LN_2).abs() < 1e-12);
    }

    #[test]
    fn lim_a_closed_values() {
        let env = env300();
        let w1 = Workload::with_delta("unit-delta", 1.0, 1.0, 1.0).unwrap();
        // frozen zeta ratios
        let e = lim_a_closed_poly(&w1, 1.0, &env).unwrap();
        assert!((e.dynamic_kt_per_op - 0.7307629694014385).abs() < 1e-9);
        let e = lim_a_closed_poly(&w1, 1e-3, &env).unwrap();
        assert!((e.dynamic_kt_per_op - 1.6430489989825484e-3).abs() < 1e-9);
        let e = lim_a_closed_poly(&w1, 10.0, &env).unwrap();
        assert!((e.dynamic_kt_per_op - 0.9997520204978326).abs() < 1e-9);
        assert!(lim_a_closed_poly(&w1, 0.0, &env).is_err());
    }

    #[test]
    fn lim_a_numeric_agrees_with_closed() {
        let env = env300();
        let lr = LearningRateSchedule::harmonic();
        for &gamma in &[0.5, 1.0, 2.0, 5.0, 10.0] {
            for &bits in &[8.0, 16.0] {
                let w = brain(bits);
                let ur = UpdateRateSchedule::polynomial(gamma).unwrap();
                let num = lim_a_numeric(&w, &lr, &ur, &env, 1e-9).unwrap();
                let closed = lim_a_closed_poly(&w, gamma, &env).unwrap();
                let rel = (num.dynamic_kt_per_op - closed.dynamic_kt_per_op).abs()
                    / closed.dynamic_kt_per_op;
                assert!(rel < 1e-6, "gamma={gamma} bits={bits}: rel={rel}");
            }
        }
    }

    #[test]
    fn lim_a_brain_scale_total() {
        let env = env300();
        let w = brain(16.0);
        let e = lim_a_closed_poly(&w, 1.0, &env).unwrap();
        // frozen: 65536 * zeta(3)/zeta(2) * 1e28 * kT + retention ~ 1.984e12 J
        assert!(
            (e.total_joules - 1.9837e12).abs() < 0.01e12,
            "{}",
            e.total_joules
        );
    }

    #[test]
    fn lim_b_numeric_frozen_values() {
        let env = env300();
        let lr = LearningRateSchedule::harmonic();
        let cal = LimCalibration::Asymptotic;

        let w16 = brain(16.0);
        let p10 = UpdateRateSchedule::polynomial(10.0).unwrap();
        let e = lim_b_numeric(&w16, &lr, &p10, &env, &cal, 1e-9).unwrap();
        assert!(
            (e.dynamic_kt_per_op - 0.696940550366).abs() < 1e-8,
            "{}",
            e.dynamic_kt_per_op
        );
        assert!(
            (e.total_joules - 2.8867e7).abs() < 0.01e7,
            "{}",
            e.total_joules
        );

        let w8 = brain(8.0);
        let p2 = UpdateRateSchedule::polynomial(2.0).unwrap();
        let e = lim_b_numeric(&w8, &lr, &p2, &env, &cal, 1e-9).unwrap();
        assert!(
            (e.dynamic_kt_per_op - 1.18758852415).abs() < 1e-8,
            "{}",
            e.dynamic_kt_per_op
        );
    }

    #[test]
    fn lim_b_numeric_tiny_delta_approaches_ub_from_below() {
        let env = env300();
        let lr = LearningRateSchedule::harmonic();
        let cal = LimCalibration::Asymptotic;
        let w = Workload::with_bits("hp", 1e28, 1e15, 64.0).unwrap();
        let ur = UpdateRateSchedule::polynomial(0.01).unwrap();
        let e = lim_b_numeric(&w, &lr, &ur, &env, &cal, 1e-9).unwrap();
        assert!(e.dynamic_kt_per_op < 64.0 * LN_2);
        assert!(e.dynamic_kt_per_op > 0.5 * 64.0 * LN_2);
    }

    #[test]
    fn lim_b_bounds_frozen_values() {
        let env = env300();
        let w = brain(16.0);
        assert!((lim_b_upper(&w, &env).dynamic_kt_per_op - 11.090354888959125).abs() < 1e-12);
        // flops term of the ceiling at brain scale ~ 4.594e8 J
        let ub = lim_b_upper(&w, &env);
        assert!((ub.dynamic_joules - 4.5936e8).abs() < 0.003e8);

        let lb10 = lim_b_lower_closed(&w, 10.0, &env).unwrap();
        assert!((lb10.dynamic_kt_per_op - 0.696595698565).abs() < 1e-10);
        let lb2 = lim_b_lower_closed(&w, 2.0, &env).unwrap();
        assert!((lb2.dynamic_kt_per_op - 1.022792544876).abs() < 1e-10);
        let lb50 = lim_b_lower_closed(&w, 50.0, &env).unwrap();
        assert!((lb50.dynamic_kt_per_op - LN_2).abs() < 1e-6);
    }

    #[test]
    fn lim_b_lower_finite_frozen_values() {
        let env = env300();
        let w = brain(16.0);
        let e = lim_b_lower_finite(&w, 10.0, &env, None).unwrap();
        assert!(
            (e.dynamic_kt_per_op - 0.696940550366).abs() < 1e-9,
            "{}",
            e.dynamic_kt_per_op
        );
        let e = lim_b_lower_finite(&w, 10.0, &env, Some(1)).unwrap();
        assert!((e.dynamic_kt_per_op - LN_2).abs() < 1e-15);
        let e = lim_b_lower_finite(&w, 2.0, &env, Some(65536)).unwrap();
        assert!(
            (e.dynamic_kt_per_op - 1.187615223667).abs() < 1e-9,
            "{}",
            e.dynamic_kt_per_op
        );
    }

    #[test]
    fn exp_closed_frozen_values() {
        let env = env300();
        let w1 = Workload::with_delta("unit-delta", 1.0, 1.0, 1.0).unwrap();
        let a1 = lim_a_exp_closed(&w1, 1.0, &env).unwrap();
        assert!((a1.dynamic_kt_per_op - 0.7881331674844335).abs() < 1e-12);
        let a5 = lim_a_exp_closed(&w1, 5.0, &env).unwrap();
        assert!((a5.dynamic_kt_per_op - 0.996623434250114).abs() < 1e-12);
        let a30 = lim_a_exp_closed(&w1, 30.0, &env).unwrap();
        assert!((a30.dynamic_kt_per_op - 1.0).abs() < 1e-10);

        let b1 = lim_b_exp_closed(&w1, 1.0, &env).unwrap();
        assert!((b1.dynamic_kt_per_op - 2.2751238874292717).abs() < 1e-12);
        let btiny = lim_b_exp_closed(&w1, 1e-6, &env).unwrap();
        assert!((btiny.dynamic_kt_per_op - (LN_2 + 1.0)).abs() < 1e-6);
        let b10 = lim_b_exp_closed(&w1, 10.0, &env).unwrap();
        assert!((b10.dynamic_kt_per_op - 10.693601200470).abs() < 1e-10);
    }

    #[test]
    fn exp_closed_forms_match_numeric_sums() {
        let env = env300();
        let lr = LearningRateSchedule::harmonic();
        let w = brain(16.0);
        let cal = LimCalibration::Asymptotic;
        for &gamma in &[0.5, 1.0, 2.0] {
            let ur = UpdateRateSchedule::exponential(gamma).unwrap();
            let a_num = lim_a_numeric(&w, &lr, &ur, &env, 1e-9).unwrap();
            let a_closed = lim_a_exp_closed(&w, gamma, &env).unwrap();
            let rel = (a_num.dynamic_kt_per_op - a_closed.dynamic_kt_per_op).abs()
                / a_closed.dynamic_kt_per_op;
            assert!(rel < 1e-6, "A gamma={gamma}: {rel}");

            // tanh-saturated head: numeric matches the closed form
            let b_num = lim_b_numeric(&w, &lr, &ur, &env, &cal, 1e-9).unwrap();
            let b_closed = lim_b_exp_closed(&w, gamma, &env).unwrap();
            let rel = (b_num.dynamic_kt_per_op - b_closed.dynamic_kt_per_op).abs()
                / b_closed.dynamic_kt_per_op;
            assert!(rel < 1e-6, "B gamma={gamma}: {rel}");
        }
    }

    #[test]
    fn ceb_spec_examples() {
        let env = env300();
        let w = brain(16.0);
        let e = ceb_energy(&w, Some(1e-15), Some(16.0), &env).unwrap();
        assert!((e.total_joules - 1.6e14).abs() < 1e14 * 1e-9);
        let e = ceb_energy(&w, Some(1e-12), Some(16.0), &env).unwrap();
        assert!((e.total_joules - 1.6e17).abs() < 1e17 * 1e-9);

        // one-bit retention at the Landauer energy
        let wb = Workload::with_bits("bit", 1e-300, 1.0, 1.0).unwrap();
        let e = ceb_energy(&wb, Some(env.kt() * LN_2), Some(1.0), &env).unwrap();
        assert!((e.retention_joules - env.kt() * LN_2).abs() < 1e-30);
    }

    #[test]
    fn measurement_limit_parameter_independence() {
        let reference = measurement_limit_per_bit();
        assert!((reference - 4.355172180607204).abs() < 1e-12);
        for &(c, w, f) in &[(1e-15, 1.0, 1e9), (1e-12, 0.1, 1e6), (3.3e-14, 0.42, 2.5e8)] {
            assert_eq!(measurement_limit_from_params(c, w, f), reference);
        }
    }

    #[test]
    fn shannon_capacity_endpoints() {
        assert_eq!(shannon_capacity(0.5, 1e9), 0.0);
        assert_eq!(shannon_capacity(0.0, 1e9), 1e9);
        assert_eq!(shannon_capacity(1.0, 1e9), 1e9);
    }

    #[test]
    fn landauer_measurement_values() {
        let env = env300();
        let per_bit = LN_2 + measurement_limit_per_bit();
        assert!((per_bit - 5.04831936116715).abs() < 1e-12);
        assert!((per_bit - 5.04).abs() / 5.04 < 0.005);

        let w = brain(16.0);
        let e = landauer_measurement_total(&w, None, &env).unwrap();
        assert!(
            (e.total_joules - 3.3456e9).abs() < 0.003e9,
            "{}",
            e.total_joules
        );
    }

    #[test]
    fn trajectory_power_and_shape() {
        let env = env300();
        let lr = LearningRateSchedule::harmonic();
        let delta = 2f64.powi(-16);
        let p10 = UpdateRateSchedule::polynomial(10.0).unwrap();
        let t = trajectory(&lr, &p10, delta, 1e12, 64, 1 << 20, &env).unwrap();
        let first = &t.points[0];
        assert_eq!(first.n, 1);
        assert!((first.barrier_kt - LN_2).abs() < 1e-12);
        assert!((first.power_watts - 2.8710e-9).abs() < 1e-13);
        assert!(t.barrier_monotone);

        // saturated head grows as (1+gamma) ln n
        let p2 = UpdateRateSchedule::polynomial(2.0).unwrap();
        let t = trajectory(&lr, &p2, delta, 1e12, 16, 1024, &env).unwrap();
        for p in &t.points {
            if p.tilt_kt > 50.0 {
                let expected = 3.0 * (p.n as f64).ln();
                assert!((p.barrier_kt - LN_2 - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn temperature_and_scale_linearity() {
        let lr = LearningRateSchedule::harmonic();
        let ur = UpdateRateSchedule::polynomial(2.0).unwrap();
        let w = brain(16.0);
        let cal = LimCalibration::Asymptotic;
        let cold = ThermalEnvironment::new(150.0).unwrap();
        let hot = ThermalEnvironment::new(300.0).unwrap();
        let ec = lim_b_numeric(&w, &lr, &ur, &cold, &cal, 1e-9).unwrap();
        let eh = lim_b_numeric(&w, &lr, &ur, &hot, &cal, 1e-9).unwrap();
        assert!((eh.total_joules / ec.total_joules - 2.0).abs() < 1e-12);

        let w2 = Workload::with_bits("double", 2e28, 1e15, 16.0).unwrap();
        let e2 = lim_b_numeric(&w2, &lr, &ur, &hot, &cal, 1e-9).unwrap();
        assert!((e2.dynamic_joules / eh.dynamic_joules - 2.0).abs() < 1e-12);
        let w3 = Workload::with_bits("double-m", 1e28, 2e15, 16.0).unwrap();
        let e3 = lim_b_numeric(&w3, &lr, &ur, &hot, &cal, 1e-9).unwrap();
        assert!((e3.retention_joules / eh.retention_joules - 2.0).abs() < 1e-12);
    }

    #[test]
    fn manual_calibration_overrides_tilt() {
        let env = env300();
        let lr = LearningRateSchedule::harmonic();
        let ur = UpdateRateSchedule::polynomial(2.0).unwrap();
        let w = brain(16.0);
        // beta * lambda_min * 2^(-2P) = 65536 reproduces the asymptotic mode
        let cal = LimCalibration::manual(65536.0 * 16.0, 1.0, 2.0).unwrap();
        assert_eq!(cal.c(w.delta()), 65536.0);
        let manual = lim_b_numeric(&w, &lr, &ur, &env, &cal, 1e-9).unwrap();
        let auto = lim_b_numeric(&w, &lr, &ur, &env, &LimCalibration::Asymptotic, 1e-9).unwrap();
        assert!((manual.dynamic_kt_per_op - auto.dynamic_kt_per_op).abs() < 1e-12);
    }

    #[test]
    fn estimate_total_consistency() {
        let env = env300();
        let w = brain(16.0);
        let e = lim_b_upper(&w, &env);
        let expected = (w.flops() * e.dynamic_kt_per_op + e.retention_kt) * env.kt();
        assert!((e.total_joules - expected).abs() <= f64::EPSILON * expected);
        assert!((e.retention_kt - w.params() * 16.0 * LN_2).abs() < 1e-3);
    }
}
