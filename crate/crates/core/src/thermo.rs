//! Physical constants, unit conversion, and bistable-well kinetics.
//!
//! Every quantity in this crate is carried as a dimensionless multiple of
//! kT; joules appear only at the output boundary via [`to_joules`]. This
//! avoids catastrophic underflow when working at the 1e-21 J scale.
//!
//! The memory cell is a bistable potential well: two states separated by a
//! barrier of height `E0` (kT units), tilted by an extrinsic energy offset
//! `dE` (kT units). The net forward transition rate is
//!
//! ```text
//! R = 2 * R_max * exp(-E0) * tanh(dE / 2)
//! ```
//!
//! and inverting for the barrier gives
//!
//! ```text
//! E0 = log(2 * R_max / R) + log(tanh(dE / 2))
//! ```

use serde::Serialize;
use thiserror::Error;

/// Boltzmann constant in joules per kelvin (exact, 2019 SI definition).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Default operating temperature in kelvin.
pub const DEFAULT_TEMPERATURE: f64 = 300.0;

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("energy barrier must be non-negative, got {0} kT")]
    NegativeBarrier(f64),
    #[error("tilt must be non-negative, got {0} kT")]
    NegativeTilt(f64),
    #[error("maximum update rate must be positive, got {0} /s")]
    NonPositiveRate(f64),
    #[error("update rate must be positive, got {0} /s (log singularity)")]
    NonPositiveTargetRate(f64),
    #[error("tilt must be positive for barrier inversion, got {0} kT (log singularity)")]
    NonPositiveTiltForInversion(f64),
}

/// Operating temperature and the derived kT energy scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalEnvironment {
    temperature: f64,
    kt: f64,
}

impl ThermalEnvironment {
    pub fn new(temperature: f64) -> Result<Self, ThermoError> {
        if !(temperature > 0.0) {
            return Err(ThermoError::NonPositiveTemperature(temperature));
        }
        Ok(Self {
            temperature,
            kt: BOLTZMANN * temperature,
        })
    }

    /// Temperature in kelvin.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// kT in joules.
    pub fn kt(&self) -> f64 {
        self.kt
    }
}

impl Default for ThermalEnvironment {
    fn default() -> Self {
        Self::new(DEFAULT_TEMPERATURE).expect("default temperature is positive")
    }
}

/// Kinetic parameters of one bistable memory cell.
///
/// `barrier` and `tilt` are dimensionless energies in kT units; `r_max` is
/// the physical switching ceiling in updates per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BistableCellParams {
    barrier: f64,
    tilt: f64,
    r_max: f64,
}

impl BistableCellParams {
    pub fn new(barrier: f64, tilt: f64, r_max: f64) -> Result<Self, ThermoError> {
        if !(barrier >= 0.0) {
            return Err(ThermoError::NegativeBarrier(barrier));
        }
        if !(tilt >= 0.0) {
            return Err(ThermoError::NegativeTilt(tilt));
        }
        if !(r_max > 0.0) {
            return Err(ThermoError::NonPositiveRate(r_max));
        }
        Ok(Self {
            barrier,
            tilt,
            r_max,
        })
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }
}

/// Equilibrium transition probability over a barrier: `exp(-barrier)`.
///
/// Equals the baseline rate fraction `R0 / R_max`.
pub fn p_transition(barrier: f64) -> Result<f64, ThermoError> {
    if !(barrier >= 0.0) {
        return Err(ThermoError::NegativeBarrier(barrier));
    }
    Ok((-barrier).exp())
}

/// Net forward update rate of a tilted cell, in updates per second.
///
/// `R = 2 * r_max * exp(-barrier) * tanh(tilt / 2)`. The tanh form is the
/// algebraically stable version of `(e^x - 1) / (e^x + 1)`. The result is
/// not clamped to `[0, r_max]`; feasibility is the caller's check via
/// [`is_feasible`].
pub fn net_update_rate(cell: &BistableCellParams) -> f64 {
    2.0 * cell.r_max * (-cell.barrier).exp() * (cell.tilt / 2.0).tanh()
}

/// `log(tanh(x / 2))` evaluated without overflow or cancellation, x > 0.
///
/// Three branches cover tilts spanning roughly [1e-10, 1e10]:
/// - `x >= 20`: `tanh(x/2) = 1 - 2e^-x/(1+e^-x)`, so `ln_1p(-2e^-x)` to
///   within O(e^-2x);
/// - `x <= 1e-8`: leading Taylor terms `log(x/2) - x^2/12`;
/// - otherwise direct evaluation.
///
/// Panics if `x <= 0` (the log has no real value there); public entry
/// points validate tilts before calling.
pub fn log_tanh_half(x: f64) -> f64 {
    assert!(x > 0.0, "log_tanh_half requires positive tilt, got {x}");
    if x >= 20.0 {
        (-2.0 * (-x).exp()).ln_1p()
    } else if x <= 1e-8 {
        (x / 2.0).ln() - x * x / 12.0
    } else {
        (x / 2.0).tanh().ln()
    }
}

/// Barrier height (kT units) required to achieve `rate` at a given tilt.
///
/// `E0 = log(2 r_max / rate) + log(tanh(tilt / 2))`. May be negative,
/// which marks the requested point as physically inadmissible; callers
/// interpret the sign.
pub fn barrier_for_rate(rate: f64, tilt: f64, r_max: f64) -> Result<f64, ThermoError> {
    if !(rate > 0.0) {
        return Err(ThermoError::NonPositiveTargetRate(rate));
    }
    if !(tilt > 0.0) {
        return Err(ThermoError::NonPositiveTiltForInversion(tilt));
    }
    if !(r_max > 0.0) {
        return Err(ThermoError::NonPositiveRate(r_max));
    }
    Ok((2.0 * r_max / rate).ln() + log_tanh_half(tilt))
}

/// An update rate is admissible iff it does not exceed the switching ceiling.
pub fn is_feasible(rate: f64, r_max: f64) -> bool {
    rate <= r_max
}

/// Convert a dimensionless kT multiple to joules.
pub fn to_joules(value_kt: f64, env: &ThermalEnvironment) -> f64 {
    value_kt * env.kt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn transition_probability_examples() {
        assert_eq!(p_transition(0.0).unwrap(), 1.0);
        assert!((p_transition(LN2).unwrap() - 0.5).abs() < 1e-15);
        assert!((p_transition(10.0).unwrap() - 4.5399929762484854e-5).abs() < 1e-18);
        assert_eq!(p_transition(-0.1), Err(ThermoError::NegativeBarrier(-0.1)));
    }

    #[test]
    fn net_rate_reaches_ceiling_at_log3_tilt() {
        // tanh(ln(3)/2) = 1/2 exactly, so a barrier-free cell runs at r_max.
        let cell = BistableCellParams::new(0.0, 3.0f64.ln(), 7.5e11).unwrap();
        let rate = net_update_rate(&cell);
        assert!((rate - 7.5e11).abs() / 7.5e11 < 1e-12);
    }

    #[test]
    fn net_rate_zero_tilt_means_no_drift() {
        let cell = BistableCellParams::new(3.0, 0.0, 1e9).unwrap();
        assert_eq!(net_update_rate(&cell), 0.0);
    }

    #[test]
    fn net_rate_landauer_barrier_saturated_tilt() {
        let cell = BistableCellParams::new(LN2, 1e3, 2.0e6).unwrap();
        let rate = net_update_rate(&cell);
        assert!((rate - 2.0e6).abs() / 2.0e6 < 1e-12);
    }

    #[test]
    fn barrier_inversion_examples() {
        // rate = r_max at tilt ln(3): barrier exactly zero.
        let b = barrier_for_rate(1e12, 3.0f64.ln(), 1e12).unwrap();
        assert!(b.abs() < 1e-14);
        // saturated tilt recovers the Landauer barrier.
        let b = barrier_for_rate(1e12, 1e3, 1e12).unwrap();
        assert!((b - LN2).abs() / LN2 < 1e-9);
        // half rate costs one extra factor of two.
        let b = barrier_for_rate(5e11, 1e3, 1e12).unwrap();
        assert!((b - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn barrier_inversion_domain_errors() {
        assert!(matches!(
            barrier_for_rate(0.0, 1.0, 1.0),
            Err(ThermoError::NonPositiveTargetRate(_))
        ));
        assert!(matches!(
            barrier_for_rate(1.0, 0.0, 1.0),
            Err(ThermoError::NonPositiveTiltForInversion(_))
        ));
        assert!(matches!(
            barrier_for_rate(1.0, 1.0, 0.0),
            Err(ThermoError::NonPositiveRate(_))
        ));
    }

    #[test]
    fn feasibility_boundary() {
        assert!(is_feasible(0.5, 1.0));
        assert!(is_feasible(1.0, 1.0));
        assert!(!is_feasible(1.0 + 1e-12, 1.0));
    }

    #[test]
    fn joules_conversion_at_room_temperature() {
        let env = ThermalEnvironment::new(300.0).unwrap();
        assert!((to_joules(1.0, &env) - 4.141947e-21).abs() < 1e-27);
        assert_eq!(to_joules(0.0, &env), 0.0);
        assert!((to_joules(LN2, &env) - 2.870978885078724e-21).abs() < 1e-27);
    }

    #[test]
    fn environment_rejects_non_positive_temperature() {
        assert!(ThermalEnvironment::new(0.0).is_err());
        assert!(ThermalEnvironment::new(-1.0).is_err());
        assert!(ThermalEnvironment::new(f64::NAN).is_err());
    }

    #[test]
    fn log_tanh_half_branches_agree_at_seams() {
        // crossing the x = 20 seam
        let lo = (19.999999f64 / 2.0).tanh().ln();
        assert!((log_tanh_half(19.999999) - lo).abs() < 1e-15);
        let hi = log_tanh_half(20.000001);
        assert!((hi - lo).abs() < 1e-13);
        // tiny-x branch against direct evaluation just above the seam
        let x = 2e-8f64;
        let direct = (x / 2.0).tanh().ln();
        assert!((log_tanh_half(x) - direct).abs() < 1e-12);
    }

    #[test]
    fn tanh_form_matches_naive_ratio() {
        // (e^x - 1)/(e^x + 1) == tanh(x/2) wherever the naive form is finite;
        // e^x - 1 spelled exp_m1 so the comparison is not dominated by the
        // subtraction's own rounding at small x
        for &x in &[1e-6f64, 0.1, 1.0, 5.0, 30.0, 100.0, 700.0] {
            let naive = x.exp_m1() / (x.exp() + 1.0);
            let stable = (x / 2.0).tanh();
            assert!(
                (stable - naive).abs() <= 1e-14 * naive.abs(),
                "mismatch at x={x}: {stable} vs {naive}"
            );
        }
    }

    #[test]
    fn round_trip_rate_through_barrier() {
        let r_max = 1e12;
        for &tilt in &[1e-9, 1e-4, 0.3, 2.0, 25.0, 1e3] {
            for &frac in &[1e-8, 1e-3, 0.5, 1.0] {
                let rate = frac * r_max;
                let b = barrier_for_rate(rate, tilt, r_max).unwrap();
                if b < 0.0 {
                    continue; // inadmissible pair, nothing to round-trip
                }
                let cell = BistableCellParams::new(b, tilt, r_max).unwrap();
                let back = net_update_rate(&cell);
                assert!(
                    (back - rate).abs() / rate < 1e-12,
                    "round trip failed: tilt={tilt} rate={rate} -> {back}"
                );
            }
        }
    }
}
