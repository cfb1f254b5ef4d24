//! Parametric learning-rate and update-rate schedules.
//!
//! Learning rates follow the harmonic family `eps_n = 1 / (n + n0)` so that
//! the step sizes vanish while their partial sums diverge. Update-rate
//! schedules are normalized profiles `r(n) = R_n / R_max` drawn from four
//! closed-form families, all monotone decaying to zero and summable:
//!
//! - `poly:G`    — `r(n) = n^-(1+G)`, `G > 0`
//! - `exp:G`     — `r(n) = exp(-G n)`, `G > 0`
//! - `expunit`   — `r(n) = exp(-n)`
//! - `logpoly`   — `r(n) = n^(-ln n)`
//!
//! Schedules are closed-form families rather than callbacks so the series
//! engine can attach family-specific, certified tail bounds.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("learning-rate offset must be non-negative, got {0}")]
    NegativeOffset(f64),
    #[error(
        "schedule exponent gamma must be positive, got {0} (gamma = 0 makes the rate sum diverge)"
    )]
    NonPositiveGamma(f64),
    #[error("step index must be >= 1, got {0}")]
    StepOutOfRange(u64),
    #[error(
        "unrecognized schedule spec '{0}' (expected poly:GAMMA, exp:GAMMA, expunit, or logpoly)"
    )]
    BadSpec(String),
}

/// Harmonic learning-rate schedule `eps_n = 1 / (n + n0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LearningRateSchedule {
    offset: f64,
}

impl LearningRateSchedule {
    /// Plain harmonic schedule, `eps_1 = 1`.
    pub fn harmonic() -> Self {
        Self { offset: 0.0 }
    }

    /// Harmonic schedule with offset `n0 >= 0`, `eps_n = 1 / (n + n0)`.
    pub fn harmonic_with_offset(offset: f64) -> Result<Self, ScheduleError> {
        if !(offset >= 0.0) {
            return Err(ScheduleError::NegativeOffset(offset));
        }
        Ok(Self { offset })
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `eps_n` for step `n >= 1`.
    pub fn eval(&self, n: u64) -> Result<f64, ScheduleError> {
        if n < 1 {
            return Err(ScheduleError::StepOutOfRange(n));
        }
        Ok(1.0 / (n as f64 + self.offset))
    }

    /// Lower bound on the partial sum of `eps_n` up to `N`:
    /// `sum_{n<=N} 1/(n+n0) >= log(N+1) - log(1+n0)`.
    pub fn divergence_bound(&self, n_max: u64) -> f64 {
        ((n_max as f64) + 1.0).ln() - (1.0 + self.offset).ln()
    }
}

impl Default for LearningRateSchedule {
    fn default() -> Self {
        Self::harmonic()
    }
}

/// Normalized update-rate schedule family, `r(n) = R_n / R_max` in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum UpdateRateSchedule {
    Polynomial { gamma: f64 },
    Exponential { gamma: f64 },
    ExpUnit,
    LogPoly,
}

impl UpdateRateSchedule {
    /// `r(n) = n^-(1+gamma)`, requires `gamma > 0` so the profile decays
    /// strictly faster than `1/n` and its sum converges.
    pub fn polynomial(gamma: f64) -> Result<Self, ScheduleError> {
        if !(gamma > 0.0) {
            return Err(ScheduleError::NonPositiveGamma(gamma));
        }
        Ok(Self::Polynomial { gamma })
    }

    /// `r(n) = exp(-gamma n)`, requires `gamma > 0`.
    pub fn exponential(gamma: f64) -> Result<Self, ScheduleError> {
        if !(gamma > 0.0) {
            return Err(ScheduleError::NonPositiveGamma(gamma));
        }
        Ok(Self::Exponential { gamma })
    }

    /// `r(n) = exp(-n)`.
    pub fn exp_unit() -> Self {
        Self::ExpUnit
    }

    /// `r(n) = n^(-ln n) = exp(-(ln n)^2)`.
    pub fn log_poly() -> Self {
        Self::LogPoly
    }

    /// `r(n)` for step `n >= 1`; always in (0, 1].
    pub fn eval(&self, n: u64) -> Result<f64, ScheduleError> {
        if n < 1 {
            return Err(ScheduleError::StepOutOfRange(n));
        }
        Ok((-self.neg_log_rate(n as f64)).exp())
    }

    /// Decay exponent of the parametric families, if any.
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Self::Polynomial { gamma } | Self::Exponential { gamma } => Some(gamma),
            Self::ExpUnit | Self::LogPoly => None,
        }
    }

    /// `log(1 / r(n))` in closed form; `n` need not be integral.
    ///
    /// Estimators work with this decomposition instead of `ln(r(n))` so
    /// that barrier arithmetic cannot overflow even at n ~ 1e300.
    pub fn neg_log_rate(&self, n: f64) -> f64 {
        debug_assert!(n >= 1.0);
        match *self {
            Self::Polynomial { gamma } => (1.0 + gamma) * n.ln(),
            Self::Exponential { gamma } => gamma * n,
            Self::ExpUnit => n,
            Self::LogPoly => {
                let l = n.ln();
                l * l
            }
        }
    }
}

impl FromStr for UpdateRateSchedule {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let spec = s.trim();
        if spec.eq_ignore_ascii_case("expunit") {
            return Ok(Self::ExpUnit);
        }
        if spec.eq_ignore_ascii_case("logpoly") {
            return Ok(Self::LogPoly);
        }
        if let Some((family, gamma)) = spec.split_once(':') {
            let gamma: f64 = gamma
                .trim()
                .parse()
                .map_err(|_| ScheduleError::BadSpec(s.to_string()))?;
            return match family.trim().to_ascii_lowercase().as_str() {
                "poly" => Self::polynomial(gamma),
                "exp" => Self::exponential(gamma),
                _ => Err(ScheduleError::BadSpec(s.to_string())),
            };
        }
        Err(ScheduleError::BadSpec(s.to_string()))
    }
}

impl fmt::Display for UpdateRateSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Polynomial { gamma } => write!(f, "poly:{gamma}"),
            Self::Exponential { gamma } => write!(f, "exp:{gamma}"),
            Self::ExpUnit => write!(f, "expunit"),
            Self::LogPoly => write!(f, "logpoly"),
        }
    }
}

/// Outcome of the asymptotic-constraint checks for a schedule pair.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// r(n) <= 1 everywhere on the sampled grid.
    pub rate_bounded: bool,
    /// r non-increasing over the grid.
    pub rate_monotone: bool,
    /// eps strictly decreasing over the grid.
    pub lr_monotone: bool,
    /// Exact partial sum of eps_n up to the grid maximum.
    pub lr_partial_sum: f64,
    /// Analytic lower bound the partial sum must exceed.
    pub lr_divergence_bound: f64,
    /// Partial sum reached its divergence witness.
    pub lr_diverges: bool,
    /// Finite analytic bound on the rate tail beyond the grid maximum.
    pub rate_tail_bound: f64,
    /// Tail bound is finite, witnessing summability of r.
    pub rate_summable: bool,
    /// Every check passed.
    pub pass: bool,
}

const GRID_MAX: u64 = 1_000_000;

/// Check the asymptotic constraints on a schedule pair over a logarithmic
/// grid up to n = 1e6: boundedness and monotonicity of both profiles, a
/// divergence witness for the learning-rate sum, and a finite tail bound
/// for the update-rate sum.
pub fn validate_schedules(lr: &LearningRateSchedule, ur: &UpdateRateSchedule) -> ValidationReport {
    let grid = log_grid(GRID_MAX);

    let mut rate_bounded = true;
    let mut rate_monotone = true;
    let mut lr_monotone = true;
    let mut prev_r = f64::INFINITY;
    let mut prev_e = f64::INFINITY;
    for &n in &grid {
        let r = ur.eval(n).expect("grid index >= 1");
        let e = lr.eval(n).expect("grid index >= 1");
        // exponential families underflow to exactly 0 late in the grid;
        // the mathematical value is still in (0, 1]
        if !(0.0..=1.0).contains(&r) {
            rate_bounded = false;
        }
        if r > prev_r {
            rate_monotone = false;
        }
        if e >= prev_e {
            lr_monotone = false;
        }
        prev_r = r;
        prev_e = e;
    }

    let mut lr_partial_sum = 0.0;
    for n in 1..=GRID_MAX {
        lr_partial_sum += 1.0 / (n as f64 + lr.offset());
    }
    let lr_divergence_bound = lr.divergence_bound(GRID_MAX);
    let lr_diverges = lr_partial_sum >= lr_divergence_bound;

    let rate_tail_bound = rate_tail_bound(ur, GRID_MAX);
    let rate_summable = rate_tail_bound.is_finite();

    let pass = rate_bounded && rate_monotone && lr_monotone && lr_diverges && rate_summable;
    ValidationReport {
        rate_bounded,
        rate_monotone,
        lr_monotone,
        lr_partial_sum,
        lr_divergence_bound,
        lr_diverges,
        rate_tail_bound,
        rate_summable,
        pass,
    }
}

/// Upper bound on `sum_{n > n_from} r(n)`, finite for every family.
pub fn rate_tail_bound(ur: &UpdateRateSchedule, n_from: u64) -> f64 {
    let nf = n_from as f64;
    match *ur {
        // integral test: sum_{n>N} n^-(1+g) <= N^-g / g
        UpdateRateSchedule::Polynomial { gamma } => nf.powf(-gamma) / gamma,
        // exact geometric tail: e^(-g(N+1)) / (1 - e^-g)
        UpdateRateSchedule::Exponential { gamma } => {
            (-gamma * (nf + 1.0)).exp() / -(-gamma).exp_m1()
        }
        UpdateRateSchedule::ExpUnit => (-(nf + 1.0)).exp() / -(-1.0f64).exp_m1(),
        // n^(-ln n) <= n^(-ln N) for n >= N, then the integral test;
        // needs ln N > 2, amply true at the 1e6 grid edge.
        UpdateRateSchedule::LogPoly => {
            let l = nf.ln();
            nf.powf(1.0 - l) / (l - 1.0)
        }
    }
}

/// Logarithmically spaced integer grid over [1, n_max], deduplicated.
pub(crate) fn log_grid(n_max: u64) -> Vec<u64> {
    let points = 600usize;
    let mut grid = Vec::with_capacity(points);
    let lmax = (n_max as f64).ln();
    let mut last = 0u64;
    for i in 0..=points {
        let n = (lmax * i as f64 / points as f64).exp().round() as u64;
        let n = n.clamp(1, n_max);
        if n != last {
            grid.push(n);
            last = n;
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_values() {
        let lr = LearningRateSchedule::harmonic();
        assert_eq!(lr.eval(1).unwrap(), 1.0);
        assert_eq!(lr.eval(10).unwrap(), 0.1);
        let off = LearningRateSchedule::harmonic_with_offset(4.0).unwrap();
        assert_eq!(off.eval(6).unwrap(), 0.1);
        assert!(lr.eval(0).is_err());
    }

    #[test]
    fn update_rate_values() {
        let poly = UpdateRateSchedule::polynomial(1.0).unwrap();
        assert!((poly.eval(2).unwrap() - 0.25).abs() < 1e-15);
        let exp = UpdateRateSchedule::exponential(0.5).unwrap();
        assert!((exp.eval(2).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(UpdateRateSchedule::log_poly().eval(1).unwrap(), 1.0);
        assert!(poly.eval(0).is_err());
    }

    #[test]
    fn gamma_zero_rejected_at_construction() {
        assert_eq!(
            UpdateRateSchedule::polynomial(0.0),
            Err(ScheduleError::NonPositiveGamma(0.0))
        );
        assert!(UpdateRateSchedule::exponential(-1.0).is_err());
        // the gamma -> 0 limit is probed with small positive gamma instead
        assert!(UpdateRateSchedule::polynomial(1e-3).is_ok());
    }

    #[test]
    fn normalization_at_first_step() {
        assert_eq!(
            UpdateRateSchedule::polynomial(3.0)
                .unwrap()
                .eval(1)
                .unwrap(),
            1.0
        );
        assert_eq!(UpdateRateSchedule::log_poly().eval(1).unwrap(), 1.0);
        let e = UpdateRateSchedule::exponential(0.7).unwrap();
        assert!((e.eval(1).unwrap() - (-0.7f64).exp()).abs() < 1e-15);
        assert!(e.eval(1).unwrap() < 1.0);
    }

    #[test]
    fn spec_grammar_round_trips() {
        for s in ["poly:2", "exp:0.5", "expunit", "logpoly"] {
            let ur: UpdateRateSchedule = s.parse().unwrap();
            let back: UpdateRateSchedule = ur.to_string().parse().unwrap();
            assert_eq!(ur, back);
        }
        assert!("poly:0".parse::<UpdateRateSchedule>().is_err());
        assert!("poly".parse::<UpdateRateSchedule>().is_err());
        assert!("gauss:1".parse::<UpdateRateSchedule>().is_err());
        assert!("poly:abc".parse::<UpdateRateSchedule>().is_err());
    }

    #[test]
    fn validation_passes_for_spec_pairs() {
        let lr = LearningRateSchedule::harmonic();
        for ur in [
            UpdateRateSchedule::polynomial(1.0).unwrap(),
            UpdateRateSchedule::exp_unit(),
            UpdateRateSchedule::exponential(0.25).unwrap(),
            UpdateRateSchedule::log_poly(),
        ] {
            let report = validate_schedules(&lr, &ur);
            assert!(report.pass, "{ur} failed validation: {report:?}");
        }
    }

    #[test]
    fn harmonic_partial_sum_witnesses_divergence() {
        let lr = LearningRateSchedule::harmonic();
        let report = validate_schedules(&lr, &UpdateRateSchedule::polynomial(1.0).unwrap());
        // sum_{n<=1e6} 1/n ~ ln(1e6) + gamma_E = 14.39; bound is ln(1e6+1) = 13.8155
        assert!(report.lr_partial_sum >= 13.8);
        assert!(report.lr_partial_sum >= report.lr_divergence_bound);
    }

    #[test]
    fn neg_log_rate_matches_eval() {
        for ur in [
            UpdateRateSchedule::polynomial(2.5).unwrap(),
            UpdateRateSchedule::exponential(1.0).unwrap(),
            UpdateRateSchedule::exp_unit(),
            UpdateRateSchedule::log_poly(),
        ] {
            for n in [1u64, 2, 3, 17, 100] {
                let direct = ur.eval(n).unwrap();
                let via_log = (-ur.neg_log_rate(n as f64)).exp();
                assert!(
                    (direct - via_log).abs() <= 1e-15 * direct.max(1e-300),
                    "{ur} at n={n}"
                );
            }
        }
    }
}
