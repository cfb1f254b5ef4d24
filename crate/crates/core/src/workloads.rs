//! Workload ingestion, FLOPs/parameter trend fitting, and baseline
//! comparison tables.
//!
//! The trend model is a two-segment power law in log10-log10 space with a
//! breakpoint near 1e9 parameters: training compute grows roughly
//! quadratically in model size below the breakpoint and linearly above it.
//! Slopes can be pinned to (2, 1) so only intercepts are fitted.
//!
//! Baseline efficiencies (GPU, CIM and the like) are user-supplied
//! configuration, carried through output as assumptions rather than
//! measurements.

use crate::estimators::{
    ceb_energy, landauer_measurement_total, lim_a_closed_poly, lim_b_lower_closed, lim_b_numeric,
    lim_b_upper, EstimatorError, LimCalibration, Workload,
};
use crate::schedules::{LearningRateSchedule, UpdateRateSchedule};
use crate::thermo::ThermalEnvironment;
use serde::Serialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("model CSV: {0}")]
    Io(#[from] std::io::Error),
    #[error("model CSV line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error(
        "model CSV: missing or malformed header (expected 'name,params,flops,reported_energy_j')"
    )]
    BadHeader,
    #[error("baseline config line {line}: {message}")]
    BadBaseline { line: usize, message: String },
    #[error("trend fit: {segment} segment needs at least {needed} records, got {got}")]
    InsufficientData {
        segment: &'static str,
        needed: usize,
        got: usize,
    },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// One reported model: size, training compute, optional energy figure.
#[derive(Debug, Clone, Serialize)]
pub struct ModelRecord {
    pub name: String,
    pub params: f64,
    pub flops: f64,
    pub reported_energy_j: Option<f64>,
}

/// Two-segment log-log power law `log10(flops) = slope * log10(params) + intercept`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrendModel {
    pub breakpoint_params: f64,
    pub slope_low: f64,
    pub slope_high: f64,
    pub intercept_low: f64,
    pub intercept_high: f64,
    /// Segments meet at the breakpoint within 1e-12 in log10 space.
    pub continuity: bool,
}

impl TrendModel {
    /// Piecewise power-law projection of training FLOPs for a model size.
    pub fn project_flops(&self, params: f64) -> f64 {
        let x = params.log10();
        let y = if params <= self.breakpoint_params {
            self.slope_low * x + self.intercept_low
        } else {
            self.slope_high * x + self.intercept_high
        };
        10f64.powf(y)
    }
}

/// Default parameter-count breakpoint between the two scaling regimes.
pub const DEFAULT_BREAKPOINT: f64 = 1e9;

fn fit_segment(
    pts: &[(f64, f64)],
    pinned_slope: Option<f64>,
    segment: &'static str,
) -> Result<(f64, f64), WorkloadError> {
    let needed = if pinned_slope.is_some() { 1 } else { 2 };
    if pts.len() < needed {
        return Err(WorkloadError::InsufficientData {
            segment,
            needed,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = match pinned_slope {
        Some(s) => s,
        None => {
            let var: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            if var == 0.0 {
                return Err(WorkloadError::InsufficientData {
                    segment,
                    needed: 2,
                    got: 1,
                });
            }
            cov / var
        }
    };
    Ok((slope, my - slope * mx))
}

/// Least-squares trend fit in log10 space.
///
/// Fits each side of the breakpoint separately when both sides have enough
/// records (two free, or one with a pinned slope); otherwise falls back to
/// a single segment over all records. `pinned_slopes = Some((2.0, 1.0))`
/// fits intercepts only.
pub fn fit_trend(
    records: &[ModelRecord],
    breakpoint: Option<f64>,
    pinned_slopes: Option<(f64, f64)>,
) -> Result<TrendModel, WorkloadError> {
    let breakpoint = breakpoint.unwrap_or(DEFAULT_BREAKPOINT);
    let to_log = |r: &ModelRecord| (r.params.log10(), r.flops.log10());
    let low: Vec<_> = records
        .iter()
        .filter(|r| r.params <= breakpoint)
        .map(to_log)
        .collect();
    let high: Vec<_> = records
        .iter()
        .filter(|r| r.params > breakpoint)
        .map(to_log)
        .collect();

    let needed = if pinned_slopes.is_some() { 1 } else { 2 };
    let (slope_low, intercept_low, slope_high, intercept_high) =
        if low.len() >= needed && high.len() >= needed {
            let (sl, il) = fit_segment(&low, pinned_slopes.map(|p| p.0), "low")?;
            let (sh, ih) = fit_segment(&high, pinned_slopes.map(|p| p.1), "high")?;
            (sl, il, sh, ih)
        } else {
            // single-segment fallback over everything
            let all: Vec<_> = records.iter().map(to_log).collect();
            let pin = pinned_slopes.map(|p| if high.is_empty() { p.0 } else { p.1 });
            let (s, i) = fit_segment(&all, pin, "all")?;
            (s, i, s, i)
        };

    let b = breakpoint.log10();
    let gap = (slope_low * b + intercept_low) - (slope_high * b + intercept_high);
    Ok(TrendModel {
        breakpoint_params: breakpoint,
        slope_low,
        slope_high,
        intercept_low,
        intercept_high,
        continuity: gap.abs() <= 1e-12,
    })
}

/// User-supplied comparator efficiency (GPU, CIM, ...), joules per FLOP.
#[derive(Debug, Clone, Serialize)]
pub struct BaselineSpec {
    pub name: String,
    pub joules_per_flop: f64,
    pub notes: String,
}

/// Estimator configuration for a comparison table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimComparisonConfig {
    pub gamma: f64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Baseline,
    Estimator,
}

/// One row of a workload comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub kind: RowKind,
    pub total_joules: f64,
    pub per_op_kt: f64,
    pub ratio_to_lim_b: f64,
    /// Marked for user-supplied efficiencies with no physical derivation.
    pub assumption: bool,
}

/// Compare baseline efficiencies against the estimator family on one
/// workload. Rows: the baselines in input order, then CEB,
/// LANDAUER_MEAS, LIM_A, LIM_B, LIM_B UB, LIM_B LB; ratios are taken
/// against the LIM_B numeric row.
pub fn compare_workload(
    w: &Workload,
    baselines: &[BaselineSpec],
    config: &LimComparisonConfig,
    env: &ThermalEnvironment,
) -> Result<Vec<ComparisonRow>, WorkloadError> {
    let lr = LearningRateSchedule::harmonic();
    let ur = UpdateRateSchedule::polynomial(config.gamma).map_err(EstimatorError::from)?;
    let lim_b = lim_b_numeric(
        w,
        &lr,
        &ur,
        env,
        &LimCalibration::Asymptotic,
        config.rel_tol,
    )?;
    let lim_b_total = lim_b.total_joules;

    let mut rows = Vec::new();
    for b in baselines {
        let total = w.flops() * b.joules_per_flop;
        rows.push(ComparisonRow {
            label: b.name.clone(),
            kind: RowKind::Baseline,
            total_joules: total,
            per_op_kt: b.joules_per_flop / env.kt(),
            ratio_to_lim_b: total / lim_b_total,
            assumption: true,
        });
    }

    let mut push_estimate = |label: String, e: &crate::estimators::EnergyEstimate| {
        rows.push(ComparisonRow {
            label,
            kind: RowKind::Estimator,
            total_joules: e.total_joules,
            per_op_kt: e.dynamic_kt_per_op,
            ratio_to_lim_b: e.total_joules / lim_b_total,
            assumption: false,
        });
    };

    let ceb = ceb_energy(w, None, None, env)?;
    push_estimate(ceb.method.to_string(), &ceb);
    let lm = landauer_measurement_total(w, None, env)?;
    push_estimate(lm.method.to_string(), &lm);
    let lim_a = lim_a_closed_poly(w, config.gamma, env)?;
    push_estimate(lim_a.method.to_string(), &lim_a);
    push_estimate(lim_b.method.to_string(), &lim_b);
    let ub = lim_b_upper(w, env);
    push_estimate(ub.method.to_string(), &ub);
    let lb = lim_b_lower_closed(w, config.gamma, env)?;
    push_estimate(lb.method.to_string(), &lb);

    Ok(rows)
}

/// Hours of sustained draw at `gpu_watts` equivalent to `energy_j`.
pub fn gpu_hours_equivalent(energy_j: f64, gpu_watts: f64) -> f64 {
    energy_j / gpu_watts / 3600.0
}

/// Parse the model-record CSV: header `name,params,flops,reported_energy_j`,
/// `#` comment lines allowed, scientific notation accepted, energy column
/// may be empty.
pub fn parse_model_csv(text: &str) -> Result<Vec<ModelRecord>, WorkloadError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let header = lines.next().ok_or(WorkloadError::BadHeader)?;
    let cols: Vec<String> = header
        .1
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    if cols != ["name", "params", "flops", "reported_energy_j"] {
        return Err(WorkloadError::BadHeader);
    }

    let mut records = Vec::new();
    for (line, raw) in lines {
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(WorkloadError::BadRecord {
                line,
                message: format!("expected 4 comma-separated fields, got {}", fields.len()),
            });
        }
        let parse_pos = |field: &str, what: &str| -> Result<f64, WorkloadError> {
            let v: f64 = field.parse().map_err(|_| WorkloadError::BadRecord {
                line,
                message: format!("{what} is not a number: '{field}'"),
            })?;
            if !(v > 0.0) {
                return Err(WorkloadError::BadRecord {
                    line,
                    message: format!("{what} must be positive, got {v}"),
                });
            }
            Ok(v)
        };
        let params = parse_pos(fields[1], "params")?;
        let flops = parse_pos(fields[2], "flops")?;
        let reported_energy_j = if fields[3].is_empty() {
            None
        } else {
            Some(parse_pos(fields[3], "reported_energy_j")?)
        };
        records.push(ModelRecord {
            name: fields[0].to_string(),
            params,
            flops,
            reported_energy_j,
        });
    }
    Ok(records)
}

pub fn read_model_csv(path: &Path) -> Result<Vec<ModelRecord>, WorkloadError> {
    parse_model_csv(&std::fs::read_to_string(path)?)
}

/// Parse the baseline key-value config. Each `name = ...` line starts a
/// new entry; `joules_per_flop` is required per entry, `notes` optional.
pub fn parse_baseline_config(text: &str) -> Result<Vec<BaselineSpec>, WorkloadError> {
    let mut specs: Vec<BaselineSpec> = Vec::new();
    let mut current: Option<(usize, BaselineSpec)> = None;

    let finish = |entry: Option<(usize, BaselineSpec)>,
                  specs: &mut Vec<BaselineSpec>|
     -> Result<(), WorkloadError> {
        if let Some((line, spec)) = entry {
            if !(spec.joules_per_flop > 0.0) {
                return Err(WorkloadError::BadBaseline {
                    line,
                    message: format!("entry '{}' needs a positive joules_per_flop", spec.name),
                });
            }
            specs.push(spec);
        }
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(WorkloadError::BadBaseline {
            line,
            message: format!("expected 'key = value', got '{trimmed}'"),
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "name" => {
                finish(current.take(), &mut specs)?;
                current = Some((
                    line,
                    BaselineSpec {
                        name: value.to_string(),
                        joules_per_flop: 0.0,
                        notes: String::new(),
                    },
                ));
            }
            "joules_per_flop" => {
                let (_, spec) = current.as_mut().ok_or(WorkloadError::BadBaseline {
                    line,
                    message: "joules_per_flop before any 'name ='".to_string(),
                })?;
                spec.joules_per_flop = value.parse().map_err(|_| WorkloadError::BadBaseline {
                    line,
                    message: format!("joules_per_flop is not a number: '{value}'"),
                })?;
            }
            "notes" => {
                let (_, spec) = current.as_mut().ok_or(WorkloadError::BadBaseline {
                    line,
                    message: "notes before any 'name ='".to_string(),
                })?;
                spec.notes = value.to_string();
            }
            other => {
                return Err(WorkloadError::BadBaseline {
                    line,
                    message: format!("unknown key '{other}'"),
                })
            }
        }
    }
    finish(current, &mut specs)?;
    Ok(specs)
}
