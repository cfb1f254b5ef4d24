//! Per-subcommand resolution and execution.

use crate::config::{resolve_precision, resolve_temperature, CliError, Echo, FileConfig};
use crate::output::{
    emit, to_csv, to_json, AuditResult, Document, EnergyUnits, FitResult, KineticsResult, Meta,
    OutputFormat, Projection, Results, SweepRow, WalkResult,
};
use crate::{
    AuditArgs, CommonArgs, CompareArgs, EstimateArgs, FitArgs, KineticsArgs, SweepArgs,
    TrajectoryArgs, WalkArgs,
};
use limb_core::analysis::DEFAULT_REL_TOL;
use limb_core::estimators::{
    self, EnergyEstimate, LimCalibration, Workload, DEFAULT_GAMMA, DEFAULT_R_MAX,
};
use limb_core::schedules::{LearningRateSchedule, UpdateRateSchedule};
use limb_core::stochastic::{
    mc_descent_walk, mc_energy_audit, mc_estimate_net_rate, BarrierPolicy, DescentWalkConfig,
    DissipationAccounting, KineticsExperiment, QuadraticLoss,
};
use limb_core::thermo::{BistableCellParams, ThermalEnvironment};
use limb_core::workloads::{
    compare_workload, fit_trend, parse_baseline_config, read_model_csv, LimComparisonConfig,
};
use std::path::PathBuf;

const COMMON_KEYS: &[&str] = &[
    "temperature",
    "tolerance",
    "format",
    "output",
    "no-timestamp",
    "units",
];

/// Resolved flags shared by every subcommand.
pub struct Common {
    pub env: ThermalEnvironment,
    pub tolerance: f64,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub timestamp: bool,
    pub units: EnergyUnits,
}

fn resolve_common(
    args: &CommonArgs,
    file: &FileConfig,
    echo: &mut Echo,
) -> Result<Common, CliError> {
    let temperature = resolve_temperature(args.temperature, file)?;
    let env = ThermalEnvironment::new(temperature)?;
    echo.set_f64("temperature", temperature);

    let tolerance = args
        .tolerance
        .or(file.get_f64("tolerance")?)
        .unwrap_or(DEFAULT_REL_TOL);
    echo.set_f64("tolerance", tolerance);

    let format = match args.format {
        Some(f) => f,
        None => match file.get_str("format").as_deref() {
            Some("json") => OutputFormat::Json,
            Some("csv") => OutputFormat::Csv,
            Some(other) => {
                return Err(CliError::validation(format!(
                    "format must be json or csv, got '{other}'"
                )))
            }
            None => OutputFormat::Json,
        },
    };
    echo.set_str(
        "format",
        match format {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        },
    );

    let output = args.output.clone().or_else(|| file.get_path("output"));
    if let Some(p) = &output {
        echo.set_str("output", p.display().to_string());
    }

    let no_timestamp = args.no_timestamp || file.get_bool("no-timestamp")?.unwrap_or(false);
    echo.set_bool("no-timestamp", no_timestamp);

    let units = match args.units {
        Some(u) => u,
        None => match file.get_str("units").as_deref() {
            Some("J") | Some("j") => EnergyUnits::J,
            Some("kT") | Some("kt") => EnergyUnits::Kt,
            Some(other) => {
                return Err(CliError::validation(format!(
                    "units must be J or kT, got '{other}'"
                )))
            }
            None => EnergyUnits::J,
        },
    };
    echo.set_str("units", units.label());

    Ok(Common {
        env,
        tolerance,
        format,
        output,
        timestamp: !no_timestamp,
        units,
    })
}

fn finish(
    common: &Common,
    echo: Echo,
    results: Results,
    generator: Option<&'static str>,
) -> Result<(), CliError> {
    let meta = Meta::new(common.timestamp, generator);
    let doc = Document::new(meta, echo, results);
    let text = match common.format {
        OutputFormat::Json => to_json(&doc)?,
        OutputFormat::Csv => to_csv(&doc, common.units, common.env.kt())?,
    };
    emit(&text, common.output.as_ref())
}

// ---------------------------------------------------------------------------
// method tags
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    LimA,
    LimAClosed,
    LimB,
    LimBUb,
    LimBLb,
    LimBLbFinite,
    LimAExp,
    LimBExp,
    Ceb,
    LandauerMeas,
}

impl MethodArg {
    fn parse_list(s: &str) -> Result<Vec<MethodArg>, CliError> {
        s.split(',')
            .map(|tag| match tag.trim() {
                "lim-a" => Ok(MethodArg::LimA),
                "lim-a-closed" => Ok(MethodArg::LimAClosed),
                "lim-b" => Ok(MethodArg::LimB),
                "lim-b-ub" => Ok(MethodArg::LimBUb),
                "lim-b-lb" => Ok(MethodArg::LimBLb),
                "lim-b-lb-finite" => Ok(MethodArg::LimBLbFinite),
                "lim-a-exp" => Ok(MethodArg::LimAExp),
                "lim-b-exp" => Ok(MethodArg::LimBExp),
                "ceb" => Ok(MethodArg::Ceb),
                "landauer-meas" => Ok(MethodArg::LandauerMeas),
                other => Err(CliError::validation(format!(
                    "unknown method '{other}' (expected lim-a, lim-a-closed, lim-b, lim-b-ub, \
                     lim-b-lb, lim-b-lb-finite, lim-a-exp, lim-b-exp, ceb, landauer-meas)"
                ))),
            })
            .collect()
    }

    fn name(&self) -> &'static str {
        match self {
            MethodArg::LimA => "lim-a",
            MethodArg::LimAClosed => "lim-a-closed",
            MethodArg::LimB => "lim-b",
            MethodArg::LimBUb => "lim-b-ub",
            MethodArg::LimBLb => "lim-b-lb",
            MethodArg::LimBLbFinite => "lim-b-lb-finite",
            MethodArg::LimAExp => "lim-a-exp",
            MethodArg::LimBExp => "lim-b-exp",
            MethodArg::Ceb => "ceb",
            MethodArg::LandauerMeas => "landauer-meas",
        }
    }
}

fn methods_echo(methods: &[MethodArg]) -> String {
    methods
        .iter()
        .map(MethodArg::name)
        .collect::<Vec<_>>()
        .join(",")
}

struct EstimateContext<'a> {
    w: &'a Workload,
    lr: LearningRateSchedule,
    ur: UpdateRateSchedule,
    gamma: f64,
    env: ThermalEnvironment,
    tolerance: f64,
    ebit: Option<f64>,
    n_trunc: Option<u64>,
}

fn run_method(method: MethodArg, cx: &EstimateContext) -> Result<EnergyEstimate, CliError> {
    let e = match method {
        MethodArg::LimA => estimators::lim_a_numeric(cx.w, &cx.lr, &cx.ur, &cx.env, cx.tolerance)?,
        MethodArg::LimAClosed => estimators::lim_a_closed_poly(cx.w, cx.gamma, &cx.env)?,
        MethodArg::LimB => estimators::lim_b_numeric(
            cx.w,
            &cx.lr,
            &cx.ur,
            &cx.env,
            &LimCalibration::Asymptotic,
            cx.tolerance,
        )?,
        MethodArg::LimBUb => estimators::lim_b_upper(cx.w, &cx.env),
        MethodArg::LimBLb => estimators::lim_b_lower_closed(cx.w, cx.gamma, &cx.env)?,
        MethodArg::LimBLbFinite => {
            estimators::lim_b_lower_finite(cx.w, cx.gamma, &cx.env, cx.n_trunc)?
        }
        MethodArg::LimAExp => estimators::lim_a_exp_closed(cx.w, cx.gamma, &cx.env)?,
        MethodArg::LimBExp => estimators::lim_b_exp_closed(cx.w, cx.gamma, &cx.env)?,
        MethodArg::Ceb => estimators::ceb_energy(cx.w, cx.ebit, None, &cx.env)?,
        MethodArg::LandauerMeas => estimators::landauer_measurement_total(cx.w, None, &cx.env)?,
    };
    Ok(e)
}

fn required_f64(
    flag: Option<f64>,
    file: &FileConfig,
    key: &str,
    echo: &mut Echo,
) -> Result<f64, CliError> {
    let v = flag
        .or(file.get_f64(key)?)
        .ok_or_else(|| CliError::validation(format!("missing required --{key}")))?;
    echo.set_f64(key, v);
    Ok(v)
}

fn resolve_workload(
    flops: Option<f64>,
    params: Option<f64>,
    bits: Option<f64>,
    delta: Option<f64>,
    file: &FileConfig,
    echo: &mut Echo,
) -> Result<Workload, CliError> {
    let flops = required_f64(flops, file, "flops", echo)?;
    let params = required_f64(params, file, "params", echo)?;
    let (delta, key, value) = resolve_precision(bits, delta, file)?;
    echo.set_f64(key, value);
    Ok(Workload::with_delta("cli", flops, params, delta)?)
}

fn resolve_schedule(
    flag: Option<&str>,
    file: &FileConfig,
    echo: &mut Echo,
) -> Result<UpdateRateSchedule, CliError> {
    let spec = flag
        .map(str::to_string)
        .or_else(|| file.get_str("schedule"))
        .unwrap_or_else(|| format!("poly:{DEFAULT_GAMMA}"));
    let ur: UpdateRateSchedule = spec.parse()?;
    echo.set_str("schedule", ur.to_string());
    Ok(ur)
}

fn resolve_lr(
    flag: Option<f64>,
    file: &FileConfig,
    echo: &mut Echo,
) -> Result<LearningRateSchedule, CliError> {
    let offset = flag.or(file.get_f64("lr-offset")?).unwrap_or(0.0);
    echo.set_f64("lr-offset", offset);
    Ok(LearningRateSchedule::harmonic_with_offset(offset)?)
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

pub fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend([
        "method",
        "flops",
        "params",
        "bits",
        "delta",
        "schedule",
        "gamma",
        "lr-offset",
        "ebit",
        "n-trunc",
    ]);
    file.check_keys("estimate", &keys)?;

    let mut echo = Echo::new("estimate");
    let common = resolve_common(&args.common, &file, &mut echo)?;

    let methods = match &args.method {
        Some(s) => MethodArg::parse_list(s)?,
        None => match file.get_str("method") {
            Some(s) => MethodArg::parse_list(&s)?,
            None => vec![MethodArg::LimB],
        },
    };
    echo.set_str("method", methods_echo(&methods));

    let w = resolve_workload(
        args.flops,
        args.params,
        args.bits,
        args.delta,
        &file,
        &mut echo,
    )?;
    let ur = resolve_schedule(args.schedule.as_deref(), &file, &mut echo)?;
    let lr = resolve_lr(args.lr_offset, &file, &mut echo)?;
    let gamma = args
        .gamma
        .or(file.get_f64("gamma")?)
        .or_else(|| ur.gamma())
        .unwrap_or(DEFAULT_GAMMA);
    echo.set_f64("gamma", gamma);
    let ebit = args.ebit.or(file.get_f64("ebit")?);
    if let Some(e) = ebit {
        echo.set_f64("ebit", e);
    }
    let n_trunc = match args.n_trunc {
        Some(n) => Some(n as u64),
        None => file.get_u64("n-trunc")?,
    };
    if let Some(n) = n_trunc {
        echo.set_u64("n-trunc", n);
    }

    let cx = EstimateContext {
        w: &w,
        lr,
        ur,
        gamma,
        env: common.env,
        tolerance: common.tolerance,
        ebit,
        n_trunc,
    };
    let mut results = Vec::with_capacity(methods.len());
    for m in &methods {
        results.push(run_method(*m, &cx)?);
    }
    finish(&common, echo, Results::Estimates(results), None)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn parse_gamma_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::validation(format!(
            "gamma sweep must be START:STOP:COUNT, got '{spec}'"
        )));
    }
    let bad = |what: &str| CliError::validation(format!("gamma sweep: bad {what} in '{spec}'"));
    let start: f64 = parts[0].parse().map_err(|_| bad("start"))?;
    let stop: f64 = parts[1].parse().map_err(|_| bad("stop"))?;
    let count: usize = parts[2].parse().map_err(|_| bad("count"))?;
    if !(start > 0.0 && stop >= start && count >= 1) {
        return Err(CliError::validation(format!(
            "gamma sweep needs 0 < start <= stop and count >= 1, got '{spec}'"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    // geometric spacing: gamma spans decades in every use of it
    let ratio = (stop / start).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|i| start * ratio.powi(i as i32)).collect())
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend([
        "method",
        "gamma",
        "family",
        "flops",
        "params",
        "bits",
        "delta",
        "lr-offset",
    ]);
    file.check_keys("sweep", &keys)?;

    let mut echo = Echo::new("sweep");
    let common = resolve_common(&args.common, &file, &mut echo)?;

    let methods = match &args.method {
        Some(s) => MethodArg::parse_list(s)?,
        None => match file.get_str("method") {
            Some(s) => MethodArg::parse_list(&s)?,
            None => vec![MethodArg::LimA, MethodArg::LimB],
        },
    };
    echo.set_str("method", methods_echo(&methods));

    let grid_spec = args
        .gamma
        .clone()
        .or_else(|| file.get_str("gamma"))
        .ok_or_else(|| CliError::validation("missing required --gamma START:STOP:COUNT"))?;
    let grid = parse_gamma_grid(&grid_spec)?;
    echo.set_str("gamma", &grid_spec);

    let family = args
        .family
        .clone()
        .or_else(|| file.get_str("family"))
        .unwrap_or_else(|| "poly".to_string());
    if family != "poly" && family != "exp" {
        return Err(CliError::validation(format!(
            "family must be poly or exp, got '{family}'"
        )));
    }
    echo.set_str("family", &family);

    let w = resolve_workload(
        args.flops,
        args.params,
        args.bits,
        args.delta,
        &file,
        &mut echo,
    )?;
    let lr = resolve_lr(args.lr_offset, &file, &mut echo)?;

    let mut rows = Vec::with_capacity(grid.len() * methods.len());
    for &gamma in &grid {
        let ur = if family == "poly" {
            UpdateRateSchedule::polynomial(gamma)?
        } else {
            UpdateRateSchedule::exponential(gamma)?
        };
        let cx = EstimateContext {
            w: &w,
            lr,
            ur,
            gamma,
            env: common.env,
            tolerance: common.tolerance,
            ebit: None,
            n_trunc: None,
        };
        for m in &methods {
            let e = run_method(*m, &cx)?;
            rows.push(SweepRow::from_estimate(gamma, &e));
        }
    }
    finish(&common, echo, Results::Sweep(rows), None)
}

// ---------------------------------------------------------------------------
// trajectory
// ---------------------------------------------------------------------------

pub fn trajectory(args: &TrajectoryArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend([
        "schedule",
        "lr-offset",
        "bits",
        "delta",
        "rmax",
        "points",
        "nmax",
    ]);
    file.check_keys("trajectory", &keys)?;

    let mut echo = Echo::new("trajectory");
    let common = resolve_common(&args.common, &file, &mut echo)?;

    let ur = resolve_schedule(args.schedule.as_deref(), &file, &mut echo)?;
    let lr = resolve_lr(args.lr_offset, &file, &mut echo)?;
    let (delta, key, value) = resolve_precision(args.bits, args.delta, &file)?;
    echo.set_f64(key, value);
    let r_max = args.rmax.or(file.get_f64("rmax")?).unwrap_or(DEFAULT_R_MAX);
    echo.set_f64("rmax", r_max);
    let points = args
        .points
        .map(|p| p as u64)
        .or(file.get_u64("points")?)
        .unwrap_or(200);
    echo.set_u64("points", points);
    let n_max = args
        .nmax
        .map(|n| n as u64)
        .or(file.get_u64("nmax")?)
        .unwrap_or(1_000_000);
    echo.set_u64("nmax", n_max);

    let t = estimators::trajectory(&lr, &ur, delta, r_max, points as usize, n_max, &common.env)?;
    let result = crate::output::TrajectoryResult {
        barrier_monotone: t.barrier_monotone,
        points: t.points,
    };
    finish(&common, echo, Results::Trajectory(Box::new(result)), None)
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend(["data", "breakpoint", "free-slopes", "project"]);
    file.check_keys("fit", &keys)?;

    let mut echo = Echo::new("fit");
    let common = resolve_common(&args.common, &file, &mut echo)?;

    let data = args
        .data
        .clone()
        .or_else(|| file.get_path("data"))
        .ok_or_else(|| CliError::validation("missing required --data CSV path"))?;
    echo.set_str("data", data.display().to_string());
    let breakpoint = args
        .breakpoint
        .or(file.get_f64("breakpoint")?)
        .unwrap_or(limb_core::workloads::DEFAULT_BREAKPOINT);
    echo.set_f64("breakpoint", breakpoint);
    let free_slopes = args.free_slopes || file.get_bool("free-slopes")?.unwrap_or(false);
    echo.set_bool("free-slopes", free_slopes);

    let records = read_model_csv(&data)?;
    let pinned = if free_slopes { None } else { Some((2.0, 1.0)) };
    let model = fit_trend(&records, Some(breakpoint), pinned)?;

    let project = args.project.or(file.get_f64("project")?);
    let projection = project.map(|p| {
        echo.set_f64("project", p);
        Projection {
            params: p,
            flops: model.project_flops(p),
        }
    });

    let result = FitResult {
        model,
        records_used: records.len(),
        records,
        projection,
    };
    finish(&common, echo, Results::Fit(Box::new(result)), None)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend(["flops", "params", "bits", "delta", "baselines", "gamma"]);
    file.check_keys("compare", &keys)?;

    let mut echo = Echo::new("compare");
    let common = resolve_common(&args.common, &file, &mut echo)?;

    let w = resolve_workload(
        args.flops,
        args.params,
        args.bits,
        args.delta,
        &file,
        &mut echo,
    )?;
    let gamma = args
        .gamma
        .or(file.get_f64("gamma")?)
        .unwrap_or(DEFAULT_GAMMA);
    echo.set_f64("gamma", gamma);

    let baselines = match args
        .baselines
        .clone()
        .or_else(|| file.get_path("baselines"))
    {
        Some(path) => {
            echo.set_str("baselines", path.display().to_string());
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::validation(format!("cannot read baselines {}: {e}", path.display()))
            })?;
            parse_baseline_config(&text)?
        }
        None => Vec::new(),
    };

    let cfg = LimComparisonConfig {
        gamma,
        rel_tol: common.tolerance,
    };
    let rows = compare_workload(&w, &baselines, &cfg, &common.env)?;
    finish(&common, echo, Results::Compare(rows), None)
}

// ---------------------------------------------------------------------------
// mc kinetics / walk / audit
// ---------------------------------------------------------------------------

pub fn mc_kinetics(args: &KineticsArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend(["barrier", "tilt", "rmax", "steps", "dt", "seed"]);
    file.check_keys("mc-kinetics", &keys)?;

    let mut echo = Echo::new("mc-kinetics");
    let common = resolve_common(&args.common, &file, &mut echo)?;

    let barrier = args.barrier.or(file.get_f64("barrier")?).unwrap_or(1.0);
    let tilt = args.tilt.or(file.get_f64("tilt")?).unwrap_or(1.0);
    let r_max = args.rmax.or(file.get_f64("rmax")?).unwrap_or(1e6);
    let steps = args
        .steps
        .map(|s| s as u64)
        .or(file.get_u64("steps")?)
        .unwrap_or(10_000_000);
    let dt = args.dt.or(file.get_f64("dt")?).unwrap_or(1e-8);
    let seed = args.seed.or(file.get_u64("seed")?).unwrap_or(42);
    echo.set_f64("barrier", barrier);
    echo.set_f64("tilt", tilt);
    echo.set_f64("rmax", r_max);
    echo.set_u64("steps", steps);
    echo.set_f64("dt", dt);
    echo.set_u64("seed", seed);

    let cell = BistableCellParams::new(barrier, tilt, r_max)?;
    let exp = KineticsExperiment::new(cell, steps, dt, seed)?;
    let estimate = mc_estimate_net_rate(&exp);
    let z_score = if estimate.std_error_per_sec > 0.0 {
        (estimate.rate_per_sec - estimate.analytic_rate_per_sec) / estimate.std_error_per_sec
    } else {
        0.0
    };
    let result = KineticsResult { estimate, z_score };
    finish(
        &common,
        echo,
        Results::Kinetics(Box::new(result)),
        Some(limb_core::stochastic::GENERATOR),
    )
}

struct WalkParams {
    cfg: DescentWalkConfig,
    dump: Option<PathBuf>,
}

#[allow(clippy::too_many_arguments)]
fn resolve_walk(
    args: &WalkArgs,
    file: &FileConfig,
    echo: &mut Echo,
    defaults: (f64, f64, f64, u64, u64, u64),
) -> Result<WalkParams, CliError> {
    let (d_gamma, d_delta, d_beta, d_steps, d_trials, d_seed) = defaults;
    let gamma = args.gamma.or(file.get_f64("gamma")?).unwrap_or(d_gamma);
    let delta = args.delta.or(file.get_f64("delta")?).unwrap_or(d_delta);
    let beta = args.beta.or(file.get_f64("beta")?).unwrap_or(d_beta);
    let grid_step = args.grid_step.or(file.get_f64("grid-step")?).unwrap_or(1.0);
    let start_x = args
        .start_x
        .or(file.get_f64("start-x")?.map(|v| v as i64))
        .unwrap_or(10);
    let start_y = args
        .start_y
        .or(file.get_f64("start-y")?.map(|v| v as i64))
        .unwrap_or(10);
    let steps = args
        .steps
        .map(|s| s as u64)
        .or(file.get_u64("steps")?)
        .unwrap_or(d_steps);
    let trials = args
        .trials
        .map(|t| t as u64)
        .or(file.get_u64("trials")?)
        .unwrap_or(d_trials);
    let seed = args.seed.or(file.get_u64("seed")?).unwrap_or(d_seed);
    let radius = args.radius.or(file.get_f64("radius")?).unwrap_or(2.0);
    let frozen = args.frozen_barrier.or(file.get_f64("frozen-barrier")?);
    let loss_spec = args
        .loss
        .clone()
        .or_else(|| file.get_str("loss"))
        .unwrap_or_else(|| "1,0,1".to_string());
    let dump = args.dump.clone().or_else(|| file.get_path("dump"));

    echo.set_f64("gamma", gamma);
    echo.set_f64("delta", delta);
    echo.set_f64("beta", beta);
    echo.set_f64("grid-step", grid_step);
    echo.set_u64("start-x", start_x as u64);
    echo.set_u64("start-y", start_y as u64);
    echo.set_u64("steps", steps);
    echo.set_u64("trials", trials);
    echo.set_u64("seed", seed);
    echo.set_f64("radius", radius);
    if let Some(f) = frozen {
        echo.set_f64("frozen-barrier", f);
    }
    echo.set_str("loss", &loss_spec);
    if let Some(d) = &dump {
        echo.set_str("dump", d.display().to_string());
    }

    let q: Vec<f64> = loss_spec
        .split(',')
        .map(|v| {
            v.trim().parse().map_err(|_| {
                CliError::validation(format!("loss must be q11,q12,q22, got '{loss_spec}'"))
            })
        })
        .collect::<Result<_, _>>()?;
    if q.len() != 3 {
        return Err(CliError::validation(format!(
            "loss must have exactly three coefficients q11,q12,q22, got '{loss_spec}'"
        )));
    }
    let loss = QuadraticLoss::new(q[0], q[1], q[2])?;

    let barrier = match frozen {
        Some(barrier_kt) => BarrierPolicy::Frozen { barrier_kt },
        None => BarrierPolicy::ScheduleDriven {
            lr: LearningRateSchedule::harmonic(),
            ur: UpdateRateSchedule::polynomial(gamma)?,
            delta,
        },
    };

    Ok(WalkParams {
        cfg: DescentWalkConfig {
            loss,
            grid_step,
            beta,
            barrier,
            start: (start_x, start_y),
            steps,
            trials,
            seed,
            success_radius_grid: radius,
            record_trajectories: dump.is_some(),
        },
        dump,
    })
}

fn loss_checkpoints(mean_loss: &[f64]) -> Vec<(u64, f64)> {
    let n = mean_loss.len();
    if n == 0 {
        return Vec::new();
    }
    let points = 25usize.min(n);
    let lmax = (n as f64).ln();
    let mut out = Vec::new();
    let mut last = 0usize;
    for i in 0..=points {
        let idx = ((lmax * i as f64 / points as f64).exp().round() as usize).clamp(1, n);
        if idx != last {
            out.push((idx as u64, mean_loss[idx - 1]));
            last = idx;
        }
    }
    out
}

pub fn mc_walk(args: &WalkArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend([
        "gamma",
        "delta",
        "beta",
        "grid-step",
        "start-x",
        "start-y",
        "steps",
        "trials",
        "seed",
        "radius",
        "frozen-barrier",
        "loss",
        "dump",
    ]);
    file.check_keys("mc-walk", &keys)?;

    let mut echo = Echo::new("mc-walk");
    let common = resolve_common(&args.common, &file, &mut echo)?;
    let params = resolve_walk(args, &file, &mut echo, (0.5, 0.5, 4.0, 10_000, 200, 2024))?;

    let summary = mc_descent_walk(&params.cfg)?;
    let dump_path = match (&params.dump, &summary.trajectories) {
        (Some(path), Some(samples)) => {
            let csv = crate::output::walk_samples_csv(samples);
            emit(&csv, Some(path))?;
            Some(path.display().to_string())
        }
        _ => None,
    };
    let n = summary.final_distance_grid.len() as f64;
    let result = WalkResult {
        trials: params.cfg.trials,
        steps: params.cfg.steps,
        fraction_within_tol: summary.fraction_within_tol,
        success_radius_grid: params.cfg.success_radius_grid,
        total_hops: summary.total_hops,
        final_distance_mean: summary.final_distance_grid.iter().sum::<f64>() / n,
        final_distance_max: summary
            .final_distance_grid
            .iter()
            .fold(0.0f64, |a, &b| a.max(b)),
        mean_loss_checkpoints: loss_checkpoints(&summary.mean_loss_per_step),
        generator: summary.generator,
        trajectory_dump: dump_path,
    };
    finish(
        &common,
        echo,
        Results::Walk(Box::new(result)),
        Some(limb_core::stochastic::GENERATOR),
    )
}

pub fn mc_audit(args: &AuditArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.walk.common.config.as_deref())?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend([
        "gamma",
        "delta",
        "beta",
        "grid-step",
        "start-x",
        "start-y",
        "steps",
        "trials",
        "seed",
        "radius",
        "frozen-barrier",
        "loss",
        "dump",
        "accounting",
    ]);
    file.check_keys("mc-audit", &keys)?;

    let mut echo = Echo::new("mc-audit");
    let common = resolve_common(&args.walk.common, &file, &mut echo)?;
    let params = resolve_walk(
        &args.walk,
        &file,
        &mut echo,
        (
            10.0,
            limb_core::estimators::DEFAULT_DELTA,
            8.0,
            1_000,
            200,
            3,
        ),
    )?;

    let accounting = match args
        .accounting
        .clone()
        .or_else(|| file.get_str("accounting"))
        .unwrap_or_else(|| "lim-b".to_string())
        .as_str()
    {
        "lim-a" => DissipationAccounting::GradientEnergy,
        "lim-b" => DissipationAccounting::BarrierEnergy,
        other => {
            return Err(CliError::validation(format!(
                "accounting must be lim-a or lim-b, got '{other}'"
            )))
        }
    };
    echo.set_str(
        "accounting",
        match accounting {
            DissipationAccounting::GradientEnergy => "lim-a",
            DissipationAccounting::BarrierEnergy => "lim-b",
        },
    );

    let audit = mc_energy_audit(&params.cfg, accounting)?;
    let result = AuditResult {
        accounting: audit.accounting,
        trials: params.cfg.trials,
        total_hops: audit.total_hops,
        mean_kt: audit.mean_kt,
        std_error_kt: audit.std_error_kt,
        mean_per_hop_kt: audit.mean_per_hop_kt,
        generator: audit.generator,
    };
    finish(
        &common,
        echo,
        Results::Audit(Box::new(result)),
        Some(limb_core::stochastic::GENERATOR),
    )
}
