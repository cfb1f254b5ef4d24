//! Output document assembly: one JSON schema (`meta`, `config`,
//! `results`) across all subcommands, plus fixed-column CSV renderings.
//!
//! JSON floats are serialized in scientific notation with 9 significant
//! digits via a custom formatter, so identical runs produce identical
//! bytes. The timestamp is the one intentionally unstable field and is
//! suppressed by `--no-timestamp`.

use crate::config::{CliError, Echo};
use limb_core::estimators::{EnergyEstimate, TrajectoryPoint};
use limb_core::stochastic::{DissipationAccounting, RateEstimate};
use limb_core::workloads::{ComparisonRow, ModelRecord, TrendModel};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EnergyUnits {
    /// Joules
    J,
    /// Multiples of kT at the run temperature
    #[value(name = "kT", alias = "kt")]
    Kt,
}

impl EnergyUnits {
    pub fn label(&self) -> &'static str {
        match self {
            EnergyUnits::J => "J",
            EnergyUnits::Kt => "kT",
        }
    }
}

#[derive(Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<&'static str>,
}

impl Meta {
    pub fn new(with_timestamp: bool, generator: Option<&'static str>) -> Self {
        Self {
            tool: "limb",
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: with_timestamp.then(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            }),
            generator,
        }
    }
}

/// One sweep row; the CSV column order is fixed.
#[derive(Serialize)]
pub struct SweepRow {
    pub method: String,
    pub gamma: f64,
    pub per_op_kt: f64,
    pub dynamic_j: f64,
    pub retention_j: f64,
    pub total_j: f64,
    pub terms_used: u64,
    pub tail_bound: f64,
}

impl SweepRow {
    pub fn from_estimate(gamma: f64, e: &EnergyEstimate) -> Self {
        Self {
            method: e.method.to_string(),
            gamma,
            per_op_kt: e.dynamic_kt_per_op,
            dynamic_j: e.dynamic_joules,
            retention_j: e.retention_joules,
            total_j: e.total_joules,
            terms_used: e.diagnostics.iter().map(|d| d.terms_used).sum(),
            tail_bound: e
                .diagnostics
                .iter()
                .map(|d| d.tail_bound)
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Serialize)]
pub struct FitResult {
    pub model: TrendModel,
    pub records_used: usize,
    pub records: Vec<ModelRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<Projection>,
}

#[derive(Serialize)]
pub struct Projection {
    pub params: f64,
    pub flops: f64,
}

#[derive(Serialize)]
pub struct KineticsResult {
    pub estimate: RateEstimate,
    pub z_score: f64,
}

#[derive(Serialize)]
pub struct WalkResult {
    pub trials: u64,
    pub steps: u64,
    pub fraction_within_tol: f64,
    pub success_radius_grid: f64,
    pub total_hops: u64,
    pub final_distance_mean: f64,
    pub final_distance_max: f64,
    /// Ensemble mean loss at log-spaced checkpoints (step, loss).
    pub mean_loss_checkpoints: Vec<(u64, f64)>,
    pub generator: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_dump: Option<String>,
}

#[derive(Serialize)]
pub struct AuditResult {
    pub accounting: DissipationAccounting,
    pub trials: u64,
    pub total_hops: u64,
    pub mean_kt: f64,
    pub std_error_kt: f64,
    pub mean_per_hop_kt: f64,
    pub generator: &'static str,
}

#[derive(Serialize)]
pub struct TrajectoryResult {
    /// Barrier non-decreasing across the sampled points; violations of
    /// the expected profile shape are flagged here and per point.
    pub barrier_monotone: bool,
    pub points: Vec<TrajectoryPoint>,
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum Results {
    Estimates(Vec<EnergyEstimate>),
    Sweep(Vec<SweepRow>),
    Trajectory(Box<TrajectoryResult>),
    Fit(Box<FitResult>),
    Compare(Vec<ComparisonRow>),
    Kinetics(Box<KineticsResult>),
    Walk(Box<WalkResult>),
    Audit(Box<AuditResult>),
}

#[derive(Serialize)]
pub struct Document {
    pub meta: Meta,
    pub config: BTreeMap<String, String>,
    pub results: Results,
}

impl Document {
    pub fn new(meta: Meta, echo: Echo, results: Results) -> Self {
        Self {
            meta,
            config: echo.0,
            results,
        }
    }
}

// ---------------------------------------------------------------------------
// JSON with 9-significant-digit scientific floats
// ---------------------------------------------------------------------------

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }
}

pub fn to_json(doc: &Document) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    doc.serialize(&mut ser)
        .map_err(|e| CliError::validation(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::validation(format!("non-utf8 output: {e}")))
}

// ---------------------------------------------------------------------------
// CSV renderings (fixed column orders)
// ---------------------------------------------------------------------------

fn sci(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn to_csv(doc: &Document, units: EnergyUnits, kt: f64) -> Result<String, CliError> {
    let mut out = String::new();
    match &doc.results {
        Results::Estimates(list) => {
            let _ = writeln!(
                out,
                "method,per_op_kt,dynamic,retention,total,unit,terms_used,tail_bound"
            );
            for e in list {
                let scale = match units {
                    EnergyUnits::J => 1.0,
                    EnergyUnits::Kt => 1.0 / kt,
                };
                let terms: u64 = e.diagnostics.iter().map(|d| d.terms_used).sum();
                let bound = e
                    .diagnostics
                    .iter()
                    .map(|d| d.tail_bound)
                    .fold(0.0, f64::max);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    e.method,
                    sci(e.dynamic_kt_per_op),
                    sci(e.dynamic_joules * scale),
                    sci(e.retention_joules * scale),
                    sci(e.total_joules * scale),
                    units.label(),
                    terms,
                    sci(bound)
                );
            }
        }
        Results::Sweep(rows) => {
            let _ = writeln!(
                out,
                "method,gamma,per_op_kt,dynamic_j,retention_j,total_j,terms_used,tail_bound"
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.method,
                    sci(r.gamma),
                    sci(r.per_op_kt),
                    sci(r.dynamic_j),
                    sci(r.retention_j),
                    sci(r.total_j),
                    r.terms_used,
                    sci(r.tail_bound)
                );
            }
        }
        Results::Trajectory(t) => {
            let _ = writeln!(out, "n,epsilon,r,tilt_kt,barrier_kt,power_w");
            for p in &t.points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    p.n,
                    sci(p.epsilon),
                    sci(p.r),
                    sci(p.tilt_kt),
                    sci(p.barrier_kt),
                    sci(p.power_watts)
                );
            }
        }
        Results::Fit(fit) => {
            let _ = writeln!(out, "key,value");
            let m = &fit.model;
            let _ = writeln!(out, "breakpoint_params,{}", sci(m.breakpoint_params));
            let _ = writeln!(out, "slope_low,{}", sci(m.slope_low));
            let _ = writeln!(out, "slope_high,{}", sci(m.slope_high));
            let _ = writeln!(out, "intercept_low,{}", sci(m.intercept_low));
            let _ = writeln!(out, "intercept_high,{}", sci(m.intercept_high));
            let _ = writeln!(out, "continuity,{}", m.continuity);
            let _ = writeln!(out, "records_used,{}", fit.records_used);
            if let Some(p) = &fit.projection {
                let _ = writeln!(out, "projected_params,{}", sci(p.params));
                let _ = writeln!(out, "projected_flops,{}", sci(p.flops));
            }
        }
        Results::Compare(rows) => {
            let _ = writeln!(
                out,
                "label,kind,total_j,per_op_kt,ratio_to_lim_b,assumption"
            );
            for r in rows {
                let kind = match r.kind {
                    limb_core::workloads::RowKind::Baseline => "baseline",
                    limb_core::workloads::RowKind::Estimator => "estimator",
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.label,
                    kind,
                    sci(r.total_joules),
                    sci(r.per_op_kt),
                    sci(r.ratio_to_lim_b),
                    r.assumption
                );
            }
        }
        Results::Kinetics(k) => {
            let _ = writeln!(
                out,
                "rate_per_sec,std_error_per_sec,analytic_rate_per_sec,z_score,forward_events,backward_events,generator"
            );
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                sci(k.estimate.rate_per_sec),
                sci(k.estimate.std_error_per_sec),
                sci(k.estimate.analytic_rate_per_sec),
                sci(k.z_score),
                k.estimate.forward_events,
                k.estimate.backward_events,
                k.estimate.generator
            );
        }
        Results::Walk(w) => {
            let _ = writeln!(
                out,
                "trials,steps,fraction_within_tol,success_radius_grid,total_hops,final_distance_mean,final_distance_max,generator"
            );
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                w.trials,
                w.steps,
                sci(w.fraction_within_tol),
                sci(w.success_radius_grid),
                w.total_hops,
                sci(w.final_distance_mean),
                sci(w.final_distance_max),
                w.generator
            );
        }
        Results::Audit(a) => {
            let _ = writeln!(
                out,
                "accounting,trials,total_hops,mean_kt,std_error_kt,mean_per_hop_kt,generator"
            );
            let acct = match a.accounting {
                DissipationAccounting::GradientEnergy => "lim-a",
                DissipationAccounting::BarrierEnergy => "lim-b",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                acct,
                a.trials,
                a.total_hops,
                sci(a.mean_kt),
                sci(a.std_error_kt),
                sci(a.mean_per_hop_kt),
                a.generator
            );
        }
    }
    Ok(out)
}

/// Render the walk trajectory dump (`trial,step,wx,wy,loss,hop`).
pub fn walk_samples_csv(samples: &[limb_core::stochastic::WalkSample]) -> String {
    let mut out = String::from("trial,step,wx,wy,loss,hop\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.trial,
            s.step,
            sci(s.wx),
            sci(s.wy),
            sci(s.loss),
            s.hop
        );
    }
    out
}

/// Write to the chosen sink: a path or standard output.
pub fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::validation(format!("cannot write to stdout: {e}")))
        }
    }
}
