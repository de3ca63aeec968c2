//! Trajectories, drift series, convergence sweeps and their CSV files.

use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, Retraction, RetractionKind};
use crate::rkmk::{rk4_baseline_step, ButcherTableau, Rkmk, StepRecord};
use crate::systems::{
    free_rigid_body, relaxed_rigid_body, rigid_body_llg, ForcedEpSystem, RigidBody, RigidBodyParams,
};

/// Errors below this are treated as roundoff and left out of slope fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

/// A rigid body with one of the shipped force laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemSpec {
    Free { inertia: [f64; 3] },
    Llg { inertia: [f64; 3], alpha: f64 },
    Relaxed { inertia: [f64; 3], beta: f64 },
}

impl SystemSpec {
    pub fn build(&self) -> Result<RigidBody> {
        match *self {
            SystemSpec::Free { inertia } => free_rigid_body(inertia),
            SystemSpec::Llg { inertia, alpha } => rigid_body_llg(RigidBodyParams::new(inertia, alpha)),
            SystemSpec::Relaxed { inertia, beta } => {
                relaxed_rigid_body(RigidBodyParams::new(inertia, beta))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Free { .. } => "free",
            SystemSpec::Llg { .. } => "llg",
            SystemSpec::Relaxed { .. } => "relaxed",
        }
    }
}

/// A variational tableau or the non-variational RK4 baseline.
#[derive(Clone, Debug, PartialEq)]
pub enum MethodSpec {
    Tableau(ButcherTableau),
    Rk4Baseline,
}

impl MethodSpec {
    pub fn name(&self) -> &str {
        match self {
            MethodSpec::Tableau(t) => &t.name,
            MethodSpec::Rk4Baseline => "rk4_baseline",
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4_baseline" => Ok(MethodSpec::Rk4Baseline),
            name => ButcherTableau::by_name(name).map(MethodSpec::Tableau),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Output {
    Energy,
    Casimir,
    Momentum,
    OrderSweep,
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(Output::Energy),
            "casimir" => Ok(Output::Casimir),
            "momentum" => Ok(Output::Momentum),
            "order_sweep" => Ok(Output::OrderSweep),
            other => Err(Error::Config(format!("unknown output `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSpec {
    pub method: MethodSpec,
    pub h: f64,
    pub retraction: RetractionKind,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self {
            method: MethodSpec::Tableau(ButcherTableau::by_name("gauss3").expect("shipped tableau")),
            h: 1e-4,
            retraction: RetractionKind::Cayley,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub method: MethodSpec,
    pub retraction: RetractionKind,
    pub h: f64,
    pub t_final: f64,
    pub initial_omega: [f64; 3],
    pub outputs: Vec<Output>,
    pub sweep_h: Option<Vec<f64>>,
    pub reference: ReferenceSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            system: SystemSpec::Llg {
                inertia: [0.5, 2.0, 1.0],
                alpha: 1.0,
            },
            method: MethodSpec::Tableau(ButcherTableau::by_name("gauss2").expect("shipped tableau")),
            retraction: RetractionKind::Cayley,
            h: 0.01,
            t_final: 1.0,
            initial_omega: [s, 0.0, s],
            outputs: vec![Output::Energy, Output::Casimir],
            sweep_h: None,
            reference: ReferenceSpec::default(),
        }
    }
}

/// Desk-scale step sizes `0.1, 0.05, ..., 0.00625`.
pub fn default_sweep() -> Vec<f64> {
    (0..5).map(|k| 0.1 / f64::powi(2.0, k)).collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("h", self.h)?;
        positive("t_final", self.t_final)?;
        positive("reference h", self.reference.h)?;
        if self.initial_omega.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("initial_omega must be finite".into()));
        }
        if let Some(hs) = &self.sweep_h {
            if hs.is_empty() {
                return Err(Error::Parameter("sweep_h is empty".into()));
            }
            for h in hs {
                positive("sweep h", *h)?;
            }
            if hs.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::Parameter("sweep_h must be strictly decreasing".into()));
            }
        }
        Ok(())
    }

    pub fn initial_velocity(&self) -> AlgebraVector {
        AlgebraVector(self.initial_omega.into())
    }

    /// The same experiment at another step size.
    pub fn with_step(&self, h: f64) -> Self {
        Self { h, ..self.clone() }
    }
}

/// `round(t_final / h)`, warning when the ratio is not close to an integer.
pub fn step_count(t_final: f64, h: f64) -> Result<usize> {
    let ratio = t_final / h;
    let n = ratio.round();
    if n < 1.0 {
        return Err(Error::Parameter(format!(
            "t_final = {t_final} is shorter than one step of {h}"
        )));
    }
    if (ratio - n).abs() > 1e-9 * ratio {
        log::warn!("t_final / h = {ratio} is not an integer; taking {n} steps");
    }
    Ok(n as usize)
}

fn retraction(kind: RetractionKind) -> Retraction {
    Retraction::new(kind)
}

/// Integrates `sys` with `method` for `steps` steps of size `h`.
pub fn integrate<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    method: &MethodSpec,
    r: Retraction,
    h: f64,
    steps: usize,
    omega0: &AlgebraVector,
) -> Result<Vec<StepRecord>> {
    let mut records = Vec::with_capacity(steps + 1);
    records.push(StepRecord::initial(sys, 0.0, GroupElement::identity(), *omega0));
    match method {
        MethodSpec::Tableau(t) => {
            let m = Rkmk::new(t.clone(), r, h)?;
            for k in 0..steps {
                let prev = &records[k];
                let (stage, iters, residual) = m
                    .solve_stages(sys, &prev.lambda, None)
                    .map_err(|e| e.at_step(k, prev.t))?;
                let lambda = m
                    .momentum_update(&stage, &prev.lambda)
                    .map_err(|e| e.at_step(k, prev.t))?;
                let g = &prev.g * &r.tau(&stage.xi_step);
                let t = (k + 1) as f64 * h;
                records.push(StepRecord::from_momentum(sys, t, g, lambda, iters, residual));
            }
        }
        MethodSpec::Rk4Baseline => {
            for k in 0..steps {
                let prev = &records[k];
                let (lambda, g) = rk4_baseline_step(sys, h, &prev.lambda, &prev.g, &r)
                    .map_err(|e| e.at_step(k, prev.t))?;
                let t = (k + 1) as f64 * h;
                records.push(StepRecord::from_momentum(sys, t, g, lambda, 0, 0.0));
            }
        }
    }
    Ok(records)
}

/// All `round(T/h) + 1` records of the configured run, including `t = 0`.
pub fn run_trajectory(cfg: &ExperimentConfig) -> Result<Vec<StepRecord>> {
    cfg.validate()?;
    let sys = cfg.system.build()?;
    let steps = step_count(cfg.t_final, cfg.h)?;
    integrate(
        &sys,
        &cfg.method,
        retraction(cfg.retraction),
        cfg.h,
        steps,
        &cfg.initial_velocity(),
    )
}

/// A scalar tracked along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Energy,
    Casimir(usize),
}

impl Quantity {
    pub fn of(&self, rec: &StepRecord) -> f64 {
        match *self {
            Quantity::Energy => rec.energy,
            Quantity::Casimir(i) => rec.casimirs.get(i).copied().unwrap_or(f64::NAN),
        }
    }

    /// File-name label: `energy`, `casimir`, `casimir_1`, ...
    pub fn label(&self) -> String {
        match *self {
            Quantity::Energy => "energy".into(),
            Quantity::Casimir(0) => "casimir".into(),
            Quantity::Casimir(i) => format!("casimir_{i}"),
        }
    }
}

/// Values of a quantity minus its initial value.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSeries {
    pub t: Vec<f64>,
    pub value: Vec<f64>,
}

impl DriftSeries {
    pub fn max_abs(&self) -> f64 {
        self.value.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest increase between consecutive samples (negative if strictly decreasing).
    pub fn max_increment(&self) -> f64 {
        self.value
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest decrease between consecutive samples.
    pub fn max_decrement(&self) -> f64 {
        self.value
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn last(&self) -> f64 {
        self.value.last().copied().unwrap_or(0.0)
    }
}

pub fn drift(records: &[StepRecord], quantity: Quantity) -> DriftSeries {
    let q0 = records.first().map(|r| quantity.of(r)).unwrap_or(0.0);
    DriftSeries {
        t: records.iter().map(|r| r.t).collect(),
        value: records.iter().map(|r| quantity.of(r) - q0).collect(),
    }
}

/// What a sweep compares against the reference at `t_final`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMeasure {
    /// Euclidean norm of the final momentum difference.
    Momentum,
    /// Absolute difference of the final energies.
    Energy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderRow {
    pub h: f64,
    /// `None` when the run at this step size failed.
    pub error: Option<f64>,
    /// Per-component momentum differences.
    pub components: Option<[f64; 3]>,
    pub local_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderTable {
    pub method: String,
    pub measure: SweepMeasure,
    pub rows: Vec<OrderRow>,
    /// Least-squares slope over errors at or above [`ROUNDOFF_FLOOR`].
    pub fitted_slope: Option<f64>,
    /// Distance between the reference runs at `h_ref` and `h_ref / 2`.
    pub reference_spread: f64,
}

/// Final record of the reference run, after checking it against a run at
/// half the reference step.
pub fn reference_final(cfg: &ExperimentConfig) -> Result<(StepRecord, StepRecord)> {
    let sys = cfg.system.build()?;
    let refr = &cfg.reference;
    let r = retraction(refr.retraction);
    let omega0 = cfg.initial_velocity();
    let run = |h: f64| -> Result<StepRecord> {
        let steps = step_count(cfg.t_final, h)?;
        let mut recs = integrate(&sys, &refr.method, r, h, steps, &omega0)?;
        Ok(recs.pop().expect("at least one record"))
    };
    let (a, b) = rayon::join(|| run(refr.h), || run(refr.h / 2.0));
    Ok((a?, b?))
}

fn measure(m: SweepMeasure, run: &StepRecord, reference: &StepRecord) -> (f64, [f64; 3]) {
    let d = run.lambda - reference.lambda;
    let components = [d.0[0].abs(), d.0[1].abs(), d.0[2].abs()];
    match m {
        SweepMeasure::Momentum => (d.norm(), components),
        SweepMeasure::Energy => ((run.energy - reference.energy).abs(), components),
    }
}

/// Least-squares slope of `ln error` against `ln h`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e >= ROUNDOFF_FLOOR && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Error at `t_final` for every step size in `sweep_h`, against the reference.
///
/// Runs are independent and execute in parallel. A run that fails yields a
/// row with no error instead of failing the sweep.
pub fn order_sweep(cfg: &ExperimentConfig, m: SweepMeasure) -> Result<OrderTable> {
    cfg.validate()?;
    let hs = cfg
        .sweep_h
        .clone()
        .ok_or_else(|| Error::Config("order sweep needs sweep_h".into()))?;
    let (reference, runs) = rayon::join(
        || reference_final(cfg),
        || {
            hs.par_iter()
                .map(|&h| -> Result<StepRecord> {
                    let mut recs = run_trajectory(&cfg.with_step(h))?;
                    Ok(recs.pop().expect("at least one record"))
                })
                .collect::<Vec<_>>()
        },
    );
    let (ref_a, ref_b) = reference?;
    let spread = measure(m, &ref_a, &ref_b).0;

    let mut rows: Vec<OrderRow> = hs
        .iter()
        .zip(runs)
        .map(|(&h, run)| match run {
            Ok(rec) => {
                let (error, components) = measure(m, &rec, &ref_a);
                OrderRow {
                    h,
                    error: Some(error),
                    components: Some(components),
                    local_slope: None,
                }
            }
            Err(e) => {
                log::warn!("sweep point h = {h} failed: {e}");
                OrderRow {
                    h,
                    error: None,
                    components: None,
                    local_slope: None,
                }
            }
        })
        .collect();
    for i in 1..rows.len() {
        if let (Some(e0), Some(e1)) = (rows[i - 1].error, rows[i].error) {
            rows[i].local_slope = Some((e0 / e1).ln() / (rows[i - 1].h / rows[i].h).ln());
        }
    }

    let smallest = rows
        .iter()
        .filter_map(|r| r.error)
        .filter(|e| *e >= ROUNDOFF_FLOOR)
        .fold(f64::INFINITY, f64::min);
    if smallest.is_finite() && spread >= smallest {
        return Err(Error::ReferenceInconsistent { spread, smallest });
    }
    let points: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.error.map(|e| (r.h, e))).collect();
    Ok(OrderTable {
        method: cfg.method.name().to_string(),
        measure: m,
        rows,
        fitted_slope: fit_slope(&points),
        reference_spread: spread,
    })
}

/// Decimal representation with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn optional(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

pub fn write_trajectory(path: &Path, records: &[StepRecord]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record([
        "t", "eta_x", "eta_y", "eta_z", "mu_x", "mu_y", "mu_z", "energy", "casimir", "newton_iters",
        "residual",
    ])?;
    for r in records {
        let mut row: Vec<String> = vec![format_real(r.t)];
        row.extend(r.eta.as_array().iter().map(|x| format_real(*x)));
        row.extend(r.lambda.as_array().iter().map(|x| format_real(*x)));
        row.push(format_real(r.energy));
        row.push(optional(r.casimirs.first().copied()));
        row.push(r.newton_iters.to_string());
        row.push(format_real(r.residual));
        w.write_record(&row)?;
    }
    finish(w, path)
}

pub fn write_drift(path: &Path, series: &DriftSeries) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["t", "value"])?;
    for (t, v) in series.t.iter().zip(&series.value) {
        w.write_record([format_real(*t), format_real(*v)])?;
    }
    finish(w, path)
}

pub fn write_order(path: &Path, table: &OrderTable) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["h", "error", "local_slope"])?;
    for r in &table.rows {
        w.write_record([format_real(r.h), optional(r.error), optional(r.local_slope)])?;
    }
    finish(w, path)
}

/// Per-component companion of [`write_order`]: `h,error_x,error_y,error_z`.
pub fn write_order_components(path: &Path, table: &OrderTable) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["h", "error_x", "error_y", "error_z"])?;
    for r in &table.rows {
        let c = r.components.map(|c| c.map(format_real)).unwrap_or_default();
        w.write_record([format_real(r.h), c[0].clone(), c[1].clone(), c[2].clone()])?;
    }
    finish(w, path)
}

/// Reads a two-column `t,value` file written by [`write_drift`].
pub fn read_drift(path: &Path) -> Result<DriftSeries> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut series = DriftSeries {
        t: Vec::new(),
        value: Vec::new(),
    };
    for row in rdr.records() {
        let row = row?;
        let parse = |i: usize| -> Result<f64> {
            row.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parameter(format!("malformed row in {}", path.display())))
        };
        series.t.push(parse(0)?);
        series.value.push(parse(1)?);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_has_one_record_per_step() {
        let recs = run_trajectory(&ExperimentConfig::default()).unwrap();
        assert_eq!(recs.len(), 101);
        assert!(recs.iter().all(|r| r.newton_iters <= 10));
    }

    #[test]
    fn oversized_step_fails_at_step_zero() {
        let cfg = ExperimentConfig {
            retraction: RetractionKind::Exponential,
            h: 10.0,
            t_final: 10.0,
            ..ExperimentConfig::default()
        };
        match run_trajectory(&cfg) {
            Err(Error::Step { step: 0, source, .. }) => assert!(matches!(*source, Error::Domain(_))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_increasing_sweep() {
        let cfg = ExperimentConfig {
            sweep_h: Some(vec![0.01, 0.02]),
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn slope_fit_skips_the_floor() {
        let pts = [(0.1, 1e-4), (0.05, 2.5e-5), (0.025, 6.25e-6), (0.0125, 1e-13)];
        assert!((fit_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_slope(&[(0.1, 1e-12)]), None);
    }

    #[test]
    fn drift_starts_at_zero() {
        let recs = run_trajectory(&ExperimentConfig::default()).unwrap();
        let d = drift(&recs, Quantity::Energy);
        assert_eq!(d.value[0], 0.0);
        assert_eq!(d.t.len(), d.value.len());
        assert!(d.t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn drift_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("drift_energy.csv");
        let series = DriftSeries {
            t: vec![0.0, 0.1, 0.2],
            value: vec![0.0, -1.234_567_890_123_456_7e-9, std::f64::consts::PI],
        };
        write_drift(&path, &series).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,value\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_drift(&path).unwrap(), series);
    }
}
