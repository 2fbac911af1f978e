use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::summary::{
    Check, CutoffRow, EigenSummary, InequalitySummary, Relation, ResidualRow, RunSummary, TraceSeries,
};
use crate::elliptic::{CoefficientField, EllipticOperator, Grid};
use crate::error::{Error, Result};
use crate::probe::{
    boundary_family, build_cutoffs, build_deformation, build_level_set, decay_table, initial_trace_check,
    trace_family, weak_family, weak_residual, DecayTable,
};
use crate::solver::continuation::{parameter_pairs, summarize};
use crate::solver::diagnostics;
use crate::solver::run::{LINF_GROWTH_TOL, MASS_BALANCE_TOL, POSITIVITY_FLOOR};
use crate::solver::{prepare_initial, run_unchecked, ContinuationReport, SolverParams, Trajectory};
use crate::spectral::inequalities::MARGIN_FLOOR;
use crate::spectral::{measure_inequalities, InequalityReport, SpectralDecomposition};

pub const FAILED_MARKER: &str = "FAILED";
const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
const EIGEN_GRAM_TOL: f64 = 1e-10;

/// Grid, operator and eigendecomposition for one configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: RunConfig,
    pub grid: Grid,
    pub operator: Arc<EllipticOperator>,
    pub decomposition: Arc<SpectralDecomposition>,
}

impl Scenario {
    pub fn build(config: &RunConfig) -> Result<Self> {
        let tag = |e: Error| e.in_module("elliptic_core");
        let grid = Grid::new(&config.domain).map_err(tag)?;
        let coeff = CoefficientField::sample(&config.coefficient, &grid).map_err(tag)?;
        let operator = Arc::new(EllipticOperator::assemble(&grid, &coeff).map_err(tag)?);
        let decomposition = Arc::new(
            SpectralDecomposition::new(Arc::clone(&operator)).map_err(|e| e.in_module("spectral_calculus"))?,
        );
        Ok(Scenario {
            config: config.clone(),
            grid,
            operator,
            decomposition,
        })
    }

    pub fn eigen_summary(&self) -> EigenSummary {
        let d = &self.decomposition;
        EigenSummary {
            lambda_min: d.lambda_min(),
            lambda_max: d.lambda_max(),
            max_residual: d.max_residual(),
            gram_error: d.gram_error(),
        }
    }

    pub fn eigen_checks(&self) -> Vec<Check> {
        let d = &self.decomposition;
        vec![
            Check::new(
                "eigen.residual",
                d.max_residual(),
                Relation::AtMost,
                EIGEN_RESIDUAL_TOL * d.lambda_max(),
            ),
            Check::new("eigen.orthonormality", d.gram_error(), Relation::AtMost, EIGEN_GRAM_TOL),
        ]
    }

    /// The inequality suite at every configured order.
    pub fn inequalities(&self) -> Result<Vec<InequalityReport>> {
        let p = &self.config.probes;
        p.inequality_orders
            .iter()
            .map(|&s| {
                measure_inequalities(&self.decomposition, s, p.inequality_probes, p.seed)
                    .map_err(|e| e.in_module("spectral_calculus"))
            })
            .collect()
    }

    pub fn initial_data(&self, delta: f64) -> Result<Vec<f64>> {
        prepare_initial(&self.config.initial, &self.operator, delta).map_err(|e| e.in_module("degenerate_solver"))
    }

    pub fn simulate(&self, params: SolverParams) -> Result<Trajectory> {
        let u0 = self.initial_data(params.delta)?;
        run_unchecked(Arc::clone(&self.decomposition), params, &u0).map_err(|e| e.in_module("degenerate_solver"))
    }
}

pub fn inequality_checks(reports: &[InequalityReport]) -> Vec<Check> {
    let mut checks = Vec::new();
    for r in reports {
        for rec in &r.records {
            checks.push(Check::new(
                format!("inequality.{}.s={}", rec.name, r.s),
                rec.worst_margin,
                Relation::AtLeast,
                MARGIN_FLOOR,
            ));
        }
    }
    checks
}

pub fn solver_checks(traj: &Trajectory) -> Vec<Check> {
    let st = &traj.stats;
    let allowance = st.energy_allowance(&traj.params);
    vec![
        Check::new("solver.mass_balance", st.mass_balance_error, Relation::AtMost, MASS_BALANCE_TOL),
        Check::new("solver.positivity", st.min_value, Relation::AtLeast, POSITIVITY_FLOOR),
        Check::new("solver.linf_growth", st.linf_growth, Relation::AtMost, LINF_GROWTH_TOL),
        Check::new("solver.entropy_residual", st.entropy_residual, Relation::AtMost, allowance),
        Check::new("solver.energy_residual", st.energy_residual, Relation::AtMost, allowance),
    ]
}

/// Largest ratio of consecutive entries, `0/0` counting as 0.
fn worst_step_ratio(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].abs(), w[1].abs());
            if b == 0.0 {
                0.0
            } else if a == 0.0 {
                f64::INFINITY
            } else {
                b / a
            }
        })
        .fold(0.0, f64::max)
}

fn decay_checks(table: &DecayTable) -> Vec<Check> {
    table
        .gammas
        .iter()
        .zip(table.ratios())
        .map(|(g, r)| Check::new(format!("boundary.decay.{g}"), r, Relation::Below, 1.0))
        .collect()
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn snapshot_csv(grid: &Grid, u: &[f64]) -> String {
    let mut s = String::from(if grid.dim() == 1 { "x,u\n" } else { "x,y,u\n" });
    for (c, p) in grid.cell_centers().iter().enumerate() {
        if grid.dim() == 1 {
            let _ = writeln!(s, "{:.17e},{:.17e}", p[0], u[c]);
        } else {
            let _ = writeln!(s, "{:.17e},{:.17e},{:.17e}", p[0], p[1], u[c]);
        }
    }
    s
}

/// `diagnostics.csv` and, if enabled, `snapshots/` with an index.
pub fn write_trajectory(dir: &Path, traj: &Trajectory, snapshots: bool) -> Result<()> {
    write(&dir.join("diagnostics.csv"), diagnostics::to_csv(&traj.diagnostics))?;
    if snapshots {
        let sdir = dir.join("snapshots");
        fs::create_dir_all(&sdir).map_err(|e| Error::io(&sdir, e))?;
        let grid = traj.operator.grid();
        let mut index = String::from("index,t,file\n");
        for (k, &lv) in traj.snapshots.iter().enumerate() {
            let name = format!("snapshot_{k:04}.csv");
            let level = &traj.levels[lv];
            write(&sdir.join(&name), snapshot_csv(grid, &level.u))?;
            let _ = writeln!(index, "{k},{:.17e},{name}", level.t);
        }
        write(&sdir.join("index.csv"), index)?;
    }
    Ok(())
}

fn prepare_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let marker = out.join(FAILED_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    }
    Ok(())
}

/// Leaves a `FAILED` marker holding the error next to whatever was written.
fn mark_failed<T>(out: &Path, result: Result<T>) -> Result<T> {
    if let Err(e) = &result {
        let _ = fs::write(out.join(FAILED_MARKER), format!("{e}\n"));
    }
    result
}

/// Runs every stage of a scenario and writes its artifacts to `out`.
pub fn run_scenario(config: &RunConfig, out: &Path) -> Result<RunSummary> {
    prepare_dir(out)?;
    mark_failed(out, execute(config, out).map(|(summary, _)| summary))
}

fn execute(config: &RunConfig, out: &Path) -> Result<(RunSummary, Trajectory)> {
    let sc = Scenario::build(config)?;
    let mut checks = sc.eigen_checks();
    write(&out.join("eigenvalues.csv"), sc.decomposition.eigenvalue_csv())?;

    let reports = sc.inequalities()?;
    write(&out.join("inequalities.json"), serde_json::to_string_pretty(&reports)?)?;
    checks.extend(inequality_checks(&reports));
    let inequalities = reports
        .iter()
        .filter_map(|r| {
            r.worst().map(|w| InequalitySummary {
                s: r.s,
                worst_name: w.name.clone(),
                worst_margin: w.worst_margin,
            })
        })
        .collect();

    let traj = sc.simulate(config.solver)?;
    write_trajectory(out, &traj, config.output.snapshots)?;
    checks.extend(solver_checks(&traj));

    let probe = |e: Error| e.in_module("boundary_probe");
    let p = &config.probes;
    let extents = &config.domain.extents;
    let t_end = config.solver.t_end;
    let def = build_deformation(&sc.grid, p.epsilon, &p.taus).map_err(probe)?;
    let decay = decay_table(&traj, &def, &boundary_family(extents, t_end)).map_err(probe)?;
    write(&out.join("decay.csv"), decay.to_csv())?;
    checks.extend(decay_checks(&decay));

    let level = build_level_set(&def, &sc.grid).map_err(probe)?;
    let cut = build_cutoffs(&level, &p.ks).map_err(probe)?;
    write(&out.join("cutoffs.csv"), cut.to_csv())?;
    checks.push(Check::new(
        "cutoffs.decreasing",
        worst_step_ratio(&cut.one_minus_sq),
        Relation::Below,
        1.0,
    ));
    let cutoffs = (0..cut.ks.len())
        .map(|i| CutoffRow {
            k: cut.ks[i],
            one_minus_sq: cut.one_minus_sq[i],
            gradient_sq: cut.gradient_sq[i],
        })
        .collect();

    let n = config.domain.resolution[0];
    let mut residuals = Vec::new();
    let mut csv = String::from("phi,n,dt,raw,regularized\n");
    for phi in weak_family(extents, t_end, p.bump_width) {
        let r = weak_residual(&traj, &phi).map_err(probe)?;
        let _ = writeln!(
            csv,
            "{},{n},{:.17e},{:.17e},{:.17e}",
            phi.name, traj.stats.max_dt, r.raw, r.regularized
        );
        residuals.push(ResidualRow {
            phi: phi.name.clone(),
            n,
            dt: traj.stats.max_dt,
            raw: r.raw,
            regularized: r.regularized,
        });
    }
    write(&out.join("residuals.csv"), csv)?;

    let mut initial_trace = Vec::new();
    for zeta in trace_family(extents, p.bump_width) {
        let values = initial_trace_check(&traj, &zeta, &p.trace_times).map_err(probe)?;
        checks.push(Check::new(
            format!("initial_trace.{}", zeta.name()),
            worst_step_ratio(&values),
            Relation::AtMost,
            1.0,
        ));
        initial_trace.push(TraceSeries {
            zeta: zeta.name().to_string(),
            values,
        });
    }
    let mut csv = String::from("t");
    for s in &initial_trace {
        let _ = write!(csv, ",{}", s.zeta);
    }
    csv.push('\n');
    for (i, t) in p.trace_times.iter().enumerate() {
        let _ = write!(csv, "{t:.17e}");
        for s in &initial_trace {
            let _ = write!(csv, ",{:.17e}", s.values[i]);
        }
        csv.push('\n');
    }
    write(&out.join("initial_trace.csv"), csv)?;

    let passed = checks.iter().all(Check::passed);
    let summary = RunSummary {
        config: config.clone(),
        grid: sc.grid.descriptor(),
        eigen: sc.eigen_summary(),
        inequalities,
        initial_diagnostics: traj.diagnostics[0],
        final_diagnostics: *traj.final_diagnostics(),
        stats: traj.stats,
        mass_drift: traj.mass_drift(),
        snapshot_times: traj.snapshot_times(),
        decay,
        residuals,
        cutoffs,
        trace_times: p.trace_times.clone(),
        initial_trace,
        checks,
        passed,
    };
    write(&out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok((summary, traj))
}

/// Result of `continue`: the per-level runs and the limit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOutcome {
    pub levels: Vec<PathBuf>,
    pub report: ContinuationReport,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Runs the full scenario for each `(delta, mu)` pair in its own
/// subdirectory `level_k`, in parallel, then writes `continuation.json`.
pub fn run_continuation(config: &RunConfig, deltas: &[f64], mus: &[f64], out: &Path) -> Result<ContinuationOutcome> {
    let pairs = parameter_pairs(deltas, mus).map_err(|e| e.in_module("degenerate_solver"))?;
    prepare_dir(out)?;
    let result = (|| {
        let runs: Vec<(PathBuf, RunSummary, Trajectory)> = pairs
            .par_iter()
            .enumerate()
            .map(|(k, &(delta, mu))| {
                let dir = out.join(format!("level_{k}"));
                let mut cfg = config.clone();
                cfg.solver.delta = delta;
                cfg.solver.mu = mu;
                cfg.output.dir = dir.display().to_string();
                prepare_dir(&dir)?;
                let (summary, traj) = mark_failed(&dir, execute(&cfg, &dir))?;
                Ok((dir, summary, traj))
            })
            .collect::<Result<_>>()?;
        let trajectories: Vec<Trajectory> = runs.iter().map(|r| r.2.clone()).collect();
        let report = summarize(&trajectories, trajectories[0].operator.grid().cell_volume())
            .map_err(|e| e.in_module("degenerate_solver"))?;
        let mut checks: Vec<Check> = Vec::new();
        let diffs: Vec<f64> = report.pairwise.iter().map(|p| p.l2_difference).collect();
        let drifts: Vec<f64> = report.levels.iter().map(|l| l.terminal_mass_drift).collect();
        checks.push(Check::new(
            "continuation.differences_decreasing",
            worst_step_ratio(&diffs),
            Relation::Below,
            1.0,
        ));
        checks.push(Check::new(
            "continuation.drift_decreasing",
            worst_step_ratio(&drifts),
            Relation::Below,
            1.0,
        ));
        for (dir, summary, _) in &runs {
            checks.push(Check::new(
                format!("{}.checks_failed", dir.file_name().unwrap().to_string_lossy()),
                summary.failed_checks().count() as f64,
                Relation::AtMost,
                0.0,
            ));
        }
        let passed = checks.iter().all(Check::passed);
        let outcome = ContinuationOutcome {
            levels: runs
                .iter()
                .map(|r| PathBuf::from(r.0.file_name().unwrap()))
                .collect(),
            report,
            checks,
            passed,
        };
        write(&out.join("continuation.json"), serde_json::to_string_pretty(&outcome)? + "\n")?;
        Ok(outcome)
    })();
    mark_failed(out, result)
}

/// Eigen certification plus the inequality suite only.
pub fn check_operators(config: &RunConfig) -> Result<Vec<Check>> {
    let sc = Scenario::build(config)?;
    let mut checks = sc.eigen_checks();
    checks.extend(inequality_checks(&sc.inequalities()?));
    Ok(checks)
}

