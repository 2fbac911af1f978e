use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::diagnostics::{self, DiagnosticsRecord};
use super::params::SolverParams;
use super::scheme::Solver;
use crate::elliptic::EllipticOperator;
use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;

pub const MASS_BALANCE_TOL: f64 = 1e-10;
pub const POSITIVITY_FLOOR: f64 = -1e-12;
pub const LINF_GROWTH_TOL: f64 = 1e-8;

/// One accepted time level.
#[derive(Debug, Clone)]
pub struct TimeLevel {
    pub t: f64,
    pub u: Vec<f64>,
    pub ku: Vec<f64>,
}

/// Worst observed value of each per-step property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// largest `|dmass - dt * boundary_flux| / mass`
    pub mass_balance_error: f64,
    pub min_value: f64,
    /// largest `linf_{n+1} / linf_n - 1`
    pub linf_growth: f64,
    /// largest cumulative entropy-inequality residual
    pub entropy_residual: f64,
    /// largest cumulative second-energy-inequality residual
    pub energy_residual: f64,
    /// largest step taken; residual slack is `energy_slack * max_dt`
    pub max_dt: f64,
    pub steps: usize,
}

impl RunStats {
    pub fn energy_allowance(&self, params: &SolverParams) -> f64 {
        params.energy_slack * self.max_dt
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub operator: Arc<EllipticOperator>,
    pub params: SolverParams,
    /// lower ellipticity constant entering both energy estimates
    pub lambda_1: f64,
    pub levels: Vec<TimeLevel>,
    /// indices into `levels`
    pub snapshots: Vec<usize>,
    /// one record per level
    pub diagnostics: Vec<DiagnosticsRecord>,
    /// `dt` of the step ending at each level (0 for the initial level)
    pub dts: Vec<f64>,
    pub entropy_residuals: Vec<f64>,
    pub energy_residuals: Vec<f64>,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn initial(&self) -> &TimeLevel {
        &self.levels[0]
    }

    pub fn last(&self) -> &TimeLevel {
        self.levels.last().unwrap()
    }

    pub fn final_diagnostics(&self) -> &DiagnosticsRecord {
        self.diagnostics.last().unwrap()
    }

    /// `mass(T) - mass(0)`.
    pub fn mass_drift(&self) -> f64 {
        self.final_diagnostics().mass - self.diagnostics[0].mass
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|&i| self.levels[i].t).collect()
    }

    pub fn snapshot_fields(&self) -> Vec<&[f64]> {
        self.snapshots.iter().map(|&i| self.levels[i].u.as_slice()).collect()
    }
}

/// `(int_0^T int |a - b|^2)^{1/2}` from fields at shared snapshot times,
/// trapezoid rule in time.
pub fn space_time_l2(times: &[f64], a: &[&[f64]], b: &[&[f64]], cell_volume: f64) -> Result<f64> {
    if a.len() != times.len() || b.len() != times.len() {
        return Err(Error::Comparison(format!(
            "snapshot counts differ: {} times, {} and {} fields",
            times.len(),
            a.len(),
            b.len()
        )));
    }
    let sq: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            if x.len() != y.len() {
                return Err(Error::Comparison(format!("field sizes {} and {} differ", x.len(), y.len())));
            }
            Ok(cell_volume * x.iter().zip(*y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
        })
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for k in 1..times.len() {
        total += 0.5 * (times[k] - times[k - 1]) * (sq[k] + sq[k - 1]);
    }
    Ok(total.sqrt())
}

/// Runs to `t_end` and fails with a property violation on the first step
/// that breaks mass balance, positivity, the L-infinity bound or either
/// energy inequality beyond its slack.
pub fn run(dec: Arc<SpectralDecomposition>, params: SolverParams, u0: &[f64]) -> Result<Trajectory> {
    simulate(dec, params, u0, true)
}

/// Same as [`run`] but only records the worst values in [`RunStats`].
pub fn run_unchecked(dec: Arc<SpectralDecomposition>, params: SolverParams, u0: &[f64]) -> Result<Trajectory> {
    simulate(dec, params, u0, false)
}

fn simulate(dec: Arc<SpectralDecomposition>, params: SolverParams, u0: &[f64], enforce: bool) -> Result<Trajectory> {
    let mut solver = Solver::new(dec, params).map_err(|e| e.in_module("degenerate_solver"))?;
    let lambda_1 = solver.operator().coefficient().lambda_min();
    let mut state = solver.initial_state(u0)?;
    if let Some(i) = u0.iter().position(|&x| x < 0.0) {
        return Err(Error::config(format!("initial data is negative at cell {i}")));
    }
    let first = diagnostics::compute(&solver, &state, 0.0)?;

    let mut traj = Trajectory {
        operator: Arc::clone(solver.decomposition().operator()),
        params,
        lambda_1,
        levels: vec![TimeLevel {
            t: 0.0,
            u: state.u.clone(),
            ku: state.ku.clone(),
        }],
        snapshots: vec![0],
        diagnostics: vec![first],
        dts: vec![0.0],
        entropy_residuals: vec![0.0],
        energy_residuals: vec![0.0],
        stats: RunStats {
            mass_balance_error: 0.0,
            min_value: first.min,
            linf_growth: f64::NEG_INFINITY,
            entropy_residual: 0.0,
            energy_residual: 0.0,
            max_dt: 0.0,
            steps: 0,
        },
    };

    let t_end = params.t_end;
    let eps_t = 1e-12 * t_end;
    let mut next_snapshot = 1usize;
    let mut cum_flux = 0.0;
    let mut entropy_dissipated = 0.0;
    let mut energy_dissipated = 0.0;
    while state.t < t_end - eps_t {
        let target = (next_snapshot as f64 * params.snapshot_interval).min(t_end);
        let cfl = solver.cfl_dt(&state);
        let remaining = target - state.t;
        // land exactly on snapshot times; avoid a sliver step just before them
        let dt = if remaining <= cfl * (1.0 + 1e-9) {
            remaining
        } else {
            cfl
        };
        let (next, report) = solver.step(&state, dt)?;
        let prev = *traj.diagnostics.last().unwrap();
        cum_flux += dt * report.boundary_flux;
        let mut rec = diagnostics::compute(&solver, &next, cum_flux)?;
        let arrived = (next.t - target).abs() <= eps_t;
        if arrived {
            rec.t = target;
        }
        if !rec.is_finite() {
            return Err(Error::numerical("diagnostics", format!("non-finite record at step {}", next.step)));
        }
        let step = next.step;

        let scale = prev.mass.abs().max(rec.mass.abs()).max(f64::MIN_POSITIVE);
        let balance = ((rec.mass - prev.mass) - dt * report.boundary_flux).abs() / scale;
        let growth = if prev.linf > 0.0 {
            rec.linf / prev.linf - 1.0
        } else if rec.linf > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        entropy_dissipated += dt * lambda_1 * (rec.visc_dissip + rec.h_dissip);
        energy_dissipated += dt * lambda_1 * (params.delta * rec.h_dissip + rec.k_dissip);
        let r_entropy = rec.entropy + entropy_dissipated - traj.diagnostics[0].entropy;
        let r_energy = rec.frac_energy + energy_dissipated - traj.diagnostics[0].frac_energy;

        let st = &mut traj.stats;
        st.mass_balance_error = st.mass_balance_error.max(balance);
        st.min_value = st.min_value.min(rec.min);
        st.linf_growth = st.linf_growth.max(growth);
        st.entropy_residual = st.entropy_residual.max(r_entropy);
        st.energy_residual = st.energy_residual.max(r_energy);
        st.max_dt = st.max_dt.max(dt);
        st.steps = step;

        if enforce {
            let allowance = params.energy_slack * st.max_dt;
            let breach = if balance > MASS_BALANCE_TOL {
                Some(("mass_balance", balance, MASS_BALANCE_TOL))
            } else if rec.min < POSITIVITY_FLOOR {
                Some(("positivity", rec.min, POSITIVITY_FLOOR))
            } else if growth > LINF_GROWTH_TOL {
                Some(("linf", growth, LINF_GROWTH_TOL))
            } else if r_entropy > allowance {
                Some(("entropy_inequality", r_entropy, allowance))
            } else if r_energy > allowance {
                Some(("energy_inequality", r_energy, allowance))
            } else {
                None
            };
            if let Some((quantity, value, allowed)) = breach {
                return Err(Error::PropertyViolation {
                    step,
                    quantity,
                    value,
                    allowed,
                }
                .in_module("degenerate_solver"));
            }
        }

        state = next;
        if arrived {
            state.t = target;
        }
        traj.levels.push(TimeLevel {
            t: state.t,
            u: state.u.clone(),
            ku: state.ku.clone(),
        });
        traj.diagnostics.push(rec);
        traj.dts.push(dt);
        traj.entropy_residuals.push(r_entropy);
        traj.energy_residuals.push(r_energy);
        if arrived {
            traj.snapshots.push(traj.levels.len() - 1);
            next_snapshot += 1;
        }
    }
    if traj.stats.linf_growth == f64::NEG_INFINITY {
        traj.stats.linf_growth = 0.0;
    }
    Ok(traj)
}
