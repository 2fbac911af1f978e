use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::initial::{prepare_initial, InitialSpec};
use super::params::SolverParams;
use super::run::{run_unchecked, space_time_l2, RunStats, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationLevel {
    pub delta: f64,
    pub mu: f64,
    pub terminal_mass: f64,
    pub terminal_mass_drift: f64,
    pub boundary_flux_cum: f64,
    pub stats: RunStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDifference {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub l2_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub levels: Vec<ContinuationLevel>,
    pub pairwise: Vec<PairDifference>,
    pub differences_decreasing: bool,
    pub drift_decreasing: bool,
}

/// Pairs `(delta_k, mu_k)`; a one-element sequence is broadcast against the
/// other. Each sequence must be non-increasing.
pub fn parameter_pairs(deltas: &[f64], mus: &[f64]) -> Result<Vec<(f64, f64)>> {
    if deltas.is_empty() || mus.is_empty() {
        return Err(Error::config("continuation needs at least one delta and one mu"));
    }
    for (name, seq) in [("delta", deltas), ("mu", mus)] {
        if let Some(w) = seq.windows(2).find(|w| !(w[1] <= w[0])) {
            return Err(Error::config(format!(
                "{name} sequence must decrease toward zero, found {} after {}",
                w[1], w[0]
            )));
        }
        if let Some(x) = seq.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::config(format!("{name} = {x} outside (0, 1]")));
        }
    }
    let pairs = match (deltas.len(), mus.len()) {
        (a, b) if a == b => deltas.iter().cloned().zip(mus.iter().cloned()).collect(),
        (1, _) => mus.iter().map(|&m| (deltas[0], m)).collect(),
        (_, 1) => deltas.iter().map(|&d| (d, mus[0])).collect(),
        (a, b) => {
            return Err(Error::config(format!(
                "delta and mu sequences have lengths {a} and {b}; use equal lengths or a single value"
            )))
        }
    };
    Ok(pairs)
}

/// Runs every parameter pair from the same raw initial data (smoothed per
/// `delta`) and measures consecutive space-time differences and the
/// terminal mass drift. Runs execute in parallel.
pub fn continuation(
    dec: Arc<SpectralDecomposition>,
    base: SolverParams,
    initial: &InitialSpec,
    deltas: &[f64],
    mus: &[f64],
) -> Result<(ContinuationReport, Vec<Trajectory>)> {
    let pairs = parameter_pairs(deltas, mus)?;
    let trajectories: Vec<Trajectory> = pairs
        .par_iter()
        .map(|&(delta, mu)| {
            let params = SolverParams { delta, mu, ..base };
            let u0 = prepare_initial(initial, dec.operator(), delta)?;
            run_unchecked(dec.clone(), params, &u0)
        })
        .collect::<Result<_>>()?;
    let report = summarize(&trajectories, dec.operator().grid().cell_volume())?;
    Ok((report, trajectories))
}

pub fn summarize(trajectories: &[Trajectory], cell_volume: f64) -> Result<ContinuationReport> {
    let levels: Vec<ContinuationLevel> = trajectories
        .iter()
        .map(|t| ContinuationLevel {
            delta: t.params.delta,
            mu: t.params.mu,
            terminal_mass: t.final_diagnostics().mass,
            terminal_mass_drift: t.mass_drift(),
            boundary_flux_cum: t.final_diagnostics().boundary_flux_cum,
            stats: t.stats,
        })
        .collect();
    let mut pairwise = Vec::new();
    for w in trajectories.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ta, tb) = (a.snapshot_times(), b.snapshot_times());
        if ta.len() != tb.len() || ta.iter().zip(&tb).any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs())) {
            return Err(Error::Comparison("runs do not share snapshot times".into()));
        }
        pairwise.push(PairDifference {
            from: (a.params.delta, a.params.mu),
            to: (b.params.delta, b.params.mu),
            l2_difference: space_time_l2(&ta, &a.snapshot_fields(), &b.snapshot_fields(), cell_volume)?,
        });
    }
    let differences_decreasing = pairwise.windows(2).all(|w| w[1].l2_difference < w[0].l2_difference);
    let drift_decreasing = levels
        .windows(2)
        .all(|w| w[1].terminal_mass_drift.abs() < w[0].terminal_mass_drift.abs());
    Ok(ContinuationReport {
        levels,
        pairwise,
        differences_decreasing,
        drift_decreasing,
    })
}
