use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the regularized equation
/// `u_t = delta div(A grad u) + div((u + mu) A grad K u)` and of its time
/// discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub s: f64,
    pub delta: f64,
    pub mu: f64,
    /// upper bound on every time step
    pub dt: f64,
    pub t_end: f64,
    /// velocity CFL number
    pub cfl: f64,
    /// snapshot spacing in time; steps are shortened to land on it
    pub snapshot_interval: f64,
    /// energy residuals may not exceed `energy_slack * dt`
    pub energy_slack: f64,
    /// the `u A grad K u` flux; switched off only to isolate the linear part
    pub advection: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            s: 0.5,
            delta: 1e-3,
            mu: 1e-3,
            dt: 1e-4,
            t_end: 0.1,
            cfl: 0.4,
            snapshot_interval: 0.01,
            energy_slack: DEFAULT_ENERGY_SLACK,
            advection: true,
        }
    }
}

/// Slack constant for both energy residuals, in energy units per unit of
/// time step.
pub const DEFAULT_ENERGY_SLACK: f64 = 1.0;

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if !(self.s > 0.0 && self.s < 1.0) {
            issues.push(format!("s = {} outside the open interval (0, 1)", self.s));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            issues.push(format!("delta = {} outside (0, 1]", self.delta));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            issues.push(format!("mu = {} outside (0, 1]", self.mu));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            issues.push(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            issues.push(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            issues.push(format!("cfl = {} outside (0, 1]", self.cfl));
        }
        if !(self.snapshot_interval > 0.0) {
            issues.push(format!("snapshot_interval = {} must be positive", self.snapshot_interval));
        }
        if !(self.energy_slack >= 0.0) {
            issues.push(format!("energy_slack = {} must be non-negative", self.energy_slack));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SolverParams::default().validate().unwrap();
    }

    #[test]
    fn all_violations_listed() {
        let p = SolverParams {
            s: 1.5,
            mu: 0.0,
            ..SolverParams::default()
        };
        let msg = p.validate().unwrap_err().to_string();
        assert!(msg.contains("s = 1.5") && msg.contains("mu = 0"));
    }
}
