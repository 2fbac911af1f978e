use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::scheme::{Solver, SolverState};
use crate::elliptic::operator::face_differences;
use crate::error::Result;

pub const CSV_HEADER: &str = "t,mass,linf,min,entropy,frac_energy,visc_dissip,h_dissip,k_dissip,boundary_flux_cum";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub linf: f64,
    pub min: f64,
    /// `int eta(u)` with `eta(x) = (x + mu) log(1 + x / mu) - x`
    pub entropy: f64,
    /// `int |H u|^2 / 2`
    pub frac_energy: f64,
    /// `delta int |grad u|^2 / q(u)`
    pub visc_dissip: f64,
    /// `int |grad H u|^2`
    pub h_dissip: f64,
    /// `int q(u) |grad K u|^2`
    pub k_dissip: f64,
    pub boundary_flux_cum: f64,
}

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.mass,
            self.linf,
            self.min,
            self.entropy,
            self.frac_energy,
            self.visc_dissip,
            self.h_dissip,
            self.k_dissip,
            self.boundary_flux_cum,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

pub fn entropy_density(x: f64, mu: f64) -> f64 {
    (x + mu) * (x / mu).ln_1p() - x
}

/// Logarithmic mean `(a - b) / (ln a - ln b)` of two positive numbers; the
/// discrete chain rule for `log` turns into exactly this weight.
pub fn log_mean(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= 1e-9 * a.max(b) {
        // series to second order in d / (a + b)
        let m = 0.5 * (a + b);
        let r = d / (a + b);
        m * (1.0 - r * r / 3.0)
    } else {
        d / (a / b).ln()
    }
}

pub fn compute(solver: &Solver, state: &SolverState, boundary_flux_cum: f64) -> Result<DiagnosticsRecord> {
    let op = solver.operator();
    let grid = op.grid();
    let p = solver.params();
    let (mu, delta) = (p.mu, p.delta);
    let vol = grid.cell_volume();
    let u = &state.u;

    let mass = vol * u.iter().sum::<f64>();
    let linf = u.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let min = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let entropy = vol * u.iter().map(|&x| entropy_density(x, mu)).sum::<f64>();

    let hu = solver.decomposition().apply_power(-0.5 * p.s, u)?;
    let frac_energy = 0.5 * op.inner(&hu, &hu);
    let h_dissip = op.identity_energy(&hu)?;

    let gu = face_differences(grid, u);
    let gk = face_differences(grid, &state.ku);
    let v = solver.pressure_flux(state);
    let up = solver.upwind_values(u, &v);
    let mut visc = 0.0;
    let mut kd = 0.0;
    for (f, face) in grid.faces().iter().enumerate() {
        let m = grid.face_measure(f);
        let lo = face.lo.map_or(0.0, |c| u[c]) + mu;
        let hi = face.hi.map_or(0.0, |c| u[c]) + mu;
        visc += m * gu[f] * gu[f] / log_mean(lo, hi);
        kd += m * (up[f] + mu) * gk[f] * gk[f];
    }

    Ok(DiagnosticsRecord {
        t: state.t,
        mass,
        linf,
        min,
        entropy,
        frac_energy,
        visc_dissip: delta * visc,
        h_dissip,
        k_dissip: kd,
        boundary_flux_cum,
    })
}

pub fn to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let row: Vec<String> = r.values().iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}
