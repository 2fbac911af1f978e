use std::sync::Arc;

use super::params::SolverParams;
use crate::elliptic::{BandedCholesky, EllipticOperator};
use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;

/// Smallest admissible time step.
pub const DT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u: Vec<f64>,
    /// `K u`, kept in sync with `u`
    pub ku: Vec<f64>,
    pub step: usize,
}

/// Face data of one accepted step. Fluxes follow the convention
/// `u_new = u_old + dt * div(flux)`.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub dt: f64,
    pub advective_flux: Vec<f64>,
    pub spectral_flux: Vec<f64>,
    pub viscous_flux: Vec<f64>,
    /// net rate at which the step adds mass through the boundary
    pub boundary_flux: f64,
}

/// Sequential IMEX splitting: explicit upwind transport by `-A grad K u`,
/// then `mu L^{1-s}` implicitly in the eigenbasis, then `delta L`
/// implicitly by a banded solve. Each implicit sub-step is rewritten in flux
/// form so that the discrete mass balance telescopes exactly.
#[derive(Debug)]
pub struct Solver {
    dec: Arc<SpectralDecomposition>,
    params: SolverParams,
    k_symbol: Vec<f64>,
    mu_symbol: Vec<f64>,
    viscous: Option<(f64, BandedCholesky)>,
}

impl Solver {
    pub fn new(dec: Arc<SpectralDecomposition>, params: SolverParams) -> Result<Self> {
        params.validate()?;
        let s = params.s;
        let k_symbol = dec.eigenvalues().iter().map(|l| l.powf(-s)).collect();
        let mu_symbol = dec.eigenvalues().iter().map(|l| l.powf(1.0 - s)).collect();
        Ok(Solver {
            dec,
            params,
            k_symbol,
            mu_symbol,
            viscous: None,
        })
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn decomposition(&self) -> &Arc<SpectralDecomposition> {
        &self.dec
    }

    pub fn operator(&self) -> &EllipticOperator {
        self.dec.operator()
    }

    /// `K u = L^{-s} u`.
    pub fn apply_k(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.dec.coefficients(u)?;
        c.iter_mut().zip(&self.k_symbol).for_each(|(ck, m)| *ck *= m);
        self.dec.synthesize(&c)
    }

    pub fn initial_state(&self, u0: &[f64]) -> Result<SolverState> {
        if let Some(i) = u0.iter().position(|x| !x.is_finite()) {
            return Err(Error::config(format!("initial data is not finite at cell {i}")));
        }
        Ok(SolverState {
            t: 0.0,
            u: u0.to_vec(),
            ku: self.apply_k(u0)?,
            step: 0,
        })
    }

    /// Normal component of `A grad K u` on every face.
    pub fn pressure_flux(&self, state: &SolverState) -> Vec<f64> {
        self.operator().face_fluxes(&state.ku)
    }

    /// `cfl * h / (dim * max |A grad K u . n|)` over all faces, floored
    /// at [`DT_FLOOR`] and capped by the configured step.
    pub fn cfl_dt(&self, state: &SolverState) -> f64 {
        let grid = self.operator().grid();
        let v = self.pressure_flux(state);
        let vmax = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if vmax == 0.0 {
            return self.params.dt;
        }
        let dt = self.params.cfl * grid.min_spacing() / (grid.dim() as f64 * vmax);
        dt.max(DT_FLOOR).min(self.params.dt)
    }

    /// Upwind face values of `u` for transport by `-A grad K u`. Outflow
    /// through the wall takes the interior value; inflow takes the ghost 0.
    pub fn upwind_values(&self, u: &[f64], pressure_flux: &[f64]) -> Vec<f64> {
        self.operator()
            .grid()
            .faces()
            .iter()
            .zip(pressure_flux)
            .map(|(f, &v)| {
                let side = if v <= 0.0 { f.lo } else { f.hi };
                side.map_or(0.0, |c| u[c])
            })
            .collect()
    }

    fn viscous_factor(&mut self, dt: f64) -> Result<&BandedCholesky> {
        let stale = self.viscous.as_ref().is_none_or(|(d, _)| *d != dt);
        if stale {
            let factor = BandedCholesky::shifted(self.dec.operator().matrix(), 1.0, dt * self.params.delta)
                .map_err(|e| e.in_module("degenerate_solver"))?;
            self.viscous = Some((dt, factor));
        }
        Ok(&self.viscous.as_ref().unwrap().1)
    }

    pub fn step(&mut self, state: &SolverState, dt: f64) -> Result<(SolverState, StepReport)> {
        let cfl = self.cfl_dt(state);
        if !(dt > 0.0) || dt > cfl * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "time step {dt:e} exceeds the admissible {cfl:e} at step {}",
                state.step
            )));
        }
        let (mu, delta) = (self.params.mu, self.params.delta);
        let op = self.dec.operator().clone();
        let n = state.u.len();

        let advective_flux = if self.params.advection {
            let v = self.pressure_flux(state);
            let uf = self.upwind_values(&state.u, &v);
            uf.iter().zip(&v).map(|(a, b)| a * b).collect()
        } else {
            vec![0.0; op.grid().faces().len()]
        };
        let mut u1 = state.u.clone();
        axpy(&mut u1, dt, &op.flux_divergence(&advective_flux));

        // (I + dt mu L^{1-s}) u2 = u1, solved in the eigenbasis; the flux
        // form reuses K u2 so that u2 = u1 + dt div(mu A grad K u2)
        let mut c = self.dec.coefficients(&u1)?;
        for (ck, (m, k)) in c.iter_mut().zip(self.mu_symbol.iter().zip(&self.k_symbol)) {
            *ck *= k / (1.0 + dt * mu * m);
        }
        let ku2 = self.dec.synthesize(&c)?;
        let spectral_flux: Vec<f64> = op.face_fluxes(&ku2).iter().map(|f| mu * f).collect();
        let mut u2 = u1;
        axpy(&mut u2, dt, &op.flux_divergence(&spectral_flux));

        let u3_solve = self.viscous_factor(dt)?.solve(&u2);
        let viscous_flux: Vec<f64> = op.face_fluxes(&u3_solve).iter().map(|f| delta * f).collect();
        let mut u3 = u2;
        axpy(&mut u3, dt, &op.flux_divergence(&viscous_flux));

        if let Some(i) = u3.iter().position(|x| !x.is_finite()) {
            return Err(Error::numerical("time step", format!("non-finite value at cell {i} of {n}")));
        }
        let boundary_flux =
            op.boundary_flux(&advective_flux) + op.boundary_flux(&spectral_flux) + op.boundary_flux(&viscous_flux);
        let ku = self.apply_k(&u3)?;
        Ok((
            SolverState {
                t: state.t + dt,
                u: u3,
                ku,
                step: state.step + 1,
            },
            StepReport {
                dt,
                advective_flux,
                spectral_flux,
                viscous_flux,
                boundary_flux,
            },
        ))
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}
