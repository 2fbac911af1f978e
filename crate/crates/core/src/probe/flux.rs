//! Shell flux integrals, the weak-form residual and the initial trace,
//! evaluated on a finished trajectory.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::deformation::{interpolate_faces, Deformation};
use super::test_functions::{SpaceTimeBump, SpatialTest};
use crate::error::{Error, Result};
use crate::solver::Trajectory;

/// `J(tau) = int_0^T int_{shell} u (A grad K u . nu_tau) gamma(t, Psi^{-1}(r))`,
/// with the time integral taken as the trapezoid rule over all levels.
pub fn shell_flux(traj: &Trajectory, def: &Deformation, tau: f64, gamma: &SpaceTimeBump) -> Result<f64> {
    let shell = def.shell(tau)?;
    let op = &traj.operator;
    let grid = op.grid();
    if def.extents != grid.extents() {
        return Err(Error::config("deformation and trajectory grids differ"));
    }
    let integrand = |level: usize| {
        let lv = &traj.levels[level];
        let mut acc = 0.0;
        let mut flux = None;
        for n in &shell.nodes {
            let g = gamma.value(lv.t, n.boundary_point);
            if g == 0.0 {
                continue;
            }
            let u = grid.interpolate(&lv.u, n.point);
            if u == 0.0 {
                continue;
            }
            let v = flux.get_or_insert_with(|| op.face_fluxes(&lv.ku));
            let (axis, sign) = n.normal_axis();
            let normal_flux = sign * interpolate_faces(grid, v, axis, n.point);
            acc += u * normal_flux * g * n.weight * n.jacobian;
        }
        acc
    };
    Ok(trapezoid(traj, integrand))
}

fn trapezoid(traj: &Trajectory, mut f: impl FnMut(usize) -> f64) -> f64 {
    let mut total = 0.0;
    let mut prev = f(0);
    for k in 1..traj.levels.len() {
        let cur = f(k);
        total += 0.5 * traj.dts[k] * (prev + cur);
        prev = cur;
    }
    total
}

/// `|J(tau)|` for every shell level and every weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub taus: Vec<f64>,
    pub gammas: Vec<String>,
    /// `values[i][g]` is `J(taus[i])` for weight `g`
    pub values: Vec<Vec<f64>>,
}

impl DecayTable {
    pub fn abs(&self, tau_index: usize, gamma: usize) -> f64 {
        self.values[tau_index][gamma].abs()
    }

    /// For each weight: is `|J|` non-increasing as `tau` decreases?
    pub fn monotone(&self) -> Vec<bool> {
        (0..self.gammas.len())
            .map(|g| (1..self.taus.len()).all(|i| self.abs(i, g) <= self.abs(i - 1, g)))
            .collect()
    }

    /// `|J(tau_last)| / |J(tau_first)|` per weight; 0 when both vanish.
    pub fn ratios(&self) -> Vec<f64> {
        let last = self.taus.len() - 1;
        (0..self.gammas.len())
            .map(|g| {
                let (a, b) = (self.abs(0, g), self.abs(last, g));
                if a == 0.0 {
                    if b == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    b / a
                }
            })
            .collect()
    }

    /// `tau,J_abs_<gamma>...`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau");
        for g in &self.gammas {
            let _ = write!(s, ",J_abs_{g}");
        }
        s.push('\n');
        for (i, tau) in self.taus.iter().enumerate() {
            let _ = write!(s, "{tau:.17e}");
            for g in 0..self.gammas.len() {
                let _ = write!(s, ",{:.17e}", self.abs(i, g));
            }
            s.push('\n');
        }
        s
    }
}

pub fn decay_table(traj: &Trajectory, def: &Deformation, gammas: &[SpaceTimeBump]) -> Result<DecayTable> {
    let taus = def.taus();
    let values = taus
        .iter()
        .map(|&tau| gammas.iter().map(|g| shell_flux(traj, def, tau, g)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayTable {
        taus,
        gammas: gammas.iter().map(|g| g.name.clone()).collect(),
        values,
    })
}

/// Both readings of the weak form for one test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    /// `iint u (phi_t - A grad K u . grad phi) + int u_0 phi(0)`
    pub raw: f64,
    /// the same identity for the regularized flux
    /// `(u + mu) A grad K u + delta A grad u`, including its boundary term
    pub regularized: f64,
}

/// Quadrature of the weak form over a trajectory.
///
/// Volume terms use cell centers for `u phi_t` and face midpoints for the
/// flux term, where `u` is the average of the two neighbours (zero ghosts).
/// The regularized reading adds the `mu`, `delta` parts of the flux and the
/// boundary integral `int phi F . nu` they leave behind, so it vanishes for
/// exact solutions of the regularized problem at any `delta, mu`.
pub fn weak_residual(traj: &Trajectory, phi: &SpaceTimeBump) -> Result<WeakResidual> {
    let op = &traj.operator;
    let grid = op.grid();
    let (mu, delta) = (traj.params.mu, traj.params.delta);
    let vol = grid.cell_volume();
    let centers = grid.cell_centers();
    let faces = grid.faces();

    let terms = |level: usize| {
        let lv = &traj.levels[level];
        let t = lv.t;
        let time_term: f64 = vol * centers.iter().zip(&lv.u).map(|(&p, &u)| u * phi.time_derivative(t, p)).sum::<f64>();
        let v = op.face_fluxes(&lv.ku);
        let w = op.face_fluxes(&lv.u);
        let mut transport = 0.0;
        let mut regular = 0.0;
        let mut boundary = 0.0;
        for (f, face) in faces.iter().enumerate() {
            let m = grid.face_measure(f);
            let uf = 0.5 * (face.lo.map_or(0.0, |c| lv.u[c]) + face.hi.map_or(0.0, |c| lv.u[c]));
            let d = phi.gradient(t, face.centroid)[face.axis];
            transport += m * uf * v[f] * d;
            let extra = mu * v[f] + delta * w[f];
            regular += m * extra * d;
            if let Some(sign) = face.outward_sign() {
                let mut r = face.centroid;
                r[face.axis] = if sign < 0.0 { 0.0 } else { grid.extents()[face.axis] };
                boundary += face.area * phi.value(t, r) * sign * extra;
            }
        }
        (time_term - transport, -regular + boundary)
    };

    let mut raw = 0.0;
    let mut reg = 0.0;
    let mut prev = terms(0);
    for k in 1..traj.levels.len() {
        let cur = terms(k);
        let dt = traj.dts[k];
        raw += 0.5 * dt * (prev.0 + cur.0);
        reg += 0.5 * dt * (prev.1 + cur.1);
        prev = cur;
    }
    let u0 = &traj.levels[0].u;
    let initial = vol * centers.iter().zip(u0).map(|(&p, &u)| u * phi.value(0.0, p)).sum::<f64>();
    let raw = raw + initial;
    Ok(WeakResidual {
        raw,
        regularized: raw + reg,
    })
}

/// `|int u(t) zeta - int u_0 zeta|` at each requested time, with `u(t)`
/// interpolated linearly between stored levels.
pub fn initial_trace_check(traj: &Trajectory, zeta: &SpatialTest, times: &[f64]) -> Result<Vec<f64>> {
    let grid = traj.operator.grid();
    let vol = grid.cell_volume();
    let weights: Vec<f64> = grid.cell_centers().iter().map(|&p| vol * zeta.value(p)).collect();
    let pair = |u: &[f64]| weights.iter().zip(u).map(|(w, x)| w * x).sum::<f64>();
    let base = pair(&traj.levels[0].u);
    let t_end = traj.last().t;
    times
        .iter()
        .map(|&t| {
            if !(t >= 0.0 && t <= t_end * (1.0 + 1e-12)) {
                return Err(Error::config(format!("trace time {t} outside [0, {t_end}]")));
            }
            let k = traj.levels.partition_point(|l| l.t < t).min(traj.levels.len() - 1);
            let value = if k == 0 || traj.levels[k].t == t {
                pair(&traj.levels[k].u)
            } else {
                let (a, b) = (&traj.levels[k - 1], &traj.levels[k]);
                let theta = (t - a.t) / (b.t - a.t);
                (1.0 - theta) * pair(&a.u) + theta * pair(&b.u)
            };
            Ok((value - base).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{CoefficientField, CoefficientSpec, DomainSpec, EllipticOperator, Grid};
    use crate::probe::deformation::build_deformation;
    use crate::probe::test_functions::{boundary_family, trace_family, weak_family, Bump1};
    use crate::solver::{prepare_initial, run, InitialSpec, SolverParams};
    use crate::spectral::SpectralDecomposition;
    use std::sync::Arc;

    fn trajectory(n: usize, init: InitialSpec, t_end: f64) -> Trajectory {
        let g = Grid::new(&DomainSpec::interval(1.0, n)).unwrap();
        let c = CoefficientField::sample(&CoefficientSpec::identity(), &g).unwrap();
        let op = Arc::new(EllipticOperator::assemble(&g, &c).unwrap());
        let dec = Arc::new(SpectralDecomposition::new(op).unwrap());
        let params = SolverParams {
            t_end,
            dt: 2e-4,
            snapshot_interval: t_end / 4.0,
            ..SolverParams::default()
        };
        let u0 = prepare_initial(&init, dec.operator(), params.delta).unwrap();
        run(dec, params, &u0).unwrap()
    }

    fn indicator() -> InitialSpec {
        InitialSpec::Indicator {
            lo: vec![0.25],
            hi: vec![0.75],
            height: 1.0,
        }
    }

    #[test]
    fn zero_trajectory_gives_zero_everywhere() {
        let traj = trajectory(32, InitialSpec::Zero, 0.01);
        let def = build_deformation(traj.operator.grid(), 0.1, &[1.0, 0.5]).unwrap();
        for g in boundary_family(&[1.0], 0.01) {
            assert_eq!(shell_flux(&traj, &def, 0.5, &g).unwrap(), 0.0);
        }
        for phi in weak_family(&[1.0], 0.01, 0.3) {
            let r = weak_residual(&traj, &phi).unwrap();
            assert_eq!((r.raw, r.regularized), (0.0, 0.0));
        }
        let series = initial_trace_check(&traj, &trace_family(&[1.0], 0.3)[0], &[0.0, 0.005]).unwrap();
        assert_eq!(series, vec![0.0, 0.0]);
    }

    #[test]
    fn vanishing_weights_give_zero() {
        let traj = trajectory(32, indicator(), 0.01);
        let def = build_deformation(traj.operator.grid(), 0.1, &[1.0]).unwrap();
        let null = SpaceTimeBump {
            name: "late".into(),
            time: Bump1::new(1.0, 0.1),
            space: vec![Bump1::new(0.5, 1.0)],
        };
        assert_eq!(shell_flux(&traj, &def, 1.0, &null).unwrap(), 0.0);
        assert!(shell_flux(&traj, &def, 0.3, &null).unwrap_err().is_config());
        let far = SpaceTimeBump {
            name: "far".into(),
            time: Bump1::new(0.0, 1.0),
            space: vec![Bump1::new(3.0, 0.5)],
        };
        let r = weak_residual(&traj, &far).unwrap();
        assert_eq!((r.raw, r.regularized), (0.0, 0.0));
        let zero = SpatialTest::Indicator {
            name: "empty".into(),
            lo: vec![2.0],
            hi: vec![3.0],
        };
        assert!(initial_trace_check(&traj, &zero, &[0.0, 0.01]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_zeta_reads_the_mass() {
        let traj = trajectory(64, indicator(), 0.02);
        let one = trace_family(&[1.0], 0.3).pop().unwrap();
        let times: Vec<f64> = traj.snapshot_times();
        let series = initial_trace_check(&traj, &one, &times).unwrap();
        for (k, &idx) in traj.snapshots.iter().enumerate() {
            let drift = (traj.diagnostics[idx].mass - traj.diagnostics[0].mass).abs();
            assert!((series[k] - drift).abs() <= 1e-14 * traj.diagnostics[0].mass);
        }
    }

    #[test]
    fn shell_flux_decays_toward_the_boundary() {
        let traj = trajectory(128, indicator(), 0.05);
        let def = build_deformation(traj.operator.grid(), 0.1, &[1.0, 0.5, 0.25, 0.125]).unwrap();
        let table = decay_table(&traj, &def, &boundary_family(&[1.0], 0.05)).unwrap();
        assert!(table.monotone().iter().all(|&m| m));
        assert!(table.ratios().iter().all(|&r| r <= 0.25), "{:?}", table.ratios());
        assert_eq!(table.to_csv().lines().count(), 5);
    }

    #[test]
    fn regularized_residual_is_small() {
        let traj = trajectory(128, indicator(), 0.05);
        for phi in weak_family(&[1.0], 0.05, 0.3) {
            let r = weak_residual(&traj, &phi).unwrap();
            let scale = traj.diagnostics[0].mass;
            assert!(r.regularized.abs() < 1e-2 * scale, "{}: {:?}", phi.name, r);
        }
    }
}
