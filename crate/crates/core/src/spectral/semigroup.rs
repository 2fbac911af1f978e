//! Fractional powers through the heat semigroup, computed without any
//! spectral information beyond cheap eigenvalue bounds.
//!
//! `e^{-tL}u` is advanced with Crank-Nicolson on the difference
//! `d(t) = e^{-tL}u - u`, which keeps small-time values accurate. The
//! integrals over `t` use the trapezoid rule in `log t` applied to
//! `e^{-tL}u - e^{-kappa t}u`, with `kappa` a lower bound for the spectrum;
//! the subtracted scalar integrals are known in closed form.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::elliptic::{BandedCholesky, EllipticOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// trapezoid intervals on the coarsest level
    pub initial_nodes: usize,
    /// how many times the node count may double
    pub max_doublings: u32,
    /// relative self-difference between consecutive levels
    pub tolerance: f64,
    /// `t_min = t_min_scale / lambda_max`
    pub t_min_scale: f64,
    /// `t_max = t_max_scale / lambda_min`
    pub t_max_scale: f64,
    /// Crank-Nicolson sub-steps inside the quadrature march satisfy
    /// `dt <= substep_ratio * t`
    pub substep_ratio: f64,
    /// `dt * lambda_max <= stiffness_limit` for the first march interval and
    /// for uniform stepping in [`heat_semigroup`]
    pub stiffness_limit: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            initial_nodes: 64,
            max_doublings: 5,
            tolerance: 1e-7,
            t_min_scale: 1e-6,
            t_max_scale: 40.0,
            substep_ratio: 1e-3,
            stiffness_limit: 0.5,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        let ok = self.initial_nodes >= 2
            && self.max_doublings <= 12
            && self.tolerance > 0.0
            && self.t_min_scale > 0.0
            && self.t_max_scale > 0.0
            && self.substep_ratio > 0.0
            && self.stiffness_limit > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid quadrature settings {self:?}")))
        }
    }
}

/// Values of `d(t) = e^{-tL}u - u` on the finest log-spaced node set.
#[derive(Debug, Clone)]
pub struct HeatPath {
    spec: QuadratureSpec,
    u: Vec<f64>,
    lu: Vec<f64>,
    llu: Vec<f64>,
    t_min: f64,
    kappa: f64,
    dtau: f64,
    times: Vec<f64>,
    diffs: Vec<Vec<f64>>,
    substeps: usize,
}

/// Smallest-eigenvalue estimate used for `t_max`: `Lambda_1` times the
/// closed-form bottom of the identity-coefficient spectrum. Never touches
/// the decomposition.
pub fn lambda_min_estimate(op: &EllipticOperator) -> f64 {
    op.lambda_min_lower_bound()
}

pub fn lambda_max_estimate(op: &EllipticOperator) -> f64 {
    op.lambda_max_upper_bound()
}

struct CrankNicolson<'a> {
    op: &'a EllipticOperator,
    dt: f64,
    factor: Option<BandedCholesky>,
}

impl<'a> CrankNicolson<'a> {
    fn new(op: &'a EllipticOperator) -> Self {
        CrankNicolson {
            op,
            dt: f64::NAN,
            factor: None,
        }
    }

    fn set_dt(&mut self, dt: f64) -> Result<()> {
        if dt != self.dt {
            self.factor = Some(BandedCholesky::shifted(self.op.matrix(), 1.0, 0.5 * dt)?);
            self.dt = dt;
        }
        Ok(())
    }

    /// One step of `d' = -L(d + u)` given `lu = L u`.
    fn step_difference(&self, d: &mut [f64], lu: &[f64]) {
        let ld = self.op.apply(d);
        let dt = self.dt;
        for i in 0..d.len() {
            d[i] -= dt * (0.5 * ld[i] + lu[i]);
        }
        self.factor.as_ref().unwrap().solve_in_place(d);
    }

    /// One step of `v' = -L v`.
    fn step(&self, v: &mut [f64]) {
        let lv = self.op.apply(v);
        for i in 0..v.len() {
            v[i] -= 0.5 * self.dt * lv[i];
        }
        self.factor.as_ref().unwrap().solve_in_place(v);
    }
}

/// `e^{-tL}u` by uniform Crank-Nicolson sub-steps obeying both step limits
/// of `spec` relative to the final time.
pub fn heat_semigroup(op: &EllipticOperator, t: f64, u: &[f64], spec: &QuadratureSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    check_len(op, u)?;
    if !(t >= 0.0) {
        return Err(Error::config(format!("negative time {t}")));
    }
    let mut v = u.to_vec();
    if t == 0.0 {
        return Ok(v);
    }
    let lmax = lambda_max_estimate(op);
    let dt_cap = (spec.substep_ratio * t).min(spec.stiffness_limit / lmax);
    let m = (t / dt_cap).ceil().max(1.0) as usize;
    let mut cn = CrankNicolson::new(op);
    cn.set_dt(t / m as f64)?;
    for _ in 0..m {
        cn.step(&mut v);
    }
    Ok(v)
}

fn check_len(op: &EllipticOperator, u: &[f64]) -> Result<()> {
    if u.len() != op.size() {
        return Err(Error::config(format!(
            "field has {} entries, operator has {}",
            u.len(),
            op.size()
        )));
    }
    Ok(())
}

impl HeatPath {
    pub fn march(op: &EllipticOperator, u: &[f64], spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        check_len(op, u)?;
        let lmax = lambda_max_estimate(op);
        let lmin = lambda_min_estimate(op);
        let t_min = spec.t_min_scale / lmax;
        let t_max = spec.t_max_scale / lmin;
        let intervals = spec.initial_nodes << spec.max_doublings;
        let dtau = (t_max / t_min).ln() / intervals as f64;
        let times: Vec<f64> = (0..=intervals)
            .map(|j| if j == intervals { t_max } else { t_min * (j as f64 * dtau).exp() })
            .collect();

        let lu = op.apply(u);
        let llu = op.apply(&lu);
        let mut cn = CrankNicolson::new(op);
        let mut d = vec![0.0; u.len()];
        let mut diffs = Vec::with_capacity(times.len());
        let mut substeps = 0;
        let mut t = 0.0;
        for &target in &times {
            let span = target - t;
            // log-spaced nodes make span / t constant, so every interval after
            // the first gets the same sub-step count and the discretization
            // error stays a smooth function of log t
            let m = if t == 0.0 {
                (span * lmax / spec.stiffness_limit).ceil().max(1.0) as usize
            } else {
                (span / (spec.substep_ratio * t)).ceil().max(1.0) as usize
            };
            cn.set_dt(span / m as f64)?;
            for _ in 0..m {
                cn.step_difference(&mut d, &lu);
            }
            substeps += m;
            if d.iter().any(|x| !x.is_finite()) {
                return Err(Error::numerical("heat semigroup", "non-finite state"));
            }
            diffs.push(d.clone());
            t = target;
        }
        Ok(HeatPath {
            spec: *spec,
            u: u.to_vec(),
            lu,
            llu,
            t_min,
            kappa: lmin,
            dtau,
            times,
            diffs,
            substeps,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    fn u_norm(&self) -> f64 {
        self.u.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `e^{-t_j L} u` at node `j` of the finest level.
    pub fn value(&self, j: usize) -> Vec<f64> {
        self.u.iter().zip(&self.diffs[j]).map(|(a, b)| a + b).collect()
    }

    /// Trapezoid sums on every level, coarsest first. `integrand(j)` is the
    /// log-time integrand at finest node `j`; below the first node the
    /// integrand is replaced by `sum_m c_m e^{alpha_m tau}` and the sum is
    /// continued to minus infinity in closed form, so the lower end carries
    /// no endpoint error.
    fn levels(&self, integrand: impl Fn(usize) -> Vec<f64>, model: &[(f64, Vec<f64>)]) -> Vec<Vec<f64>> {
        let n = self.u.len();
        let finest = self.times.len() - 1;
        let values: Vec<Vec<f64>> = (0..=finest).map(&integrand).collect();
        let tau0 = self.t_min.ln();
        (0..=self.spec.max_doublings)
            .map(|level| {
                let stride = 1usize << (self.spec.max_doublings - level);
                let h = self.dtau * stride as f64;
                let mut sum = vec![0.0; n];
                for j in (0..=finest).step_by(stride) {
                    let w = if j == finest { 0.5 * h } else { h };
                    sum.iter_mut().zip(&values[j]).for_each(|(s, v)| *s += w * v);
                }
                for (alpha, c) in model {
                    let q = (-alpha * h).exp();
                    let w = h * (alpha * tau0).exp() * q / (1.0 - q);
                    sum.iter_mut().zip(c).for_each(|(s, v)| *s += w * v);
                }
                sum
            })
            .collect()
    }

    /// Small-time model of the shifted path: `-(L - kappa) u t` and
    /// `(L^2 - kappa^2) u t^2 / 2`.
    fn taylor(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.kappa;
        let first = self.lu.iter().zip(&self.u).map(|(l, u)| -(l - k * u)).collect();
        let second = self.llu.iter().zip(&self.u).map(|(l, u)| 0.5 * (l - k * k * u)).collect();
        (first, second)
    }

    /// First level whose change from its predecessor is below tolerance,
    /// relative to `floor` or the level's own size, whichever is larger.
    fn converged(&self, levels: Vec<Vec<f64>>, floor: f64) -> Result<Vec<f64>> {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut last_diff = f64::INFINITY;
        for l in 1..levels.len() {
            let scale = norm(&levels[l]).max(floor);
            let diff: Vec<f64> = levels[l].iter().zip(&levels[l - 1]).map(|(a, b)| a - b).collect();
            last_diff = if scale > 0.0 { norm(&diff) / scale } else { norm(&diff) };
            if last_diff < self.spec.tolerance {
                return Ok(levels[l].clone());
            }
        }
        Err(Error::Accuracy {
            self_difference: last_diff,
            tolerance: self.spec.tolerance,
            nodes: self.times.len(),
        })
    }

    /// `e^{-tL}u - e^{-kappa t}u`, which decays at both ends of the
    /// log-time axis; its transforms against `t^{s-1}` and `t^{-1-s}` are
    /// corrected afterwards in closed form.
    fn shifted(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let damp = -(-self.kappa * self.times[j]).exp_m1();
        self.diffs[j].iter().zip(&self.u).map(move |(d, u)| d + damp * u)
    }

    /// `L^{-s} u = Gamma(s)^{-1} int_0^inf t^{s-1} e^{-tL} u dt`.
    pub fn inverse_power(&self, s: f64) -> Result<Vec<f64>> {
        check_order(s)?;
        let (first, second) = self.taylor();
        let levels = self.levels(
            |j| {
                let w = self.times[j].powf(s);
                self.shifted(j).map(|x| w * x).collect()
            },
            &[(1.0 + s, first), (2.0 + s, second)],
        );
        let g = gamma(s);
        let shift = self.kappa.powf(-s);
        let mut out = self.converged(levels, g * shift * self.u_norm())?;
        for (o, u) in out.iter_mut().zip(&self.u) {
            *o = *o / g + shift * u;
        }
        Ok(out)
    }

    /// `L^s u = Gamma(-s)^{-1} int_0^inf (e^{-tL} u - u) t^{-1-s} dt`.
    pub fn power(&self, s: f64) -> Result<Vec<f64>> {
        check_order(s)?;
        let (first, second) = self.taylor();
        let levels = self.levels(
            |j| {
                let w = self.times[j].powf(-s);
                self.shifted(j).map(|x| w * x).collect()
            },
            &[(1.0 - s, first), (2.0 - s, second)],
        );
        let g = gamma(-s);
        let shift = self.kappa.powf(s);
        let mut out = self.converged(levels, g.abs() * shift * self.u_norm())?;
        for (o, u) in out.iter_mut().zip(&self.u) {
            *o = *o / g + shift * u;
        }
        Ok(out)
    }
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("fractional order {s} outside (0, 1)")))
    }
}

pub fn apply_inverse_power_semigroup(
    op: &EllipticOperator,
    s: f64,
    u: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    check_order(s)?;
    HeatPath::march(op, u, spec)?.inverse_power(s)
}

pub fn apply_power_semigroup(op: &EllipticOperator, s: f64, u: &[f64], spec: &QuadratureSpec) -> Result<Vec<f64>> {
    check_order(s)?;
    HeatPath::march(op, u, spec)?.power(s)
}
