use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elliptic::{BandedCholesky, EllipticOperator};
use crate::error::{Error, Result};

/// Built-in initial data, sampled at cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Zero,
    /// `height` on the box `[lo_a, hi_a]` per axis, zero elsewhere
    Indicator { lo: Vec<f64>, hi: Vec<f64>, height: f64 },
    /// `height * exp(1 - 1 / (1 - r^2))` with `r = |x - center| / width`
    Bump { center: Vec<f64>, width: f64, height: f64 },
    /// independent uniform values in `[0, height)`
    Random { height: f64, seed: u64 },
}

/// The standard bump `exp(1 - 1 / (1 - r^2))`, equal to 1 at `r = 0` and
/// vanishing with all derivatives at `r = 1`.
pub fn bump_profile(r2: f64) -> f64 {
    if r2 < 1.0 {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

impl InitialSpec {
    pub fn sample(&self, op: &EllipticOperator) -> Result<Vec<f64>> {
        let grid = op.grid();
        let dim = grid.dim();
        let centers = grid.cell_centers();
        let check_axes = |v: &[f64], what: &str| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(Error::config(format!("initial {what} has {} entries for a {dim}D grid", v.len())))
            }
        };
        let u: Vec<f64> = match self {
            InitialSpec::Zero => vec![0.0; centers.len()],
            InitialSpec::Indicator { lo, hi, height } => {
                check_axes(lo, "lower corner")?;
                check_axes(hi, "upper corner")?;
                centers
                    .iter()
                    .map(|p| {
                        let inside = (0..dim).all(|a| p[a] >= lo[a] && p[a] <= hi[a]);
                        if inside {
                            *height
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            InitialSpec::Bump { center, width, height } => {
                check_axes(center, "center")?;
                if !(*width > 0.0) {
                    return Err(Error::config(format!("bump width {width} must be positive")));
                }
                centers
                    .iter()
                    .map(|p| {
                        let r2: f64 = (0..dim).map(|a| ((p[a] - center[a]) / width).powi(2)).sum();
                        height * bump_profile(r2)
                    })
                    .collect()
            }
            InitialSpec::Random { height, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..centers.len()).map(|_| height * rng.gen::<f64>()).collect()
            }
        };
        if let Some(i) = u.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::config(format!("initial data is negative or non-finite at cell {i}: {}", u[i])));
        }
        Ok(u)
    }
}

/// Smoothed initial data `u_0delta`: one backward-Euler heat step of length
/// `delta * h` with the identity-coefficient operator, clipped at zero and
/// rescaled so that its mass does not exceed that of the raw sample.
pub fn prepare_initial(spec: &InitialSpec, op: &EllipticOperator, delta: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0) {
        return Err(Error::config(format!("delta = {delta} must be positive")));
    }
    let raw = spec.sample(op)?;
    smooth_initial(&raw, op, delta)
}

pub fn smooth_initial(raw: &[f64], op: &EllipticOperator, delta: f64) -> Result<Vec<f64>> {
    if let Some(i) = raw.iter().position(|&x| !(x >= 0.0)) {
        return Err(Error::config(format!("initial data is negative at cell {i}: {}", raw[i])));
    }
    let width = delta * op.grid().min_spacing();
    let heat = BandedCholesky::shifted(op.identity_matrix(), 1.0, width)?;
    let mut u = heat.solve(raw);
    u.iter_mut().for_each(|x| *x = x.max(0.0));
    let raw_mass: f64 = raw.iter().sum();
    let mass: f64 = u.iter().sum();
    if mass > raw_mass {
        let scale = raw_mass / mass;
        u.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(u)
}
