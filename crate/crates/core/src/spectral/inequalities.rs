//! Executable versions of the coercivity, Poincaré, self-adjointness,
//! norm-equivalence and gradient estimates for the fractional calculus.
//!
//! Margins are relative: a margin of `m` means the inequality holds with
//! slack `m` times its natural scale, and negative margins are violations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::decomposition::SpectralDecomposition;
use crate::error::{Error, Result};

pub const MARGIN_FLOOR: f64 = -1e-10;

pub const NAMES: [&str; 8] = [
    "inverse_identity",
    "self_adjointness",
    "coercivity",
    "poincare",
    "sandwich_lower",
    "sandwich_upper",
    "energy_identity",
    "gradient_bound",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub name: String,
    pub worst_margin: f64,
    pub probe_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub s: f64,
    pub records: Vec<InequalityRecord>,
}

impl InequalityReport {
    pub fn worst(&self) -> Option<&InequalityRecord> {
        self.records.iter().min_by(|a, b| a.worst_margin.total_cmp(&b.worst_margin))
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.worst_margin >= MARGIN_FLOOR)
    }

    pub fn ensure(&self) -> Result<()> {
        match self.records.iter().find(|r| !(r.worst_margin >= MARGIN_FLOOR)) {
            Some(r) => Err(Error::InequalityViolation {
                name: r.name.clone(),
                margin: r.worst_margin,
            }),
            None => Ok(()),
        }
    }

    /// JSON array of `{name, worst_margin, probe_count}` records.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.records)?)
    }
}

/// All margins for one pair of probes `(u, v)`, in the order of [`NAMES`].
pub fn probe_margins(dec: &SpectralDecomposition, s: f64, u: &[f64], v: &[f64]) -> Result<[f64; 8]> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::config(format!("fractional order {s} outside (0, 1)")));
    }
    let op = dec.operator();
    let lambda_1 = dec.lambda_min();
    let (big_l1, big_l2) = (op.coefficient().lambda_min(), op.coefficient().lambda_max());

    let ls_u = dec.apply_power(s, u)?;
    let ls_v = dec.apply_power(s, v)?;
    let k_u = dec.apply_power(-s, u)?;
    let h_u = dec.apply_power(-0.5 * s, u)?;
    let back = dec.apply_power(s, &k_u)?;

    let norm_u = op.norm(u);
    let diff: Vec<f64> = back.iter().zip(u).map(|(a, b)| a - b).collect();
    let inverse = -op.norm(&diff) / norm_u;

    let lhs = op.inner(&ls_u, v);
    let rhs = op.inner(u, &ls_v);
    let scale = op.norm(&ls_u) * op.norm(v) + norm_u * op.norm(&ls_v);
    let self_adjoint = -(lhs - rhs).abs() / scale;

    let floor = lambda_1.powf(s) * norm_u * norm_u;
    let coercivity = (op.inner(&ls_u, u) - floor) / floor;

    let poincare = (op.norm(&ls_u) / lambda_1.powf(s) - norm_u) / norm_u;

    let middle = op.inner(&op.apply(&k_u), u);
    let e_i_hu = op.identity_energy(&h_u)?;
    let sandwich_lower = (middle - big_l1 * e_i_hu) / middle;
    let sandwich_upper = (big_l2 * e_i_hu - middle) / middle;

    let e_a_hu = op.dirichlet_energy(&h_u)?;
    let root = dec.apply_power(0.5 * (1.0 - s), u)?;
    let spectral = op.inner(&root, &root);
    let identity = -((middle - e_a_hu).abs().max((middle - spectral).abs())) / middle;

    let c_omega = big_l2 / big_l1 * lambda_1.powf(-2.0 * s);
    let bound = c_omega * op.identity_energy(u)?;
    let gradient = (bound - op.identity_energy(&k_u)?) / bound;

    Ok([
        inverse,
        self_adjoint,
        coercivity,
        poincare,
        sandwich_lower,
        sandwich_upper,
        identity,
        gradient,
    ])
}

/// Runs `probes` random probe pairs drawn uniformly from `[-1, 1]` per cell
/// with a seeded generator and records the worst margin of each inequality.
pub fn measure_inequalities(dec: &SpectralDecomposition, s: f64, probes: usize, seed: u64) -> Result<InequalityReport> {
    if probes == 0 {
        return Err(Error::config("probe count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dec.len();
    let mut worst = [f64::INFINITY; 8];
    for _ in 0..probes {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = probe_margins(dec, s, &u, &v)?;
        for (w, x) in worst.iter_mut().zip(m) {
            // NaN margins must surface as failures
            *w = if x.is_nan() { f64::NEG_INFINITY } else { w.min(x) };
        }
    }
    Ok(InequalityReport {
        s,
        records: NAMES
            .iter()
            .zip(worst)
            .map(|(name, worst_margin)| InequalityRecord {
                name: name.to_string(),
                worst_margin,
                probe_count: probes,
            })
            .collect(),
    })
}

/// Like [`measure_inequalities`] but fails on the first margin below
/// `-1e-10`.
pub fn check_inequalities(dec: &SpectralDecomposition, s: f64, probes: usize, seed: u64) -> Result<InequalityReport> {
    let report = measure_inequalities(dec, s, probes, seed)?;
    report.ensure()?;
    Ok(report)
}
