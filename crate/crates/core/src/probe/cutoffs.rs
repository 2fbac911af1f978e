use std::fmt::Write as _;

use super::level_set::LevelSetField;
use crate::error::{Error, Result};
use crate::spectral::discrete_gradient;

/// `xi_k = 1 - exp(-k s)` for each `k`, with `int |1 - xi_k|^2` and
/// `int |grad xi_k|^2` (both squared norms).
#[derive(Debug, Clone)]
pub struct CutoffFamily {
    pub ks: Vec<u32>,
    pub fields: Vec<Vec<f64>>,
    pub one_minus_sq: Vec<f64>,
    pub gradient_sq: Vec<f64>,
}

pub fn cutoff_value(k: f64, s: f64) -> f64 {
    -(-k * s).exp_m1()
}

pub fn build_cutoffs(level: &LevelSetField, ks: &[u32]) -> Result<CutoffFamily> {
    if ks.is_empty() || ks[0] == 0 || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config(format!(
            "cutoff indices must be increasing positive integers, got {ks:?}"
        )));
    }
    let grid = level.grid();
    let vol = grid.cell_volume();
    let mut fam = CutoffFamily {
        ks: ks.to_vec(),
        fields: Vec::new(),
        one_minus_sq: Vec::new(),
        gradient_sq: Vec::new(),
    };
    for &k in ks {
        let k = f64::from(k);
        let xi: Vec<f64> = level.values.iter().map(|&s| cutoff_value(k, s)).collect();
        fam.one_minus_sq.push(vol * level.values.iter().map(|&s| (-2.0 * k * s).exp()).sum::<f64>());
        // ghost values of xi are zero, matching s = 0 on the boundary
        fam.gradient_sq.push(discrete_gradient(grid, &xi).squared_norm());
        fam.fields.push(xi);
    }
    Ok(fam)
}

impl CutoffFamily {
    pub fn strictly_decreasing(&self) -> bool {
        self.one_minus_sq.windows(2).all(|w| w[1] < w[0])
    }

    /// `k,l2_one_minus_xi,l2_grad_xi`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,l2_one_minus_xi,l2_grad_xi\n");
        for i in 0..self.ks.len() {
            let _ = writeln!(s, "{},{:.17e},{:.17e}", self.ks[i], self.one_minus_sq[i], self.gradient_sq[i]);
        }
        s
    }
}
