use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Built-in coefficient families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoefficientSpec {
    /// `A = c I`.
    Constant { value: f64 },
    /// `a11 = 1 + sin(2 pi x) / 2`, `a22 = 2`, `a12 = 0`.
    Smooth,
    /// `A = R(angle) diag(eig_min, eig_max) R(angle)^T`.
    Rotated { angle: f64, eig_min: f64, eig_max: f64 },
}

impl CoefficientSpec {
    pub fn identity() -> Self {
        CoefficientSpec::Constant { value: 1.0 }
    }

    /// Symmetric entries `(a11, a12, a22)` at a point. In one dimension only
    /// `a11` is used.
    pub fn evaluate(&self, p: [f64; 2]) -> [f64; 3] {
        match *self {
            CoefficientSpec::Constant { value } => [value, 0.0, value],
            CoefficientSpec::Smooth => [1.0 + 0.5 * (2.0 * PI * p[0]).sin(), 0.0, 2.0],
            CoefficientSpec::Rotated {
                angle,
                eig_min,
                eig_max,
            } => {
                let (s, c) = angle.sin_cos();
                [
                    eig_min * c * c + eig_max * s * s,
                    (eig_min - eig_max) * c * s,
                    eig_min * s * s + eig_max * c * c,
                ]
            }
        }
    }
}

/// Eigenvalues of the symmetric 2x2 matrix `[[a, b], [b, d]]`, ascending.
pub fn sym2_eigenvalues([a, b, d]: [f64; 3]) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mean - radius, mean + radius)
}

/// Coefficient matrix sampled at every coefficient site of a grid, with the
/// certified ellipticity bounds.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    dim: usize,
    entries: Vec<[f64; 3]>,
    lambda_min: f64,
    lambda_max: f64,
}

impl CoefficientField {
    pub fn sample(spec: &CoefficientSpec, grid: &Grid) -> Result<Self> {
        let entries = grid.sites().iter().map(|&p| spec.evaluate(p)).collect();
        Self::from_entries(grid, entries)
    }

    /// Certifies user-provided site matrices. In one dimension only the first
    /// entry of each triple is read.
    pub fn from_entries(grid: &Grid, mut entries: Vec<[f64; 3]>) -> Result<Self> {
        if entries.len() != grid.sites().len() {
            return Err(Error::config(format!(
                "coefficient has {} sites, grid has {}",
                entries.len(),
                grid.sites().len()
            )));
        }
        let dim = grid.dim();
        let mut lambda_min = f64::INFINITY;
        let mut lambda_max = f64::NEG_INFINITY;
        for (site, e) in entries.iter_mut().enumerate() {
            if dim == 1 {
                e[1] = 0.0;
                e[2] = e[0];
            }
            let (lo, hi) = sym2_eigenvalues(*e);
            if !(lo > 0.0) || !hi.is_finite() {
                return Err(Error::Ellipticity { site, min: lo, max: hi });
            }
            lambda_min = lambda_min.min(lo);
            lambda_max = lambda_max.max(hi);
        }
        Ok(CoefficientField {
            dim,
            entries,
            lambda_min,
            lambda_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[[f64; 3]] {
        &self.entries
    }

    /// Lower ellipticity constant (smallest site eigenvalue).
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// Upper ellipticity constant (largest site eigenvalue).
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// `A g` at a site for a gradient `g`.
    #[inline]
    pub fn apply(&self, site: usize, g: [f64; 2]) -> [f64; 2] {
        let [a, b, d] = self.entries[site];
        if self.dim == 1 {
            [a * g[0], 0.0]
        } else {
            [a * g[0] + b * g[1], b * g[0] + d * g[1]]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::grid::DomainSpec;

    #[test]
    fn identity_bounds() {
        let g = Grid::new(&DomainSpec::rectangle(1.0, 1.0, 6, 5)).unwrap();
        let c = CoefficientField::sample(&CoefficientSpec::identity(), &g).unwrap();
        assert_eq!((c.lambda_min(), c.lambda_max()), (1.0, 1.0));
    }

    #[test]
    fn rotation_preserves_spectrum() {
        let g = Grid::new(&DomainSpec::rectangle(1.0, 1.0, 6, 6)).unwrap();
        for angle in [PI / 4.0, 0.3, 1.2] {
            let spec = CoefficientSpec::Rotated {
                angle,
                eig_min: 1.0,
                eig_max: 4.0,
            };
            let c = CoefficientField::sample(&spec, &g).unwrap();
            assert!((c.lambda_min() - 1.0).abs() < 1e-12);
            assert!((c.lambda_max() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_family_bounds_match_site_scan() {
        let g = Grid::new(&DomainSpec::rectangle(1.0, 1.0, 32, 32)).unwrap();
        let c = CoefficientField::sample(&CoefficientSpec::Smooth, &g).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in g.sites() {
            let a11 = 1.0 + 0.5 * (2.0 * PI * p[0]).sin();
            lo = lo.min(a11.min(2.0));
            hi = hi.max(a11.max(2.0));
        }
        assert!((c.lambda_min() - lo).abs() < 1e-14);
        assert!((c.lambda_max() - hi).abs() < 1e-14);
        assert!(lo > 0.5 && (hi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite_site() {
        let g = Grid::new(&DomainSpec::interval(1.0, 5)).unwrap();
        let mut entries = vec![[1.0, 0.0, 1.0]; g.sites().len()];
        entries[3] = [-0.5, 0.0, -0.5];
        match CoefficientField::from_entries(&g, entries) {
            Err(Error::Ellipticity { site, .. }) => assert_eq!(site, 3),
            other => panic!("expected ellipticity error, got {other:?}"),
        }
        let bad = CoefficientSpec::Constant { value: 0.0 };
        assert!(CoefficientField::sample(&bad, &g).is_err());
    }
}
