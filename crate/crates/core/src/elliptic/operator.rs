use std::f64::consts::PI;
use std::path::Path;

use super::coefficient::{CoefficientField, CoefficientSpec};
use super::grid::{Grid, GridDescriptor};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Discrete `L = -div(A grad .)` with homogeneous Dirichlet data, together
/// with the identity-coefficient operator on the same grid.
///
/// The Dirichlet form is the quadrature `sum_p w_p g_p^T A_p g_p` over the
/// grid's flux points, where each gradient `g_p` is built from one face
/// difference per axis. Dividing the stiffness by the (uniform) control
/// volume gives `K_A`, so `<K_A u, v>` in the volume-weighted inner product
/// equals the stiffness form.
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    grid: Grid,
    coeff: CoefficientField,
    stiffness: CsrMatrix,
    stiffness_identity: CsrMatrix,
    k_a: CsrMatrix,
    k_i: CsrMatrix,
}

impl EllipticOperator {
    pub fn assemble(grid: &Grid, coeff: &CoefficientField) -> Result<Self> {
        if coeff.dim() != grid.dim() || coeff.entries().len() != grid.sites().len() {
            return Err(Error::config(format!(
                "coefficient ({}D, {} sites) does not match grid ({}D, {} sites)",
                coeff.dim(),
                coeff.entries().len(),
                grid.dim(),
                grid.sites().len()
            )));
        }
        let identity = CoefficientField::sample(&CoefficientSpec::identity(), grid)?;
        let stiffness = assemble_stiffness(grid, coeff);
        let stiffness_identity = assemble_stiffness(grid, &identity);
        let inv_vol = 1.0 / grid.cell_volume();
        Ok(EllipticOperator {
            k_a: stiffness.scaled(inv_vol),
            k_i: stiffness_identity.scaled(inv_vol),
            grid: grid.clone(),
            coeff: coeff.clone(),
            stiffness,
            stiffness_identity,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficient(&self) -> &CoefficientField {
        &self.coeff
    }

    pub fn size(&self) -> usize {
        self.grid.num_cells()
    }

    /// `K_A`.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.k_a
    }

    /// `K_I`, the identity-coefficient operator.
    pub fn identity_matrix(&self) -> &CsrMatrix {
        &self.k_i
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.k_a.mul(u)
    }

    pub fn apply_identity(&self, u: &[f64]) -> Vec<f64> {
        self.k_i.mul(u)
    }

    /// Volume-weighted inner product `sum_i w_i u_i v_i`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.grid.cell_volume() * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.size() {
            return Err(Error::config(format!(
                "field has {} entries, operator has {} unknowns",
                u.len(),
                self.size()
            )));
        }
        Ok(())
    }

    /// Discrete `int A grad u . grad u`.
    pub fn dirichlet_energy(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        Ok(quadratic_form(&self.stiffness, u))
    }

    /// Discrete `int |grad u|^2`.
    pub fn identity_energy(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        Ok(quadratic_form(&self.stiffness_identity, u))
    }

    /// Normal flux density `(A grad v) . e_axis` on every face.
    pub fn face_fluxes(&self, v: &[f64]) -> Vec<f64> {
        let grid = &self.grid;
        let mut flux = vec![0.0; grid.faces().len()];
        let diffs = face_differences(grid, v);
        for fp in grid.flux_points() {
            let g = [
                fp.faces[0].map_or(0.0, |f| diffs[f]),
                fp.faces[1].map_or(0.0, |f| diffs[f]),
            ];
            let ag = self.coeff.apply(fp.site, g);
            for axis in 0..grid.dim() {
                if let Some(f) = fp.faces[axis] {
                    flux[f] += fp.weight * ag[axis];
                }
            }
        }
        for (f, value) in flux.iter_mut().enumerate() {
            *value /= grid.face_measure(f);
        }
        flux
    }

    /// Cellwise `(1/|cell|) sum_faces area * F . n_out`; `K_A v` equals
    /// `-flux_divergence(face_fluxes(v))`.
    pub fn flux_divergence(&self, flux: &[f64]) -> Vec<f64> {
        flux_divergence(&self.grid, flux)
    }

    /// `sum_boundary area * F . n_out`: the rate at which the flux `F` adds
    /// mass through the boundary under `du/dt = div F`.
    pub fn boundary_flux(&self, flux: &[f64]) -> f64 {
        boundary_flux(&self.grid, flux)
    }

    /// Lower bound on the smallest eigenvalue of `K_A`: `Lambda_1` times the
    /// closed-form smallest eigenvalue of `K_I` on the tensor grid.
    pub fn lambda_min_lower_bound(&self) -> f64 {
        let k_i_min: f64 = (0..self.grid.dim())
            .map(|a| {
                let h = self.grid.spacing()[a];
                let l = self.grid.extents()[a];
                4.0 / (h * h) * (PI * h / (2.0 * l)).sin().powi(2)
            })
            .sum();
        self.coeff.lambda_min() * k_i_min
    }

    /// Gershgorin upper bound on the largest eigenvalue of `K_A`.
    pub fn lambda_max_upper_bound(&self) -> f64 {
        self.k_a.gershgorin_max()
    }

    /// Writes `grid.json` and `operator.coo` (row col value per line).
    pub fn dump(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let desc = OperatorDescriptor {
            grid: self.grid.descriptor(),
            lambda_min: self.coeff.lambda_min(),
            lambda_max: self.coeff.lambda_max(),
            nnz: self.k_a.nnz(),
        };
        let path = dir.join("grid.json");
        std::fs::write(&path, serde_json::to_string_pretty(&desc)?).map_err(|e| Error::io(&path, e))?;
        let path = dir.join("operator.coo");
        std::fs::write(&path, self.k_a.to_coo_text()).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OperatorDescriptor {
    pub grid: GridDescriptor,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub nnz: usize,
}

fn quadratic_form(m: &CsrMatrix, u: &[f64]) -> f64 {
    u.iter().zip(m.mul(u)).map(|(a, b)| a * b).sum()
}

/// `(v_hi - v_lo) / h` on every face, with zero boundary values.
pub(crate) fn face_differences(grid: &Grid, v: &[f64]) -> Vec<f64> {
    grid.faces()
        .iter()
        .map(|f| {
            let lo = f.lo.map_or(0.0, |c| v[c]);
            let hi = f.hi.map_or(0.0, |c| v[c]);
            (hi - lo) / grid.spacing()[f.axis]
        })
        .collect()
}

pub(crate) fn flux_divergence(grid: &Grid, flux: &[f64]) -> Vec<f64> {
    let mut div = vec![0.0; grid.num_cells()];
    for (face, &value) in grid.faces().iter().zip(flux) {
        let q = face.area * value;
        if let Some(c) = face.lo {
            div[c] += q;
        }
        if let Some(c) = face.hi {
            div[c] -= q;
        }
    }
    let inv_vol = 1.0 / grid.cell_volume();
    div.iter_mut().for_each(|d| *d *= inv_vol);
    div
}

pub(crate) fn boundary_flux(grid: &Grid, flux: &[f64]) -> f64 {
    grid.boundary_faces()
        .iter()
        .map(|&f| {
            let face = &grid.faces()[f];
            face.area * flux[f] * face.outward_sign().unwrap()
        })
        .sum()
}

fn assemble_stiffness(grid: &Grid, coeff: &CoefficientField) -> CsrMatrix {
    let mut triplets = Vec::new();
    let mut terms: Vec<(usize, [f64; 2])> = Vec::with_capacity(4);
    for fp in grid.flux_points() {
        terms.clear();
        for axis in 0..grid.dim() {
            let Some(f) = fp.faces[axis] else { continue };
            let face = &grid.faces()[f];
            let inv_h = 1.0 / grid.spacing()[axis];
            for (cell, sign) in [(face.lo, -1.0), (face.hi, 1.0)] {
                let Some(cell) = cell else { continue };
                let mut g = [0.0; 2];
                g[axis] = sign * inv_h;
                match terms.iter_mut().find(|(c, _)| *c == cell) {
                    Some((_, existing)) => {
                        existing[0] += g[0];
                        existing[1] += g[1];
                    }
                    None => terms.push((cell, g)),
                }
            }
        }
        for p in 0..terms.len() {
            let (cp, gp) = terms[p];
            let agp = coeff.apply(fp.site, gp);
            for &(cq, gq) in &terms[p..] {
                let v = fp.weight * (agp[0] * gq[0] + agp[1] * gq[1]);
                triplets.push((cp, cq, v));
                if cp != cq {
                    triplets.push((cq, cp, v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(grid.num_cells(), triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::grid::DomainSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn build(spec: &DomainSpec, c: &CoefficientSpec) -> EllipticOperator {
        let g = Grid::new(spec).unwrap();
        let cf = CoefficientField::sample(c, &g).unwrap();
        EllipticOperator::assemble(&g, &cf).unwrap()
    }

    #[test]
    fn one_d_second_difference() {
        let op = build(&DomainSpec::interval(1.0, 3), &CoefficientSpec::identity());
        let h: f64 = 0.25;
        let k = op.matrix();
        for i in 0..3usize {
            for j in 0..3 {
                let expected = match i.abs_diff(j) {
                    0 => 2.0 / (h * h),
                    1 => -1.0 / (h * h),
                    _ => 0.0,
                };
                assert!((k.get(i, j) - expected).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn assembly_is_bitwise_symmetric() {
        let rotated = CoefficientSpec::Rotated {
            angle: 0.7,
            eig_min: 1.0,
            eig_max: 4.0,
        };
        for c in [CoefficientSpec::Smooth, rotated] {
            let op = build(&DomainSpec::rectangle(1.0, 1.3, 7, 6), &c);
            assert_eq!(op.matrix().max_asymmetry(), 0.0);
            assert_eq!(op.identity_matrix().max_asymmetry(), 0.0);
        }
    }

    #[test]
    fn identity_operator_is_five_point() {
        let op = build(&DomainSpec::rectangle(1.0, 2.0, 4, 5), &CoefficientSpec::identity());
        let (hx, hy) = (0.2, 2.0 / 6.0);
        let k = op.identity_matrix();
        let c = op.grid().cell_index(1, 2);
        assert!((k.get(c, c) - (2.0 / (hx * hx) + 2.0 / (hy * hy))).abs() < 1e-10);
        assert!((k.get(c, c + 1) + 1.0 / (hx * hx)).abs() < 1e-10);
        assert!((k.get(c, c + 4) + 1.0 / (hy * hy)).abs() < 1e-10);
        assert_eq!(k.get(c, c + 5), 0.0);
    }

    #[test]
    fn sandwich_on_random_probes() {
        let op = build(&DomainSpec::rectangle(1.0, 1.0, 8, 8), &CoefficientSpec::Smooth);
        let (l1, l2) = (op.coefficient().lambda_min(), op.coefficient().lambda_max());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v: Vec<f64> = (0..op.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ea = op.dirichlet_energy(&v).unwrap();
            let ei = op.identity_energy(&v).unwrap();
            assert!(ea >= l1 * ei * (1.0 - 1e-14) && ea <= l2 * ei * (1.0 + 1e-14));
            assert!(ea > 0.0);
        }
    }

    #[test]
    fn flux_form_matches_matrix() {
        let rotated = CoefficientSpec::Rotated {
            angle: 0.4,
            eig_min: 0.5,
            eig_max: 3.0,
        };
        let op = build(&DomainSpec::rectangle(1.0, 1.0, 6, 7), &rotated);
        let v: Vec<f64> = (0..op.size()).map(|i| (i as f64 * 0.91).sin()).collect();
        let kv = op.apply(&v);
        let div = op.flux_divergence(&op.face_fluxes(&v));
        for i in 0..op.size() {
            assert!((kv[i] + div[i]).abs() < 1e-10 * (1.0 + kv[i].abs()));
        }
        // total divergence telescopes to the boundary flux
        let total: f64 = div.iter().map(|d| d * op.grid().cell_volume()).sum();
        let bf = op.boundary_flux(&op.face_fluxes(&v));
        assert!((total - bf).abs() < 1e-12 * (1.0 + bf.abs()));
    }

    #[test]
    fn row_sums_vanish_away_from_boundary() {
        let op = build(&DomainSpec::rectangle(1.0, 1.0, 6, 6), &CoefficientSpec::Smooth);
        let ones = vec![1.0; op.size()];
        let k1 = op.apply(&ones);
        let g = op.grid();
        for c in 0..op.size() {
            let [x, y] = g.cell_center(c);
            let interior = g.boundary_distance([x, y]) > 1.5 * g.min_spacing();
            if interior {
                assert!(k1[c].abs() < 1e-10, "cell {c}: {}", k1[c]);
            } else {
                assert!(k1[c] > 0.0);
            }
        }
    }

    #[test]
    fn energy_of_zero_and_sine() {
        let n = 256;
        let op = build(&DomainSpec::interval(1.0, n), &CoefficientSpec::identity());
        assert_eq!(op.dirichlet_energy(&vec![0.0; n]).unwrap(), 0.0);
        let u: Vec<f64> = op.grid().cell_centers().iter().map(|p| (PI * p[0]).sin()).collect();
        let e = op.dirichlet_energy(&u).unwrap();
        assert!((e - PI * PI / 2.0).abs() < 0.01 * PI * PI / 2.0);
        assert_eq!(e, op.identity_energy(&u).unwrap());
        assert!(op.dirichlet_energy(&[1.0, 2.0]).unwrap_err().is_config());
    }

    #[test]
    fn mismatched_coefficient_rejected() {
        let g1 = Grid::new(&DomainSpec::interval(1.0, 5)).unwrap();
        let g2 = Grid::new(&DomainSpec::rectangle(1.0, 1.0, 5, 5)).unwrap();
        let c2 = CoefficientField::sample(&CoefficientSpec::identity(), &g2).unwrap();
        assert!(EllipticOperator::assemble(&g1, &c2).unwrap_err().is_config());
    }

    #[test]
    fn lower_bound_is_exact_for_identity_interval() {
        let n = 50;
        let op = build(&DomainSpec::interval(2.0, n), &CoefficientSpec::Constant { value: 3.0 });
        let h = 2.0 / (n + 1) as f64;
        let exact = 3.0 * 4.0 / (h * h) * (PI * h / 4.0).sin().powi(2);
        assert!((op.lambda_min_lower_bound() - exact).abs() < 1e-12 * exact);
        assert!(op.lambda_max_upper_bound() >= 3.0 * 4.0 / (h * h) * 0.999);
    }
}
