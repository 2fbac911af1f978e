use super::deformation::{interpolate_faces, Deformation};
use crate::elliptic::Grid;
use crate::error::{Error, Result};
use crate::spectral::{discrete_gradient, FaceGradient};

/// `h(x) = min(dist(x, boundary) / eps, rho)` with `rho = 1`, sampled at
/// cell centers. Inside the domain the signed extension `s(x)` equals `h`.
#[derive(Debug, Clone)]
pub struct LevelSetField {
    pub epsilon: f64,
    pub saturation: f64,
    pub values: Vec<f64>,
    pub gradient: FaceGradient,
    grid: Grid,
}

pub fn build_level_set(def: &Deformation, grid: &Grid) -> Result<LevelSetField> {
    if def.extents != grid.extents() {
        return Err(Error::config(format!(
            "deformation built for extents {:?}, grid has {:?}",
            def.extents,
            grid.extents()
        )));
    }
    let saturation = 1.0;
    let values: Vec<f64> = grid
        .cell_centers()
        .iter()
        .map(|&p| (grid.boundary_distance(p) / def.epsilon).min(saturation))
        .collect();
    let gradient = discrete_gradient(grid, &values);
    Ok(LevelSetField {
        epsilon: def.epsilon,
        saturation,
        values,
        gradient,
        grid: grid.clone(),
    })
}

impl LevelSetField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Interpolated `h`; zero on the boundary.
    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        self.grid.interpolate(&self.values, p)
    }

    /// Signed extension: `h` inside the closed box, `-h` of the mirrored
    /// distance outside.
    pub fn signed(&self, p: [f64; 2]) -> f64 {
        let inside = (0..self.grid.dim()).all(|a| p[a] >= 0.0 && p[a] <= self.grid.extents()[a]);
        if inside {
            self.value_at(p)
        } else {
            let outside = (0..self.grid.dim())
                .map(|a| (-p[a]).max(p[a] - self.grid.extents()[a]).max(0.0))
                .fold(0.0, f64::max);
            -(outside / self.epsilon).min(self.saturation)
        }
    }

    /// Gradient interpolated from the face differences.
    pub fn gradient_at(&self, p: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (a, ga) in g.iter_mut().enumerate().take(self.grid.dim()) {
            *ga = interpolate_faces(&self.grid, &self.gradient.values, a, p);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::DomainSpec;
    use crate::probe::deformation::build_deformation;

    #[test]
    fn boundary_adjacent_node() {
        let g = Grid::new(&DomainSpec::interval(1.0, 99)).unwrap();
        let def = build_deformation(&g, 0.1, &[1.0]).unwrap();
        let ls = build_level_set(&def, &g).unwrap();
        let h = g.spacing()[0];
        // first cell center sits one spacing from the boundary
        assert!((ls.values[0] - h / 0.1).abs() < 1e-12);
        assert!((ls.value_at([0.5 * h, 0.0]) - 0.5 * h / 0.1).abs() <= h / 0.1);
        assert_eq!(ls.signed([-0.05, 0.0]), -0.5);
    }

    #[test]
    fn saturated_center() {
        let g = Grid::new(&DomainSpec::rectangle(1.0, 1.0, 31, 31)).unwrap();
        let def = build_deformation(&g, 0.1, &[1.0]).unwrap();
        let ls = build_level_set(&def, &g).unwrap();
        assert_eq!(ls.values[g.cell_index(15, 15)], 1.0);
        assert!((ls.value_at([0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert!(ls.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn level_matches_shells_and_gradient_follows_normals() {
        let g = Grid::new(&DomainSpec::rectangle(1.0, 1.0, 32, 32)).unwrap();
        let def = build_deformation(&g, 0.1, &[1.0, 0.5, 0.25, 0.125]).unwrap();
        let ls = build_level_set(&def, &g).unwrap();
        let tol = g.min_spacing() / 0.1;
        for shell in &def.shells {
            for n in &shell.nodes {
                assert!((ls.value_at(n.point) - shell.tau).abs() <= tol);
                let corner_gap = (0..2)
                    .map(|a| (n.point[a] - shell.offset).min(1.0 - shell.offset - n.point[a]))
                    .fold(f64::INFINITY, f64::min);
                if corner_gap < shell.offset + 2.0 * g.min_spacing() {
                    continue;
                }
                let grad = ls.gradient_at(n.point);
                let norm = grad[0].hypot(grad[1]);
                assert!(norm > 0.0);
                // h increases inward, against the outward normal
                let cos = -(grad[0] * n.normal[0] + grad[1] * n.normal[1]) / norm;
                assert!(cos >= 1.0 - 1e-6, "cos {cos} at {:?}", n.point);
            }
        }
    }
}
