//! Tensor-product grids on intervals and rectangles.
//!
//! Unknowns sit at the interior nodes `x_i = i * h` (`i = 1..=n`) with
//! `h = L / (n + 1)`; the homogeneous Dirichlet value lives on the boundary
//! nodes `x = 0` and `x = L`. Each unknown owns the control volume
//! `[x_i - h/2, x_i + h/2]`, so the control volumes tile `[h/2, L - h/2]` and
//! their total measure is `prod(L_a - h_a)`.

use crate::error::{Error, Result};

/// Axis extents plus interior node counts.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DomainSpec {
    pub extents: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl DomainSpec {
    pub fn interval(length: f64, n: usize) -> Self {
        DomainSpec {
            extents: vec![length],
            resolution: vec![n],
        }
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Self {
        DomainSpec {
            extents: vec![lx, ly],
            resolution: vec![nx, ny],
        }
    }
}

/// A control-volume face. `lo`/`hi` are the cells on the low and high side
/// along `axis`; exactly one of them is `None` on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub axis: usize,
    pub lo: Option<usize>,
    pub hi: Option<usize>,
    pub area: f64,
    pub centroid: [f64; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.lo.is_none() || self.hi.is_none()
    }

    /// Outward unit normal component along `axis` seen from the single
    /// adjacent cell, or `None` for interior faces.
    pub fn outward_sign(&self) -> Option<f64> {
        match (self.lo, self.hi) {
            (None, Some(_)) => Some(-1.0),
            (Some(_), None) => Some(1.0),
            _ => None,
        }
    }
}

/// Quadrature point of the Dirichlet form. The gradient there is assembled
/// from one face difference per axis (`None` marks a difference taken along
/// the boundary, which is identically zero).
#[derive(Debug, Clone, PartialEq)]
pub struct FluxPoint {
    pub site: usize,
    pub weight: f64,
    pub faces: [Option<usize>; 2],
}

#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    extents: [f64; 2],
    cells: [usize; 2],
    spacing: [f64; 2],
    faces: Vec<Face>,
    boundary_faces: Vec<usize>,
    sites: Vec<[f64; 2]>,
    flux_points: Vec<FluxPoint>,
}

impl Grid {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        let dim = spec.extents.len();
        if !(1..=2).contains(&dim) || spec.resolution.len() != dim {
            return Err(Error::config(format!(
                "domain needs 1 or 2 axes with matching resolution, got {} extents and {} counts",
                dim,
                spec.resolution.len()
            )));
        }
        for (axis, (&l, &n)) in spec.extents.iter().zip(&spec.resolution).enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::config(format!("extent along axis {axis} must be positive, got {l}")));
            }
            if n < 3 {
                return Err(Error::config(format!("resolution along axis {axis} must be at least 3, got {n}")));
            }
        }

        let mut extents = [1.0; 2];
        let mut cells = [1; 2];
        let mut spacing = [1.0; 2];
        for a in 0..dim {
            extents[a] = spec.extents[a];
            cells[a] = spec.resolution[a];
            spacing[a] = spec.extents[a] / (spec.resolution[a] + 1) as f64;
        }

        let mut grid = Grid {
            dim,
            extents,
            cells,
            spacing,
            faces: Vec::new(),
            boundary_faces: Vec::new(),
            sites: Vec::new(),
            flux_points: Vec::new(),
        };
        grid.build_faces();
        grid.build_flux_points();
        Ok(grid)
    }

    fn build_faces(&mut self) {
        let [nx, ny] = self.cells;
        let [hx, hy] = self.spacing;
        let area_x = if self.dim == 1 { 1.0 } else { hy };
        for j in 0..ny {
            for i in 0..=nx {
                let y = if self.dim == 1 { 0.0 } else { (j + 1) as f64 * hy };
                self.faces.push(Face {
                    axis: 0,
                    lo: (i >= 1).then(|| self.cell_index(i - 1, j)),
                    hi: (i < nx).then(|| self.cell_index(i, j)),
                    area: area_x,
                    centroid: [(i as f64 + 0.5) * hx, y],
                });
            }
        }
        if self.dim == 2 {
            for j in 0..=ny {
                for i in 0..nx {
                    self.faces.push(Face {
                        axis: 1,
                        lo: (j >= 1).then(|| self.cell_index(i, j - 1)),
                        hi: (j < ny).then(|| self.cell_index(i, j)),
                        area: hx,
                        centroid: [(i + 1) as f64 * hx, (j as f64 + 0.5) * hy],
                    });
                }
            }
        }
        self.boundary_faces = (0..self.faces.len()).filter(|&f| self.faces[f].is_boundary()).collect();
    }

    fn build_flux_points(&mut self) {
        let [nx, ny] = self.cells;
        let [hx, hy] = self.spacing;
        if self.dim == 1 {
            for f in 0..self.faces.len() {
                self.sites.push(self.faces[f].centroid);
                self.flux_points.push(FluxPoint {
                    site: f,
                    weight: hx,
                    faces: [Some(f), None],
                });
            }
            return;
        }
        // One site per dual square spanned by lattice nodes (I..I+1, J..J+1),
        // ghost nodes included; each square pairs both of its x-differences
        // with both of its y-differences.
        let xface = |i: usize, j: usize| j * (nx + 1) + i;
        let yface = |i: usize, j: usize| (nx + 1) * ny + j * nx + i;
        for jj in 0..=ny {
            for ii in 0..=nx {
                let site = self.sites.len();
                self.sites.push([(ii as f64 + 0.5) * hx, (jj as f64 + 0.5) * hy]);
                let bottom = (jj >= 1).then(|| xface(ii, jj - 1));
                let top = (jj < ny).then(|| xface(ii, jj));
                let left = (ii >= 1).then(|| yface(ii - 1, jj));
                let right = (ii < nx).then(|| yface(ii, jj));
                for x_edge in [bottom, top] {
                    for y_edge in [left, right] {
                        self.flux_points.push(FluxPoint {
                            site,
                            weight: 0.25 * hx * hy,
                            faces: [x_edge, y_edge],
                        });
                    }
                }
            }
        }
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }

    pub fn resolution(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn num_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    /// Control-volume measure, identical for every cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1]
    }

    pub fn cell_volumes(&self) -> Vec<f64> {
        vec![self.cell_volume(); self.num_cells()]
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let i = c % self.cells[0];
        let j = c / self.cells[0];
        let y = if self.dim == 1 { 0.0 } else { (j + 1) as f64 * self.spacing[1] };
        [(i + 1) as f64 * self.spacing[0], y]
    }

    pub fn cell_centers(&self) -> Vec<[f64; 2]> {
        (0..self.num_cells()).map(|c| self.cell_center(c)).collect()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }

    /// Measure of the dual volume attached to a face (area times normal spacing).
    pub fn face_measure(&self, f: usize) -> f64 {
        self.faces[f].area * self.spacing[self.faces[f].axis]
    }

    pub fn sites(&self) -> &[[f64; 2]] {
        &self.sites
    }

    pub fn flux_points(&self) -> &[FluxPoint] {
        &self.flux_points
    }

    /// Distance from a point to the boundary of the box.
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        (0..self.dim)
            .map(|a| p[a].min(self.extents[a] - p[a]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Value of a cell field at a node of the extended lattice
    /// (`0..=n+1` per axis); boundary nodes carry the Dirichlet zero.
    pub fn lattice_value(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let [nx, ny] = self.cells;
        if i == 0 || i > nx {
            return 0.0;
        }
        if self.dim == 2 && (j == 0 || j > ny) {
            return 0.0;
        }
        let jj = if self.dim == 1 { 0 } else { j - 1 };
        u[self.cell_index(i - 1, jj)]
    }

    /// Multilinear interpolation of a cell field (with zero boundary nodes)
    /// at an arbitrary point of the closed box.
    pub fn interpolate(&self, u: &[f64], p: [f64; 2]) -> f64 {
        let locate = |a: usize| {
            let n = self.cells[a];
            let s = (p[a] / self.spacing[a]).clamp(0.0, (n + 1) as f64);
            let i = (s.floor() as usize).min(n);
            (i, s - i as f64)
        };
        let (i, tx) = locate(0);
        if self.dim == 1 {
            return (1.0 - tx) * self.lattice_value(u, i, 0) + tx * self.lattice_value(u, i + 1, 0);
        }
        let (j, ty) = locate(1);
        let v00 = self.lattice_value(u, i, j);
        let v10 = self.lattice_value(u, i + 1, j);
        let v01 = self.lattice_value(u, i, j + 1);
        let v11 = self.lattice_value(u, i + 1, j + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor {
            dim: self.dim,
            extents: self.extents().to_vec(),
            resolution: self.resolution().to_vec(),
            spacing: self.spacing().to_vec(),
            num_cells: self.num_cells(),
            num_faces: self.faces.len(),
            num_boundary_faces: self.boundary_faces.len(),
            cell_volume: self.cell_volume(),
        }
    }
}

/// Serializable summary of a grid, used in debug dumps and run summaries.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridDescriptor {
    pub dim: usize,
    pub extents: Vec<f64>,
    pub resolution: Vec<usize>,
    pub spacing: Vec<f64>,
    pub num_cells: usize,
    pub num_faces: usize,
    pub num_boundary_faces: usize,
    pub cell_volume: f64,
}
