use serde::Serialize;

use crate::elliptic::Grid;
use crate::error::{Error, Result};

/// Quadrature node on an offset shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellNode {
    pub point: [f64; 2],
    /// outward unit normal; always a coordinate direction here
    pub normal: [f64; 2],
    /// `H^{n-1}` weight including the Jacobian factor
    pub weight: f64,
    pub jacobian: f64,
    /// preimage of the node on the boundary
    pub boundary_point: [f64; 2],
}

impl ShellNode {
    /// Axis and sign of the normal.
    pub fn normal_axis(&self) -> (usize, f64) {
        if self.normal[0] != 0.0 {
            (0, self.normal[0])
        } else {
            (1, self.normal[1])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shell {
    pub tau: f64,
    pub offset: f64,
    pub nodes: Vec<ShellNode>,
}

impl Shell {
    pub fn measure(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

/// The normal-offset deformation `Psi_tau(r) = r - eps * tau * nu(r)` of an
/// interval or rectangle, realized on a list of levels `tau`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deformation {
    pub epsilon: f64,
    pub extents: Vec<f64>,
    pub shells: Vec<Shell>,
}

impl Deformation {
    pub fn taus(&self) -> Vec<f64> {
        self.shells.iter().map(|s| s.tau).collect()
    }

    pub fn shell(&self, tau: f64) -> Result<&Shell> {
        self.shells
            .iter()
            .find(|s| (s.tau - tau).abs() <= 1e-12 * tau.abs().max(1.0))
            .ok_or_else(|| Error::config(format!("tau {tau} is not one of the deformation levels {:?}", self.taus())))
    }

    /// Measure of the shell boundary that the offset at `tau` produces
    /// analytically: the endpoint count in 1D, the perimeter in 2D.
    pub fn analytic_measure(&self, tau: f64) -> f64 {
        let d = self.epsilon * tau;
        match self.extents.len() {
            1 => 2.0,
            _ => 2.0 * (self.extents[0] - 2.0 * d) + 2.0 * (self.extents[1] - 2.0 * d),
        }
    }
}

/// Builds the offset shells.
///
/// Shell quadrature is the midpoint rule on segments of roughly one grid
/// spacing along each side of the inner rectangle; segment endpoints sit at
/// the corners so no node carries an undefined normal.
pub fn build_deformation(grid: &Grid, epsilon: f64, taus: &[f64]) -> Result<Deformation> {
    let mut problems = Vec::new();
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        problems.push(format!("epsilon must be positive, got {epsilon}"));
    }
    if taus.is_empty() {
        problems.push("tau list is empty".to_string());
    }
    if let Some(t) = taus.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        problems.push(format!("tau values must be nonnegative, got {t}"));
    }
    if taus.windows(2).any(|w| !(w[0] > w[1])) {
        problems.push(format!("tau list must be strictly decreasing, got {taus:?}"));
    }
    let extents = grid.extents().to_vec();
    let half = extents.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
    let tau_max = taus.iter().cloned().fold(0.0, f64::max);
    if epsilon * tau_max >= half {
        problems.push(format!(
            "shells collide: offset {} reaches the inradius {half}",
            epsilon * tau_max
        ));
    }
    if !problems.is_empty() {
        return Err(Error::config(problems.join("; ")));
    }

    let shells = taus
        .iter()
        .map(|&tau| {
            let d = epsilon * tau;
            let nodes = if grid.dim() == 1 {
                let l = extents[0];
                vec![
                    node([d, 0.0], [-1.0, 0.0], 1.0, [0.0, 0.0]),
                    node([l - d, 0.0], [1.0, 0.0], 1.0, [l, 0.0]),
                ]
            } else {
                rectangle_nodes(grid, d)
            };
            Shell { tau, offset: d, nodes }
        })
        .collect();
    Ok(Deformation {
        epsilon,
        extents,
        shells,
    })
}

fn node(point: [f64; 2], normal: [f64; 2], weight: f64, boundary_point: [f64; 2]) -> ShellNode {
    ShellNode {
        point,
        normal,
        weight,
        jacobian: 1.0,
        boundary_point,
    }
}

fn rectangle_nodes(grid: &Grid, d: f64) -> Vec<ShellNode> {
    let [lx, ly] = [grid.extents()[0], grid.extents()[1]];
    let [hx, hy] = [grid.spacing()[0], grid.spacing()[1]];
    let mut nodes = Vec::new();
    // sides of constant y (bottom, top), then constant x (left, right)
    for (y, ny, by) in [(d, -1.0, 0.0), (ly - d, 1.0, ly)] {
        let len = lx - 2.0 * d;
        let m = ((len / hx).ceil() as usize).max(1);
        let w = len / m as f64;
        for k in 0..m {
            let x = d + (k as f64 + 0.5) * w;
            nodes.push(node([x, y], [0.0, ny], w, [x, by]));
        }
    }
    for (x, nx, bx) in [(d, -1.0, 0.0), (lx - d, 1.0, lx)] {
        let len = ly - 2.0 * d;
        let m = ((len / hy).ceil() as usize).max(1);
        let w = len / m as f64;
        for k in 0..m {
            let y = d + (k as f64 + 0.5) * w;
            nodes.push(node([x, y], [nx, 0.0], w, [bx, y]));
        }
    }
    nodes
}

/// Linear interpolation of a face field on the faces normal to `axis`.
///
/// Those faces form a lattice at half-integer positions along `axis` and
/// at cell-center positions across it; points outside are clamped.
pub fn interpolate_faces(grid: &Grid, values: &[f64], axis: usize, p: [f64; 2]) -> f64 {
    let n = grid.resolution();
    let h = grid.spacing();
    let locate = |s: f64, count: usize| {
        // `count` lattice positions 0..count-1
        if count == 1 {
            return (0, 0.0);
        }
        let s = s.clamp(0.0, (count - 1) as f64);
        let i = (s.floor() as usize).min(count - 2);
        (i, s - i as f64)
    };
    if grid.dim() == 1 {
        let (i, t) = locate(p[0] / h[0] - 0.5, n[0] + 1);
        return (1.0 - t) * values[i] + t * values[i + 1];
    }
    let (nx, ny) = (n[0], n[1]);
    let other = 1 - axis;
    let (i, ti) = locate(p[axis] / h[axis] - 0.5, n[axis] + 1);
    let (j, tj) = locate(p[other] / h[other] - 1.0, n[other]);
    let index = |along: usize, across: usize| {
        if axis == 0 {
            across * (nx + 1) + along
        } else {
            (nx + 1) * ny + along * nx + across
        }
    };
    let v = |a: usize, b: usize| values[index(a, b)];
    let j1 = (j + 1).min(n[other] - 1);
    (1.0 - tj) * ((1.0 - ti) * v(i, j) + ti * v(i + 1, j)) + tj * ((1.0 - ti) * v(i, j1) + ti * v(i + 1, j1))
}
