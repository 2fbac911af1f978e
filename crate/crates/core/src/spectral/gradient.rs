use crate::elliptic::operator::face_differences;
use crate::elliptic::Grid;

/// Two-point face differences `(u_hi - u_lo) / h` with zero ghost values.
#[derive(Debug, Clone)]
pub struct FaceGradient {
    pub values: Vec<f64>,
    pub measures: Vec<f64>,
}

impl FaceGradient {
    /// `sum_faces |g_f|^2 * measure_f`; equals `u^T S_I u`, the
    /// identity-coefficient Dirichlet energy.
    pub fn squared_norm(&self) -> f64 {
        self.values.iter().zip(&self.measures).map(|(g, m)| g * g * m).sum()
    }
}

pub fn discrete_gradient(grid: &Grid, u: &[f64]) -> FaceGradient {
    FaceGradient {
        values: face_differences(grid, u),
        measures: (0..grid.faces().len()).map(|f| grid.face_measure(f)).collect(),
    }
}
