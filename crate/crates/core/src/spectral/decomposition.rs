use std::fmt::Write as _;
use std::sync::Arc;

use super::eigen::symmetric_eigen;
use crate::elliptic::EllipticOperator;
use crate::error::{Error, Result};

/// Largest operator handled by the dense eigensolver.
pub const MAX_UNKNOWNS: usize = 4096;

const RESIDUAL_TOL: f64 = 1e-8;
const GRAM_TOL: f64 = 1e-10;

/// Eigenpairs of `K_A`, orthonormal in the volume-weighted inner product.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    op: Arc<EllipticOperator>,
    values: Vec<f64>,
    /// eigenvector `k` in row `k`
    vectors: Vec<f64>,
    max_residual: f64,
    gram_error: f64,
}

impl SpectralDecomposition {
    pub fn new(op: Arc<EllipticOperator>) -> Result<Self> {
        let n = op.size();
        if n > MAX_UNKNOWNS {
            return Err(Error::config(format!(
                "{n} unknowns exceed the dense eigensolver cap of {MAX_UNKNOWNS}"
            )));
        }
        let eig = symmetric_eigen(op.matrix().to_dense(), n)?;
        // K_A is symmetric in the Euclidean product and the weights are
        // uniform, so rescaling gives weighted orthonormality
        let scale = 1.0 / op.grid().cell_volume().sqrt();
        let vectors: Vec<f64> = eig.vectors.iter().map(|v| v * scale).collect();
        let mut dec = SpectralDecomposition {
            op,
            values: eig.values,
            vectors,
            max_residual: 0.0,
            gram_error: 0.0,
        };
        dec.certify()?;
        Ok(dec)
    }

    fn certify(&mut self) -> Result<()> {
        let n = self.len();
        if !(self.values[0] > 0.0) {
            return Err(Error::numerical(
                "eigendecomposition",
                format!("smallest eigenvalue {:e} is not positive", self.values[0]),
            ));
        }
        let lambda_n = self.values[n - 1];
        let mut worst = (0.0, 0);
        for k in 0..n {
            let phi = self.eigenvector(k);
            let mut r = self.op.apply(phi);
            r.iter_mut().zip(phi).for_each(|(ri, p)| *ri -= self.values[k] * p);
            let res = self.op.norm(&r);
            if res > worst.0 {
                worst = (res, k);
            }
        }
        self.max_residual = worst.0;
        if worst.0 > RESIDUAL_TOL * lambda_n {
            return Err(Error::numerical(
                "eigendecomposition",
                format!("residual {:e} at index {} exceeds tolerance", worst.0, worst.1),
            ));
        }
        let mut worst = (0.0, 0);
        for k in 0..n {
            let pk = self.eigenvector(k);
            for l in k..n {
                let g = self.op.inner(pk, self.eigenvector(l));
                let err = if k == l { (g - 1.0).abs() } else { g.abs() };
                if err > worst.0 {
                    worst = (err, k);
                }
            }
        }
        self.gram_error = worst.0;
        if worst.0 > GRAM_TOL {
            return Err(Error::numerical(
                "eigendecomposition",
                format!("orthonormality error {:e} at index {}", worst.0, worst.1),
            ));
        }
        Ok(())
    }

    pub fn operator(&self) -> &Arc<EllipticOperator> {
        &self.op
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn lambda_min(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[self.len() - 1]
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        let n = self.len();
        &self.vectors[k * n..(k + 1) * n]
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    pub fn gram_error(&self) -> f64 {
        self.gram_error
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::config(format!(
                "field has {} entries, decomposition has {}",
                u.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// `<u, phi_k>` for every `k`.
    pub fn coefficients(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        Ok((0..self.len()).map(|k| self.op.inner(u, self.eigenvector(k))).collect())
    }

    /// `sum_k c_k phi_k`.
    pub fn synthesize(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.check_len(c)?;
        let n = self.len();
        let mut u = vec![0.0; n];
        for (k, &ck) in c.iter().enumerate() {
            if ck != 0.0 {
                u.iter_mut().zip(self.eigenvector(k)).for_each(|(ui, p)| *ui += ck * p);
            }
        }
        Ok(u)
    }

    /// `sum_k f(lambda_k) <u, phi_k> phi_k`.
    pub fn apply_multiplier(&self, u: &[f64], f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let mut c = self.coefficients(u)?;
        c.iter_mut().zip(&self.values).for_each(|(ck, &l)| *ck *= f(l));
        self.synthesize(&c)
    }

    /// `L^r u` for `r` in `[-1, 1]`.
    pub fn apply_power(&self, r: f64, u: &[f64]) -> Result<Vec<f64>> {
        self.power(r)?.apply(u)
    }

    pub fn power(&self, r: f64) -> Result<FractionalOperator<'_>> {
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::config(format!("exponent {r} outside [-1, 1]")));
        }
        Ok(FractionalOperator { dec: self, exponent: r })
    }

    /// `k,lambda_k` table with a header row; `k` starts at 1.
    pub fn eigenvalue_csv(&self) -> String {
        let mut s = String::from("k,lambda_k\n");
        for (k, l) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{},{:.17e}", k + 1, l);
        }
        s
    }
}

/// `L^r` acting diagonally in the eigenbasis.
#[derive(Debug, Clone, Copy)]
pub struct FractionalOperator<'a> {
    dec: &'a SpectralDecomposition,
    exponent: f64,
}

impl FractionalOperator<'_> {
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if self.exponent == 0.0 {
            self.dec.check_len(u)?;
            let c = self.dec.coefficients(u)?;
            return self.dec.synthesize(&c);
        }
        let r = self.exponent;
        self.dec.apply_multiplier(u, |l| l.powf(r))
    }

    /// Multiplier applied to eigencoefficients.
    pub fn symbol(&self, lambda: f64) -> f64 {
        lambda.powf(self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{CoefficientField, CoefficientSpec, DomainSpec, Grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    pub(crate) fn decompose(spec: &DomainSpec, c: &CoefficientSpec) -> SpectralDecomposition {
        let g = Grid::new(spec).unwrap();
        let cf = CoefficientField::sample(c, &g).unwrap();
        let op = EllipticOperator::assemble(&g, &cf).unwrap();
        SpectralDecomposition::new(Arc::new(op)).unwrap()
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn analytic_interval_spectrum() {
        let n = 64;
        let dec = decompose(&DomainSpec::interval(1.0, n), &CoefficientSpec::identity());
        let h = 1.0 / (n + 1) as f64;
        for (k, &l) in dec.eigenvalues().iter().enumerate() {
            let exact = 4.0 / (h * h) * ((k + 1) as f64 * PI * h / 2.0).sin().powi(2);
            assert!((l - exact).abs() < 1e-11 * exact, "k={k}");
        }
        // phi_1 is a multiple of sin(pi x)
        let phi = dec.eigenvector(0);
        let centers = dec.operator().grid().cell_centers();
        let ratio = phi[n / 2] / (PI * centers[n / 2][0]).sin();
        for (p, x) in phi.iter().zip(&centers) {
            assert!((p - ratio * (PI * x[0]).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_scaling() {
        let spec = DomainSpec::interval(1.0, 20);
        let one = decompose(&spec, &CoefficientSpec::identity());
        let two = decompose(&spec, &CoefficientSpec::Constant { value: 2.0 });
        for k in 0..20 {
            let (a, b) = (one.eigenvalues()[k], two.eigenvalues()[k]);
            assert!((b - 2.0 * a).abs() < 1e-12 * b);
            let dot = one.operator().inner(one.eigenvector(k), two.eigenvector(k));
            assert!((dot.abs() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn power_round_trips() {
        let dec = decompose(&DomainSpec::rectangle(1.0, 1.0, 9, 7), &CoefficientSpec::Smooth);
        let u = random(dec.len(), 3);
        let same = dec.apply_power(0.0, &u).unwrap();
        for (a, b) in same.iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
        let v = dec.apply_power(0.3, &u).unwrap();
        let w = dec.apply_power(-0.3, &v).unwrap();
        for (a, b) in w.iter().zip(&u) {
            assert!((a - b).abs() < 1e-10);
        }
        let direct = dec.operator().apply(&u);
        let spectral = dec.apply_power(1.0, &u).unwrap();
        let scale = dec.operator().norm(&direct);
        let diff: Vec<f64> = direct.iter().zip(&spectral).map(|(a, b)| a - b).collect();
        assert!(dec.operator().norm(&diff) < 1e-8 * scale);
    }

    #[test]
    fn exponent_range_checked() {
        let dec = decompose(&DomainSpec::interval(1.0, 5), &CoefficientSpec::identity());
        assert!(dec.apply_power(1.5, &[0.0; 5]).unwrap_err().is_config());
        assert!(dec.apply_power(0.5, &[0.0; 4]).unwrap_err().is_config());
    }

    #[test]
    fn csv_layout() {
        let dec = decompose(&DomainSpec::interval(1.0, 3), &CoefficientSpec::identity());
        let csv = dec.eigenvalue_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,lambda_k");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
    }
}
