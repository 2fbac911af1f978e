#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use fracpme::elliptic::{CoefficientField, CoefficientSpec, DomainSpec, EllipticOperator, Grid};
use fracpme::spectral::SpectralDecomposition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FAMILIES: [(&str, CoefficientSpec); 3] = [
    ("constant", CoefficientSpec::Constant { value: 1.0 }),
    ("smooth", CoefficientSpec::Smooth),
    (
        "rotated",
        CoefficientSpec::Rotated {
            angle: 0.5235987755982988,
            eig_min: 0.5,
            eig_max: 2.0,
        },
    ),
];

pub fn operator(domain: &DomainSpec, coeff: &CoefficientSpec) -> Arc<EllipticOperator> {
    let g = Grid::new(domain).unwrap();
    let c = CoefficientField::sample(coeff, &g).unwrap();
    Arc::new(EllipticOperator::assemble(&g, &c).unwrap())
}

pub fn decomposition(domain: &DomainSpec, coeff: &CoefficientSpec) -> Arc<SpectralDecomposition> {
    Arc::new(SpectralDecomposition::new(operator(domain, coeff)).unwrap())
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `|a - b| / |b|` in the Euclidean norm.
pub fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Every file below `dir`, keyed by its relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let key = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
