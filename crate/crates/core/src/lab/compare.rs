use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::summary::RunSummary;
use crate::elliptic::GridDescriptor;
use crate::error::{Error, Result};
use crate::solver::run::space_time_l2;

/// A finished run read back from its output directory.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub dir: PathBuf,
    pub summary: RunSummary,
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Comparison(format!("{}: bad number `{s}`", path.display())))
}

pub fn load_run(dir: &Path) -> Result<StoredRun> {
    let summary: RunSummary = serde_json::from_str(&read(&dir.join("summary.json"))?)?;
    let sdir = dir.join("snapshots");
    let index_path = sdir.join("index.csv");
    if !index_path.exists() {
        return Err(Error::Comparison(format!("{} has no snapshots", dir.display())));
    }
    let mut times = Vec::new();
    let mut fields = Vec::new();
    for line in read(&index_path)?.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Comparison(format!("{}: malformed line `{line}`", index_path.display())));
        }
        times.push(parse_f64(cols[1], &index_path)?);
        let path = sdir.join(cols[2]);
        let u = read(&path)?
            .lines()
            .skip(1)
            .map(|l| parse_f64(l.rsplit(',').next().unwrap_or(""), &path))
            .collect::<Result<Vec<f64>>>()?;
        fields.push(u);
    }
    Ok(StoredRun {
        dir: dir.to_path_buf(),
        summary,
        times,
        fields,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparedRun {
    pub dir: String,
    pub delta: f64,
    pub mu: f64,
    pub final_mass: f64,
    pub mass_drift: f64,
    pub final_entropy: f64,
    pub final_frac_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparedPair {
    pub from: String,
    pub to: String,
    /// `(int_0^T int |u_a - u_b|^2)^{1/2}` over the shared snapshots
    pub l2_difference: f64,
    pub mass_drift_delta: f64,
    pub entropy_delta: f64,
    pub frac_energy_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    /// ordered by decreasing `(delta, mu)`
    pub runs: Vec<ComparedRun>,
    /// consecutive runs in that order
    pub pairs: Vec<ComparedPair>,
    pub differences_decreasing: bool,
}

fn describe(g: &GridDescriptor) -> String {
    format!("{}D grid {:?} on extents {:?}", g.dim, g.resolution, g.extents)
}

pub fn compare_runs(dirs: &[PathBuf]) -> Result<ComparisonTable> {
    if dirs.len() < 2 {
        return Err(Error::Comparison("comparison needs at least two runs".into()));
    }
    let mut runs = dirs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
    let first = runs[0].clone();
    for r in &runs[1..] {
        if r.summary.grid != first.summary.grid {
            return Err(Error::Comparison(format!(
                "{} uses a {} but {} uses a {}",
                first.dir.display(),
                describe(&first.summary.grid),
                r.dir.display(),
                describe(&r.summary.grid)
            )));
        }
        if r.summary.config.initial != first.summary.config.initial {
            return Err(Error::Comparison(format!(
                "{} and {} start from different initial data",
                first.dir.display(),
                r.dir.display()
            )));
        }
        let same_times = r.times.len() == first.times.len()
            && r.times.iter().zip(&first.times).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        if !same_times {
            return Err(Error::Comparison(format!(
                "{} and {} have different snapshot times",
                first.dir.display(),
                r.dir.display()
            )));
        }
    }
    let key = |r: &StoredRun| (r.summary.config.solver.delta, r.summary.config.solver.mu);
    runs.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        kb.0.total_cmp(&ka.0).then(kb.1.total_cmp(&ka.1))
    });

    let vol = first.summary.grid.cell_volume;
    let mut pairs = Vec::new();
    for w in runs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let fa: Vec<&[f64]> = a.fields.iter().map(Vec::as_slice).collect();
        let fb: Vec<&[f64]> = b.fields.iter().map(Vec::as_slice).collect();
        let (da, db) = (&a.summary.final_diagnostics, &b.summary.final_diagnostics);
        pairs.push(ComparedPair {
            from: a.dir.display().to_string(),
            to: b.dir.display().to_string(),
            l2_difference: space_time_l2(&a.times, &fa, &fb, vol)?,
            mass_drift_delta: b.summary.mass_drift - a.summary.mass_drift,
            entropy_delta: db.entropy - da.entropy,
            frac_energy_delta: db.frac_energy - da.frac_energy,
        });
    }
    let differences_decreasing = pairs.windows(2).all(|w| w[1].l2_difference < w[0].l2_difference);
    Ok(ComparisonTable {
        runs: runs
            .iter()
            .map(|r| ComparedRun {
                dir: r.dir.display().to_string(),
                delta: r.summary.config.solver.delta,
                mu: r.summary.config.solver.mu,
                final_mass: r.summary.final_diagnostics.mass,
                mass_drift: r.summary.mass_drift,
                final_entropy: r.summary.final_diagnostics.entropy,
                final_frac_energy: r.summary.final_diagnostics.frac_energy,
            })
            .collect(),
        pairs,
        differences_decreasing,
    })
}
