//! Run configuration: a flat file of `[section]` headers and `key = value`
//! lines with `#` comments. Values use TOML literal syntax (quoted strings,
//! bracketed lists); a bare number is accepted where a list is expected.
//!
//! ```text
//! [domain]
//! extents = [1.0]
//! resolution = [128]
//!
//! [coefficient]
//! family = "constant"    # constant | smooth | rotated
//! value = 1.0
//!
//! [fractional]
//! s = 0.5
//!
//! [solver]
//! delta = 1e-3
//! mu = 1e-3
//! dt = 1e-4
//! t_end = 0.1
//!
//! [initial]
//! kind = "indicator"     # zero | indicator | bump | random
//! lo = [0.25]
//! hi = [0.75]
//!
//! [probes]
//! epsilon = 0.1
//! taus = [1.0, 0.5, 0.25, 0.125]
//! ks = [4, 16, 64]
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Every key is optional; an empty file describes the 1D reference scenario.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::elliptic::{CoefficientSpec, DomainSpec};
use crate::error::{Error, Result};
use crate::solver::{InitialSpec, SolverParams};
use crate::spectral::MAX_UNKNOWNS;

pub const SECTIONS: [(&str, &[&str]); 7] = [
    ("domain", &["dim", "extents", "resolution"]),
    ("coefficient", &["family", "value", "angle", "eig_min", "eig_max"]),
    ("fractional", &["s"]),
    (
        "solver",
        &["delta", "mu", "dt", "t_end", "cfl", "snapshot_interval", "energy_slack"],
    ),
    ("initial", &["kind", "lo", "hi", "center", "width", "height", "seed"]),
    (
        "probes",
        &[
            "epsilon",
            "taus",
            "ks",
            "bump_width",
            "trace_times",
            "inequality_orders",
            "inequality_probes",
            "seed",
        ],
    ),
    ("output", &["dir", "snapshots"]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub epsilon: f64,
    pub taus: Vec<f64>,
    pub ks: Vec<u32>,
    /// relative width of the interior test bumps
    pub bump_width: f64,
    /// times of the initial-trace series, decreasing toward 0
    pub trace_times: Vec<f64>,
    pub inequality_orders: Vec<f64>,
    pub inequality_probes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: String,
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub coefficient: CoefficientSpec,
    pub solver: SolverParams,
    pub initial: InitialSpec,
    pub probes: ProbeConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// The 1D reference scenario with every default applied.
    pub fn reference() -> Self {
        parse_config("").expect("defaults are valid")
    }

    pub fn dim(&self) -> usize {
        self.domain.extents.len()
    }
}

/// Parses and validates a configuration, reporting every problem at once.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config(format!("malformed configuration: {}", e.message())))?;
    let mut r = Reader::default();

    for (name, value) in &table {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == name) else {
            let names: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
            r.issue(format!("unknown section [{name}]{}", suggestion(name, &names)));
            continue;
        };
        match value {
            Value::Table(t) => {
                for key in t.keys() {
                    if !keys.contains(&key.as_str()) {
                        r.issue(format!("unknown key `{key}` in [{name}]{}", suggestion(key, keys)));
                    }
                }
            }
            _ => r.issue(format!("`{name}` must be a [section]")),
        }
    }
    let section = |name: &str| table.get(name).and_then(Value::as_table).cloned().unwrap_or_default();

    let domain = section("domain");
    let extents = r.f64_list(&domain, "domain.extents", vec![1.0]);
    let resolution = r.usize_list(&domain, "domain.resolution", vec![128]);
    let dim = extents.len();
    if let Some(d) = r.opt_usize(&domain, "domain.dim") {
        if d != dim {
            r.issue(format!("domain.dim = {d} but extents has {dim} entries"));
        }
    }
    if !(1..=2).contains(&dim) {
        r.issue(format!("domain.extents must have 1 or 2 entries, got {dim}"));
    }
    if resolution.len() != dim {
        r.issue(format!(
            "domain.resolution has {} entries, extents has {dim}",
            resolution.len()
        ));
    }
    if let Some(l) = extents.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        r.issue(format!("domain.extents entries must be positive, got {l}"));
    }
    if let Some(n) = resolution.iter().find(|&&n| n < 3) {
        r.issue(format!("domain.resolution entries must be at least 3, got {n}"));
    }
    let unknowns: usize = resolution.iter().product();
    if unknowns > MAX_UNKNOWNS {
        r.issue(format!(
            "domain.resolution gives {unknowns} unknowns, above the cap of {MAX_UNKNOWNS}"
        ));
    }
    let min_extent = extents.iter().cloned().fold(f64::INFINITY, f64::min);
    let axes = |f: f64| extents.iter().map(|l| f * l).collect::<Vec<f64>>();

    let coef = section("coefficient");
    let family = r.string(&coef, "coefficient.family", "constant");
    let coefficient = match family.as_str() {
        "constant" => {
            let value = r.f64(&coef, "coefficient.value", 1.0);
            if !(value > 0.0) {
                r.issue(format!("coefficient.value = {value} must be positive"));
            }
            CoefficientSpec::Constant { value }
        }
        "smooth" => CoefficientSpec::Smooth,
        "rotated" => {
            let angle = r.f64(&coef, "coefficient.angle", 0.5);
            let eig_min = r.f64(&coef, "coefficient.eig_min", 1.0);
            let eig_max = r.f64(&coef, "coefficient.eig_max", 4.0);
            if !(eig_min > 0.0 && eig_max >= eig_min) {
                r.issue(format!(
                    "coefficient eigenvalues must satisfy 0 < eig_min <= eig_max, got {eig_min} and {eig_max}"
                ));
            }
            CoefficientSpec::Rotated { angle, eig_min, eig_max }
        }
        other => {
            r.issue(format!(
                "coefficient.family `{other}` is not one of constant, smooth, rotated{}",
                suggestion(other, &["constant", "smooth", "rotated"])
            ));
            CoefficientSpec::identity()
        }
    };

    let frac = section("fractional");
    let sol = section("solver");
    let d = SolverParams::default();
    let t_end = r.f64(&sol, "solver.t_end", d.t_end);
    let solver = SolverParams {
        s: r.f64(&frac, "fractional.s", d.s),
        delta: r.f64(&sol, "solver.delta", d.delta),
        mu: r.f64(&sol, "solver.mu", d.mu),
        dt: r.f64(&sol, "solver.dt", d.dt),
        t_end,
        cfl: r.f64(&sol, "solver.cfl", d.cfl),
        snapshot_interval: r.f64(&sol, "solver.snapshot_interval", t_end / 10.0),
        energy_slack: r.f64(&sol, "solver.energy_slack", d.energy_slack),
        advection: true,
    };
    if let Err(Error::Config(msg)) = solver.validate() {
        for m in msg.split("; ") {
            r.issue(m.to_string());
        }
    }

    let init = section("initial");
    let kind = r.string(&init, "initial.kind", "indicator");
    let height = r.f64(&init, "initial.height", 1.0);
    if !(height >= 0.0 && height.is_finite()) {
        r.issue(format!("initial.height = {height} must be non-negative"));
    }
    let initial = match kind.as_str() {
        "zero" => InitialSpec::Zero,
        "indicator" => {
            let lo = r.f64_list(&init, "initial.lo", axes(0.25));
            let hi = r.f64_list(&init, "initial.hi", axes(0.75));
            for (name, v) in [("lo", &lo), ("hi", &hi)] {
                if v.len() != dim {
                    r.issue(format!("initial.{name} has {} entries for a {dim}D domain", v.len()));
                }
            }
            if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
                r.issue("initial.lo must lie below initial.hi on every axis".to_string());
            }
            InitialSpec::Indicator { lo, hi, height }
        }
        "bump" => {
            let center = r.f64_list(&init, "initial.center", axes(0.5));
            let width = r.f64(&init, "initial.width", 0.3 * min_extent);
            if center.len() != dim {
                r.issue(format!("initial.center has {} entries for a {dim}D domain", center.len()));
            }
            if !(width > 0.0) {
                r.issue(format!("initial.width = {width} must be positive"));
            }
            InitialSpec::Bump { center, width, height }
        }
        "random" => InitialSpec::Random {
            height,
            seed: r.u64(&init, "initial.seed", 0),
        },
        other => {
            r.issue(format!(
                "initial.kind `{other}` is not one of zero, indicator, bump, random{}",
                suggestion(other, &["zero", "indicator", "bump", "random"])
            ));
            InitialSpec::Zero
        }
    };

    let pr = section("probes");
    let probes = ProbeConfig {
        epsilon: r.f64(&pr, "probes.epsilon", 0.1),
        taus: r.f64_list(&pr, "probes.taus", vec![1.0, 0.5, 0.25, 0.125]),
        ks: r
            .usize_list(&pr, "probes.ks", vec![4, 16, 64])
            .into_iter()
            .map(|k| k.min(u32::MAX as usize) as u32)
            .collect(),
        bump_width: r.f64(&pr, "probes.bump_width", 0.3),
        trace_times: r.f64_list(
            &pr,
            "probes.trace_times",
            [0.4, 0.2, 0.1, 0.05].iter().map(|f| f * t_end).collect(),
        ),
        inequality_orders: r.f64_list(&pr, "probes.inequality_orders", vec![solver.s]),
        inequality_probes: r.usize(&pr, "probes.inequality_probes", 100),
        seed: r.u64(&pr, "probes.seed", 0),
    };
    if !(probes.epsilon > 0.0) {
        r.issue(format!("probes.epsilon = {} must be positive", probes.epsilon));
    }
    let tau_max = probes.taus.iter().cloned().fold(0.0, f64::max);
    if probes.epsilon * tau_max >= min_extent / 2.0 {
        r.issue(format!(
            "probes.epsilon * max(taus) = {} must stay below half the smallest extent",
            probes.epsilon * tau_max
        ));
    }
    if probes.taus.is_empty() || probes.taus.windows(2).any(|w| !(w[0] > w[1])) || probes.taus.iter().any(|t| !(*t >= 0.0)) {
        r.issue(format!(
            "probes.taus must be non-negative and strictly decreasing, got {:?}",
            probes.taus
        ));
    }
    if probes.ks.is_empty() || probes.ks[0] == 0 || probes.ks.windows(2).any(|w| w[0] >= w[1]) {
        r.issue(format!("probes.ks must be increasing positive integers, got {:?}", probes.ks));
    }
    if !(probes.bump_width > 0.0 && probes.bump_width <= 1.0) {
        r.issue(format!("probes.bump_width = {} outside (0, 1]", probes.bump_width));
    }
    if probes.trace_times.is_empty()
        || probes.trace_times.windows(2).any(|w| !(w[0] > w[1]))
        || probes.trace_times.iter().any(|&t| !(t > 0.0 && t <= t_end))
    {
        r.issue(format!(
            "probes.trace_times must be strictly decreasing values in (0, t_end], got {:?}",
            probes.trace_times
        ));
    }
    if let Some(s) = probes.inequality_orders.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
        r.issue(format!("probes.inequality_orders entry {s} outside the open interval (0, 1)"));
    }
    if probes.inequality_probes == 0 {
        r.issue("probes.inequality_probes must be positive".to_string());
    }

    let out = section("output");
    let output = OutputConfig {
        dir: r.string(&out, "output.dir", "out"),
        snapshots: r.bool(&out, "output.snapshots", true),
    };

    if r.issues.is_empty() {
        Ok(RunConfig {
            domain: DomainSpec { extents, resolution },
            coefficient,
            solver,
            initial,
            probes,
            output,
        })
    } else {
        Err(Error::Config(r.issues.join("\n")))
    }
}

fn suggestion(word: &str, candidates: &[&str]) -> String {
    candidates
        .iter()
        .map(|c| (strsim::damerau_levenshtein(word, c), *c))
        .filter(|(d, c)| *d <= 2.max(c.len() / 3))
        .min()
        .map(|(_, c)| format!(" (did you mean `{c}`?)"))
        .unwrap_or_default()
}

/// Typed lookups that record problems instead of stopping at the first.
#[derive(Default)]
struct Reader {
    issues: Vec<String>,
}

impl Reader {
    fn issue(&mut self, msg: String) {
        self.issues.push(msg);
    }

    fn raw<'a>(table: &'a Table, path: &str) -> Option<&'a Value> {
        table.get(path.rsplit('.').next().unwrap())
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.issue(format!("{path} must be a number, got {v}"));
                None
            }
        }
    }

    fn f64(&mut self, t: &Table, path: &str, default: f64) -> f64 {
        match Self::raw(t, path) {
            None => default,
            Some(v) => self.number(v, path).unwrap_or(default),
        }
    }

    fn integer(&mut self, v: &Value, path: &str) -> Option<i64> {
        match v {
            Value::Integer(i) => Some(*i),
            _ => {
                self.issue(format!("{path} must be an integer, got {v}"));
                None
            }
        }
    }

    fn opt_usize(&mut self, t: &Table, path: &str) -> Option<usize> {
        let v = Self::raw(t, path)?;
        match self.integer(v, path) {
            Some(i) if i >= 0 => Some(i as usize),
            Some(i) => {
                self.issue(format!("{path} must be non-negative, got {i}"));
                None
            }
            None => None,
        }
    }

    fn usize(&mut self, t: &Table, path: &str, default: usize) -> usize {
        self.opt_usize(t, path).unwrap_or(default)
    }

    fn u64(&mut self, t: &Table, path: &str, default: u64) -> u64 {
        self.opt_usize(t, path).map_or(default, |v| v as u64)
    }

    fn string(&mut self, t: &Table, path: &str, default: &str) -> String {
        match Self::raw(t, path) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => {
                self.issue(format!("{path} must be a quoted string, got {v}"));
                default.to_string()
            }
        }
    }

    fn bool(&mut self, t: &Table, path: &str, default: bool) -> bool {
        match Self::raw(t, path) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(v) => {
                self.issue(format!("{path} must be true or false, got {v}"));
                default
            }
        }
    }

    fn list<T>(&mut self, t: &Table, path: &str, default: Vec<T>, item: impl Fn(&mut Self, &Value) -> Option<T>) -> Vec<T> {
        match Self::raw(t, path) {
            None => default,
            Some(Value::Array(a)) => {
                let n = self.issues.len();
                let out: Vec<T> = a.iter().filter_map(|v| item(self, v)).collect();
                if self.issues.len() > n {
                    default
                } else {
                    out
                }
            }
            Some(v) => item(self, v).map_or(default, |x| vec![x]),
        }
    }

    fn f64_list(&mut self, t: &Table, path: &str, default: Vec<f64>) -> Vec<f64> {
        self.list(t, path, default, |r, v| r.number(v, path))
    }

    fn usize_list(&mut self, t: &Table, path: &str, default: Vec<usize>) -> Vec<usize> {
        self.list(t, path, default, |r, v| match r.integer(v, path) {
            Some(i) if i >= 0 => Some(i as usize),
            Some(i) => {
                r.issue(format!("{path} entries must be non-negative, got {i}"));
                None
            }
            None => None,
        })
    }
}
