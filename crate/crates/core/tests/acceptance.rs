//! Acceptance suite. Each criterion prints one PASS/FAIL line with its
//! measured values and runtime; the process exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use fracpme::elliptic::{CoefficientSpec, DomainSpec, Grid};
use fracpme::lab::{run_continuation, run_scenario, RunConfig, Scenario};
use fracpme::probe::{
    boundary_family, build_cutoffs, build_deformation, build_level_set, decay_table, initial_trace_check,
    trace_family, weak_family, weak_residual,
};
use fracpme::solver::{Solver, SolverParams};
use fracpme::spectral::{measure_inequalities, HeatPath, QuadratureSpec};
use fracpme::Result;

use common::{decomposition, random_vector, read_tree, rel, FAMILIES};

const ORDERS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        passed,
        detail: detail.into(),
    })
}

fn operator_suite() -> Result<Verdict> {
    let domains = [
        ("1D n=512", DomainSpec::interval(1.0, 512)),
        ("2D 24x24", DomainSpec::rectangle(1.0, 1.0, 24, 24)),
    ];
    let mut worst = (f64::INFINITY, String::new());
    let mut instances = 0;
    for (dname, domain) in &domains {
        for (fname, coeff) in &FAMILIES {
            let dec = decomposition(domain, coeff);
            for (i, &s) in ORDERS.iter().enumerate() {
                let report = measure_inequalities(&dec, s, 100, 1000 + i as u64)?;
                let w = report.worst().expect("records");
                if w.worst_margin < worst.0 {
                    worst = (w.worst_margin, format!("{} on {dname} {fname} s={s}", w.name));
                }
                instances += 1;
            }
        }
    }
    verdict(
        worst.0 >= -1e-10,
        format!("{instances} instances x 100 probes, worst margin {:.3e} ({})", worst.0, worst.1),
    )
}

fn semigroup_cross_check() -> Result<Verdict> {
    let dec = decomposition(&DomainSpec::interval(1.0, 256), &CoefficientSpec::Smooth);
    let spec = QuadratureSpec::default();
    let mut worst = (0.0f64, String::new());
    for probe in 0..20 {
        let u = random_vector(256, 2000 + probe);
        let path = HeatPath::march(dec.operator(), &u, &spec)?;
        for &s in &ORDERS {
            let inv = rel(&path.inverse_power(s)?, &dec.apply_power(-s, &u)?);
            let pos = rel(&path.power(s)?, &dec.apply_power(s, &u)?);
            for (e, which) in [(inv, "L^-s"), (pos, "L^s")] {
                if e > worst.0 {
                    worst = (e, format!("{which} s={s} probe {probe}"));
                }
            }
        }
    }
    verdict(
        worst.0 <= 1e-5,
        format!("20 probes x 5 orders, worst relative error {:.3e} ({})", worst.0, worst.1),
    )
}

fn analytic_spectrum() -> Result<Verdict> {
    let n = 256;
    let dec = decomposition(&DomainSpec::interval(1.0, n), &CoefficientSpec::identity());
    let h = 1.0 / (n as f64 + 1.0);
    let worst = dec
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let exact = 4.0 / (h * h) * ((i + 1) as f64 * PI * h / 2.0).sin().powi(2);
            ((l - exact) / exact).abs()
        })
        .fold(0.0, f64::max);
    verdict(worst <= 1e-10, format!("{n} eigenvalues, worst relative error {worst:.3e}"))
}

fn solver_estimates() -> Result<Verdict> {
    let config = RunConfig::reference();
    let sc = Scenario::build(&config)?;
    let mut passed = true;
    let mut parts = Vec::new();
    let mut allowances = Vec::new();
    let mut defects = Vec::new();
    for dt in [1e-4, 5e-5, 2.5e-5] {
        let params = SolverParams { dt, ..config.solver };
        let t = sc.simulate(params)?;
        let st = &t.stats;
        let allowance = st.energy_allowance(&params);
        let ok = st.mass_balance_error <= 1e-10
            && st.min_value >= -1e-12
            && st.linf_growth <= 1e-8
            && st.entropy_residual <= allowance
            && st.energy_residual <= allowance;
        passed &= ok;
        let defect = t.energy_residuals.iter().cloned().fold(0.0, f64::min);
        println!(
            "    dt={dt:.2e}: mass {:.2e}, min {:.2e}, linf growth {:.2e}, entropy res {:.2e}, energy res {:.2e}, \
             allowance {allowance:.2e}, second-estimate defect {defect:.3e}",
            st.mass_balance_error, st.min_value, st.linf_growth, st.entropy_residual, st.energy_residual
        );
        allowances.push(allowance);
        defects.push(defect);
    }
    for w in allowances.windows(2) {
        let r = w[0] / w[1];
        passed &= (r - 2.0).abs() <= 0.05;
        parts.push(format!("{r:.3}"));
    }
    let defect_ratios: Vec<String> = defects.windows(2).map(|w| format!("{:.3}", w[0] / w[1])).collect();
    verdict(
        passed,
        format!(
            "3 dt levels, allowance ratios [{}], defect ratios [{}]",
            parts.join(", "),
            defect_ratios.join(", ")
        ),
    )
}

fn single_mode_order() -> Result<Verdict> {
    let dec = decomposition(&DomainSpec::interval(1.0, 64), &CoefficientSpec::identity());
    let base = SolverParams {
        delta: 0.1,
        mu: 0.1,
        s: 0.5,
        advection: false,
        ..SolverParams::default()
    };
    let mut worst = (f64::INFINITY, String::new());
    let mut orders = Vec::new();
    for k in [0usize, 3, 15] {
        let lambda = dec.eigenvalues()[k];
        let rate = base.delta * lambda + base.mu * lambda.powf(1.0 - base.s);
        let mut errors = Vec::new();
        for j in 0..4 {
            let dt = 1e-3 / rate / f64::powi(2.0, j);
            let mut solver = Solver::new(Arc::clone(&dec), SolverParams { dt, ..base })?;
            let state = solver.initial_state(dec.eigenvector(k))?;
            let (next, _) = solver.step(&state, dt)?;
            let amp = dec.operator().inner(&next.u, dec.eigenvector(k));
            errors.push((amp - (-rate * dt).exp()).abs());
        }
        for w in errors.windows(2) {
            let p = (w[0] / w[1]).log2();
            orders.push(format!("{p:.4}"));
            if p < worst.0 {
                worst = (p, format!("mode {}", k + 1));
            }
        }
    }
    verdict(
        worst.0 >= 2.0 - 0.01,
        format!(
            "modes 1, 4, 16 over three halvings, orders [{}], minimum {:.4} ({}) >= 1.99",
            orders.join(", "),
            worst.0,
            worst.1
        ),
    )
}

fn continuation_trend() -> Result<Verdict> {
    let dir = tempfile::tempdir().expect("temp dir");
    let levels = [1e-2, 1e-3, 1e-4];
    let outcome = run_continuation(&RunConfig::reference(), &levels, &levels, dir.path())?;
    let r = &outcome.report;
    let diffs: Vec<String> = r.pairwise.iter().map(|p| format!("{:.3e}", p.l2_difference)).collect();
    let drifts: Vec<String> = r.levels.iter().map(|l| format!("{:.3e}", l.terminal_mass_drift)).collect();
    verdict(
        r.differences_decreasing && r.drift_decreasing,
        format!("L2 differences [{}], terminal mass drift [{}]", diffs.join(", "), drifts.join(", ")),
    )
}

fn boundary_decay() -> Result<Verdict> {
    let config = RunConfig::reference();
    let sc = Scenario::build(&config)?;
    let traj = sc.simulate(config.solver)?;
    let def = build_deformation(&sc.grid, 0.1, &[1.0, 0.5, 0.25, 0.125])?;
    let table = decay_table(&traj, &def, &boundary_family(sc.grid.extents(), config.solver.t_end))?;
    let last = table.taus.len() - 1;
    let mut passed = true;
    let mut parts = Vec::new();
    for (g, ratio) in table.ratios().iter().enumerate() {
        let strict = (1..table.taus.len()).all(|i| table.abs(i, g) < table.abs(i - 1, g));
        passed &= strict && *ratio <= 0.25;
        parts.push(format!(
            "{}: |J(1)| {:.3e} -> |J(1/8)| {:.3e}, ratio {ratio:.3}{}",
            table.gammas[g],
            table.abs(0, g),
            table.abs(last, g),
            if strict { "" } else { " (not monotone)" }
        ));
    }
    verdict(passed, parts.join("; "))
}

fn refinement() -> Result<Verdict> {
    let base = RunConfig::reference();
    let extents = base.domain.extents.clone();
    let t_end = base.solver.t_end;
    let phis = weak_family(&extents, t_end, base.probes.bump_width);
    let zetas = trace_family(&extents, base.probes.bump_width);
    let mut raw = vec![Vec::new(); phis.len()];
    let mut reg = vec![Vec::new(); phis.len()];
    let mut trace = vec![Vec::new(); zetas.len()];
    for n in [64usize, 128, 256] {
        let mut config = base.clone();
        config.domain = DomainSpec::interval(extents[0], n);
        config.solver.dt = 1e-4 * 128.0 / n as f64;
        let sc = Scenario::build(&config)?;
        let traj = sc.simulate(config.solver)?;
        for (i, phi) in phis.iter().enumerate() {
            let r = weak_residual(&traj, phi)?;
            raw[i].push(r.raw.abs());
            reg[i].push(r.regularized.abs());
        }
        let t1 = traj.levels[1].t;
        for (i, zeta) in zetas.iter().enumerate() {
            trace[i].push(initial_trace_check(&traj, zeta, &[t1])?[0]);
        }
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > ");
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, phi) in phis.iter().enumerate() {
        passed &= decreasing(&raw[i]) && decreasing(&reg[i]);
        parts.push(format!("residual {}: raw {} reg {}", phi.name, fmt(&raw[i]), fmt(&reg[i])));
    }
    for (i, zeta) in zetas.iter().enumerate() {
        passed &= decreasing(&trace[i]);
        parts.push(format!("trace {}: {}", zeta.name(), fmt(&trace[i])));
    }
    for p in &parts {
        println!("    {p}");
    }
    verdict(passed, "n = 64, 128, 256 with dt proportional to h")
}

fn cutoff_family() -> Result<Verdict> {
    let grid = Grid::new(&DomainSpec::rectangle(1.0, 1.0, 32, 32))?;
    let def = build_deformation(&grid, 0.1, &[1.0, 0.5, 0.25, 0.125])?;
    let level = build_level_set(&def, &grid)?;
    let fam = build_cutoffs(&level, &[4, 16, 64])?;
    let last = *fam.one_minus_sq.last().unwrap();
    verdict(
        fam.strictly_decreasing() && last < 1e-2,
        format!(
            "2D 32x32, k = 4, 16, 64: int|1-xi|^2 {:?}, int|grad xi|^2 {:?} (reported)",
            fam.one_minus_sq.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>(),
            fam.gradient_sq.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn determinism() -> Result<Verdict> {
    let config = RunConfig::reference();
    let (a, b) = (tempfile::tempdir().expect("temp dir"), tempfile::tempdir().expect("temp dir"));
    run_scenario(&config, a.path())?;
    run_scenario(&config, b.path())?;
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    let bytes: usize = ta.values().map(Vec::len).sum();
    verdict(ta == tb, format!("{} files, {bytes} bytes compared", ta.len()))
}

fn main() -> ExitCode {
    type Criterion = fn() -> Result<Verdict>;
    let criteria: [(&str, Criterion); 10] = [
        ("operator calculus suite", operator_suite),
        ("semigroup and spectral paths agree", semigroup_cross_check),
        ("analytic spectrum", analytic_spectrum),
        ("solver estimate suite", solver_estimates),
        ("single-eigenmode linear oracle", single_mode_order),
        ("continuation trend", continuation_trend),
        ("boundary flux decay", boundary_decay),
        ("weak residual and initial trace under refinement", refinement),
        ("cutoff family", cutoff_family),
        ("determinism", determinism),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let status = if passed { "PASS" } else { "FAIL" };
        println!(
            "{status} [{:>2}] {name}: {detail} ({:.2} s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!passed);
    }
    println!(
        "{} criteria, {failed} failed, {:.1} s total",
        criteria.len(),
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
