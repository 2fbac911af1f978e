mod common;

use fracpme::elliptic::{DomainSpec, Grid};
use fracpme::lab::{RunConfig, Scenario};
use fracpme::probe::{
    boundary_family, build_cutoffs, build_deformation, build_level_set, decay_table, initial_trace_check,
    trace_family, weak_family, weak_residual, Bump1,
};
use fracpme::solver::Trajectory;

fn reference(n: usize, dt: f64) -> Trajectory {
    let mut config = RunConfig::reference();
    config.domain = DomainSpec::interval(1.0, n);
    config.solver.dt = dt;
    Scenario::build(&config).unwrap().simulate(config.solver).unwrap()
}

#[test]
fn shell_flux_decays_toward_the_wall() {
    let traj = reference(128, 1e-4);
    let def = build_deformation(traj.operator.grid(), 0.1, &[1.0, 0.5, 0.25, 0.125]).unwrap();
    let table = decay_table(&traj, &def, &boundary_family(&[1.0], 0.1)).unwrap();
    assert!(table.monotone().iter().all(|&m| m), "{}", table.to_csv());
    assert!(table.ratios().iter().all(|&r| r <= 0.25), "{:?}", table.ratios());
}

#[test]
fn weak_residual_and_trace_shrink_under_refinement() {
    let phis = weak_family(&[1.0], 0.1, 0.3);
    let zetas = trace_family(&[1.0], 0.3);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for n in [64usize, 128, 256] {
        let traj = reference(n, 1e-4 * 128.0 / n as f64);
        let res: Vec<f64> = phis.iter().map(|p| weak_residual(&traj, p).unwrap().regularized.abs()).collect();
        let t1 = traj.levels[1].t;
        let tr: Vec<f64> = zetas.iter().map(|z| initial_trace_check(&traj, z, &[t1]).unwrap()[0]).collect();
        if let Some((pr, pt)) = &prev {
            assert!(res.iter().zip(pr).all(|(a, b)| a < b), "n={n}: {res:?} after {pr:?}");
            assert!(tr.iter().zip(pt).all(|(a, b)| a < b), "n={n}: {tr:?} after {pt:?}");
        }
        prev = Some((res, tr));
    }
}

#[test]
fn trace_error_shrinks_toward_the_initial_time() {
    let traj = reference(128, 1e-4);
    let zetas = trace_family(&[1.0], 0.3);
    let times = [0.04, 0.02, 0.01, 0.005];
    for z in &zetas {
        let errs = initial_trace_check(&traj, z, &times).unwrap();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{}: {errs:?}", z.name());
    }
    assert!(initial_trace_check(&traj, &zetas[0], &[0.2]).unwrap_err().is_config());
}

#[test]
fn cutoffs_approach_one_on_the_square() {
    let grid = Grid::new(&DomainSpec::rectangle(1.0, 1.0, 32, 32)).unwrap();
    let def = build_deformation(&grid, 0.1, &[1.0, 0.5]).unwrap();
    let level = build_level_set(&def, &grid).unwrap();
    let fam = build_cutoffs(&level, &[4, 16, 64]).unwrap();
    assert!(fam.strictly_decreasing());
    assert!(fam.one_minus_sq[2] < 1e-2);
    assert!(fam.to_csv().starts_with("k,l2_one_minus_xi,l2_grad_xi\n"));
}

#[test]
fn bump_derivative_matches_finite_differences() {
    let b = Bump1::new(0.4, 0.3);
    for x in [0.15, 0.3, 0.4, 0.52, 0.68] {
        let fd = (b.value(x + 1e-6) - b.value(x - 1e-6)) / 2e-6;
        assert!((fd - b.derivative(x)).abs() < 1e-6 * (1.0 + fd.abs()), "x={x}");
    }
    assert_eq!(b.value(0.1), 0.0);
    assert_eq!(b.value(0.7), 0.0);
}
