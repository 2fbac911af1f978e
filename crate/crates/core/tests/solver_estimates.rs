mod common;

use std::sync::Arc;

use fracpme::elliptic::{CoefficientSpec, DomainSpec};
use fracpme::solver::{continuation, prepare_initial, run, InitialSpec, Solver, SolverParams};
use fracpme::Error;

use common::decomposition;

fn reference_initial() -> InitialSpec {
    InitialSpec::Indicator {
        lo: vec![0.25],
        hi: vec![0.75],
        height: 1.0,
    }
}

#[test]
fn reference_run_satisfies_every_estimate() {
    let dec = decomposition(&DomainSpec::interval(1.0, 128), &CoefficientSpec::identity());
    let params = SolverParams::default();
    let u0 = prepare_initial(&reference_initial(), dec.operator(), params.delta).unwrap();
    let traj = run(dec, params, &u0).unwrap();
    let st = traj.stats;
    assert!(st.mass_balance_error <= 1e-10);
    assert!(st.min_value >= -1e-12);
    assert!(st.linf_growth <= 1e-8);
    assert!(st.entropy_residual <= st.energy_allowance(&params));
    assert!(st.energy_residual <= st.energy_allowance(&params));
    assert!((traj.last().t - params.t_end).abs() < 1e-12);

    let (first, last) = (traj.diagnostics[0], *traj.final_diagnostics());
    assert!((last.mass - first.mass - last.boundary_flux_cum).abs() <= 1e-10 * first.mass);
    assert!(last.boundary_flux_cum < 0.0, "mass leaves through the boundary");
    assert!(last.entropy < first.entropy);
    assert!(last.frac_energy < first.frac_energy);
    let times = traj.snapshot_times();
    assert_eq!(times.len(), 11);
    for (k, t) in times.iter().enumerate() {
        assert!((t - k as f64 * 0.01).abs() < 1e-12);
    }
}

#[test]
fn mirror_symmetric_data_stays_symmetric() {
    let n = 64;
    let dec = decomposition(&DomainSpec::interval(1.0, n), &CoefficientSpec::identity());
    let params = SolverParams {
        t_end: 0.02,
        ..SolverParams::default()
    };
    let init = InitialSpec::Bump {
        center: vec![0.5],
        width: 0.3,
        height: 1.0,
    };
    let u0 = prepare_initial(&init, dec.operator(), params.delta).unwrap();
    let traj = run(dec, params, &u0).unwrap();
    let u = &traj.last().u;
    let scale = u.iter().cloned().fold(0.0, f64::max);
    for i in 0..n / 2 {
        assert!((u[i] - u[n - 1 - i]).abs() <= 1e-12 * scale, "cell {i}");
    }
}

#[test]
fn zero_data_is_a_fixed_point() {
    let dec = decomposition(&DomainSpec::interval(1.0, 32), &CoefficientSpec::Smooth);
    let params = SolverParams {
        t_end: 0.01,
        ..SolverParams::default()
    };
    let traj = run(dec, params, &[0.0; 32]).unwrap();
    assert!(traj.last().u.iter().all(|&x| x == 0.0));
    assert_eq!(traj.final_diagnostics().entropy, 0.0);
}

#[test]
fn rough_two_dimensional_data_obeys_every_step_property() {
    let dec = decomposition(&DomainSpec::rectangle(1.0, 1.0, 12, 12), &CoefficientSpec::Smooth);
    let params = SolverParams {
        t_end: 0.01,
        snapshot_interval: 0.005,
        ..SolverParams::default()
    };
    let init = InitialSpec::Random { height: 1.0, seed: 3 };
    let u0 = prepare_initial(&init, dec.operator(), params.delta).unwrap();
    let traj = run(dec, params, &u0).unwrap();
    assert!(traj.stats.mass_balance_error <= 1e-10);
    assert!(traj.stats.min_value >= -1e-12);
    assert!(traj.stats.linf_growth <= 1e-8);
}

#[test]
fn continuation_differences_and_drift_shrink() {
    let dec = decomposition(&DomainSpec::interval(1.0, 64), &CoefficientSpec::identity());
    let base = SolverParams {
        t_end: 0.05,
        ..SolverParams::default()
    };
    let levels = [1e-2, 1e-3, 1e-4];
    let (report, trajs) = continuation(dec, base, &reference_initial(), &levels, &levels).unwrap();
    assert_eq!(trajs.len(), 3);
    assert!(report.differences_decreasing, "{:?}", report.pairwise);
    assert!(report.drift_decreasing, "{:?}", report.levels);
}

#[test]
fn negative_data_and_oversized_steps_are_rejected() {
    let dec = decomposition(&DomainSpec::interval(1.0, 16), &CoefficientSpec::identity());
    let mut u0 = vec![0.5; 16];
    u0[3] = -0.1;
    let err = run(Arc::clone(&dec), SolverParams::default(), &u0).unwrap_err();
    assert!(err.is_config());

    let params = SolverParams {
        cfl: 0.1,
        ..SolverParams::default()
    };
    let mut solver = Solver::new(dec, params).unwrap();
    let state = solver.initial_state(&[1.0; 16]).unwrap();
    let too_big = 10.0 * solver.cfl_dt(&state);
    assert!(matches!(solver.step(&state, too_big), Err(Error::Precondition(_))));
}

#[test]
fn invalid_parameters_list_every_issue() {
    let bad = SolverParams {
        s: 1.2,
        delta: 0.0,
        cfl: 2.0,
        ..SolverParams::default()
    };
    let msg = bad.validate().unwrap_err().to_string();
    for needle in ["s = 1.2", "delta = 0", "cfl = 2"] {
        assert!(msg.contains(needle), "{msg}");
    }
}
