mod common;

use common::*;
use helmdd::linalg::{factorize, ResidualNorm};
use helmdd::mesh::fine_resolution;
use helmdd::solver::{solve, solve_seeds, verify_solution, PreconKind, Problem, SolveConfig};

#[test]
fn single_subdomain_without_absorption_is_exact() {
    let mut c = SolveConfig::new(2, 10.0, 1.0)
        .with_precon(PreconKind::OneLevel)
        .with_beta(None);
    c.subdomains_per_dim = Some(1);
    let r = solve(&c).unwrap();
    assert_eq!(r.n_sub, 1);
    assert!(r.converged);
    assert!(r.arnoldi_steps <= 2, "{} steps", r.arnoldi_steps);
    assert!(r.iterations <= 2);
}

#[test]
fn coarse_grid_equal_to_fine_grid_solves_the_absorptive_system() {
    let mut c = SolveConfig::new(2, 10.0, 1.0).with_precon(PreconKind::Grid);
    c.coarse_intervals = Some(fine_resolution(10.0, 10));
    c.solve_absorptive = true;
    let r = solve(&c).unwrap();
    assert!(r.converged);
    assert!(r.arnoldi_steps <= 2, "{} steps", r.arnoldi_steps);
}

#[test]
fn report_shapes() {
    let c = SolveConfig::new(2, 10.0, 1.0).with_precon(PreconKind::Grid);
    let r = solve(&c).unwrap();
    assert_eq!(r.m, 40);
    assert_eq!(r.n, 41 * 41);
    assert_eq!(r.n_sub, 100);
    assert_eq!(r.n_cs, 121);
    assert_eq!(r.residual_history.len(), r.arnoldi_steps + 1);
    assert!(r.iterations <= r.arnoldi_steps);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"n_cs\":121"));
}

#[test]
fn seeds_are_reproducible() {
    let c = SolveConfig::new(2, 10.0, 0.8).with_precon(PreconKind::Dtn);
    let a = solve_seeds(&c, &[5, 6]).unwrap();
    let b = solve_seeds(&c, &[5, 6]).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.iterations, y.iterations);
        assert_eq!(x.residual_history, y.residual_history);
        assert_eq!(x.solution, y.solution);
    }
    assert_ne!(a[0].residual_history, a[1].residual_history);
}

#[test]
fn verified_residual_is_consistent_with_gmres() {
    let c = SolveConfig::new(2, 10.0, 1.0).with_precon(PreconKind::Dtn);
    let problem = Problem::build(&c).unwrap();
    let r = problem.run(0).unwrap();
    assert!(r.converged);
    assert!(r.verified_residual <= 1e-5);
    let ratio = r.verified_residual / r.final_residual();
    assert!((0.1..=10.0).contains(&ratio), "ratio {ratio}");

    let exact = factorize(problem.matrix())
        .unwrap()
        .solve(problem.rhs())
        .unwrap();
    assert!(verify_solution(&exact, problem.matrix(), problem.rhs()).unwrap() <= 1e-10);
    let zero = vec![c0(); exact.len()];
    assert_eq!(
        verify_solution(&zero, problem.matrix(), problem.rhs()).unwrap(),
        1.0
    );
}

fn c0() -> helmdd::C64 {
    c(0.0, 0.0)
}

#[test]
fn counting_rule_matches_a_run_stopped_by_it() {
    let mut c = SolveConfig::new(2, 10.0, 0.6).with_precon(PreconKind::OneLevel);
    let counted = solve(&c).unwrap();
    c.residual_norm = ResidualNorm::InitialResidual;
    let stopped = solve(&c).unwrap();
    assert_eq!(counted.iterations, stopped.arnoldi_steps);
    assert!(counted.arnoldi_steps > stopped.arnoldi_steps);
}

#[test]
fn additive_mode_also_converges() {
    let mut c = SolveConfig::new(2, 10.0, 1.0).with_precon(PreconKind::Grid);
    c.mode = helmdd::preconditioner::CoarseMode::Additive;
    assert!(solve(&c).unwrap().converged);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(solve(&SolveConfig::new(1, 10.0, 1.0)).is_err());
    let mut c = SolveConfig::new(2, 10.0, 1.0);
    c.overlap_layers = 0;
    assert!(solve(&c).is_err());
}
