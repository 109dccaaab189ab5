use std::f64::consts::PI;
use std::sync::Arc;

use loghls_core::flow::{run_ddp_flow, run_proof_flow, step_ddp_flow, time_derivative, FlowConfig};
use loghls_core::stationary::solve_stationary;
use loghls_core::{Coupling, Density, Error, Profile, RadialGrid};

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::standard())
}

fn long_run(t_end: f64) -> FlowConfig {
    FlowConfig { t_end, dt_init: 1e-4, dt_max: 5.0, record_every: 10, max_relative_change: 0.2, ..FlowConfig::default() }
}

fn free_energies(trace: &loghls_core::flow::FlowTrace) -> Vec<f64> {
    trace.reports.iter().map(|r| r.free_energy.unwrap()).collect()
}

fn largest_rise(series: &[f64]) -> f64 {
    series.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn proof_flow_from_the_optimizer_stays_flat() {
    let f0 = Profile::Reference.density(&grid(), 1.0).unwrap();
    let config = FlowConfig { t_end: 1.0, ..FlowConfig::default() };
    let trace = run_proof_flow(&f0, &config, &[0.0, 1.0, 2.0]).unwrap();
    for r in &trace.reports {
        for a in [0.0, 1.0, 2.0] {
            assert!(r.deficit_at(a).abs() < 1e-5);
        }
    }
}

#[test]
fn proof_flow_conserves_mass_and_positivity() {
    let f0 = Profile::Gaussian { sigma: 0.5 }.density(&grid(), 3.0).unwrap();
    let config = FlowConfig { t_end: 2.0, ..FlowConfig::default() };
    let trace = run_proof_flow(&f0, &config, &[1.0]).unwrap();
    let m0 = trace.mass[0];
    assert!(trace.mass.iter().all(|m| (m - m0).abs() <= 1e-6 * m0));
    assert!(trace.clipped_mass <= 1e-8 * m0);
    assert!(trace.final_state.unwrap().values().iter().all(|v| *v >= 0.0));
    let deficits: Vec<f64> = trace.reports.iter().map(|r| r.deficit_at(1.0)).collect();
    assert!(largest_rise(&deficits) <= 1e-7);
}

#[test]
fn repulsive_free_energy_is_a_lyapunov_functional() {
    let m = 2.0;
    let beta = 1.0 + m / (8.0 * PI);
    let f0 = Profile::Bump { inner: 0.5, outer: 2.0 }.density(&grid(), m).unwrap();
    let trace = run_ddp_flow(&f0, beta, Coupling::Repulsive, &long_run(50.0)).unwrap();
    // Late records differ by round-off once the state has settled.
    assert!(largest_rise(&free_energies(&trace)) <= 1e-8);
}

#[test]
fn subcritical_attractive_flow_is_bounded() {
    let m = 4.0 * PI;
    let f0 = Profile::Gaussian { sigma: 1.0 }.density(&grid(), m).unwrap();
    let trace = run_ddp_flow(&f0, 1.0, Coupling::Attractive, &long_run(20.0)).unwrap();
    let fe = free_energies(&trace);
    assert!(largest_rise(&fe) <= 1e-8);
    assert!(fe.iter().all(|f| f.is_finite()));
    let last = trace.final_state.unwrap();
    assert!(last.sup_norm() < 10.0 * f0.sup_norm());
}

#[test]
fn supercritical_attractive_flow_needs_an_opt_in() {
    let f0 = Profile::Gaussian { sigma: 1.0 }.density(&grid(), 10.0 * PI).unwrap();
    let err = run_ddp_flow(&f0, 0.0, Coupling::Attractive, &long_run(1.0)).unwrap_err();
    assert!(matches!(err.error, Error::Parameter(_)));
    assert!(step_ddp_flow(&f0, 0.0, Coupling::Attractive, 1e-3).is_err());
}

#[test]
fn small_mass_without_potential_spreads_like_heat() {
    let m = 1e-4;
    let f0 = Profile::Gaussian { sigma: 1.0 }.density(&grid(), m).unwrap();
    let m2_0 = f0.second_moment().unwrap() / m;
    let config = FlowConfig { t_end: 1.0, dt_max: 1e-2, ..FlowConfig::default() };
    let trace = run_ddp_flow(&f0, 0.0, Coupling::Repulsive, &config).unwrap();
    let m2_1 = trace.final_state.unwrap().second_moment().unwrap() / m;
    let growth = m2_1 - m2_0;
    assert!((growth - 4.0).abs() < 0.4, "{growth}");
}

#[test]
fn stationary_start_gives_a_flat_trace() {
    let g = grid();
    let beta = 1.5;
    let stat = solve_stationary(&g, 2.0, beta, 0.5, 2000).unwrap();
    assert!(stat.converged);
    let trace = run_ddp_flow(&stat.f_stat, beta, Coupling::Repulsive, &long_run(20.0)).unwrap();
    let fe = free_energies(&trace);
    let spread = fe.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - fe.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    assert!(spread < 1e-6, "{spread}");
}

#[test]
fn distinct_starts_reach_the_same_state() {
    let g = grid();
    let beta = 1.5;
    let a = Profile::Gaussian { sigma: 0.5 }.density(&g, 2.0).unwrap();
    let b = Profile::Bump { inner: 1.0, outer: 3.0 }.density(&g, 2.0).unwrap();
    let fa = run_ddp_flow(&a, beta, Coupling::Repulsive, &long_run(1000.0)).unwrap().final_state.unwrap();
    let fb = run_ddp_flow(&b, beta, Coupling::Repulsive, &long_run(1000.0)).unwrap().final_state.unwrap();
    assert!(fa.l1_distance(&fb).unwrap() < 1e-3);
    let stat = solve_stationary(&g, 2.0, beta, 0.5, 2000).unwrap();
    assert!(fa.l1_distance(&stat.f_stat).unwrap() < 1e-3);
    let f_limit = loghls_core::functionals::free_energy(&fa, beta, Coupling::Repulsive, None).unwrap();
    let f_stat = loghls_core::functionals::free_energy(&stat.f_stat, beta, Coupling::Repulsive, None).unwrap();
    assert!((f_limit - f_stat).abs() < 1e-3);
}

#[test]
fn entropy_production_matches_the_free_energy_decay() {
    let beta = 1.0 + 1.0 / (8.0 * PI);
    let f0 = Profile::Bump { inner: 0.5, outer: 2.0 }.density(&grid(), 1.0).unwrap();
    let config = FlowConfig { t_end: 0.5, dt_init: 1e-7, dt_max: 1e-4, max_relative_change: 0.01, ..FlowConfig::default() };
    let trace = run_ddp_flow(&f0, beta, Coupling::Repulsive, &config).unwrap();
    let fd = time_derivative(&trace.times, &free_energies(&trace));
    let mut checked = 0;
    for k in 1..fd.len() - 1 {
        assert!(fd[k] <= 1e-8, "t={} dF/dt={}", trace.times[k], fd[k]);
        if fd[k].abs() > 1e-3 {
            checked += 1;
            let production = trace.dissipation[k].gn_part;
            let rel = (fd[k] + production).abs() / fd[k].abs();
            assert!(rel < 0.05, "t={} dF/dt={} production={}", trace.times[k], fd[k], production);
        }
    }
    assert!(checked > 10);
}

#[test]
fn refinement_converges() {
    // Free energy at t = 1 on grids with 256 … 2048 nodes against 4096 nodes.
    let beta = 1.0 + 1.0 / (8.0 * PI);
    let at = |n: usize| -> f64 {
        let g = Arc::new(RadialGrid::build(n, 200.0, 3.0).unwrap());
        let f0: Density = Profile::Gaussian { sigma: 1.0 }.density(&g, 1.0).unwrap();
        let config = FlowConfig { t_end: 1.0, dt_max: 1e-3, ..FlowConfig::default() };
        let trace = run_ddp_flow(&f0, beta, Coupling::Repulsive, &config).unwrap();
        *free_energies(&trace).last().unwrap()
    };
    let reference = at(4096);
    let errors: Vec<f64> = [256, 512, 1024].iter().map(|&n| (at(n) - reference).abs()).collect();
    for w in errors.windows(2) {
        assert!(w[1] <= 0.5 * w[0], "{errors:?}");
    }
}
