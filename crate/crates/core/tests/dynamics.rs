mod common;

use std::f64::consts::PI;

use common::{c, linspace, toy};
use polsource::dynamics::{
    correlation_surface, evolve_master, mcwf_ensemble, mcwf_run, two_time_correlation, DensityState, IntegratorOptions,
    LowerTriangle,
};
use polsource::model::units::mhz_to_rad;

#[test]
fn vacuum_rabi_follows_cos_squared() {
    let g = mhz_to_rad(3.1);
    let t = toy(g, 0.0, 1);
    let rho0 = DensityState::pure(&t.space.ket(1, 0, 0), 0.0);
    let grid = linspace(0.0, 2.0 * PI / g, 201);
    let out = evolve_master(&rho0, &t.system, &grid, &IntegratorOptions::default()).unwrap();
    for s in &out {
        let pe = s.expectation(&t.excited).re;
        assert!((pe - (g * s.time).cos().powi(2)).abs() < 1e-6, "t={}", s.time);
        assert!((s.trace().re - 1.0).abs() < 1e-8);
        assert!(s.min_eigenvalue() > -1e-8);
    }
}

fn rabi_error(h: f64) -> f64 {
    let g = mhz_to_rad(3.1);
    let t = toy(g, 0.0, 1);
    let rho0 = DensityState::pure(&t.space.ket(1, 0, 0), 0.0);
    let grid = linspace(0.0, PI / g, 11);
    let out = evolve_master(&rho0, &t.system, &grid, &IntegratorOptions::fixed(h)).unwrap();
    out.iter()
        .map(|s| (s.expectation(&t.excited).re - (g * s.time).cos().powi(2)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn halving_step_gains_fourth_order() {
    let e1 = rabi_error(2e-9);
    let e2 = rabi_error(1e-9);
    assert!(e1 > 1e-10, "coarse error {e1} already at floor");
    assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
}

#[test]
fn cavity_decay_and_regression() {
    let kappa = mhz_to_rad(1.25);
    let t = toy(0.0, kappa, 1);
    let rho0 = DensityState::pure(&t.space.ket(0, 1, 0), 0.0);
    let grid = linspace(0.0, 2e-7, 41);
    let opts = IntegratorOptions::default();
    let n = t.a.adjoint().matmul(&t.a);
    let states = evolve_master(&rho0, &t.system, &grid, &opts).unwrap();
    for s in &states {
        assert!((s.expectation(&n).re - (-2.0 * kappa * s.time).exp()).abs() < 1e-6);
    }
    let surf = correlation_surface(&rho0, &t.system, &t.a, &grid, &opts, LowerTriangle::Propagated).unwrap();
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let exact = (-kappa * (grid[i] + grid[j])).exp();
            assert!((surf.get(i, j) - c(exact)).norm() < 1e-6);
        }
        assert!((surf.get(i, i).re - states[i].expectation(&n).re).abs() < 1e-8);
    }
    assert!(surf.hermitian_residual() < 1e-8);
}

#[test]
fn single_row_matches_surface() {
    let t = toy(mhz_to_rad(3.1), mhz_to_rad(1.25), 1);
    let rho0 = DensityState::pure(&t.space.ket(1, 0, 0), 0.0);
    let grid = linspace(0.0, 3e-7, 13);
    let opts = IntegratorOptions::default();
    let surf = correlation_surface(&rho0, &t.system, &t.a, &grid, &opts, LowerTriangle::Conjugate).unwrap();
    let states = evolve_master(&rho0, &t.system, &grid, &opts).unwrap();
    let row = two_time_correlation(&states[4], &t.system, &t.a, &grid[4..], &opts).unwrap();
    for (k, v) in row.iter().enumerate() {
        assert!((v - surf.get(4, 4 + k)).norm() < 1e-12);
    }
    let both = correlation_surface(&rho0, &t.system, &t.a, &grid, &opts, LowerTriangle::Propagated).unwrap();
    assert!(both.hermitian_residual() < 1e-8);
}

#[test]
fn closed_trajectory_matches_schrodinger() {
    let g = mhz_to_rad(3.1);
    let t = toy(g, 0.0, 1);
    let psi0 = t.space.ket(1, 0, 0);
    let grid = linspace(0.0, 2.0 * PI / g, 51);
    let out = mcwf_run(&psi0, &t.system, &grid, 7, &IntegratorOptions::default()).unwrap();
    assert!(out.record.is_empty());
    let tf = *grid.last().unwrap();
    // |ψ(t)⟩ = cos(gt)|e,0⟩ − i sin(gt)|g,1⟩
    let e = t.space.ket(1, 0, 0).iter().position(|v| v.re == 1.0).unwrap();
    let g1 = t.space.ket(0, 1, 0).iter().position(|v| v.re == 1.0).unwrap();
    assert!((out.final_state[e] - c((g * tf).cos())).norm() < 1e-8);
    assert!((out.final_state[g1] - polsource::C64::new(0.0, -(g * tf).sin())).norm() < 1e-8);
}

#[test]
fn trajectories_are_reproducible() {
    let t = toy(mhz_to_rad(3.1), mhz_to_rad(1.25), 1);
    let psi0 = t.space.ket(1, 0, 0);
    let grid = linspace(0.0, 1e-6, 21);
    let opts = IntegratorOptions::default();
    let a = mcwf_run(&psi0, &t.system, &grid, 42, &opts).unwrap();
    let b = mcwf_run(&psi0, &t.system, &grid, 42, &opts).unwrap();
    assert_eq!(a.record.to_text(), b.record.to_text());
    assert_eq!(a.record.len(), 1);
}

#[test]
fn ensemble_tracks_master_equation() {
    let t = toy(mhz_to_rad(3.1), mhz_to_rad(1.25), 1);
    let psi0 = t.space.ket(1, 0, 0);
    let grid = linspace(0.0, 4e-7, 17);
    let opts = IntegratorOptions::default();
    let states = evolve_master(&DensityState::pure(&psi0, 0.0), &t.system, &grid, &opts).unwrap();
    let obs = [t.excited.clone(), t.a.adjoint().matmul(&t.a)];
    let ens = mcwf_ensemble(&t.system, &grid, &obs, 2000, 3, &opts, |_, _| psi0.clone()).unwrap();
    for (o, op) in obs.iter().enumerate() {
        for (k, s) in states.iter().enumerate() {
            let exact = s.expectation(op).re;
            let se = ens.std_error[o][k].max(1e-3);
            assert!((ens.mean[o][k] - exact).abs() < 4.0 * se, "obs {o} t {k}");
        }
    }
}
