//! Cross-module consistency: eigenbasis equivalence between the mesh solver
//! and the finite-dimensional system, Lyapunov monotonicity, and boundary
//! condition energy identities.

use dampwave_core::damping::{DampingProfile, VelocityDamping};
use dampwave_core::dynamics::{
    dissipation_residual, run, EpsilonChoice, SimConfig,
};
use dampwave_core::galerkin::{
    galerkin_run, GalerkinConfig, GalerkinForce, GalerkinSystem,
};
use dampwave_core::mesh::{BcKind, Field, Mesh};
use dampwave_core::nonlinearity::builtin;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

fn pde_config(mesh: Mesh, h: f64, nl: &str, u0: Field, t_end: f64, stride: usize) -> SimConfig {
    let dt = 0.5 * mesh.min_spacing();
    let u1 = mesh.zero_field();
    SimConfig {
        mesh,
        damping: DampingProfile::constant(h),
        velocity_damping: VelocityDamping::identity(),
        nonlinearity: builtin(nl).unwrap(),
        dt,
        t_end,
        sample_stride: stride,
        epsilon: EpsilonChoice::Auto,
        m_blow: 1e6,
        u0,
        u1,
    }
}

/// Project a Dirichlet field onto the discrete sine eigenvector sin(k x).
fn sine_coefficient(u: &Field, mesh: &Mesh, k: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..mesh.nx {
        let s = (k as f64 * i as f64 * mesh.dx).sin();
        num += s * u.values[i];
        den += s * s;
    }
    num / den
}

#[test]
fn pde_matches_eigenbasis_system_per_mode() {
    let mesh = Mesh::new_1d(PI, 101, BcKind::Dirichlet).unwrap();
    let u0 = mesh.field_from_fn(|x, _| x.sin() + 0.3 * (2.0 * x).sin() - 0.1 * (3.0 * x).sin());
    let dx = mesh.dx;
    let mut config = pde_config(mesh, 1.0, "zero", u0, 10.0, 1);
    config.epsilon = EpsilonChoice::Fixed(0.0);
    let traj = run(&config).unwrap();

    // discrete eigenvalues of the 3-point Dirichlet Laplacian
    let modes = 3usize;
    let lambda: Vec<f64> = (1..=modes)
        .map(|k| (4.0 / (dx * dx)) * (0.5 * k as f64 * dx).sin().powi(2))
        .collect();
    let c0: Vec<f64> = (1..=modes)
        .map(|k| sine_coefficient(&config.u0, &config.mesh, k))
        .collect();

    let gconfig = GalerkinConfig {
        system: GalerkinSystem {
            a: DMatrix::from_diagonal(&DVector::from_vec(lambda)),
            b: DMatrix::identity(modes, modes),
            force: GalerkinForce::Componentwise(builtin("zero").unwrap()),
        },
        damping: DampingProfile::constant(1.0),
        dt: config.dt,
        t_end: config.t_end,
        sample_stride: 1,
        m_blow: 1e6,
        u0: DVector::from_vec(c0),
        v0: DVector::from_element(modes, 0.0),
    };
    let gtraj = galerkin_run(&gconfig).unwrap();

    assert_eq!(traj.states.len(), gtraj.samples.len());
    for (state, gs) in traj.states.iter().zip(&gtraj.samples) {
        for k in 1..=modes {
            let c_pde = sine_coefficient(&state.u, &config.mesh, k);
            let c_sys = gs.u[k - 1];
            assert!(
                (c_pde - c_sys).abs() <= 1e-10,
                "t = {}, mode {k}: pde {c_pde} vs system {c_sys}",
                state.t
            );
        }
    }
}

#[test]
fn neumann_modal_oracle() {
    let mesh = Mesh::new_1d(PI, 201, BcKind::Neumann).unwrap();
    let u0 = mesh.field_from_fn(|x, _| x.cos());
    let mut config = pde_config(mesh, 0.0, "zero", u0, PI, 10);
    let n = (PI / config.dt).ceil();
    config.dt = PI / n;
    let traj = run(&config).unwrap();
    let s = traj.final_state();
    let exact = config.mesh.field_from_fn(|x, _| s.t.cos() * x.cos());
    let mut diff = s.u.clone();
    diff.axpy(-1.0, &exact);
    let err = dampwave_core::mesh::l2_norm(&diff, &config.mesh);
    assert!(err <= 2e-3, "L2 error {err}");
}

#[test]
fn lyapunov_monotone_after_transient() {
    let mesh = Mesh::new_1d(PI, 201, BcKind::Dirichlet).unwrap();
    let u0 = mesh.field_from_fn(|x, _| x.sin());
    let config = pde_config(mesh, 1.0, "cubic_stable", u0, 50.0, 20);
    let traj = run(&config).unwrap();
    let h: Vec<(f64, f64)> = traj.energies.iter().map(|e| (e.t, e.lyapunov)).collect();

    // transient cutoff: first sample from which H decreases for 10 samples
    let mut start = None;
    'outer: for i in 0..h.len().saturating_sub(10) {
        for j in i..i + 10 {
            if h[j + 1].1 > h[j].1 {
                continue 'outer;
            }
        }
        start = Some(i);
        break;
    }
    let start = start.expect("no decreasing stretch found");
    assert!(h[start].0 < 10.0, "transient too long: {}", h[start].0);
    let dt = config.dt;
    for w in h[start..].windows(2) {
        let slack = 100.0 * dt * dt * (w[1].0 - w[0].0);
        assert!(
            w[1].1 <= w[0].1 + slack,
            "H increased at t = {}: {} -> {}",
            w[1].0,
            w[0].1,
            w[1].1
        );
    }
}

#[test]
fn dynamical_bc_energy_identity() {
    let mesh = Mesh::new_1d(PI, 101, BcKind::Dynamical).unwrap();
    // boundary-compatible data (value and slope vanish at the endpoints);
    // incompatible data excites a boundary layer on the dx/2 timescale that
    // the time step cannot resolve
    let u0 = mesh.field_from_fn(|x, _| (x * (PI - x) / PI).powi(2));
    let mut config = pde_config(mesh, 1.0, "cubic_stable", u0, 10.0, 1);
    config.dt = 0.25 * config.mesh.min_spacing();
    let traj = run(&config).unwrap();
    // boundary energy term present
    assert!(traj.energies[0].boundary > 0.0 || traj.energies[1].boundary > 0.0);
    let worst = dissipation_residual(&traj, &config)
        .unwrap()
        .iter()
        .map(|&(_, r)| r)
        .fold(0.0f64, f64::max);
    assert!(worst <= 5e-4, "worst dissipation residual {worst}");
}

#[test]
fn undamped_energy_conserved_within_drift() {
    let mesh = Mesh::new_1d(PI, 201, BcKind::Dirichlet).unwrap();
    let u0 = mesh.field_from_fn(|x, _| x.sin());
    let mut config = pde_config(mesh, 0.0, "zero", u0, 50.0, 50);
    config.epsilon = EpsilonChoice::Fixed(0.0);
    let traj = run(&config).unwrap();
    let e0 = traj.energies[0].total;
    for e in &traj.energies {
        assert!(
            (e.total - e0).abs() <= 200.0 * config.dt * config.dt,
            "energy drift {} at t = {}",
            (e.total - e0).abs(),
            e.t
        );
    }
}
