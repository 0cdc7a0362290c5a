use criterion::{criterion_group, criterion_main, Criterion};
use dampwave_core::damping::{
    certify_integrally_positive, DampingProfile, VelocityDamping, DEFAULT_EPSILONS,
    DEFAULT_SCAN_STEP, DEFAULT_TOLERANCE,
};
use dampwave_core::dynamics::{run, EpsilonChoice, SimConfig};
use dampwave_core::equilibria::{probe_lojasiewicz, solve_equilibrium};
use dampwave_core::mesh::{BcKind, Mesh};
use dampwave_core::nonlinearity::builtin;
use std::f64::consts::PI;
use std::hint::black_box;

fn wave_config(nx: usize, t_end: f64) -> SimConfig {
    let mesh = Mesh::new_1d(PI, nx, BcKind::Dirichlet).unwrap();
    let u0 = mesh.field_from_fn(|x, _| x.sin());
    let u1 = mesh.zero_field();
    let dt = 0.5 * mesh.dx;
    SimConfig {
        mesh,
        damping: DampingProfile::constant(1.0),
        velocity_damping: VelocityDamping::identity(),
        nonlinearity: builtin("cubic_stable").unwrap(),
        dt,
        t_end,
        sample_stride: 1000,
        epsilon: EpsilonChoice::Fixed(0.0),
        m_blow: 1e6,
        u0,
        u1,
    }
}

fn bench_stepping(c: &mut Criterion) {
    let cfg = wave_config(201, 5.0);
    c.bench_function("time_stepping_nx201_t5", |b| {
        b.iter(|| black_box(run(&cfg).unwrap()))
    });
    let mut nl_cfg = wave_config(201, 5.0);
    nl_cfg.velocity_damping = VelocityDamping::tanh_blend(0.5);
    c.bench_function("time_stepping_nonlinear_g_nx201_t5", |b| {
        b.iter(|| black_box(run(&nl_cfg).unwrap()))
    });
}

fn bench_certifier(c: &mut Criterion) {
    let profile = DampingProfile::expression(|t: f64| t.sin().abs(), "|sin t|");
    c.bench_function("certifier_abs_sin_horizon200", |b| {
        b.iter(|| {
            black_box(
                certify_integrally_positive(
                    &profile,
                    &DEFAULT_EPSILONS,
                    200.0,
                    DEFAULT_SCAN_STEP,
                    DEFAULT_TOLERANCE,
                )
                .unwrap(),
            )
        })
    });
}

fn bench_probe(c: &mut Criterion) {
    let mesh = Mesh::new_1d(PI, 201, BcKind::Dirichlet).unwrap();
    let nl = builtin("cubic_stable").unwrap();
    let eq = solve_equilibrium(&mesh, &nl, &mesh.zero_field(), 1e-10).unwrap();
    c.bench_function("lojasiewicz_probe_32x3", |b| {
        b.iter(|| {
            black_box(
                probe_lojasiewicz(&eq, &nl, &mesh, &[1e-1, 1e-2, 1e-3], 32, 2024).unwrap(),
            )
        })
    });
}

criterion_group!(benches, bench_stepping, bench_certifier, bench_probe);
criterion_main!(benches);
