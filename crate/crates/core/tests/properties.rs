//! Randomized property checks for the fitting, certification, and operator
//! layers.

use dampwave_core::analysis::{fit_decay, DecayClass};
use dampwave_core::damping::{certify_integrally_positive, DampingProfile};
use dampwave_core::mesh::{inner, laplacian, BcKind, Mesh};
use proptest::prelude::*;

fn series(f: impl Fn(f64) -> f64, t0: f64, t1: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / (n - 1) as f64;
            (t, f(t))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fit_decay_invariant_under_positive_rescaling(
        rate in 0.05f64..2.0,
        scale in 1e-6f64..1e6,
    ) {
        let base = series(|t| (-rate * t).exp(), 0.0, 30.0, 200);
        let scaled: Vec<(f64, f64)> = base.iter().map(|&(t, y)| (t, scale * y)).collect();
        let a = fit_decay(&base, 0.2).unwrap();
        let b = fit_decay(&scaled, 0.2).unwrap();
        match (a.class, b.class) {
            (
                DecayClass::Exponential { rate: r1, .. },
                DecayClass::Exponential { rate: r2, .. },
            ) => prop_assert!((r1 - r2).abs() < 1e-8 * r1.max(1.0)),
            other => prop_assert!(false, "class changed: {other:?}"),
        }
    }

    #[test]
    fn fit_decay_recovers_polynomial_exponent(beta in 0.3f64..3.0) {
        let s = series(|t| t.powf(-beta), 1.0, 100.0, 300);
        let fit = fit_decay(&s, 0.2).unwrap();
        match fit.class {
            DecayClass::Polynomial { exponent, .. } => {
                prop_assert!((exponent - beta).abs() < 1e-6)
            }
            other => prop_assert!(false, "wrong class {other:?}"),
        }
    }

    #[test]
    fn certifier_infimum_monotone_in_epsilon(h0 in 0.1f64..3.0) {
        let profile = DampingProfile::constant(h0);
        let report = certify_integrally_positive(
            &profile,
            &[0.1, 0.5, 1.0, 2.0],
            50.0,
            0.01,
            1e-9,
        )
        .unwrap();
        let infima: Vec<f64> = report.per_epsilon.iter().map(|s| s.infimum).collect();
        for w in infima.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn laplacian_self_adjoint(
        seed_a in 0u64..1000,
        seed_b in 0u64..1000,
        dirichlet in proptest::bool::ANY,
    ) {
        let bc = if dirichlet { BcKind::Dirichlet } else { BcKind::Neumann };
        let mesh = Mesh::new_1d(2.0, 41, bc).unwrap();
        let mk = |seed: u64| {
            mesh.field_from_fn(|x, _| {
                ((seed % 7 + 1) as f64 * x).sin() + 0.3 * ((seed % 5 + 1) as f64 * x).cos()
            })
        };
        let mut a = mk(seed_a);
        let mut b = mk(seed_b.wrapping_add(3));
        if bc == BcKind::Dirichlet {
            // pin boundary values so both fields satisfy the closure
            let n = mesh.nx;
            for f in [&mut a, &mut b] {
                f.values[0] = 0.0;
                f.values[n - 1] = 0.0;
            }
        }
        let la = laplacian(&a, &mesh, None).unwrap();
        let lb = laplacian(&b, &mesh, None).unwrap();
        let x = inner(&la, &b, &mesh);
        let y = inner(&a, &lb, &mesh);
        prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{x} vs {y}");
    }
}
