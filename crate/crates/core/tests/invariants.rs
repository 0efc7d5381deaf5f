use proptest::prelude::*;

use spinbattery_core::dynamics::{evolve, work, WorkSeries};
use spinbattery_core::linalg::{hadamard_transform, norm, partial_trace, unitary_exp};
use spinbattery_core::model::{build_h0, normalize};
use spinbattery_core::{ModelParams, QuantumState, C64};

fn chain() -> impl Strategy<Value = ModelParams> {
    (
        2usize..=4,
        0.2f64..2.0,
        0.0f64..1.0,
        0.0f64..3.0,
        proptest::collection::vec(-2.0f64..2.0, 3),
        proptest::collection::vec(-2.0f64..2.0, 3),
    )
        .prop_map(|(n, h, gamma, omega, js, ds)| ModelParams {
            n_sites: n,
            field_h: h,
            anisotropy_gamma: gamma,
            xy_couplings: js[..n - 1].to_vec(),
            zz_couplings: ds[..n - 1].to_vec(),
            charging_omega: omega + 0.1,
        })
        .prop_filter("non-degenerate spectrum", |p| normalize(&build_h0(p).unwrap()).is_ok())
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalized_spectrum_spans_unit_interval(p in chain()) {
        let h = normalize(&build_h0(&p).unwrap()).unwrap();
        prop_assert!((h.spectrum.min() + 1.0).abs() < 1e-10);
        prop_assert!((h.spectrum.max() - 1.0).abs() < 1e-10);
        prop_assert!(h.matrix.is_hermitian(1e-12));
    }

    #[test]
    fn fourier_work_matches_direct_evolution(p in chain(), t in 0.01f64..10.0) {
        let h = normalize(&build_h0(&p).unwrap()).unwrap();
        let psi0 = QuantumState::pure(h.spectrum.eigenvector(0)).unwrap();
        let series = WorkSeries::new(&psi0, &h, p.charging_omega).unwrap();
        let direct = work(&evolve(&psi0, &p, t).unwrap(), &psi0, &h).unwrap();
        prop_assert!((series.work(t) - direct).abs() < 1e-9, "{} vs {}", series.work(t), direct);
    }

    #[test]
    fn work_is_periodic_and_bounded(p in chain(), t in 0.0f64..10.0) {
        let h = normalize(&build_h0(&p).unwrap()).unwrap();
        let psi0 = QuantumState::pure(h.spectrum.eigenvector(0)).unwrap();
        let series = WorkSeries::new(&psi0, &h, p.charging_omega).unwrap();
        let w = series.work(t);
        prop_assert!((w - series.work(t + series.period())).abs() < 1e-9);
        prop_assert!(w > -1e-10 && w < 2.0 + 1e-10);
    }

    #[test]
    fn spectral_exponential_is_unitary(p in chain(), t in -5.0f64..5.0) {
        let h0 = build_h0(&p).unwrap();
        let u = unitary_exp(&h0, t).unwrap();
        let id = spinbattery_core::DenseOperator::identity(u.dim());
        prop_assert!(u.adjoint().matmul(&u).max_abs_diff(&id) < 1e-10);
    }

    #[test]
    fn partial_trace_keeps_unit_trace(v in amplitudes(16), keep in proptest::sample::subsequence(vec![1usize, 2, 3, 4], 1..4)) {
        let psi = QuantumState::pure_normalized(v).unwrap();
        let reduced = partial_trace(&psi.density(), &keep, 4).unwrap();
        prop_assert_eq!(reduced.dim(), 1 << keep.len());
        prop_assert!((reduced.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(reduced.is_hermitian(1e-12));
    }

    #[test]
    fn hadamard_transform_is_an_involution(v in amplitudes(8)) {
        let mut w = v.clone();
        hadamard_transform(&mut w);
        prop_assert!((norm(&w) - norm(&v)).abs() < 1e-12);
        hadamard_transform(&mut w);
        for (a, b) in w.iter().zip(&v) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn renormalizing_is_idempotent(v in amplitudes(8)) {
        let once = QuantumState::pure_normalized(v).unwrap();
        let QuantumState::Pure(psi) = once.clone() else { unreachable!() };
        let twice = QuantumState::pure_normalized(psi.clone()).unwrap();
        let QuantumState::Pure(psi2) = twice else { unreachable!() };
        for (a, b) in psi.iter().zip(&psi2) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }
}
