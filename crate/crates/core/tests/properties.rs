use std::sync::Arc;

use dicke_mirror::dynamics::{analytic_occupation, reduce_to_last, von_neumann_entropy, PureState, TimeSeries};
use dicke_mirror::hilbert::{embed, fock_annihilation, fock_creation, spin_operators};
use dicke_mirror::io::{read_timeseries, write_timeseries, Manifest};
use dicke_mirror::model::{build_dicke, build_full};
use dicke_mirror::semiclassical::{classical_energy, eom_rhs, ClassicalState};
use dicke_mirror::{CompositeBasis, FockMode, ModelParams, SpinSector, C64};
use proptest::prelude::*;

fn small_params() -> impl Strategy<Value = ModelParams> {
    (0.2..2.0f64, 0.2..2.0f64, 0.05..0.5f64, 0.0..1.5f64, 0.0..0.5f64, 1u32..6, 2usize..8, 2usize..8).prop_map(
        |(omega, omega0, omega_m, lambda, g0, two_j, cf, cm)| ModelParams {
            omega,
            omega0,
            omega_m,
            lambda,
            g0,
            two_j,
            cutoff_field: cf,
            cutoff_mirror: cm,
            ..ModelParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn params_text_round_trip(p in small_params()) {
        let text = p.to_kv_string();
        let back = ModelParams::from_kv_str(&text).unwrap();
        prop_assert_eq!(back.to_kv_string(), text);
    }

    #[test]
    fn hamiltonians_are_hermitian(p in small_params()) {
        let basis = p.full_basis().unwrap();
        prop_assert!(build_full(&p, &basis, None).unwrap().hermiticity_error() < 1e-12);
        prop_assert!(build_full(&p, &basis, Some(0.3)).unwrap().hermiticity_error() < 1e-12);
        let basis = p.dicke_basis().unwrap();
        prop_assert!(build_dicke(&p, &basis).unwrap().hermiticity_error() < 1e-12);
    }

    #[test]
    fn spin_algebra_any_j(two_j in 1u32..24) {
        let s = spin_operators(&SpinSector::new(two_j).unwrap());
        let lhs = s.plus.commutator(&s.minus);
        prop_assert!(lhs.max_abs_diff(&(&s.z * 2.0)) < 1e-12);
        // Casimir J(J+1)
        let j = two_j as f64 / 2.0;
        let c = &(&(&s.plus * &s.minus) + &(&s.z * &s.z)) - &s.z;
        for k in 0..=two_j as usize {
            prop_assert!((c.get(k, k) - C64::new(j * (j + 1.0), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn embedded_operators_on_different_slots_commute(d0 in 2usize..5, d1 in 2usize..5, d2 in 2usize..5) {
        let modes = [FockMode::new("a", d0).unwrap(), FockMode::new("b", d1).unwrap(), FockMode::new("c", d2).unwrap()];
        let basis = Arc::new(CompositeBasis::new(modes.iter().cloned().map(Into::into).collect()).unwrap());
        let a = embed(&fock_annihilation(&modes[0]), 0, &basis).unwrap();
        let c = embed(&fock_creation(&modes[2]), 2, &basis).unwrap();
        prop_assert!(a.commutator(&c).norm_inf() < 1e-14);
    }

    #[test]
    fn reduced_state_is_a_density_matrix(seed in any::<u64>(), d0 in 2usize..5, d1 in 2usize..6) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let basis = Arc::new(CompositeBasis::new(vec![
            FockMode::new("a", d0 - 1).unwrap().into(),
            FockMode::new("b", d1 - 1).unwrap().into(),
        ]).unwrap());
        let amps = (0..d0 * d1).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let psi = PureState::normalized(basis, amps).unwrap();
        let rho = reduce_to_last(&psi).unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.eigenvalues().iter().all(|&p| p > -1e-12));
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s >= 0.0 && s <= (d0.min(d1) as f64).ln() + 1e-12);
    }

    #[test]
    fn timeseries_csv_round_trip(values in prop::collection::vec(-1e300..1e300f64, 1..40), label in "[ -~]{0,20}") {
        let times = (0..values.len()).map(|k| k as f64 * 0.37).collect();
        let ts = TimeSeries::new(times, values, label).unwrap();
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &ts).unwrap();
        let back = read_timeseries(&buf[..]).unwrap();
        prop_assert_eq!(back.times, ts.times);
        prop_assert_eq!(back.values, ts.values);
        prop_assert_eq!(back.label, ts.label);
    }

    #[test]
    fn manifest_round_trip(entries in prop::collection::vec(("[a-z][a-z0-9_.]{0,10}", "[ -~]{0,30}"), 0..12)) {
        let mut m = Manifest::new();
        for (k, v) in &entries {
            m.set(k, v.trim());
        }
        prop_assert_eq!(Manifest::parse(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn driven_law_bounds(t in 0.0..500.0f64, lambda in 0.51..2.0f64) {
        let p = ModelParams { lambda, ..ModelParams::default() };
        let n = analytic_occupation(t, &p).unwrap();
        let omega = p.drive().unwrap();
        prop_assert!(n >= 0.0 && n <= 4.0 * omega * omega / (p.omega_m * p.omega_m) + 1e-15);
        let period = 2.0 * std::f64::consts::PI / p.omega_m;
        prop_assert!((analytic_occupation(t + period, &p).unwrap() - n).abs() < 1e-9 * (1.0 + n));
    }

    #[test]
    fn equations_of_motion_are_hamiltonian(
        x in prop::array::uniform6(-1.5..1.5f64),
        lambda in 0.0..1.2f64,
        g0 in 0.0..0.6f64,
        two_j in 2u32..40,
    ) {
        let p = ModelParams { lambda, g0, two_j, ..ModelParams::default() };
        let s = ClassicalState::from_array(x);
        let rhs = eom_rhs(&s, &p).unwrap().to_array();
        // dH/dq = -p', dH/dp = q' by central differences
        let h = 1e-6;
        for i in 0..6 {
            let mut up = x;
            let mut dn = x;
            up[i] += h;
            dn[i] -= h;
            let grad = (classical_energy(&ClassicalState::from_array(up), &p).unwrap()
                - classical_energy(&ClassicalState::from_array(dn), &p).unwrap())
                / (2.0 * h);
            let expected = if i % 2 == 0 { -rhs[i + 1] } else { rhs[i - 1] };
            let scale = expected.abs().max(1.0);
            prop_assert!((grad - expected).abs() / scale < 1e-6, "coord {}: {} vs {}", i, grad, expected);
        }
    }
}
