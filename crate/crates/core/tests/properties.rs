use approx::assert_relative_eq;
use krylov_spread::bounds::two_level_ratio;
use krylov_spread::continuum::{c2_piecewise, j_kernel, p_kernel, ContinuumModel};
use krylov_spread::lanczos::{lanczos, DEFAULT_TOLERANCE};
use krylov_spread::linalg::random::{random_hermitian, random_state, random_unitary};
use krylov_spread::linalg::{HermitianOperator, QuantumState};
use krylov_spread::spread::{weights_from_charfun, SpreadSystem};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn draw(seed: u64, dim: usize) -> (HermitianOperator, QuantumState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_hermitian(dim, &mut rng), random_state(dim, &mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shift_moves_a_and_keeps_b(seed in any::<u64>(), dim in 2usize..9, c in -3.0f64..3.0) {
        let (h, psi) = draw(seed, dim);
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        let ks = lanczos(&h.shifted(c), &psi, DEFAULT_TOLERANCE).unwrap();
        let (r, rs) = (k.to_record(false), ks.to_record(false));
        prop_assert_eq!(r.a.len(), rs.a.len());
        for (a, a2) in r.a.iter().zip(&rs.a) {
            prop_assert!((a2 - a - c).abs() < 1e-10);
        }
        for (b, b2) in r.b.iter().zip(&rs.b) {
            prop_assert!((b - b2).abs() < 1e-10);
        }
    }

    #[test]
    fn gsc_is_unitarily_invariant(seed in any::<u64>(), dim in 2usize..8, t in 0.0f64..4.0) {
        let (h, psi) = draw(seed, dim);
        let u = random_unitary(dim, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        let hu = h.conjugated(&u).unwrap();
        let psiu = QuantumState::normalized(u.adjoint() * psi.amplitudes()).unwrap();
        let a = SpreadSystem::from_hamiltonian(h, psi, DEFAULT_TOLERANCE).unwrap().profile(&[t]).unwrap();
        let b = SpreadSystem::from_hamiltonian(hu, psiu, DEFAULT_TOLERANCE).unwrap().profile(&[t]).unwrap();
        for m in 1..=4 {
            prop_assert!((a.gsc(m).unwrap()[0] - b.gsc(m).unwrap()[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn distribution_invariants(seed in any::<u64>(), dim in 2usize..9, t in 0.0f64..6.0) {
        let (h, psi) = draw(seed, dim);
        let prof = SpreadSystem::from_hamiltonian(h, psi, DEFAULT_TOLERANCE).unwrap().profile(&[t]).unwrap();
        let d = prof.distribution(0).unwrap();
        assert_relative_eq!(d.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        prop_assert!(d.variance() >= 0.0);
        prop_assert!(d.entropy() <= (d.weights.len() as f64).ln() + 1e-12);
        for m in 1..4 {
            prop_assert!(d.moment(m + 1) >= d.moment(m) - 1e-12);
        }
        let l = d.weights.len();
        let chi: Vec<Complex64> =
            (0..l).map(|k| d.charfun(2.0 * std::f64::consts::PI * k as f64 / l as f64)).collect();
        for (x, y) in weights_from_charfun(&chi).iter().zip(&d.weights) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert!((d.generating_complex(Complex64::new(0.0, -0.7)) - d.charfun(0.7)).norm() < 1e-12);
    }

    #[test]
    fn continuum_kernels_are_even(dim in 2usize..600, m in 1u32..5, omega in -2.0f64..2.0) {
        let model = ContinuumModel::new(dim, m).unwrap();
        prop_assert_eq!(j_kernel(&model, omega), j_kernel(&model, -omega));
        prop_assert_eq!(p_kernel(&model, omega), p_kernel(&model, -omega));
    }

    #[test]
    fn piecewise_curve_is_a_fraction(v in 0.0f64..10.0) {
        let c = c2_piecewise(v).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn two_level_ratio_below_one(theta in 0.0f64..std::f64::consts::PI, e1 in 0.0f64..1.0, gap in 0.01f64..3.0, frac in 0.0f64..1.0) {
        let e0 = e1 + gap;
        let tau = frac * 2.0 * std::f64::consts::PI / gap;
        let r = two_level_ratio(theta, e0, e1, tau).unwrap();
        prop_assert!((0.0..1.0).contains(&r));
    }
}
