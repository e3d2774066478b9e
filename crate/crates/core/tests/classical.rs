mod common;

use bosefield::classical::*;
use bosefield::models::{spectral_model, ModelSpec};
use bosefield::spectral::SpectralModel;
use common::*;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::SQRT_2;

fn random_phase(rng: &mut ChaCha8Rng, n: usize) -> PhaseVector {
    PhaseVector::new(random_vector(rng, n), random_vector(rng, n)).unwrap()
}

fn setup(seed: u64, n: usize) -> (ChaCha8Rng, SpectralModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_model(&mut rng, n);
    (rng, s)
}

/// Classical fourth-order Runge–Kutta on q̇ = p, ṗ = −Ω²q using only the
/// coupling matrix.
fn rk4(omega_sq: &nalgebra::DMatrix<f64>, x: &PhaseVector, t: f64, h: f64) -> PhaseVector {
    let steps = (t / h).round() as usize;
    let h = t / steps as f64;
    let (mut q, mut p) = (x.q.clone(), x.p.clone());
    let field = |q: &DVector<f64>, p: &DVector<f64>| (p.clone(), -(omega_sq * q));
    for _ in 0..steps {
        let (k1q, k1p) = field(&q, &p);
        let (k2q, k2p) = field(&(&q + &k1q * (h / 2.0)), &(&p + &k1p * (h / 2.0)));
        let (k3q, k3p) = field(&(&q + &k2q * (h / 2.0)), &(&p + &k2p * (h / 2.0)));
        let (k4q, k4p) = field(&(&q + &k3q * h), &(&p + &k3p * h));
        q += (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * (h / 6.0);
        p += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
    }
    PhaseVector::new(q, p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(100) })]

    #[test]
    fn flow_preserves_symplectic_form(seed in any::<u64>(), n in 1usize..6, t in -10.0f64..10.0) {
        let (mut rng, s) = setup(seed, n);
        let (x, y) = (random_phase(&mut rng, n), random_phase(&mut rng, n));
        let before = symplectic_form(&x, &y).unwrap();
        let after = symplectic_form(&flow(&s, &x, t).unwrap(), &flow(&s, &y, t).unwrap()).unwrap();
        prop_assert!((after - before).abs() < 1e-9 * (1.0 + x.norm() * y.norm()));
    }

    #[test]
    fn flow_conserves_energy(seed in any::<u64>(), n in 1usize..6, t in -10.0f64..10.0) {
        let (mut rng, s) = setup(seed, n);
        let x = random_phase(&mut rng, n);
        let h0 = hamiltonian(&s, &x).unwrap();
        prop_assert!((hamiltonian(&s, &flow(&s, &x, t).unwrap()).unwrap() - h0).abs() < 1e-9 * h0);
    }

    #[test]
    fn flow_group_law(seed in any::<u64>(), n in 1usize..6, t in -5.0f64..5.0, u in -5.0f64..5.0) {
        let (mut rng, s) = setup(seed, n);
        let x = random_phase(&mut rng, n);
        let direct = flow(&s, &x, t + u).unwrap();
        let composed = flow(&s, &flow(&s, &x, u).unwrap(), t).unwrap();
        prop_assert!((&direct - &composed).norm() < 1e-9 * (1.0 + x.norm()));
        prop_assert!((&flow(&s, &x, 0.0).unwrap() - &x).norm() < 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn complex_structure_identities(seed in any::<u64>(), n in 1usize..6) {
        let (mut rng, s) = setup(seed, n);
        let (x, y) = (random_phase(&mut rng, n), random_phase(&mut rng, n));
        let jx = apply_j(&s, &x).unwrap();
        let jjx = apply_j(&s, &jx).unwrap();
        prop_assert!((&jjx + &x).norm() < 1e-9 * x.norm());
        let jy = apply_j(&s, &y).unwrap();
        let lhs = symplectic_form(&jx, &jy).unwrap();
        prop_assert!((lhs - symplectic_form(&x, &y).unwrap()).abs() < 1e-9 * (1.0 + jx.norm() * jy.norm()));
        prop_assert!(g_metric(&s, &x, &x).unwrap() > 0.0);
        prop_assert!((g_metric(&s, &x, &y).unwrap() - g_metric(&s, &y, &x).unwrap()).abs() < 1e-9 * (1.0 + jx.norm() * jy.norm()));
    }

    #[test]
    fn z_map_intertwines_flow_and_preserves_inner_product(seed in any::<u64>(), n in 1usize..6, t in -10.0f64..10.0) {
        let (mut rng, s) = setup(seed, n);
        let (x, y) = (random_phase(&mut rng, n), random_phase(&mut rng, n));
        let zx = z_map(&s, &x).unwrap();
        let lhs = z_map(&s, &flow(&s, &x, t).unwrap()).unwrap();
        let rhs = s.propagate(t, &zx.0);
        prop_assert!((&lhs.0 - &rhs).norm() < 1e-8 * (1.0 + zx.norm()));

        let ip = inner_plus(&s, &x, &y).unwrap();
        prop_assert!((zx.inner(&z_map(&s, &y).unwrap()) - ip).norm() < 1e-9 * (1.0 + ip.norm()));
        let moved = inner_plus(&s, &flow(&s, &x, t).unwrap(), &flow(&s, &y, t).unwrap()).unwrap();
        prop_assert!((moved - ip).norm() < 1e-8 * (1.0 + ip.norm()));
        let self_ip = inner_plus(&s, &x, &x).unwrap();
        prop_assert!(self_ip.im.abs() < 1e-12 * self_ip.re);
        prop_assert!((self_ip.re - 0.5 * g_metric(&s, &x, &x).unwrap()).abs() < 1e-12 * self_ip.re);

        let jz = z_map(&s, &apply_j(&s, &x).unwrap()).unwrap();
        prop_assert!((&jz.0 - &zx.0 * Complex64::i()).norm() < 1e-9 * zx.norm());
        let jzd = z_dagger_map(&s, &apply_j(&s, &x).unwrap()).unwrap();
        let zd = z_dagger_map(&s, &x).unwrap();
        prop_assert!((&jzd.0 + &zd.0 * Complex64::i()).norm() < 1e-9 * zd.norm());
    }

    #[test]
    fn z_round_trip_and_energy(seed in any::<u64>(), n in 1usize..6) {
        let (mut rng, s) = setup(seed, n);
        let x = random_phase(&mut rng, n);
        let back = z_inverse(&s, &z_map(&s, &x).unwrap()).unwrap();
        prop_assert!((&back - &x).norm() < 1e-9 * (1.0 + x.norm()));
        let h = hamiltonian(&s, &x).unwrap();
        let z = z_map(&s, &x).unwrap();
        let via_z = z.inner(&ComplexAmplitude(s.omega().map(Complex64::from) * &z.0));
        prop_assert!((via_z.re - h).abs() < 1e-9 * h && via_z.im.abs() < 1e-9 * h);
        prop_assert!((hamiltonian_via_modes(&s, &x).unwrap() - h).abs() < 1e-9 * h);
    }

    #[test]
    fn energy_condition(seed in any::<u64>(), n in 1usize..6) {
        let (mut rng, s) = setup(seed, n);
        let x = random_phase(&mut rng, n);
        let xh = hamiltonian_vector_field(&s, &x).unwrap();
        // X_H = −JΩ acting on (q, p) componentwise
        let omega_x = PhaseVector::new(s.omega() * &x.q, s.omega() * &x.p).unwrap();
        let minus_j_omega = &apply_j(&s, &omega_x).unwrap() * -1.0;
        prop_assert!((&xh - &minus_j_omega).norm() < 1e-9 * (1.0 + xh.norm()));
        let lhs = (Complex64::i() * inner_plus(&s, &x, &xh).unwrap()).re;
        let h = hamiltonian(&s, &x).unwrap();
        prop_assert!((lhs - h).abs() < 1e-8 * h);
    }

    #[test]
    fn classical_ladder_functions(seed in any::<u64>(), n in 1usize..6, t in -5.0f64..5.0) {
        let (mut rng, s) = setup(seed, n);
        let x = random_phase(&mut rng, n);
        let xi = random_amplitude(&mut rng, n, 1.0);
        // a_c(ξ)∘Φ_t = a_c(e^{iΩt}ξ)
        let lhs = annihilation_fn(&s, &xi, &flow(&s, &x, t).unwrap()).unwrap();
        let rhs = annihilation_fn(&s, &ComplexAmplitude(s.propagate(-t, &xi.0)), &x).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
        // a_c†(ξ) is the complex conjugate function of a_c(ξ), linear in ξ
        let c = creation_fn(&s, &xi, &x).unwrap();
        prop_assert!((c - annihilation_fn(&s, &xi, &x).unwrap().conj()).norm() < 1e-12 * (1.0 + c.norm()));
        let two = Complex64::new(0.0, 2.0);
        let scaled = creation_fn(&s, &xi.scale(two), &x).unwrap();
        prop_assert!((scaled - two * c).norm() < 1e-12 * (1.0 + c.norm()));
        let scaled = annihilation_fn(&s, &xi.scale(two), &x).unwrap();
        prop_assert!((scaled - two.conj() * annihilation_fn(&s, &xi, &x).unwrap()).norm() < 1e-12 * (1.0 + c.norm()));
        // η·q from the ladder functions
        let eta = random_vector(&mut rng, n);
        let w = ComplexAmplitude::from_real(&(s.omega_inv_sqrt() * &eta));
        let rebuilt = (annihilation_fn(&s, &w.conj(), &x).unwrap() + creation_fn(&s, &w, &x).unwrap()) / SQRT_2;
        let direct = eta.dot(&x.q);
        prop_assert!((rebuilt.re - direct).abs() < 1e-9 * (1.0 + direct.abs()) && rebuilt.im.abs() < 1e-9 * (1.0 + direct.abs()));
        // linear observables evaluate consistently with their gradients
        let obs = LinearObservable::Annihilation(xi.clone());
        prop_assert!((obs.evaluate(&s, &x).unwrap() - annihilation_fn(&s, &xi, &x).unwrap()).norm() < 1e-12 * (1.0 + c.norm()));
    }

    #[test]
    fn ladder_bracket(seed in any::<u64>(), n in 1usize..6) {
        let (mut rng, s) = setup(seed, n);
        let x1 = random_amplitude(&mut rng, n, 1.3);
        let x2 = random_amplitude(&mut rng, n, 0.7);
        let b = poisson_bracket(&s, &LinearObservable::Annihilation(x1.clone()), &LinearObservable::Creation(x2.clone())).unwrap();
        let expected = -Complex64::i() * x1.inner(&x2);
        prop_assert!((b - expected).norm() < 1e-9);
        let aa = poisson_bracket(&s, &LinearObservable::Annihilation(x1), &LinearObservable::Annihilation(x2)).unwrap();
        prop_assert!(aa.norm() < 1e-9);
    }
}

#[test]
fn unit_amplitude_bracket_is_minus_i() {
    let s = coupled_pair();
    let xi = ComplexAmplitude(DVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]));
    let b = poisson_bracket(&s, &LinearObservable::Annihilation(xi.clone()), &LinearObservable::Creation(xi)).unwrap();
    assert!((b + Complex64::i()).norm() < 1e-12);
}

#[test]
fn ring_energy_of_a_localized_displacement() {
    let spec = ModelSpec::ring_from_nu(4, 1.3, 0.25);
    let s = spectral_model(&spec).unwrap();
    let x = PhaseVector::displacement(4, 0);
    assert!((hamiltonian(&s, &x).unwrap() - 0.5 * 1.3f64.powi(2)).abs() < 1e-12);
}

#[test]
fn flow_matches_runge_kutta() {
    for (n, nu) in [(4, 0.25), (6, 0.4)] {
        let s = spectral_model(&ModelSpec::ring_from_nu(n, 1.0, nu)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let x = random_phase(&mut rng, n);
        for t in [0.5, 2.0] {
            let exact = flow(&s, &x, t).unwrap();
            let integrated = rk4(s.source().matrix(), &x, t, 1e-4);
            assert!((&exact - &integrated).norm() < 1e-6, "n={n} t={t}");
        }
    }
}
