use densecode::linalg::{
    hermitian_eigen, kron, operator_norm, psd_sqrt, top_eigenvector, ComplexMatrix, StateVector,
    C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    gaussian(rng, n, n).hermitian_part()
}

fn psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> ComplexMatrix {
    let g = gaussian(rng, n, rank);
    &g * &g.adjoint()
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    StateVector::normalized(
        (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative_and_mixed_product(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (gaussian(&mut rng, a, b), gaussian(&mut rng, b, c), gaussian(&mut rng, c, a));
        let left = kron(&kron(&x, &y), &z);
        let right = kron(&x, &kron(&y, &z));
        prop_assert!(left.max_abs_diff(&right) < 1e-10);

        let (p, q) = (gaussian(&mut rng, a, a), gaussian(&mut rng, b, b));
        let (r, s) = (gaussian(&mut rng, a, a), gaussian(&mut rng, b, b));
        let lhs = &kron(&p, &q) * &kron(&r, &s);
        let rhs = kron(&(&p * &r), &(&q * &s));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn operator_norm_is_submultiplicative_and_subadditive(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (hermitian(&mut rng, n), hermitian(&mut rng, n));
        let (na, nb) = (operator_norm(&a).unwrap(), operator_norm(&b).unwrap());
        prop_assert!(operator_norm(&(&a * &b)).unwrap() <= na * nb * (1.0 + 1e-12) + 1e-12);
        prop_assert!(operator_norm(&(&a + &b)).unwrap() <= (na + nb) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn spectral_norm_below_frobenius_norm(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = gaussian(&mut rng, n, n);
        let frobenius = (&m * &m.adjoint()).trace().re.sqrt();
        prop_assert!((frobenius - m.frobenius_norm()).abs() < 1e-10 * (1.0 + frobenius));
        prop_assert!(operator_norm(&m).unwrap() <= frobenius * (1.0 + 1e-12));
    }

    #[test]
    fn psd_sqrt_commutes_and_squares_back(seed in any::<u64>(), n in 1usize..7, rank in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = psd(&mut rng, n, rank.min(n));
        let r = psd_sqrt(&m).unwrap();
        prop_assert!((&(&r * &m) - &(&m * &r)).frobenius_norm() <= 1e-8);
        prop_assert!((&r * &r).max_abs_diff(&m) <= 1e-8 * (1.0 + m.frobenius_norm()));
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = hermitian(&mut rng, n);
        let e = hermitian_eigen(&h).unwrap();
        prop_assert!(e.map_spectrum(|l| l).max_abs_diff(&h) < 1e-10);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }
}

/// Rayleigh quotients of random unit vectors never exceed the top
/// eigenvalue, and a shifted power iteration converges to it.
#[test]
fn top_eigenvalue_against_sampling_and_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let h = hermitian(&mut rng, 6);
        let (lambda, v) = top_eigenvector(&h).unwrap();
        assert!((h.expectation(v.amplitudes()).re - lambda).abs() < 1e-10);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..10_000 {
            let u = unit(&mut rng, 6);
            best = best.max(h.expectation(u.amplitudes()).re);
        }
        assert!(best <= lambda + 1e-6);

        let shift = h.frobenius_norm();
        let shifted = &h + &ComplexMatrix::identity(6).scale_real(shift);
        let mut x = unit(&mut rng, 6).into_amplitudes();
        for _ in 0..20_000 {
            let y = shifted.apply(&x);
            let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            x = y.into_iter().map(|z| z / norm).collect();
        }
        assert!((h.expectation(&x).re - lambda).abs() < 1e-6);
    }
}
