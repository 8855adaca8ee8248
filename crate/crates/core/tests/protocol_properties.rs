use densecode::linalg::{ComplexMatrix, StateVector, C64};
use densecode::protocol::{
    correlation, dense_encoding, encoding_unitary, mub_game_bases, mub_game_correlation,
    mub_vector, mub_winning_outcome, product_measurement, DensityOperator, Povm,
    StochasticProtocol,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityOperator {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(m.scale_real(1.0 / tr)).unwrap()
}

#[test]
fn dense_coding_states_form_a_basis() {
    for n in 2..=8 {
        let mut sum = ComplexMatrix::zeros(n * n, n * n);
        for x1 in 0..n {
            for x2 in 0..n {
                sum = &sum + &dense_encoding(n, x1, x2).unwrap().projector();
            }
        }
        assert!(
            sum.max_abs_diff(&ComplexMatrix::identity(n * n)) < 1e-9,
            "n={n}"
        );
    }
}

#[test]
fn product_measurements_are_projective() {
    for n in 2..=8 {
        for y in [1, 2] {
            for e in product_measurement(n, y).unwrap().effects() {
                assert!((e * e).max_abs_diff(e) < 1e-9);
                assert!(e.adjoint().max_abs_diff(e) < 1e-9);
            }
        }
    }
}

#[test]
fn ideal_protocol_reads_out_both_symbols() {
    for n in [2, 3, 4, 5, 7, 8] {
        let t = correlation(&StochasticProtocol::ideal(n).unwrap()).unwrap();
        for x1 in 0..n {
            for x2 in 0..n {
                for b in 0..n {
                    let e1 = if b == x1 { 1.0 } else { 0.0 };
                    let e2 = if b == x2 { 1.0 } else { 0.0 };
                    assert!((t.get(x1, x2, 0, b) - e1).abs() <= 1e-10);
                    assert!((t.get(x1, x2, 1, b) - e2).abs() <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn winning_support_is_a_singleton() {
    for n in [3, 5, 7] {
        for m in 2..=n + 1 {
            let t = mub_game_correlation(n, m).unwrap();
            for (yi, &basis) in mub_game_bases(n, m).iter().enumerate() {
                for x1 in 0..n {
                    for x2 in 0..n {
                        let w = mub_winning_outcome(n, basis, x1, x2);
                        for l in 0..n {
                            let expected = if l == w { 1.0 } else { 0.0 };
                            assert!((t.get(x1, x2, yi, l) - expected).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn mub_overlaps_are_flat() {
    for n in [3, 5, 7] {
        for y in 0..=n {
            for z in 0..=n {
                for l in 0..n {
                    for k in 0..n {
                        let o = mub_vector(n, y, l)
                            .unwrap()
                            .fidelity(&mub_vector(n, z, k).unwrap());
                        let expected = if y == z {
                            if l == k {
                                1.0
                            } else {
                                0.0
                            }
                        } else {
                            1.0 / n as f64
                        };
                        assert!((o - expected).abs() < 1e-10);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rows_are_distributions_for_any_state(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = StochasticProtocol::with_state(n, random_density(&mut rng, n * n)).unwrap();
        let t = correlation(&p).unwrap();
        prop_assert!(t.validate().is_ok());
        for x1 in 0..n {
            for x2 in 0..n {
                for y in 0..2 {
                    let row = t.row(x1, x2, y);
                    prop_assert!(row.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn global_phases_do_not_matter(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_density(&mut rng, n * n);
        let base = StochasticProtocol::with_state(n, state.clone()).unwrap();
        let mut encodings = Vec::new();
        for x1 in 0..n {
            for x2 in 0..n {
                let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                encodings.push(encoding_unitary(n, x1, x2).unwrap().scale(C64::from_polar(1.0, theta)));
            }
        }
        let measurements: [Povm; 2] = [product_measurement(n, 1).unwrap(), product_measurement(n, 2).unwrap()];
        let phased = StochasticProtocol::new(n, state, encodings, measurements).unwrap();
        let (a, b) = (correlation(&base).unwrap(), correlation(&phased).unwrap());
        for (u, v) in a.probabilities().iter().zip(b.probabilities()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }
}

#[test]
fn basis_states_are_unit_vectors() {
    let v = StateVector::basis(4, 2);
    assert_eq!(v.dim(), 4);
    assert!((v.fidelity(&v) - 1.0).abs() < 1e-15);
}
