use densecode::protocol::{correlation, isotropic_protocol};
use densecode::stats::{estimate_success, poisson_bootstrap, simulate_counts};

#[test]
fn closure_recovers_isotropic_visibility() {
    let n = 4;
    for (i, v) in [0.8, 0.9, 0.97].into_iter().enumerate() {
        let table = correlation(&isotropic_protocol(n, v).unwrap()).unwrap();
        let ds = simulate_counts(&table, 20_000, 100 + i as u64).unwrap();
        let s = estimate_success(&ds).unwrap().value;
        let boot = poisson_bootstrap(&ds, 300, 7).unwrap();
        let expected = v + (1.0 - v) / n as f64;
        assert!(
            (s - expected).abs() <= 3.0 * boot.std_dev,
            "v={v}: {s} vs {expected}"
        );
    }
}

#[test]
fn bootstrap_error_follows_inverse_square_root() {
    let table = correlation(&isotropic_protocol(3, 0.85).unwrap()).unwrap();
    let ds = simulate_counts(&table, 5_000, 1).unwrap();
    for seed in 0..4 {
        let a = poisson_bootstrap(&ds, 400, seed).unwrap().std_dev;
        let b = poisson_bootstrap(&ds.scaled(4), 400, seed).unwrap().std_dev;
        let ratio = b / a;
        assert!((ratio - 0.5).abs() <= 0.1, "seed {seed}: ratio {ratio}");
    }
}
