use densecode::bounds::schmidt_bound;
use densecode::optimize::{seesaw_physical, seesaw_relaxed, SeesawConfig, SeesawResult};

fn config(n: usize, d: usize, restarts: usize, seed: u64) -> SeesawConfig {
    SeesawConfig {
        restarts,
        seed,
        ..SeesawConfig::new(n, d)
    }
}

fn assert_monotone(r: &SeesawResult) {
    for t in &r.trajectories {
        for w in t.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }
}

#[test]
fn relaxed_half_rank_on_eight_symbols() {
    let r = seesaw_relaxed(&config(8, 4, 3, 1)).unwrap();
    assert_monotone(&r);
    let bound = schmidt_bound(8, 4).unwrap();
    assert!(r.best_objective <= bound + 1e-9);
    assert!(r.best_objective >= 0.836, "{}", r.best_objective);
}

#[test]
fn physical_unentangled_four_symbols() {
    let r = seesaw_physical(&config(4, 1, 20, 0)).unwrap();
    assert_monotone(&r);
    assert!(r.best_objective <= schmidt_bound(4, 1).unwrap() + 1e-9);
    assert!(r.best_objective >= 0.749, "{}", r.best_objective);
}

#[test]
fn physical_full_rank_ideal_start() {
    let r = seesaw_physical(&config(8, 8, 1, 0)).unwrap();
    assert!(r.best_objective >= 1.0 - 1e-9);
}

#[test]
fn physical_never_beats_the_relaxed_bound() {
    for (n, d) in [(2, 1), (3, 1), (3, 2), (4, 2), (4, 3)] {
        let phys = seesaw_physical(&config(n, d, 4, 3)).unwrap();
        assert_monotone(&phys);
        assert!(
            phys.best_objective <= schmidt_bound(n, d).unwrap() + 1e-9,
            "({n},{d})"
        );
    }
}
