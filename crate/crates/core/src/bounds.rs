//! Performance limits for the stochastic task and the MUB game.
//!
//! The Schmidt-number bound `S ≤ (1 + √(d/n))/2` is obtained through a chain
//! of operator inequalities; [`verify_bound_chain`] evaluates both sides of
//! every link for concrete measurements so each step can be tested on its
//! own.

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, psd_sqrt, top_eigenvector, ComplexMatrix};
use crate::protocol::{trace_of_product, Povm};

/// Slack below which an inequality in the chain counts as violated.
pub const CHAIN_SLACK_TOL: f64 = -1e-9;

/// `1/2 + 1/(2n)`: best success rate without entanglement and with a classical message.
pub fn classical_bound(n: usize) -> f64 {
    0.5 + 0.5 / n as f64
}

/// `1/2 + 1/(2√n)`: best success rate with a quantum message but no entanglement.
pub fn unassisted_quantum_bound(n: usize) -> f64 {
    0.5 + 0.5 / (n as f64).sqrt()
}

/// `(1 + √(d/n))/2`: success-rate limit for entanglement of Schmidt number at most `d`.
pub fn schmidt_bound(n: usize, d: usize) -> Result<f64> {
    if n < 1 || d < 1 || d > n {
        return Err(Error::InvalidArgument(format!(
            "Schmidt number d={d} outside [1, n={n}]"
        )));
    }
    Ok(0.5 * (1.0 + (d as f64 / n as f64).sqrt()))
}

/// Smallest Schmidt number compatible with an observed success rate.
///
/// Returns `d + 1` for the largest `d < n` whose bound is strictly exceeded,
/// or `None` when even the unentangled bound is not beaten.
pub fn certified_schmidt_number(success: f64, n: usize) -> Option<usize> {
    (1..n)
        .rev()
        .find(|&d| schmidt_bound(n, d).is_ok_and(|b| success > b))
        .map(|d| d + 1)
}

/// Visibility `v*` at which the ideal strategy on an isotropic state reaches
/// `bound`, using `S(v) = v + (1 - v)/n`.
pub fn critical_visibility(bound: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    let floor = 1.0 / n as f64;
    if !(floor - 1e-12..=1.0 + 1e-12).contains(&bound) {
        return Err(Error::InvalidArgument(format!(
            "bound {bound} outside [1/n, 1] for n={n}"
        )));
    }
    Ok(((bound - floor) / (1.0 - floor)).clamp(0.0, 1.0))
}

/// One link `left ≤ right` of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainStep {
    pub label: &'static str,
    /// Value of the chain before this step.
    pub left: f64,
    /// Value of the chain after this step.
    pub right: f64,
    /// `right - left`, or the worst per-pair slack when the step is checked
    /// term by term and that is smaller.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundChainReport {
    pub steps: Vec<ChainStep>,
    pub passed: bool,
}

impl BoundChainReport {
    /// Best relaxed success rate attainable with these measurements.
    pub fn start_value(&self) -> f64 {
        self.steps[0].left
    }

    /// `(1 + √(d/n))/2`.
    pub fn terminal_value(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.right)
    }
}

/// Evaluates the inequality chain from `S'(P, Q)` to `(1 + √(d/n))/2` for two
/// `n`-outcome POVMs on `C^{nd}`.
///
/// Links, in order:
/// 1. Kittaneh: `‖P_a + Q_b‖ ≤ max(‖P_a‖, ‖Q_b‖) + ‖√P_a √Q_b‖`
/// 2. `max(‖P_a‖, ‖Q_b‖) ≤ 1`
/// 3. `‖√P_a √Q_b‖_∞ ≤ ‖√P_a √Q_b‖_2 = √Tr(P_a Q_b)`
/// 4. `Σ √Tr(P_a Q_b) ≤ n √(Σ Tr(P_a Q_b))`
/// 5. `Σ Tr(P_a Q_b) = Tr 1 = nd`
pub fn verify_bound_chain(p: &Povm, q: &Povm, d: usize) -> Result<BoundChainReport> {
    p.validate()?;
    q.validate()?;
    let n = p.outcome_count();
    if q.outcome_count() != n {
        return Err(Error::InvalidPovm(format!(
            "outcome counts differ: {n} vs {}",
            q.outcome_count()
        )));
    }
    let dim = p.dim();
    if q.dim() != dim || dim != n * d {
        return Err(Error::DimensionMismatch(format!(
            "POVMs on dimensions {} and {}, expected n·d = {}",
            dim,
            q.dim(),
            n * d
        )));
    }

    let sqrt_p: Vec<ComplexMatrix> = p.effects().iter().map(psd_sqrt).collect::<Result<_>>()?;
    let sqrt_q: Vec<ComplexMatrix> = q.effects().iter().map(psd_sqrt).collect::<Result<_>>()?;
    let norm_p: Vec<f64> = p
        .effects()
        .iter()
        .map(operator_norm)
        .collect::<Result<_>>()?;
    let norm_q: Vec<f64> = q
        .effects()
        .iter()
        .map(operator_norm)
        .collect::<Result<_>>()?;

    let weight = 1.0 / (2 * n * n) as f64;
    let (mut v0, mut v1, mut root_norms, mut root_traces, mut trace_sum) =
        (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut kittaneh_worst, mut norm_worst, mut schatten_worst) =
        (f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for a in 0..n {
        for b in 0..n {
            let sum = p.effect(a) + q.effect(b);
            let (lhs, _) = top_eigenvector(&sum)?;
            let larger = norm_p[a].max(norm_q[b]);
            let cross = operator_norm(&(&sqrt_p[a] * &sqrt_q[b]))?;
            let overlap = trace_of_product(p.effect(a), q.effect(b)).max(0.0);

            kittaneh_worst = kittaneh_worst.min(larger + cross - lhs);
            norm_worst = norm_worst.min(1.0 - larger);
            schatten_worst = schatten_worst.min(overlap.sqrt() - cross);

            v0 += lhs;
            v1 += larger + cross;
            root_norms += cross;
            root_traces += overlap.sqrt();
            trace_sum += overlap;
        }
    }

    let v0 = weight * v0;
    let v1 = weight * v1;
    let v2 = 0.5 + weight * root_norms;
    let v3 = 0.5 + weight * root_traces;
    let v4 = 0.5 + trace_sum.sqrt() / (2 * n) as f64;
    let v5 = schmidt_bound(n, d)?;

    let step = |label, left: f64, right: f64, worst: f64| ChainStep {
        label,
        left,
        right,
        slack: (right - left).min(worst),
    };
    let steps = vec![
        step("kittaneh", v0, v1, kittaneh_worst),
        step("effect norms at most one", v1, v2, norm_worst),
        step("schatten ordering", v2, v3, schatten_worst),
        step("square-root concavity", v3, v4, f64::INFINITY),
        step("completeness", v4, v5, f64::INFINITY),
    ];
    let passed = steps.iter().all(|s| s.slack >= CHAIN_SLACK_TOL);
    Ok(BoundChainReport { steps, passed })
}

/// One embedded bound on the MUB game value `R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpReferenceEntry {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub bound: f64,
}

/// Upper bounds on `R` for Schmidt numbers `1..n-1`, keyed by `(n, m)`.
/// Four-decimal values from a semidefinite relaxation; `2/3` and `3/5` are exact.
const SDP_TABLE: &[(usize, usize, &[f64])] = &[
    (3, 2, &[0.8024, 0.9692]),
    (3, 3, &[0.7182, 0.9285]),
    (3, 4, &[2.0 / 3.0, 0.8604]),
    (5, 2, &[0.7553, 0.9190, 0.9761, 0.9958]),
    (5, 3, &[0.6618, 0.8562, 0.9491, 0.9897]),
    (5, 4, &[3.0 / 5.0, 0.7971, 0.9160, 0.9801]),
    (5, 5, &[0.5578, 0.7367, 0.8690, 0.9618]),
    (5, 6, &[0.5266, 0.6899, 0.8110, 0.9118]),
    (7, 2, &[0.7318, 0.8903, 0.9530, 0.9810, 0.9936, 0.9988]),
    (7, 3, &[0.6352, 0.8181, 0.9109, 0.9605, 0.9859, 0.9971]),
    (7, 4, &[0.5714, 0.7597, 0.8703, 0.9375, 0.9760, 0.9948]),
    (7, 5, &[0.5262, 0.7066, 0.8285, 0.9106, 0.9630, 0.9914]),
    (7, 6, &[0.4928, 0.6579, 0.7817, 0.8768, 0.9443, 0.9857]),
    (7, 7, &[0.4668, 0.6197, 0.7343, 0.8301, 0.9129, 0.9737]),
    (7, 8, &[0.4459, 0.5889, 0.6961, 0.7857, 0.8643, 0.9350]),
];

/// Embedded upper bound on `R` for prime `n`, `m` bases and Schmidt number `d`.
pub fn sdp_reference(n: usize, m: usize, d: usize) -> Result<f64> {
    SDP_TABLE
        .iter()
        .find(|(tn, tm, _)| *tn == n && *tm == m)
        .and_then(|(_, _, col)| d.checked_sub(1).and_then(|i| col.get(i)).copied())
        .ok_or(Error::NoReference { n, m, d })
}

/// Every embedded entry, ordered by `(n, m, d)`.
pub fn sdp_reference_entries() -> Vec<SdpReferenceEntry> {
    SDP_TABLE
        .iter()
        .flat_map(|&(n, m, col)| {
            col.iter()
                .enumerate()
                .map(move |(i, &bound)| SdpReferenceEntry {
                    n,
                    m,
                    d: i + 1,
                    bound,
                })
        })
        .collect()
}

/// Smallest Schmidt number compatible with an observed MUB game value,
/// according to the embedded bounds for `(n, m)`.
pub fn certified_schmidt_number_mub(value: f64, n: usize, m: usize) -> Option<usize> {
    (1..n)
        .rev()
        .find(|&d| sdp_reference(n, m, d).is_ok_and(|b| value > b))
        .map(|d| d + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{correlation, isotropic_protocol, product_measurement, success_rate};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn closed_form_bounds() {
        assert_eq!(classical_bound(2), 0.75);
        assert_eq!(classical_bound(8), 0.5625);
        assert!((2..64).all(|n| classical_bound(n + 1) < classical_bound(n)));

        assert!(close(unassisted_quantum_bound(4), 0.75, 1e-15));
        assert!(close(unassisted_quantum_bound(8), 0.676777, 1e-6));
        for n in 2..=16 {
            assert!(close(
                unassisted_quantum_bound(n),
                schmidt_bound(n, 1).unwrap(),
                1e-15
            ));
            assert!(close(schmidt_bound(n, n).unwrap(), 1.0, 1e-15));
        }
        assert_eq!(format!("{:.4}", schmidt_bound(8, 7).unwrap()), "0.9677");
        assert!(close(schmidt_bound(8, 2).unwrap(), 0.75, 1e-15));
        assert!(schmidt_bound(8, 0).is_err());
        assert!(schmidt_bound(8, 9).is_err());
    }

    #[test]
    fn schmidt_bound_monotonicity() {
        for n in 2..=12 {
            for d in 1..n {
                assert!(schmidt_bound(n, d + 1).unwrap() > schmidt_bound(n, d).unwrap());
                assert!(schmidt_bound(n + 1, d).unwrap() < schmidt_bound(n, d).unwrap());
            }
        }
    }

    #[test]
    fn certification_thresholds() {
        assert_eq!(certified_schmidt_number(0.9729, 8), Some(8));
        assert_eq!(certified_schmidt_number(0.96, 8), Some(7));
        assert_eq!(certified_schmidt_number(1.0, 8), Some(8));
        assert_eq!(certified_schmidt_number(0.125, 8), None);
        assert_eq!(
            certified_schmidt_number(schmidt_bound(8, 1).unwrap(), 8),
            None
        );
    }

    #[test]
    fn critical_visibility_examples() {
        assert!(close(critical_visibility(1.0, 8).unwrap(), 1.0, 1e-15));
        assert!(close(critical_visibility(0.125, 8).unwrap(), 0.0, 1e-15));
        let v = critical_visibility(schmidt_bound(8, 7).unwrap(), 8).unwrap();
        assert!(close(v, 0.963094, 1e-6), "{v}");
        assert!(critical_visibility(0.1, 8).is_err());
        assert!(critical_visibility(1.1, 8).is_err());
    }

    #[test]
    fn critical_visibility_round_trips_through_simulation() {
        for (n, d) in [(2, 1), (3, 2), (8, 7)] {
            let beta = schmidt_bound(n, d).unwrap();
            let v = critical_visibility(beta, n).unwrap();
            let s =
                success_rate(&correlation(&isotropic_protocol(n, v).unwrap()).unwrap()).unwrap();
            assert!(close(s, beta, 1e-10));
        }
    }

    #[test]
    fn chain_with_identical_computational_bases() {
        for n in [2, 3, 5] {
            let proj: Vec<ComplexMatrix> = (0..n)
                .map(|b| {
                    let mut diag = vec![0.0; n];
                    diag[b] = 1.0;
                    ComplexMatrix::real_diagonal(&diag)
                })
                .collect();
            let p = Povm::new(proj).unwrap();
            let report = verify_bound_chain(&p, &p, 1).unwrap();
            assert!(report.passed);
            let concavity = &report.steps[3];
            assert!(close(concavity.right - 0.5, 0.5 / (n as f64).sqrt(), 1e-12));
            assert!(close(report.steps[2].slack, 0.0, 1e-12));
        }
    }

    #[test]
    fn chain_on_ideal_measurements_ends_at_one() {
        for n in [2, 4] {
            let p = product_measurement(n, 1).unwrap();
            let q = product_measurement(n, 2).unwrap();
            let report = verify_bound_chain(&p, &q, n).unwrap();
            assert!(report.passed, "{report:?}");
            assert!(close(report.terminal_value(), 1.0, 1e-9));
            assert!(close(report.start_value(), 1.0, 1e-9));
            assert!(report.steps.iter().all(|s| s.slack >= CHAIN_SLACK_TOL));
        }
    }

    #[test]
    fn chain_rejects_dimension_mismatch() {
        let p = product_measurement(2, 1).unwrap();
        assert!(matches!(
            verify_bound_chain(&p, &p, 1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sdp_lookup() {
        assert_eq!(sdp_reference(3, 2, 1).unwrap(), 0.8024);
        assert_eq!(sdp_reference(5, 4, 2).unwrap(), 0.7971);
        assert!(close(sdp_reference(3, 4, 1).unwrap(), 2.0 / 3.0, 1e-15));
        assert_eq!(
            sdp_reference(7, 8, 7),
            Err(Error::NoReference { n: 7, m: 8, d: 7 })
        );
        assert!(sdp_reference(7, 8, 0).is_err());
        assert!(sdp_reference(11, 2, 1).is_err());
    }

    #[test]
    fn sdp_table_shape_monotonicity_and_range() {
        let entries = sdp_reference_entries();
        assert_eq!(entries.len(), 3 * 2 + 5 * 4 + 7 * 6);
        for &(n, m, col) in SDP_TABLE {
            assert_eq!(col.len(), n - 1);
            assert!((2..=n + 1).contains(&m));
            assert!(col.windows(2).all(|w| w[0] <= w[1]));
            assert!(col.iter().all(|&b| b > 0.0 && b <= 1.0));
        }
        assert!(entries.iter().all(|e| e.bound > 1.0 / e.n as f64));
    }

    #[test]
    fn mub_certification() {
        // 0.95 + 0.05/7 beats the d=5 entry of the (7, 8) column (0.8643) but not d=6 (0.9350)
        let r = 0.95 + 0.05 / 7.0;
        assert_eq!(certified_schmidt_number_mub(r, 7, 8), Some(7));
        assert_eq!(certified_schmidt_number_mub(0.9, 7, 8), Some(6));
        assert_eq!(certified_schmidt_number_mub(0.4, 7, 8), None);
    }
}
