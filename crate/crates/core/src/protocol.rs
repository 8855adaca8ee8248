//! States, encodings and measurements of the stochastic communication task,
//! plus the prime-dimension MUB game.
//!
//! Index conventions: all modular arithmetic uses the representative in
//! `[0, n)`. A message `x = (x1, x2)` is stored at position `x1 * n + x2`.
//! The two stochastic-task settings `y ∈ {1, 2}` occupy table positions 0
//! and 1. The MUB game lists the Fourier-type bases `y = 0..m-1` first and
//! the computational basis last.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron, ComplexMatrix, StateVector, C64, PSD_TOL};

/// Tolerance on `Σ_b M_b = 1`, entrywise.
pub const POVM_SUM_TOL: f64 = 1e-8;

/// Tolerance on `Σ_b p(b|x,y) = 1`.
pub const ROW_SUM_TOL: f64 = 1e-8;

/// Slack allowed outside `[0, 1]` for an individual probability.
pub const PROBABILITY_SLACK: f64 = 1e-12;

fn require_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    Ok(())
}

fn require_index(name: &str, value: usize, n: usize) -> Result<()> {
    if value >= n {
        return Err(Error::InvalidArgument(format!(
            "{name}={value} out of range [0, {n})"
        )));
    }
    Ok(())
}

/// `e^{2πi k / n}` with `k` reduced mod `n` first.
pub fn root_of_unity(n: usize, k: u64) -> C64 {
    let k = k % n as u64;
    C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// Shift operator `X|k⟩ = |k+1 mod n⟩`.
pub fn weyl_shift(n: usize) -> Result<ComplexMatrix> {
    require_dim(n)?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        if i == (j + 1) % n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Clock operator `Z|k⟩ = ω^k |k⟩`.
pub fn weyl_clock(n: usize) -> Result<ComplexMatrix> {
    require_dim(n)?;
    let diag: Vec<C64> = (0..n as u64).map(|k| root_of_unity(n, k)).collect();
    Ok(ComplexMatrix::diagonal(&diag))
}

/// Unitary Fourier matrix `F = n^{-1/2} Σ_{k,l} ω^{kl} |k⟩⟨l|`.
pub fn fourier(n: usize) -> Result<ComplexMatrix> {
    require_dim(n)?;
    let norm = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |k, l| {
        root_of_unity(n, (k * l) as u64) * norm
    }))
}

/// `|φ_n⟩ = n^{-1/2} Σ_i |ii⟩`.
pub fn max_entangled(n: usize) -> Result<StateVector> {
    require_dim(n)?;
    let s = 1.0 / (n as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        amps[i * n + i] = C64::new(s, 0.0);
    }
    StateVector::new(amps)
}

/// Dense-coding unitary `Z^{x2} X^{x1}` acting on the sender's share.
pub fn encoding_unitary(n: usize, x1: usize, x2: usize) -> Result<ComplexMatrix> {
    require_dim(n)?;
    require_index("x1", x1, n)?;
    require_index("x2", x2, n)?;
    let z = weyl_clock(n)?.powi(x2 as u32);
    let x = weyl_shift(n)?.powi(x1 as u32);
    Ok(&z * &x)
}

/// `|ψ_{x1x2}⟩ = (Z^{x2} X^{x1} ⊗ 1)|φ_n⟩ = n^{-1/2} Σ_k ω^{x2(k+x1)} |k+x1, k⟩`.
pub fn dense_encoding(n: usize, x1: usize, x2: usize) -> Result<StateVector> {
    require_dim(n)?;
    require_index("x1", x1, n)?;
    require_index("x2", x2, n)?;
    let s = 1.0 / (n as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let a = (k + x1) % n;
        amps[a * n + k] = root_of_unity(n, (x2 * a) as u64) * s;
    }
    StateVector::new(amps)
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let eig = hermitian_eigen(&matrix)?;
        let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(v: &StateVector) -> Self {
        Self {
            matrix: v.projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// `v |φ_n⟩⟨φ_n| + (1 - v) 1/n²`.
    pub fn isotropic(n: usize, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidArgument(format!(
                "visibility {visibility} outside [0, 1]"
            )));
        }
        let phi = max_entangled(n)?.projector().scale_real(visibility);
        let noise = ComplexMatrix::identity(n * n).scale_real((1.0 - visibility) / (n * n) as f64);
        Ok(Self {
            matrix: &phi + &noise,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `Re Tr(ρ M)` without forming the product.
    pub fn expectation(&self, m: &ComplexMatrix) -> f64 {
        trace_of_product(&self.matrix, m)
    }
}

/// `Re Tr(A B)` in O(n²).
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..a.cols() {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// Positive operator-valued measure: PSD effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let povm = Self { effects };
        povm.validate()?;
        Ok(povm)
    }

    pub(crate) fn from_trusted(effects: Vec<ComplexMatrix>) -> Self {
        Self { effects }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .effects
            .first()
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let dim = first.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (b, e) in self.effects.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::InvalidPovm(format!("effect {b} has wrong shape")));
            }
            let eig = hermitian_eigen(e)
                .map_err(|err| Error::InvalidPovm(format!("effect {b}: {err}")))?;
            let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
            if min < -PSD_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {b} has negative eigenvalue {min:e}"
                )));
            }
            sum = &sum + e;
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > POVM_SUM_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {defect:e}"
            )));
        }
        Ok(())
    }

    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, b: usize) -> &ComplexMatrix {
        &self.effects[b]
    }

    /// Conjugates every effect: `M_b ↦ U M_b U†`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        let ud = u.adjoint();
        Self {
            effects: self.effects.iter().map(|e| &(u * e) * &ud).collect(),
        }
    }

    pub fn probabilities(&self, rho: &DensityOperator) -> Vec<f64> {
        self.effects.iter().map(|e| rho.expectation(e)).collect()
    }
}

/// Measurement setting of the stochastic task.
pub fn require_setting(y: u8) -> Result<usize> {
    match y {
        1 | 2 => Ok(usize::from(y - 1)),
        _ => Err(Error::InvalidArgument(format!(
            "setting y={y} not in {{1, 2}}"
        ))),
    }
}

/// Receiver's product measurement for setting `y ∈ {1, 2}`.
///
/// `M_{b|1} = Σ_a |a+b, a⟩⟨a+b, a|` reads out the difference of the two
/// computational-basis outcomes; `M_{b|2} = (F ⊗ F†) M_{b|1} (F† ⊗ F)`.
pub fn product_measurement(n: usize, y: u8) -> Result<Povm> {
    require_dim(n)?;
    let setting = require_setting(y)?;
    let dim = n * n;
    let mut effects = Vec::with_capacity(n);
    for b in 0..n {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for a in 0..n {
            let idx = ((a + b) % n) * n + a;
            m[(idx, idx)] = C64::new(1.0, 0.0);
        }
        effects.push(m);
    }
    let povm = Povm::from_trusted(effects);
    if setting == 0 {
        return Ok(povm);
    }
    let f = fourier(n)?;
    Ok(povm.conjugated(&kron(&f, &f.adjoint())))
}

/// Table `p(b | x1, x2, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTable {
    n: usize,
    settings: usize,
    outcomes: usize,
    probabilities: Vec<f64>,
}

impl CorrelationTable {
    pub fn new(
        n: usize,
        settings: usize,
        outcomes: usize,
        probabilities: Vec<f64>,
    ) -> Result<Self> {
        if probabilities.len() != n * n * settings * outcomes {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for n={n}, {settings} settings, {outcomes} outcomes",
                probabilities.len()
            )));
        }
        let t = Self {
            n,
            settings,
            outcomes,
            probabilities,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn uniform(n: usize, settings: usize, outcomes: usize) -> Self {
        Self {
            n,
            settings,
            outcomes,
            probabilities: vec![1.0 / outcomes as f64; n * n * settings * outcomes],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for x in 0..self.n * self.n {
            for y in 0..self.settings {
                let row = self.row(x / self.n, x % self.n, y);
                if let Some(p) = row
                    .iter()
                    .find(|p| !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(*p))
                {
                    return Err(Error::InvalidArgument(format!(
                        "probability {p} outside [0, 1] at x=({}, {}), y={y}",
                        x / self.n,
                        x % self.n
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "row x=({}, {}), y={y} sums to {sum}",
                        x / self.n,
                        x % self.n
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn settings(&self) -> usize {
        self.settings
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    fn offset(&self, x1: usize, x2: usize, y: usize) -> usize {
        ((x1 * self.n + x2) * self.settings + y) * self.outcomes
    }

    pub fn get(&self, x1: usize, x2: usize, y: usize, b: usize) -> f64 {
        self.probabilities[self.offset(x1, x2, y) + b]
    }

    pub fn row(&self, x1: usize, x2: usize, y: usize) -> &[f64] {
        let o = self.offset(x1, x2, y);
        &self.probabilities[o..o + self.outcomes]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Entanglement-assisted strategy for the stochastic task.
#[derive(Clone, Debug)]
pub struct StochasticProtocol {
    n: usize,
    receiver_dim: usize,
    shared_state: DensityOperator,
    encodings: Vec<ComplexMatrix>,
    measurements: [Povm; 2],
}

impl StochasticProtocol {
    /// `encodings[x1 * n + x2]` is the sender's unitary for message `(x1, x2)`.
    /// The shared state lives on `C^n ⊗ C^{receiver_dim}`.
    pub fn new(
        n: usize,
        shared_state: DensityOperator,
        encodings: Vec<ComplexMatrix>,
        measurements: [Povm; 2],
    ) -> Result<Self> {
        require_dim(n)?;
        if encodings.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} encodings for n={n}",
                encodings.len()
            )));
        }
        let dim = shared_state.dim();
        if !dim.is_multiple_of(n) {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {dim} not a multiple of n={n}"
            )));
        }
        let identity = ComplexMatrix::identity(n);
        for (x, u) in encodings.iter().enumerate() {
            if u.rows() != n || u.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "encoding {x} is not {n}x{n}"
                )));
            }
            if (&u.adjoint() * u).max_abs_diff(&identity) > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "encoding {x} is not unitary"
                )));
            }
        }
        for m in &measurements {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "measurement on dimension {} but state dimension {dim}",
                    m.dim()
                )));
            }
            if m.outcome_count() != n {
                return Err(Error::DimensionMismatch(format!(
                    "measurement has {} outcomes, expected {n}",
                    m.outcome_count()
                )));
            }
        }
        Ok(Self {
            n,
            receiver_dim: dim / n,
            shared_state,
            encodings,
            measurements,
        })
    }

    /// Dense-coding encodings and product measurements on the given state.
    pub fn with_state(n: usize, shared_state: DensityOperator) -> Result<Self> {
        let mut encodings = Vec::with_capacity(n * n);
        for x1 in 0..n {
            for x2 in 0..n {
                encodings.push(encoding_unitary(n, x1, x2)?);
            }
        }
        let measurements = [product_measurement(n, 1)?, product_measurement(n, 2)?];
        Self::new(n, shared_state, encodings, measurements)
    }

    pub fn ideal(n: usize) -> Result<Self> {
        Self::with_state(n, DensityOperator::from_pure(&max_entangled(n)?))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shared_state(&self) -> &DensityOperator {
        &self.shared_state
    }

    pub fn encodings(&self) -> &[ComplexMatrix] {
        &self.encodings
    }

    pub fn measurements(&self) -> &[Povm; 2] {
        &self.measurements
    }

    pub fn receiver_dim(&self) -> usize {
        self.receiver_dim
    }
}

/// Ideal strategy on the isotropic state of visibility `v`.
pub fn isotropic_protocol(n: usize, visibility: f64) -> Result<StochasticProtocol> {
    StochasticProtocol::with_state(n, DensityOperator::isotropic(n, visibility)?)
}

/// Evaluates `p(b|x,y) = Tr[(U_x ⊗ 1) ρ (U_x ⊗ 1)† M_{b|y}]` for every `x`.
fn correlate(
    n: usize,
    receiver_dim: usize,
    state: &DensityOperator,
    encodings: &[ComplexMatrix],
    measurements: &[Povm],
) -> Result<CorrelationTable> {
    let outcomes = measurements[0].outcome_count();
    let id_b = ComplexMatrix::identity(receiver_dim);
    let rows: Vec<Vec<f64>> = encodings
        .par_iter()
        .map(|u| {
            let k = kron(u, &id_b);
            let tau = &(&k * state.matrix()) * &k.adjoint();
            let mut row = Vec::with_capacity(measurements.len() * outcomes);
            for m in measurements {
                row.extend(m.effects().iter().map(|e| trace_of_product(&tau, e)));
            }
            row
        })
        .collect();
    CorrelationTable::new(n, measurements.len(), outcomes, rows.concat())
}

/// Correlation table of a stochastic-task strategy.
pub fn correlation(p: &StochasticProtocol) -> Result<CorrelationTable> {
    correlate(
        p.n,
        p.receiver_dim,
        &p.shared_state,
        &p.encodings,
        &p.measurements,
    )
}

/// `S = (1/2n²) Σ_{x1,x2} Σ_y p(b = x_y | x, y)`.
pub fn success_rate(t: &CorrelationTable) -> Result<f64> {
    let n = t.n;
    if t.settings != 2 || t.outcomes != n {
        return Err(Error::DimensionMismatch(format!(
            "stochastic task needs 2 settings and {n} outcomes, table has {} and {}",
            t.settings, t.outcomes
        )));
    }
    let mut total = 0.0;
    for x1 in 0..n {
        for x2 in 0..n {
            total += t.get(x1, x2, 0, x1) + t.get(x1, x2, 1, x2);
        }
    }
    Ok(total / (2 * n * n) as f64)
}

/// Deterministic trial division.
pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

fn require_prime(n: usize) -> Result<()> {
    if is_prime(n) {
        Ok(())
    } else {
        Err(Error::NotPrime(n))
    }
}

/// Element `l` of basis `y` from the prime-dimension MUB family:
/// `|e^{(y)}_l⟩ = n^{-1/2} Σ_k ω^{k(l + yk)} |k⟩` for `y < n`, and `|l⟩` for `y = n`.
pub fn mub_vector(n: usize, y: usize, l: usize) -> Result<StateVector> {
    require_prime(n)?;
    require_index("y", y, n + 1)?;
    require_index("l", l, n)?;
    if y == n {
        return Ok(StateVector::basis(n, l));
    }
    let s = 1.0 / (n as f64).sqrt();
    let amps = (0..n)
        .map(|k| {
            let exponent = (k * ((l + y * k) % n)) as u64;
            root_of_unity(n, exponent) * s
        })
        .collect();
    StateVector::new(amps)
}

/// Basis indices used by the `m`-setting MUB game, in table order.
pub fn mub_game_bases(n: usize, m: usize) -> Vec<usize> {
    (0..m - 1).chain(std::iter::once(n)).collect()
}

/// Outcome `l = l1 - l2 mod n` that wins for message `(x1, x2)` in basis `y`.
pub fn mub_winning_outcome(n: usize, basis: usize, x1: usize, x2: usize) -> usize {
    if basis == n {
        x1
    } else {
        (x2 + n - (2 * basis * x1) % n) % n
    }
}

/// Measurement of basis `y` on the first particle and its complex conjugate on
/// the second, coarse-grained to `l = l1 - l2 mod n`.
pub fn mub_measurement(n: usize, y: usize) -> Result<Povm> {
    require_prime(n)?;
    require_index("y", y, n + 1)?;
    let first: Vec<ComplexMatrix> = (0..n)
        .map(|l| mub_vector(n, y, l).map(|v| v.projector()))
        .collect::<Result<_>>()?;
    let second: Vec<ComplexMatrix> = (0..n)
        .map(|l| mub_vector(n, y, l).map(|v| v.conj().projector()))
        .collect::<Result<_>>()?;
    let mut effects = vec![ComplexMatrix::zeros(n * n, n * n); n];
    for l1 in 0..n {
        for l2 in 0..n {
            let l = (l1 + n - l2) % n;
            effects[l] = &effects[l] + &kron(&first[l1], &second[l2]);
        }
    }
    Ok(Povm::from_trusted(effects))
}

fn check_game(n: usize, m: usize) -> Result<()> {
    require_prime(n)?;
    if !(2..=n + 1).contains(&m) {
        return Err(Error::InvalidArgument(format!(
            "basis count m={m} outside [2, {}]",
            n + 1
        )));
    }
    Ok(())
}

/// MUB-game correlations with encodings `X^{x1} Z^{x2}` on an arbitrary
/// shared state on `C^n ⊗ C^n`.
pub fn mub_game_correlation_with_state(
    n: usize,
    m: usize,
    state: &DensityOperator,
) -> Result<CorrelationTable> {
    check_game(n, m)?;
    if state.dim() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} for n={n}",
            state.dim()
        )));
    }
    let x = weyl_shift(n)?;
    let z = weyl_clock(n)?;
    let mut encodings = Vec::with_capacity(n * n);
    for x1 in 0..n {
        for x2 in 0..n {
            encodings.push(&x.powi(x1 as u32) * &z.powi(x2 as u32));
        }
    }
    let measurements: Vec<Povm> = mub_game_bases(n, m)
        .into_iter()
        .map(|y| mub_measurement(n, y))
        .collect::<Result<_>>()?;
    correlate(n, n, state, &encodings, &measurements)
}

/// Correlations of the ideal MUB-game strategy on `|φ_n⟩`.
pub fn mub_game_correlation(n: usize, m: usize) -> Result<CorrelationTable> {
    require_dim(n)?;
    mub_game_correlation_with_state(n, m, &DensityOperator::from_pure(&max_entangled(n)?))
}

/// `R = (1/mn²) Σ_x [p(l = x1 | x, comp) + Σ_{y=0}^{m-2} p(l = x2 - 2y x1 | x, y)]`.
pub fn mub_game_value(t: &CorrelationTable, n: usize, m: usize) -> Result<f64> {
    check_game(n, m)?;
    if t.n != n || t.settings != m || t.outcomes != n {
        return Err(Error::DimensionMismatch(format!(
            "MUB game (n={n}, m={m}) needs an n={n} table with {m} settings and {n} outcomes"
        )));
    }
    let bases = mub_game_bases(n, m);
    let mut total = 0.0;
    for x1 in 0..n {
        for x2 in 0..n {
            for (pos, &basis) in bases.iter().enumerate() {
                total += t.get(x1, x2, pos, mub_winning_outcome(n, basis, x1, x2));
            }
        }
    }
    Ok(total / (m * n * n) as f64)
}
