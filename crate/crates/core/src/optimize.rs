//! See-saw lower bounds on the stochastic communication score.
//!
//! Two variants are provided. The relaxed one lets the receiver's inputs be
//! arbitrary pure states on `C^n ⊗ C^d`, one per message, which upper-bounds
//! every physical strategy with Schmidt number `d`. The physical one keeps a
//! shared pure state of Schmidt rank at most `d`, unitary encodings and
//! arbitrary measurements. Both alternate exact or ascent steps over the
//! components of the strategy, so every reported value is achieved by the
//! returned strategy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    kron, polar_factor, regularized_inverse_sqrt, schmidt_decomposition, schmidt_truncate,
    top_eigenvector, ComplexMatrix, StateVector, C64,
};
use crate::protocol::{
    encoding_unitary, fourier, product_measurement, DensityOperator, Povm, StochasticProtocol,
};

/// Regularization added to `λ` before its inverse square root.
pub const LAMBDA_EPS: f64 = 1e-12;

/// Number of iterations over which the improvement is measured for convergence.
const PLATEAU_WINDOW: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct SeesawConfig {
    pub n: usize,
    pub d: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once the objective improves by less than this over the window.
    pub tolerance: f64,
    pub seed: u64,
}

impl SeesawConfig {
    pub fn new(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            restarts: 1,
            max_iterations: 2000,
            tolerance: 1e-9,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.d < 1 || self.d > self.n {
            return Err(Error::InvalidArgument(format!(
                "d must lie in [1, {}], got {}",
                self.n, self.d
            )));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidArgument(
                "at least one restart is required".into(),
            ));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidArgument(
                "max_iterations must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Optimized strategy of the relaxed problem.
#[derive(Clone, Debug)]
pub struct RelaxedStrategy {
    /// `states[x1 * n + x2]` on `C^n ⊗ C^d`.
    pub states: Vec<StateVector>,
    pub p: Povm,
    pub q: Povm,
}

#[derive(Clone, Debug)]
pub enum Strategy {
    Relaxed(RelaxedStrategy),
    /// Pure shared state of Schmidt rank at most `d` with unitary encodings.
    Physical(StochasticProtocol),
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub best_objective: f64,
    pub best_restart: usize,
    /// Iterations performed by each restart.
    pub iterations: Vec<usize>,
    /// Objective before the first iteration and after each one, per restart.
    pub trajectories: Vec<Vec<f64>>,
    /// Whether each restart met the convergence criterion.
    pub converged: Vec<bool>,
    pub strategy: Strategy,
}

/// Weighted states to be discriminated: `(weight, state)` for each outcome.
///
/// One fixed-point step of the maximum-likelihood discrimination map applied
/// to `current`. The objective `Σ_b w_b Tr(ρ_b M_b)` never decreases: if the
/// step would lower it, `current` is returned unchanged.
pub fn discrimination_update(targets: &[(f64, DensityOperator)], current: &Povm) -> Result<Povm> {
    if targets.len() != current.outcome_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} weighted states for a {}-outcome POVM",
            targets.len(),
            current.outcome_count()
        )));
    }
    let mut factors = Vec::with_capacity(targets.len());
    for (w, rho) in targets {
        if !(*w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "weight {w} is not a nonnegative number"
            )));
        }
        if rho.dim() != current.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for a POVM on dimension {}",
                rho.dim(),
                current.dim()
            )));
        }
        factors.push(crate::linalg::psd_sqrt(rho.matrix())?.scale_real(w.sqrt()));
    }
    discrimination_step(&factors, current)
}

/// `Σ_b Tr(σ_b M_b)` with `σ_b = F_b F_b†`.
fn discrimination_objective(factors: &[ComplexMatrix], povm: &Povm) -> f64 {
    factors
        .iter()
        .zip(povm.effects())
        .map(|(f, m)| (&(&f.adjoint() * m) * f).trace().re)
        .sum()
}

/// Discrimination step on weighted states given as factors `σ_b = F_b F_b†`.
///
/// Low-rank factors keep the cost proportional to the number of states
/// assigned to each outcome.
fn discrimination_step(factors: &[ComplexMatrix], current: &Povm) -> Result<Povm> {
    let dim = current.dim();
    let k = current.outcome_count();
    let mut kernels = Vec::with_capacity(k);
    let mut lambda = ComplexMatrix::zeros(dim, dim);
    let mut before = 0.0;
    for (f, m) in factors.iter().zip(current.effects()) {
        let kernel = (&(&f.adjoint() * m) * f).hermitian_part();
        before += kernel.trace().re;
        lambda = &lambda + &(&(f * &kernel) * &f.adjoint());
        kernels.push(kernel);
    }
    let r = regularized_inverse_sqrt(&lambda.hermitian_part(), LAMBDA_EPS)?;
    let mut effects = Vec::with_capacity(k);
    let mut total = ComplexMatrix::zeros(dim, dim);
    for (f, kernel) in factors.iter().zip(&kernels) {
        let g = &r * f;
        let e = (&(&g * kernel) * &g.adjoint()).hermitian_part();
        total = &total + &e;
        effects.push(e);
    }
    // Σ_b M_b = λ(λ + ε)^{-1} ≤ 1; spreading the remainder evenly restores
    // completeness and can only add to the objective.
    let defect = (&ComplexMatrix::identity(dim) - &total)
        .hermitian_part()
        .scale_real(1.0 / k as f64);
    let effects: Vec<ComplexMatrix> = effects.iter().map(|e| e + &defect).collect();
    let candidate = Povm::from_trusted(effects);
    if !candidate.effects().iter().all(ComplexMatrix::is_finite) {
        return Err(Error::Numerical(
            "non-finite POVM in discrimination step".into(),
        ));
    }
    let after = discrimination_objective(factors, &candidate);
    Ok(if after >= before {
        candidate
    } else {
        current.clone()
    })
}

/// Haar-random unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn haar_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for c in &cols {
            let overlap: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= overlap * ci;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-10 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Projective POVM with `outcomes` effects of equal rank from a Haar basis.
///
/// `dim` should be a multiple of `outcomes`; leftover basis vectors are
/// added to the last effect.
pub fn random_projective_povm(rng: &mut impl Rng, dim: usize, outcomes: usize) -> Povm {
    let u = haar_unitary(rng, dim);
    let rank = dim / outcomes;
    let effects = (0..outcomes)
        .map(|b| {
            let width = if b + 1 == outcomes {
                dim - b * rank
            } else {
                rank
            };
            let block = ComplexMatrix::from_fn(dim, width, |i, j| u[(i, b * rank + j)]);
            &block * &block.adjoint()
        })
        .collect();
    Povm::from_trusted(effects)
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn plateaued(history: &[f64], tolerance: f64) -> bool {
    history.len() > PLATEAU_WINDOW
        && history[history.len() - 1] - history[history.len() - 1 - PLATEAU_WINDOW] < tolerance
}

struct RunOutcome<S> {
    trajectory: Vec<f64>,
    iterations: usize,
    converged: bool,
    strategy: S,
}

fn collect<S>(runs: Vec<RunOutcome<S>>, wrap: impl Fn(S) -> Strategy) -> SeesawResult {
    // first maximal restart wins, independently of execution order
    let best_restart = runs.iter().enumerate().fold(0, |best, (i, r)| {
        if r.trajectory.last() > runs[best].trajectory.last() {
            i
        } else {
            best
        }
    });
    let best_objective = *runs[best_restart]
        .trajectory
        .last()
        .expect("nonempty trajectory");
    let iterations = runs.iter().map(|r| r.iterations).collect();
    let converged = runs.iter().map(|r| r.converged).collect();
    let mut trajectories = Vec::with_capacity(runs.len());
    let mut strategy = None;
    for (i, r) in runs.into_iter().enumerate() {
        trajectories.push(r.trajectory);
        if i == best_restart {
            strategy = Some(wrap(r.strategy));
        }
    }
    SeesawResult {
        best_objective,
        best_restart,
        iterations,
        trajectories,
        converged,
        strategy: strategy.expect("best restart present"),
    }
}

/// Projective measurement `P_b = Σ_{a<d} |a+b, a⟩⟨a+b, a|` on `C^n ⊗ C^d`.
fn shifted_diagonal_povm(n: usize, d: usize) -> Povm {
    let dim = n * d;
    let effects = (0..n)
        .map(|b| {
            let mut e = ComplexMatrix::zeros(dim, dim);
            for a in 0..d {
                let i = ((a + b) % n) * d + a;
                e[(i, i)] = C64::new(1.0, 0.0);
            }
            e
        })
        .collect();
    Povm::from_trusted(effects)
}

/// Heuristic lower bound on the relaxed score for Schmidt number `d`.
pub fn seesaw_relaxed(cfg: &SeesawConfig) -> Result<SeesawResult> {
    cfg.validate()?;
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| relaxed_run(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(runs, Strategy::Relaxed))
}

fn relaxed_run(cfg: &SeesawConfig, restart: usize) -> Result<RunOutcome<RelaxedStrategy>> {
    let (n, d) = (cfg.n, cfg.d);
    let dim = n * d;
    let (mut p, mut q) = if restart == 0 {
        let p = shifted_diagonal_povm(n, d);
        let f_d = if d == 1 {
            ComplexMatrix::identity(1)
        } else {
            fourier(d)?.adjoint()
        };
        let f = kron(&fourier(n)?, &f_d);
        let q = p.conjugated(&f);
        (p, q)
    } else {
        let mut rng = restart_rng(cfg.seed, restart);
        let p = random_projective_povm(&mut rng, dim, n);
        let q = random_projective_povm(&mut rng, dim, n);
        (p, q)
    };
    let norm = 1.0 / (2 * n * n) as f64;
    let best_states = |p: &Povm, q: &Povm| -> Result<(f64, Vec<StateVector>)> {
        let mut value = 0.0;
        let mut states = Vec::with_capacity(n * n);
        for x1 in 0..n {
            for x2 in 0..n {
                let (l, v) = top_eigenvector(&(p.effect(x1) + q.effect(x2)))?;
                value += l;
                states.push(v);
            }
        }
        Ok((value * norm, states))
    };
    let (mut value, mut states) = best_states(&p, &q)?;
    let mut trajectory = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let column = |x: &dyn Fn(usize) -> usize| -> Result<ComplexMatrix> {
            ComplexMatrix::from_columns(
                &(0..n)
                    .map(|k| states[x(k)].amplitudes().to_vec())
                    .collect::<Vec<_>>(),
            )
        };
        let p_factors = (0..n)
            .map(|a| column(&|b| a * n + b))
            .collect::<Result<Vec<_>>>()?;
        p = discrimination_step(&p_factors, &p)?;
        let q_factors = (0..n)
            .map(|b| column(&|a| a * n + b))
            .collect::<Result<Vec<_>>>()?;
        q = discrimination_step(&q_factors, &q)?;
        (value, states) = best_states(&p, &q)?;
        trajectory.push(value);
        if plateaued(&trajectory, cfg.tolerance) {
            converged = true;
            break;
        }
    }
    Ok(RunOutcome {
        trajectory,
        iterations,
        converged,
        strategy: RelaxedStrategy { states, p, q },
    })
}

/// `(U ⊗ 1) M` for `U` acting on the first factor of `C^n ⊗ C^k`.
fn apply_first(u: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    let n = u.rows();
    let k = m.rows() / n;
    ComplexMatrix::from_fn(m.rows(), m.cols(), |row, col| {
        let (i, j) = (row / k, row % k);
        (0..n).map(|l| u[(i, l)] * m[(l * k + j, col)]).sum()
    })
}

/// `(U ⊗ 1) v` for a vector on `C^n ⊗ C^k`.
fn apply_first_vec(u: &ComplexMatrix, v: &[C64]) -> Vec<C64> {
    let n = u.rows();
    let k = v.len() / n;
    (0..v.len())
        .map(|row| {
            let (i, j) = (row / k, row % k);
            (0..n).map(|l| u[(i, l)] * v[l * k + j]).sum()
        })
        .collect()
}

/// Physical strategy in factored form: `ψ = Σ_{i,k} C[i,k] |i⟩ ⊗ V|k⟩`.
struct PhysicalState {
    n: usize,
    d: usize,
    /// `n × d` coefficients, unit Frobenius norm.
    coefficients: ComplexMatrix,
    /// `n × d` isometry.
    isometry: ComplexMatrix,
}

impl PhysicalState {
    fn vector(&self) -> Vec<C64> {
        (&self.coefficients * &self.isometry.transpose())
            .entries()
            .to_vec()
    }

    fn from_vector(v: &StateVector, n: usize, d: usize) -> Result<Self> {
        let dec = schmidt_decomposition(v, (n, n))?;
        let coefficients =
            ComplexMatrix::from_fn(n, d, |i, k| dec.left[k][i] * dec.coefficients[k]);
        let isometry = ComplexMatrix::from_fn(n, d, |j, k| dec.right[k][j]);
        let norm = coefficients.frobenius_norm();
        Ok(Self {
            n,
            d,
            coefficients: coefficients.scale_real(1.0 / norm),
            isometry,
        })
    }

    /// `1 ⊗ V` as an `n² × nd` matrix.
    fn embedding(&self) -> ComplexMatrix {
        kron(&ComplexMatrix::identity(self.n), &self.isometry)
    }
}

struct PhysicalIterate {
    state: PhysicalState,
    encodings: Vec<ComplexMatrix>,
    p: Povm,
    q: Povm,
}

impl PhysicalIterate {
    fn combined(&self, x: usize) -> ComplexMatrix {
        let n = self.state.n;
        self.p.effect(x / n) + self.q.effect(x % n)
    }

    /// `W = (1/2n²) Σ_x (U_x ⊗ 1)† (P_{x1} + Q_{x2}) (U_x ⊗ 1)`.
    fn response(&self) -> ComplexMatrix {
        let n = self.state.n;
        let dim = n * n;
        let mut w = ComplexMatrix::zeros(dim, dim);
        for (x, u) in self.encodings.iter().enumerate() {
            let ud = u.adjoint();
            let half = apply_first(&ud, &self.combined(x));
            w = &w + &apply_first(&ud, &half.adjoint());
        }
        w.hermitian_part().scale_real(1.0 / (2 * n * n) as f64)
    }

    fn objective(&self) -> f64 {
        let n = self.state.n;
        let psi = self.state.vector();
        let total: f64 = self
            .encodings
            .iter()
            .enumerate()
            .map(|(x, u)| {
                let phi = apply_first_vec(u, &psi);
                self.combined(x).expectation(&phi).re
            })
            .sum();
        total / (2 * n * n) as f64
    }

    fn step(&mut self) -> Result<()> {
        let (n, d) = (self.state.n, self.state.d);
        // state: lift to the unconstrained best response and truncate,
        // keeping the candidate only when it helps
        let w = self.response();
        let psi = self.state.vector();
        let current = w.expectation(&psi).re;
        let (_, lifted) = top_eigenvector(&w)?;
        let truncated = schmidt_truncate(&lifted, (n, n), d)?;
        if w.expectation(truncated.amplitudes()).re > current {
            self.state = PhysicalState::from_vector(&truncated, n, d)?;
        }
        // exact best response for the coefficients at fixed isometry
        let e = self.state.embedding();
        let (_, chi) = top_eigenvector(&(&(&e.adjoint() * &w) * &e).hermitian_part())?;
        self.state.coefficients = ComplexMatrix::from_row_major(n, d, chi.into_amplitudes())?;
        // the objective is convex in the isometry, so the polar factor of the
        // gradient cannot decrease it
        let g = ComplexMatrix::from_row_major(n, n, w.apply(&self.state.vector()))?;
        self.state.isometry = polar_factor(&(&g.transpose() * &self.state.coefficients.conj()))?;
        // encodings, each by the same convexity argument
        let psi = self.state.vector();
        let a = ComplexMatrix::from_row_major(n, n, psi.clone())?;
        for x in 0..n * n {
            let phi = apply_first_vec(&self.encodings[x], &psi);
            let g = ComplexMatrix::from_row_major(n, n, self.combined(x).apply(&phi))?;
            self.encodings[x] = polar_factor(&(&g * &a.adjoint()))?;
        }
        // measurements
        let outputs: Vec<Vec<C64>> = self
            .encodings
            .iter()
            .map(|u| apply_first_vec(u, &psi))
            .collect();
        let column = |x: &dyn Fn(usize) -> usize| -> Result<ComplexMatrix> {
            ComplexMatrix::from_columns(&(0..n).map(|k| outputs[x(k)].clone()).collect::<Vec<_>>())
        };
        let p_factors = (0..n)
            .map(|a| column(&|b| a * n + b))
            .collect::<Result<Vec<_>>>()?;
        self.p = discrimination_step(&p_factors, &self.p)?;
        let q_factors = (0..n)
            .map(|b| column(&|a| a * n + b))
            .collect::<Result<Vec<_>>>()?;
        self.q = discrimination_step(&q_factors, &self.q)?;
        Ok(())
    }

    fn into_protocol(self) -> Result<StochasticProtocol> {
        let psi = StateVector::normalized(self.state.vector())?;
        StochasticProtocol::new(
            self.state.n,
            DensityOperator::from_pure(&psi),
            self.encodings,
            [self.p, self.q],
        )
    }
}

/// Heuristic lower bound on the physical score for Schmidt rank `d`.
pub fn seesaw_physical(cfg: &SeesawConfig) -> Result<SeesawResult> {
    cfg.validate()?;
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| physical_run(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let runs = runs
        .into_iter()
        .map(|r| {
            Ok(RunOutcome {
                trajectory: r.trajectory,
                iterations: r.iterations,
                converged: r.converged,
                strategy: r.strategy.into_protocol()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(runs, Strategy::Physical))
}

fn physical_run(cfg: &SeesawConfig, restart: usize) -> Result<RunOutcome<PhysicalIterate>> {
    let (n, d) = (cfg.n, cfg.d);
    let mut it = if restart == 0 {
        let s = 1.0 / (d as f64).sqrt();
        let mut encodings = Vec::with_capacity(n * n);
        for x1 in 0..n {
            for x2 in 0..n {
                encodings.push(encoding_unitary(n, x1, x2)?);
            }
        }
        PhysicalIterate {
            state: PhysicalState {
                n,
                d,
                coefficients: ComplexMatrix::from_fn(n, d, |i, k| {
                    C64::new(if i == k { s } else { 0.0 }, 0.0)
                }),
                isometry: ComplexMatrix::from_fn(n, d, |j, k| {
                    C64::new(if j == k { 1.0 } else { 0.0 }, 0.0)
                }),
            },
            encodings,
            p: product_measurement(n, 1)?,
            q: product_measurement(n, 2)?,
        }
    } else {
        let mut rng = restart_rng(cfg.seed, restart);
        let raw = ComplexMatrix::from_fn(n, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let coefficients = raw.scale_real(1.0 / raw.frobenius_norm());
        let basis = haar_unitary(&mut rng, n);
        let isometry = ComplexMatrix::from_fn(n, d, |j, k| basis[(j, k)]);
        let encodings = (0..n * n).map(|_| haar_unitary(&mut rng, n)).collect();
        let p = random_projective_povm(&mut rng, n * n, n);
        let q = random_projective_povm(&mut rng, n * n, n);
        PhysicalIterate {
            state: PhysicalState {
                n,
                d,
                coefficients,
                isometry,
            },
            encodings,
            p,
            q,
        }
    };
    let mut trajectory = vec![it.objective()];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        it.step()?;
        trajectory.push(it.objective());
        if plateaued(&trajectory, cfg.tolerance) {
            converged = true;
            break;
        }
    }
    Ok(RunOutcome {
        trajectory,
        iterations,
        converged,
        strategy: it,
    })
}
