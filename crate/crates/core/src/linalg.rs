//! Dense complex linear algebra.
//!
//! Everything in the toolkit lives on small Hilbert spaces (at most a few
//! hundred dimensions), so matrices are stored densely in row-major order.
//! Hermitian eigendecompositions are delegated to `nalgebra`. Singular value
//! decompositions are derived from them, because the complex SVD routine
//! loses accuracy on rank-deficient input; the rest (products, tensor
//! products, partial traces, Schmidt decompositions) is implemented here.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Absolute tolerance on the largest entry of `H - H†`.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Most negative eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;

/// Relative size below which an eigenvalue is treated as zero by [`psd_sqrt`].
const SPECTRUM_CUTOFF: f64 = 1e-13;

/// Tolerance on `‖v‖₂ - 1` for state vectors.
pub const NORM_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        let entries: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&entries)
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Matrix product. Panics if the inner dimensions disagree.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        let m = other.cols;
        for i in 0..self.rows {
            let row_out = &mut out.data[i * m..(i + 1) * m];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row_b = &other.data[k * m..(k + 1) * m];
                for (o, &b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "apply: dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `⟨v|self|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let w = self.apply(v);
        v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn powi(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|self - self†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Unit vector in `C^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[k] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    /// Tensor product `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    pub fn conj(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Applies a unitary (or isometry) and renormalizes away rounding drift.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a {}-dimensional state",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        Self::normalized(u.apply(&self.amplitudes))
    }
}

pub(crate) fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product; dimensions `(r_a·r_b) × (c_a·c_b)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * rb, a.cols * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if m.rows == 0 {
        return Ok(0.0);
    }
    Ok(thin_svd(m)?.singular_values[0])
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// Each eigenvector is phase-fixed so its first non-negligible component is
/// real and positive, which makes the output deterministic.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in fl.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL || !defect.is_finite() {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Diagonalizes a Hermitian matrix (symmetrized before decomposition).
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let n = h.rows;
    let eig = nalgebra::SymmetricEigen::new(h.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let phase = v
            .iter()
            .find(|z| z.norm() > 1e-10)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(ONE);
        for i in 0..n {
            vectors[(i, col)] = v[i] * phase;
        }
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    // eigenvalues at rounding level are zero; their square roots would not be
    let cutoff = SPECTRUM_CUTOFF * eig.eigenvalues[0].max(1.0);
    Ok(eig.map_spectrum(|l| if l > cutoff { l.sqrt() } else { 0.0 }))
}

/// `(m + eps·1)^{-1/2}` for a positive semidefinite `m`.
pub fn regularized_inverse_sqrt(m: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m)?;
    Ok(eig.map_spectrum(|l| 1.0 / (l.max(0.0) + eps).sqrt()))
}

/// Largest eigenvalue of a Hermitian matrix with a unit eigenvector.
pub fn top_eigenvector(h: &ComplexMatrix) -> Result<(f64, StateVector)> {
    if h.rows == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let eig = hermitian_eigen(h)?;
    let v = StateVector::normalized(eig.eigenvector(0))?;
    Ok((eig.eigenvalues[0], v))
}

/// Thin singular value decomposition `m = U Σ V†`, singular values descending.
///
/// Built on the Hermitian eigendecomposition of `m†m` (or `m m†`). Left
/// vectors belonging to negligible singular values are completed to an
/// orthonormal set, so `U` and `V` always have orthonormal columns.
struct ThinSvd {
    singular_values: Vec<f64>,
    /// `rows × k` with `k = min(rows, cols)`.
    u: ComplexMatrix,
    /// `cols × k`.
    v: ComplexMatrix,
}

fn thin_svd(m: &ComplexMatrix) -> Result<ThinSvd> {
    if m.rows < m.cols {
        let t = thin_svd(&m.adjoint())?;
        return Ok(ThinSvd {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        });
    }
    let eig = hermitian_eigen(&(&m.adjoint() * m))?;
    let k = m.cols;
    let v = eig.eigenvectors;
    let images: Vec<Vec<C64>> = (0..k).map(|j| m.apply(&v.column(j))).collect();
    let singular_values: Vec<f64> = images.iter().map(|w| l2_norm(w)).collect();
    let cutoff = 1e-12
        * singular_values
            .iter()
            .copied()
            .fold(f64::MIN_POSITIVE, f64::max);
    // modified Gram-Schmidt over the images, falling back to basis vectors
    let basis =
        images
            .into_iter()
            .zip(&singular_values)
            .map(|(w, &sigma)| if sigma > cutoff { w } else { Vec::new() });
    let mut filler = (0..m.rows).map(|i| StateVector::basis(m.rows, i).into_amplitudes());
    let mut done: Vec<Vec<C64>> = Vec::with_capacity(k);
    for candidate in basis {
        let mut c = candidate;
        loop {
            if c.is_empty() {
                c = filler
                    .next()
                    .ok_or_else(|| Error::Numerical("cannot complete singular basis".into()))?;
            }
            for _ in 0..2 {
                for e in &done {
                    let overlap: C64 = e.iter().zip(&c).map(|(a, b)| a.conj() * b).sum();
                    for (ci, ei) in c.iter_mut().zip(e) {
                        *ci -= overlap * ei;
                    }
                }
            }
            let norm = l2_norm(&c);
            if norm > 1e-8 {
                done.push(c.into_iter().map(|z| z / norm).collect());
                break;
            }
            c = Vec::new();
        }
    }
    let u = ComplexMatrix::from_columns(&done)?;
    Ok(ThinSvd {
        singular_values,
        u,
        v,
    })
}

/// Unitary factor `U V†` of the thin SVD `m = U Σ V†`.
///
/// This is the isometry maximizing `Re Tr(m† W)` over isometries `W`.
pub fn polar_factor(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows == 0 || m.cols == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let svd = thin_svd(m)?;
    let w = &svd.u * &svd.v.adjoint();
    if w.is_finite() {
        Ok(w)
    } else {
        Err(Error::Numerical("non-finite polar factor".into()))
    }
}

/// Schmidt decomposition of a vector on `C^a ⊗ C^b`.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Schmidt coefficients, descending.
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
}

fn reshape_bipartite(v: &[C64], dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (a, b) = dims;
    if a * b != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} on C^{} ⊗ C^{}",
            v.len(),
            a,
            b
        )));
    }
    ComplexMatrix::from_row_major(a, b, v.to_vec())
}

pub fn schmidt_decomposition(
    v: &StateVector,
    dims: (usize, usize),
) -> Result<SchmidtDecomposition> {
    let m = reshape_bipartite(v.amplitudes(), dims)?;
    let svd = thin_svd(&m)?;
    let k = svd.singular_values.len();
    let left = (0..k).map(|j| svd.u.column(j)).collect();
    // |u_k⟩ ⊗ conj(v_k) is the k-th product term as an amplitude vector
    let right = (0..k)
        .map(|j| svd.v.column(j).iter().map(|z| z.conj()).collect())
        .collect();
    let coefficients = svd.singular_values;
    Ok(SchmidtDecomposition {
        coefficients,
        left,
        right,
    })
}

/// Number of Schmidt coefficients above `tol`.
pub fn schmidt_rank(v: &StateVector, dims: (usize, usize), tol: f64) -> Result<usize> {
    Ok(schmidt_decomposition(v, dims)?
        .coefficients
        .iter()
        .filter(|&&c| c > tol)
        .count())
}

/// Keeps the `d` largest Schmidt terms of `v` on `C^a ⊗ C^b` and renormalizes.
pub fn schmidt_truncate(v: &StateVector, dims: (usize, usize), d: usize) -> Result<StateVector> {
    if d < 1 {
        return Err(Error::InvalidArgument(
            "Schmidt rank bound must be at least 1".into(),
        ));
    }
    let dec = schmidt_decomposition(v, dims)?;
    let (a, b) = dims;
    let mut out = vec![ZERO; a * b];
    for k in 0..d.min(dec.coefficients.len()) {
        let c = dec.coefficients[k];
        for i in 0..a {
            let li = dec.left[k][i] * c;
            for j in 0..b {
                out[i * b + j] += li * dec.right[k][j];
            }
        }
    }
    StateVector::normalized(out)
}

/// `Tr_B` of an operator on `C^a ⊗ C^b`.
pub fn partial_trace_second(rho: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (a, b) = dims;
    if rho.rows != a * b || rho.cols != a * b {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on C^{} ⊗ C^{}",
            rho.rows, rho.cols, a, b
        )));
    }
    Ok(ComplexMatrix::from_fn(a, a, |i, j| {
        (0..b).map(|k| rho[(i * b + k, j * b + k)]).sum()
    }))
}
