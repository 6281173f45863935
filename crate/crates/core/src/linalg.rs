//! Dense complex linear algebra on small finite-dimensional spaces.
//!
//! Everything is exact-dense and immutable: matrices and vectors validate
//! their shape and finiteness on construction, and every operation returns
//! a fresh value. Dimensions are capped at [`tol::MAX_DIM`]. The Hermitian
//! eigensolver is a cyclic complex Jacobi iteration, chosen for determinism
//! at these sizes.

use thiserror::Error;

use crate::tol;

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex<f64>;

/// Shorthand for a real complex scalar.
pub fn c_re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// Shorthand for a general complex scalar.
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: left operand is {left_rows}x{left_cols}, right operand is {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds the configured cap of {max}")]
    DimensionCap { dim: usize, max: usize },
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("entry count {got} does not match shape {rows}x{cols}")]
    EntryCount {
        rows: usize,
        cols: usize,
        got: usize,
    },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e} exceeds tolerance {tolerance:.1e}")]
    NotHermitian {
        max_asymmetry: f64,
        tolerance: f64,
    },
}

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex>,
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex>,
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in
/// ascending order, matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

fn check_dim(dim: usize) -> Result<(), LinalgError> {
    if dim == 0 {
        return Err(LinalgError::ZeroDim);
    }
    if dim > tol::MAX_DIM {
        return Err(LinalgError::DimensionCap {
            dim,
            max: tol::MAX_DIM,
        });
    }
    Ok(())
}

fn check_finite(entries: &[Complex]) -> Result<(), LinalgError> {
    for (index, z) in entries.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(LinalgError::NonFinite { index });
        }
    }
    Ok(())
}

impl ComplexMatrix {
    /// Build a matrix from row-major entries, validating shape, cap, and
    /// finiteness.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex>) -> Result<Self, LinalgError> {
        check_dim(rows)?;
        check_dim(cols)?;
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                rows,
                cols,
                got: entries.len(),
            });
        }
        check_finite(&entries)?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Square matrix from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, LinalgError> {
        Self::new(rows, cols, entries.iter().map(|&x| c_re(x)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1 && rows <= tol::MAX_DIM && cols <= tol::MAX_DIM);
        Self {
            rows,
            cols,
            entries: vec![Complex::ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = c_re(1.0);
        }
        m
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

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.cols + col]
    }

    #[inline]
    fn set(&mut self, row: usize, col: usize, value: Complex) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry modulus. Used as the residual norm in most checks.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(())
    }

    /// Standard matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == Complex::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product. Errors when the result would exceed the
    /// dimension cap.
    pub fn kron(&self, other: &Self) -> Result<Self, LinalgError> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        if rows > tol::MAX_DIM || cols > tol::MAX_DIM {
            return Err(LinalgError::DimensionCap {
                dim: rows.max(cols),
                max: tol::MAX_DIM,
            });
        }
        let mut out = Self::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out.set(
                            i1 * other.rows + i2,
                            j1 * other.cols + j2,
                            a * other.get(i2, j2),
                        );
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self·other − other·self` for square matrices of equal dimension.
    pub fn commutator(&self, other: &Self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        self.check_same_shape(other)?;
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        ab.sub(&ba)
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        if self.cols != v.dim() {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.dim(),
                right_cols: 1,
            });
        }
        let mut out = vec![Complex::ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = Complex::ZERO;
            for j in 0..self.cols {
                acc += self.get(i, j) * v.entries[j];
            }
            out[i] = acc;
        }
        Ok(ComplexVector { entries: out })
    }

    /// Largest deviation from Hermitian symmetry, `max |m_ij − conj(m_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut max_dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                let dev = (self.get(i, j) - self.get(j, i).conj()).norm();
                max_dev = max_dev.max(dev);
            }
        }
        max_dev
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tolerance
    }

    fn require_hermitian(&self) -> Result<(), LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let max_asymmetry = self.hermiticity_deviation();
        if max_asymmetry > tol::TOL_HERM {
            return Err(LinalgError::NotHermitian {
                max_asymmetry,
                tolerance: tol::TOL_HERM,
            });
        }
        Ok(())
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations.
    ///
    /// The input is validated against [`tol::TOL_HERM`] and symmetrized
    /// before iterating. Sweeps stop once the off-diagonal Frobenius norm
    /// drops below [`tol::JACOBI_OFF_TOL`] or after
    /// [`tol::JACOBI_MAX_SWEEPS`] sweeps. Eigenvalues come out ascending;
    /// the eigenvector columns are orthonormal by construction (each
    /// rotation is unitary).
    pub fn hermitian_eigensystem(&self) -> Result<Eigensystem, LinalgError> {
        self.require_hermitian()?;
        let n = self.rows;

        // Symmetrize to scrub round-off asymmetry below TOL_HERM.
        let mut h = self.clone();
        for i in 0..n {
            for j in 0..n {
                let avg = (self.get(i, j) + self.get(j, i).conj()) * c_re(0.5);
                h.set(i, j, avg);
            }
        }
        let mut v = Self::identity(n);

        for _sweep in 0..tol::JACOBI_MAX_SWEEPS {
            let mut off_sq = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off_sq += h.get(p, q).norm_sqr();
                }
            }
            if (2.0 * off_sq).sqrt() <= tol::JACOBI_OFF_TOL {
                break;
            }

            for p in 0..n {
                for q in (p + 1)..n {
                    let g = h.get(p, q);
                    let m = g.norm();
                    if m <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let phase = g / c_re(m);
                    let alpha = h.get(p, p).re;
                    let beta = h.get(q, q).re;
                    let tau = (beta - alpha) / (2.0 * m);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let cth = 1.0 / (1.0 + t * t).sqrt();
                    let sth = t * cth;
                    // Column rotation: B = H·U with U[p][p]=U[q][q]=c,
                    // U[p][q]=s·phase, U[q][p]=−s·conj(phase).
                    for k in 0..n {
                        let hkp = h.get(k, p);
                        let hkq = h.get(k, q);
                        h.set(k, p, hkp * c_re(cth) - hkq * phase.conj() * c_re(sth));
                        h.set(k, q, hkp * phase * c_re(sth) + hkq * c_re(cth));
                    }
                    // Row rotation: H' = U†·B.
                    for k in 0..n {
                        let hpk = h.get(p, k);
                        let hqk = h.get(q, k);
                        h.set(p, k, hpk * c_re(cth) - hqk * phase * c_re(sth));
                        h.set(q, k, hpk * phase.conj() * c_re(sth) + hqk * c_re(cth));
                    }
                    // Accumulate eigenvectors: V ← V·U.
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, vkp * c_re(cth) - vkq * phase.conj() * c_re(sth));
                        v.set(k, q, vkp * phase * c_re(sth) + vkq * c_re(cth));
                    }
                    // Pin the rotated pivots to their exact values.
                    h.set(p, q, Complex::ZERO);
                    h.set(q, p, Complex::ZERO);
                    h.set(p, p, c_re(h.get(p, p).re));
                    h.set(q, q, c_re(h.get(q, q).re));
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| h.get(a, a).re.total_cmp(&h.get(b, b).re));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| h.get(i, i).re).collect();
        let mut eigenvectors = Self::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                eigenvectors.set(k, new_col, v.get(k, old_col));
            }
        }
        Ok(Eigensystem {
            eigenvalues,
            eigenvectors,
        })
    }

    /// True iff the smallest eigenvalue is at least `−tolerance`.
    /// Requires a Hermitian input.
    pub fn is_positive_semidefinite(&self, tolerance: f64) -> Result<bool, LinalgError> {
        let eig = self.hermitian_eigensystem()?;
        Ok(eig.eigenvalues.first().copied().unwrap_or(0.0) >= -tolerance)
    }

    /// Largest singular value, computed as √λ_max(m†m).
    pub fn operator_norm(&self) -> Result<f64, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let gram = self.dagger().matmul(self)?;
        let eig = gram.hermitian_eigensystem()?;
        let lambda_max = eig.eigenvalues.last().copied().unwrap_or(0.0);
        Ok(lambda_max.max(0.0).sqrt())
    }
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex>) -> Result<Self, LinalgError> {
        check_dim(entries.len())?;
        check_finite(&entries)?;
        Ok(Self { entries })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self, LinalgError> {
        Self::new(entries.iter().map(|&x| c_re(x)).collect())
    }

    /// Computational basis vector |index⟩ in the given dimension.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim && dim <= tol::MAX_DIM);
        let mut entries = vec![Complex::ZERO; dim];
        entries[index] = c_re(1.0);
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.dim(),
                left_cols: 1,
                right_rows: other.dim(),
                right_cols: 1,
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.dim(),
                left_cols: 1,
                right_rows: other.dim(),
                right_cols: 1,
            });
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.dim(),
                left_cols: 1,
                right_rows: other.dim(),
                right_cols: 1,
            });
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 1e-300, "cannot normalize a zero vector");
        self.scale(c_re(1.0 / n))
    }

    /// Tensor product |self⟩ ⊗ |other⟩.
    pub fn kron(&self, other: &Self) -> Result<Self, LinalgError> {
        let dim = self.dim() * other.dim();
        if dim > tol::MAX_DIM {
            return Err(LinalgError::DimensionCap {
                dim,
                max: tol::MAX_DIM,
            });
        }
        let mut entries = Vec::with_capacity(dim);
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a * b);
            }
        }
        Ok(Self { entries })
    }

    /// Rank-one matrix |self⟩⟨self|.
    pub fn outer_self(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.entries[i] * self.entries[j].conj());
            }
        }
        out
    }
}
