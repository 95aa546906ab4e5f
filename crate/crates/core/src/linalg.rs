//! Small dense complex linear algebra.
//!
//! Everything here is sized for bipartite pure states of a few qudits, so the
//! matrices are tiny (a handful of rows) and a cyclic Jacobi eigensolver is both
//! fast enough and unconditionally stable.
//!
//! Conventions:
//! - [`EigenDecomposition::eigenvalues`] are stored in **ascending** order, so
//!   `eigenvalues[0]` is the smallest and `eigenvalues[n - 1]` the largest.
//! - [`singular_values`] are returned in **descending** order.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

/// Relative Hermiticity tolerance used when a caller does not supply one.
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-10;
/// Relative cut-off on singular values when counting rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds {tol:.3e}")]
    NotHermitian { asymmetry: f64, tol: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:.3e})"
    )]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    LengthMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix must have at least one row and one column")]
    EmptyShape,
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
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

    /// Builds a matrix from row-major entries, rejecting bad lengths and non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyShape);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::LengthMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(k) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(LinalgError::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(LinalgError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `M M†`, always square with side `rows`.
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = ZERO;
                for k in 0..self.cols {
                    acc += self[(i, k)] * self[(j, k)].conj();
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
            out[(i, i)].im = 0.0;
        }
        out
    }

    /// `M† M`, square with side `cols`.
    pub fn co_gram(&self) -> Self {
        self.adjoint().gram()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// `‖M − M†‖_F`; requires a square matrix.
    pub fn hermitian_asymmetry(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(LinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    /// Places this matrix in the top-left corner of a larger zero matrix.
    pub fn padded(&self, rows: usize, cols: usize) -> Self {
        assert!(rows >= self.rows && cols >= self.cols);
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Spectrum of a Hermitian matrix.
///
/// `eigenvalues` are ascending (`λ_1 ≤ … ≤ λ_n`); column `k` of `eigenvectors`
/// is the unit eigenvector for `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn largest(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for (k, &lam) in self.eigenvalues.iter().enumerate() {
                    acc += v[(i, k)] * lam * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// `tol` bounds the relative asymmetry `‖M − M†‖_F / ‖M‖_F` that is accepted; the
/// Hermitian part of `M` is what gets diagonalized.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(LinalgError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let norm = m.frobenius_norm();
    let asymmetry = m.hermitian_asymmetry()?;
    if asymmetry > tol * norm {
        return Err(LinalgError::NotHermitian {
            asymmetry: if norm > 0.0 {
                asymmetry / norm
            } else {
                asymmetry
            },
            tol,
        });
    }

    // Work on the Hermitian part.
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let threshold = JACOBI_REL_TOL * norm;
    let mut converged = norm == 0.0 || n == 1;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_diagonal: max_off_diagonal(&a),
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
        converged = max_off_diagonal(&a) < threshold;
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &(_, src)) in pairs.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues: pairs.into_iter().map(|(lam, _)| lam).collect(),
        eigenvectors,
    })
}

/// [`hermitian_eig`] for inputs that are positive semidefinite by construction
/// (Gram matrices). Eigenvalues in `[-tol·max(1, ‖M‖_F), 0)` are snapped to zero.
pub fn psd_eig(m: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    let mut eig = hermitian_eig(m, tol)?;
    let floor = -tol * m.frobenius_norm().max(1.0);
    for lam in &mut eig.eigenvalues {
        if *lam < 0.0 {
            if *lam < floor {
                return Err(LinalgError::NotPositiveSemidefinite {
                    min_eigenvalue: *lam,
                });
            }
            *lam = 0.0;
        }
    }
    Ok(eig)
}

fn max_off_diagonal(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut max: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max = max.max(a[(i, j)].norm());
            }
        }
    }
    max
}

/// Annihilates `a[(p, q)]` with a unitary acting on coordinates `p`, `q`.
///
/// With `a_pq = |a_pq| e^{iφ}` the rotation is `U = D J`, where `D` rephases
/// coordinate `q` by `e^{-iφ}` (making the pivot real) and `J` is the real
/// Jacobi rotation for the resulting symmetric 2x2 block.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    if t == 0.0 {
        // Pivot negligible relative to the diagonal gap.
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();

    // Entries of U restricted to (p, q).
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    // A <- A U (columns p, q).
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    // A <- U† A (rows p, q).
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    // V <- V U.
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }

    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

/// Singular values of `M`, descending, one per row of `M` (zeros included).
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.frobenius_norm_sq() == 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    let eig = psd_eig(&m.gram(), DEFAULT_HERMITIAN_TOL)?;
    Ok(eig
        .eigenvalues
        .iter()
        .rev()
        .map(|&lam| lam.sqrt())
        .collect())
}

/// `Tr(A B†) = Σ_ij a_ij conj(b_ij)`.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    a.check_same_shape(b)?;
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| x * y.conj())
        .sum())
}

/// Number of singular values strictly above `rel_tol · σ_max`.
pub fn numerical_rank(m: &ComplexMatrix, rel_tol: f64) -> Result<usize> {
    assert!(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must lie in (0, 1)");
    let sv = singular_values(m)?;
    let cutoff = rel_tol * sv[0];
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

/// Largest violation of the Weyl chain
/// `λ_i(H) + λ_1(K) ≤ λ_i(H + K) ≤ λ_i(H) + λ_n(K)` over all `i`.
///
/// Non-positive means every inequality holds exactly; a positive value is the
/// amount by which the worst one fails.
pub fn weyl_margin(h: &ComplexMatrix, k: &ComplexMatrix) -> Result<f64> {
    h.check_same_shape(k)?;
    let eh = hermitian_eig(h, DEFAULT_HERMITIAN_TOL)?;
    let ek = hermitian_eig(k, DEFAULT_HERMITIAN_TOL)?;
    let esum = hermitian_eig(&h.add(k)?, DEFAULT_HERMITIAN_TOL)?;
    let (k_min, k_max) = (ek.smallest(), ek.largest());
    let mut worst = f64::NEG_INFINITY;
    for (i, &lam) in esum.eigenvalues.iter().enumerate() {
        let lower = eh.eigenvalues[i] + k_min;
        let upper = eh.eigenvalues[i] + k_max;
        worst = worst.max(lower - lam).max(lam - upper);
    }
    Ok(worst)
}

/// True iff both Weyl chains hold for every index within additive `tol`.
pub fn weyl_check(h: &ComplexMatrix, k: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(weyl_margin(h, k)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Closed-form spectrum of a 2x2 Hermitian matrix [[a, b], [conj b, d]].
    fn eig2_closed_form(a: f64, b: Complex64, d: f64) -> [f64; 2] {
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    #[test]
    fn diagonal_input_is_already_solved() {
        let eig = hermitian_eig(&ComplexMatrix::from_diagonal(&[0.75, 0.25]), 1e-12).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.25, 0.75]);
    }

    #[test]
    fn scaled_identity() {
        let m = ComplexMatrix::identity(2).scale_real(0.5);
        let eig = hermitian_eig(&m, 1e-12).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.5, 0.5]);
        let vtv = eig
            .eigenvectors
            .adjoint()
            .matmul(&eig.eigenvectors)
            .unwrap();
        assert!(
            vtv.sub(&ComplexMatrix::identity(2))
                .unwrap()
                .frobenius_norm()
                < 1e-12
        );
    }

    #[test]
    fn real_symmetric_two_by_two() {
        let m = ComplexMatrix::from_real(2, 2, &[0.5, 0.25, 0.25, 0.25]).unwrap();
        let eig = hermitian_eig(&m, 1e-12).unwrap();
        let by_hand = [(3.0 - 5f64.sqrt()) / 8.0, (3.0 + 5f64.sqrt()) / 8.0];
        let closed = eig2_closed_form(0.5, c(0.25, 0.0), 0.25);
        for i in 0..2 {
            assert_abs_diff_eq!(by_hand[i], closed[i], epsilon = 1e-15);
            assert_abs_diff_eq!(eig.eigenvalues[i], by_hand[i], epsilon = 1e-14);
        }
        assert_abs_diff_eq!(eig.eigenvalues[0], 0.0954915, epsilon = 1e-7);
        assert_abs_diff_eq!(eig.eigenvalues[1], 0.6545085, epsilon = 1e-7);
    }

    #[test]
    fn complex_two_by_two_matches_closed_form() {
        let b = c(0.3, -0.7);
        let m =
            ComplexMatrix::from_vec(2, 2, vec![c(1.2, 0.0), b, b.conj(), c(-0.4, 0.0)]).unwrap();
        let eig = hermitian_eig(&m, 1e-12).unwrap();
        let closed = eig2_closed_form(1.2, b, -0.4);
        assert_abs_diff_eq!(eig.eigenvalues[0], closed[0], epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvalues[1], closed[1], epsilon = 1e-14);
        assert!(eig.reconstruct().sub(&m).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn eig_errors() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eig(&rect, 1e-10),
            Err(LinalgError::NonSquare { rows: 2, cols: 3 })
        ));
        let skew = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            hermitian_eig(&skew, 1e-10),
            Err(LinalgError::NotHermitian { .. })
        ));
        let indefinite = ComplexMatrix::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(
            psd_eig(&indefinite, 1e-10),
            Err(LinalgError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn psd_clamps_roundoff_negatives() {
        let m = ComplexMatrix::from_diagonal(&[1.0, -1e-14]);
        let eig = psd_eig(&m, 1e-10).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0, 1.0]);
    }

    #[test]
    fn singular_value_examples() {
        let s = singular_values(&ComplexMatrix::identity(2).scale_real(0.5f64.sqrt())).unwrap();
        assert_abs_diff_eq!(s[0], 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 0.5f64.sqrt(), epsilon = 1e-15);

        let s = singular_values(&ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap())
            .unwrap();
        assert_eq!(s, vec![1.0, 0.0]);

        let m = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.0, 0.5]).unwrap();
        let s = singular_values(&m).unwrap();
        assert_abs_diff_eq!(s[0], ((3.0 + 5f64.sqrt()) / 8.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], ((3.0 - 5f64.sqrt()) / 8.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s[0], 0.80902, epsilon = 1e-5);
        assert_abs_diff_eq!(s[1], 0.30902, epsilon = 1e-5);

        assert_eq!(
            singular_values(&ComplexMatrix::zeros(2, 2)),
            Err(LinalgError::ZeroMatrix)
        );
    }

    #[test]
    fn frobenius_inner_examples() {
        let h = 0.5f64.sqrt();
        let bell = ComplexMatrix::identity(2).scale_real(h);
        assert_abs_diff_eq!(
            frobenius_inner(&bell, &bell).unwrap().re,
            1.0,
            epsilon = 1e-15
        );

        let e00 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let e11 = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(frobenius_inner(&e00, &e11).unwrap(), ZERO);

        let e01 = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(frobenius_inner(&bell, &e01).unwrap(), ZERO);

        let a = ComplexMatrix::from_vec(1, 2, vec![c(1.0, 2.0), c(0.0, -1.0)]).unwrap();
        let b = ComplexMatrix::from_vec(1, 2, vec![c(0.5, 0.5), c(3.0, 1.0)]).unwrap();
        let ab = frobenius_inner(&a, &b).unwrap();
        let ba = frobenius_inner(&b, &a).unwrap();
        assert_abs_diff_eq!(ab.re, ba.re, epsilon = 1e-15);
        assert_abs_diff_eq!(ab.im, -ba.im, epsilon = 1e-15);

        assert!(matches!(
            frobenius_inner(&a, &bell),
            Err(LinalgError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn rank_examples() {
        let h = 0.5f64.sqrt();
        assert_eq!(
            numerical_rank(&ComplexMatrix::identity(2).scale_real(h), 1e-9).unwrap(),
            2
        );
        let proj = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(numerical_rank(&proj, 1e-9).unwrap(), 1);
        let m = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.0, 0.5]).unwrap();
        assert_eq!(numerical_rank(&m, DEFAULT_RANK_TOL).unwrap(), 2);
        assert_eq!(
            numerical_rank(&ComplexMatrix::zeros(3, 3), 1e-9),
            Err(LinalgError::ZeroMatrix)
        );
    }

    #[test]
    fn weyl_examples() {
        let id = ComplexMatrix::identity(3);
        assert!(weyl_check(&id, &id, 1e-12).unwrap());
        assert_abs_diff_eq!(weyl_margin(&id, &id).unwrap(), 0.0, epsilon = 1e-15);

        let h = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        let k = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(weyl_check(&h, &k, 0.0).unwrap());

        assert!(matches!(
            weyl_check(&h, &ComplexMatrix::identity(3), 1e-10),
            Err(LinalgError::ShapeMismatch { .. })
        ));
        let skew = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            weyl_check(&h, &skew, 1e-10),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn from_vec_validation() {
        assert!(matches!(
            ComplexMatrix::from_vec(2, 2, vec![ZERO; 3]),
            Err(LinalgError::LengthMismatch {
                expected: 4,
                got: 3,
                ..
            })
        ));
        assert!(matches!(
            ComplexMatrix::from_vec(1, 2, vec![ZERO, c(f64::NAN, 0.0)]),
            Err(LinalgError::NonFinite { row: 0, col: 1 })
        ));
        assert_eq!(
            ComplexMatrix::from_vec(0, 2, vec![]),
            Err(LinalgError::EmptyShape)
        );
    }
}
