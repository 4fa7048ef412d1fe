//! Dense complex linear algebra: tensor products, partial trace and
//! transpose, Hermitian eigendecomposition, numerical rank.
//!
//! Bipartite matrices use the composite index `i = i_a * dim_b + i_b`, so the
//! first factor is the slow index. Every module in the crate relies on this.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexVector = DVector<C64>;

/// Default tolerance for positive semi-definiteness checks.
pub const PSD_TOL: f64 = 1e-10;

/// Scale-aware Hermiticity tolerance, `1e-10 * (1 + |M|_F)`.
pub fn hermitian_tol(m: &ComplexMatrix) -> f64 {
    1e-10 * (1.0 + m.frobenius_norm())
}

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Dense complex matrix with at least one row and one column.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, row_major: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!("{rows}x{cols} matrix")));
        }
        if row_major.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                row_major.len()
            )));
        }
        if row_major
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(
            rows, cols, &row_major,
        )))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| real(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Wraps an nalgebra matrix. Panics on an empty matrix.
    pub fn from_na(m: DMatrix<C64>) -> Self {
        assert!(m.nrows() > 0 && m.ncols() > 0, "empty matrix");
        ComplexMatrix(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_na(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_na(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_na(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                real(diag[i])
            } else {
                C64::default()
            }
        })
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &ComplexVector, bra: &ComplexVector) -> Self {
        Self::from_na(ket * bra.adjoint())
    }

    /// `|v><v|`.
    pub fn projector(v: &ComplexVector) -> Self {
        Self::outer(v, v)
    }

    /// `|j><k|` in dimension `n`.
    pub fn matrix_unit(n: usize, j: usize, k: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.0[(j, k)] = real(1.0);
        m
    }

    pub fn as_na(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_na(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(real(s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `|M - M^dagger|_F`.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()) * real(0.5))
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let tolerance = hermitian_tol(self);
        let deviation = self.hermiticity_deviation();
        if deviation > tolerance {
            return Err(Error::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(())
    }

    /// Entries stacked column after column.
    pub fn vectorize(&self) -> ComplexVector {
        DVector::from_iterator(self.rows() * self.cols(), self.0.iter().copied())
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        &self.0 * v
    }

    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        (self - other).frobenius_norm()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Dimensions of a bipartite split `H_A (x) H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteDims {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteDims {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidDimension(format!(
                "bipartite dims ({dim_a}, {dim_b})"
            )));
        }
        Ok(BipartiteDims { dim_a, dim_b })
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    fn check(&self, m: &ComplexMatrix) -> Result<()> {
        let n = self.total();
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for bipartite dims {}x{}",
                m.rows(),
                m.cols(),
                self.dim_a,
                self.dim_b
            )));
        }
        Ok(())
    }
}

/// Selects one tensor factor of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Kronecker product, `(a (x) b)[(i*rb + k), (j*cb + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

pub fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

/// Traces out the factor selected by `which`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: BipartiteDims,
    which: Factor,
) -> Result<ComplexMatrix> {
    dims.check(m)?;
    let (da, db) = (dims.dim_a, dims.dim_b);
    Ok(match which {
        Factor::Second => ComplexMatrix::from_fn(da, da, |a, a2| {
            (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()
        }),
        Factor::First => ComplexMatrix::from_fn(db, db, |b, b2| {
            (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()
        }),
    })
}

/// Transposes the indices of the factor selected by `which`.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dims: BipartiteDims,
    which: Factor,
) -> Result<ComplexMatrix> {
    dims.check(m)?;
    let db = dims.dim_b;
    let n = dims.total();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        match which {
            Factor::Second => m[(a * db + b2, a2 * db + b)],
            Factor::First => m[(a2 * db + b, a * db + b2)],
        }
    }))
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.as_na().column(k).into_owned()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.vectors.as_na();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| real(x)),
        ));
        ComplexMatrix::from_na(v * d * v.adjoint())
    }
}

/// Hermitian eigendecomposition. Each eigenvector's first non-negligible
/// component is made real and positive.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    m.ensure_hermitian()?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    let eig = SymmetricEigen::new(m.hermitian_part().into_na());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = pivot.conj() / pivot.norm();
            v *= phase;
        }
        vectors.set_column(col, &v);
    }
    Ok(HermitianEig {
        values,
        vectors: ComplexMatrix::from_na(vectors),
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let svd = SVD::new(m.0.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Default rank tolerance, `max(rows, cols) * eps * sigma_max`.
pub fn default_rank_tol(m: &ComplexMatrix, sigma_max: f64) -> f64 {
    m.rows().max(m.cols()) as f64 * f64::EPSILON * sigma_max
}

/// Number of singular values above `tol` (or the default tolerance).
pub fn numerical_rank(m: &ComplexMatrix, tol: Option<f64>) -> usize {
    let s = singular_values(m);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let tol = tol.unwrap_or_else(|| default_rank_tol(m, sigma_max));
    s.iter().filter(|&&x| x > tol).count()
}

/// Rank with a tolerance relative to the largest singular value.
pub fn relative_rank(m: &ComplexMatrix, rtol: f64) -> usize {
    let s = singular_values(m);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rtol * sigma_max).count()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(m)?.min())
}

pub fn max_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(m)?.max())
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(m)? >= -tol)
}

/// Hilbert-Schmidt inner product `Tr(a^dagger b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.0.iter().zip(b.0.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn spectral_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let mut eig = hermitian_eig(m)?;
    eig.values.iter_mut().for_each(|x| *x = f(*x));
    Ok(eig.reconstruct())
}

/// Square root of a PSD matrix; eigenvalues below zero are clamped.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    spectral_map(m, |x| x.max(0.0).sqrt())
}

/// Pseudo-inverse square root; eigenvalues at or below `rtol * lambda_max` are dropped.
pub fn psd_inv_sqrt(m: &ComplexMatrix, rtol: f64) -> Result<ComplexMatrix> {
    let lmax = max_eigenvalue(m)?;
    spectral_map(m, |x| if x > rtol * lmax { 1.0 / x.sqrt() } else { 0.0 })
}

/// `sum |lambda|` of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(m)?.values.iter().map(|x| x.abs()).sum())
}

/// `(1/2) |a - b|_1` for Hermitian `a`, `b`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    Ok(0.5 * trace_norm(&(a - b))?)
}

/// Standard basis vector `|k>` in dimension `n`.
pub fn basis_vector(n: usize, k: usize) -> ComplexVector {
    let mut v = DVector::zeros(n);
    v[k] = real(1.0);
    v
}

pub fn vector_from(entries: &[C64]) -> ComplexVector {
    DVector::from_column_slice(entries)
}

pub fn real_vector(entries: &[f64]) -> ComplexVector {
    DVector::from_iterator(entries.len(), entries.iter().map(|&x| real(x)))
}

/// `<u, v>`, conjugate-linear in `u`.
pub fn inner(u: &ComplexVector, v: &ComplexVector) -> C64 {
    u.dotc(v)
}

/// Unit vector spanning the (numerical) kernel direction of `m`: the right
/// singular vector of the smallest singular value, together with that value.
pub fn null_vector(m: &ComplexMatrix) -> (ComplexVector, f64) {
    let (rows, cols) = (m.rows(), m.cols());
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m.as_na());
        p
    } else {
        m.as_na().clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (k, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, &s)| (k, s))
        .expect("non-empty");
    (v_t.row(k).adjoint(), smin)
}

/// Best rank-one factorization `v ~ sqrt(s) a (x) b` of a vector on `dims`,
/// returning unit vectors `a`, `b`, the weight `|v|^2` carried by the leading
/// term and the norm of the discarded remainder.
pub fn product_factors(
    v: &ComplexVector,
    dims: BipartiteDims,
) -> (ComplexVector, ComplexVector, f64, f64) {
    let (da, db) = (dims.dim_a, dims.dim_b);
    let m = ComplexMatrix::from_fn(da, db, |a, b| v[a * db + b]);
    // Left singular vectors from m m^dagger; the complex SVD is avoided here
    // because its 2x2 path can return mismatched singular vectors.
    let eig = hermitian_eig(&(&m * &m.adjoint())).expect("Hermitian");
    let top = eig.max().max(0.0);
    let rest = eig.values[..da - 1]
        .iter()
        .map(|x| x.max(0.0))
        .sum::<f64>()
        .sqrt();
    let a = eig.vector(da - 1);
    let b_scaled = m.transpose().mul_vec(&a.map(|z| z.conj()));
    let s = b_scaled.norm();
    let b = if s > 0.0 {
        b_scaled / real(s)
    } else {
        basis_vector(db, 0)
    };
    (a, b, top, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| {
            c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn rand_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        rand_matrix(rng, n, n).hermitian_part()
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn bell_projector(d: usize) -> ComplexMatrix {
        let n = d * d;
        let mut v = DVector::zeros(n);
        for j in 0..d {
            v[j * d + j] = real(1.0 / (d as f64).sqrt());
        }
        ComplexMatrix::projector(&v)
    }

    #[test]
    fn kron_of_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_basis_projectors() {
        let p0 = ComplexMatrix::matrix_unit(2, 0, 0);
        let p1 = ComplexMatrix::matrix_unit(2, 1, 1);
        let k = kron(&p0, &p1);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(k[(i, j)], real(expected));
            }
        }
    }

    #[test]
    fn kron_trace_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = rand_matrix(&mut rng, 2, 2);
        let b = rand_matrix(&mut rng, 2, 2);
        // direct entrywise oracle
        let mut tr = C64::default();
        for i in 0..2 {
            for k in 0..2 {
                tr += a[(i, i)] * b[(k, k)];
            }
        }
        assert!((kron(&a, &b).trace() - tr).norm() < 1e-14);
        assert!((kron(&a, &b).trace() - a.trace() * b.trace()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let dims = BipartiteDims::new(3, 3).unwrap();
        let rho = partial_trace(&bell_projector(3), dims, Factor::Second).unwrap();
        assert!(rho.distance(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-14);
    }

    #[test]
    fn partial_trace_of_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = rand_matrix(&mut rng, 2, 2);
        let b = rand_matrix(&mut rng, 3, 3);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let ab = kron(&a, &b);
        let first = partial_trace(&ab, dims, Factor::First).unwrap();
        assert!(first.distance(&b.scale(a.trace())) < 1e-13);
        let second = partial_trace(&ab, dims, Factor::Second).unwrap();
        assert!(second.distance(&a.scale(b.trace())) < 1e-13);
    }

    #[test]
    fn partial_trace_of_identity() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        for which in [Factor::First, Factor::Second] {
            let r = partial_trace(&ComplexMatrix::identity(4), dims, which).unwrap();
            assert_eq!(r, ComplexMatrix::identity(2).scale_real(2.0));
        }
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        assert!(matches!(
            partial_trace(&ComplexMatrix::identity(3), dims, Factor::First),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_transpose(&ComplexMatrix::identity(5), dims, Factor::Second).is_err());
    }

    #[test]
    fn partial_transpose_involution_and_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = rand_matrix(&mut rng, 2, 2);
        let b = rand_matrix(&mut rng, 3, 3);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let m = rand_matrix(&mut rng, 6, 6);
        for which in [Factor::First, Factor::Second] {
            let twice =
                partial_transpose(&partial_transpose(&m, dims, which).unwrap(), dims, which)
                    .unwrap();
            assert_eq!(twice, m);
            assert!(
                (partial_transpose(&m, dims, which).unwrap().trace() - m.trace()).norm() < 1e-14
            );
        }
        let pt = partial_transpose(&kron(&a, &b), dims, Factor::Second).unwrap();
        assert!(pt.distance(&kron(&a, &b.transpose())) < 1e-14);
        let pt = partial_transpose(&kron(&a, &b), dims, Factor::First).unwrap();
        assert!(pt.distance(&kron(&a.transpose(), &b)) < 1e-14);
    }

    #[test]
    fn partial_transpose_of_bell_state_spectrum() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let pt = partial_transpose(&bell_projector(2), dims, Factor::Second).unwrap();
        let eig = hermitian_eig(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (x, e) in eig.values.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_of_diagonal() {
        let eig = hermitian_eig(&ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.values.len(), 3);
        for (x, e) in eig.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_bell_projector() {
        let eig = hermitian_eig(&bell_projector(2)).unwrap();
        for (x, e) in eig.values.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_pauli_x() {
        let eig = hermitian_eig(&pauli_x()).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        // phase convention: first component real positive
        let minus = real_vector(&[s, -s]);
        let plus = real_vector(&[s, s]);
        assert!((eig.vector(0) - minus).norm() < 1e-12);
        assert!((eig.vector(1) - plus).norm() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
        assert!(is_psd(&m, PSD_TOL).is_err());
    }

    #[test]
    fn eig_reconstruction_up_to_side_16() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=16 {
            let m = rand_hermitian(&mut rng, n);
            let eig = hermitian_eig(&m).unwrap();
            assert!(eig.reconstruct().distance(&m) <= 1e-10 * m.frobenius_norm());
            let v = eig.vectors.as_na();
            let vd = ComplexMatrix::from_na(v.adjoint() * v);
            assert!(vd.distance(&ComplexMatrix::identity(n)) < 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn ranks() {
        assert_eq!(numerical_rank(&ComplexMatrix::identity(5), None), 5);
        assert_eq!(numerical_rank(&bell_projector(3), None), 1);
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]).unwrap();
        assert_eq!(numerical_rank(&m, None), 1);
        assert_eq!(relative_rank(&m, 1e-9), 1);
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&ComplexMatrix::identity(3), PSD_TOL).unwrap());
        assert!(!is_psd(&ComplexMatrix::from_real_diagonal(&[1.0, -0.1]), 1e-10).unwrap());
    }

    #[test]
    fn hs_inner_properties() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(hs_inner(&i2, &i2).unwrap(), real(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = rand_matrix(&mut rng, 3, 3);
        let b = rand_matrix(&mut rng, 3, 3);
        let ab = hs_inner(&a, &b).unwrap();
        let ba = hs_inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
        assert!((ab - (a.adjoint() * &b).trace()).norm() < 1e-13);
        assert!(hs_inner(&a, &i2).is_err());
    }

    #[test]
    fn null_vector_of_wide_matrix() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]]).unwrap();
        let (v, s) = null_vector(&m);
        assert!(s < 1e-12);
        assert!(m.mul_vec(&v).norm() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_factors_of_product_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = rand_matrix(&mut rng, 2, 1).as_na().column(0).into_owned();
        let b = rand_matrix(&mut rng, 3, 1).as_na().column(0).into_owned();
        let v = kron_vec(&a, &b);
        let (ua, ub, w, rest) = product_factors(&v, BipartiteDims::new(2, 3).unwrap());
        assert!(rest < 1e-12);
        assert!((w - v.norm_squared()).abs() < 1e-12);
        let rebuilt = ComplexMatrix::projector(&kron_vec(&ua, &ub)).scale_real(w);
        assert!(rebuilt.distance(&ComplexMatrix::projector(&v)) < 1e-12);
    }
}
