//! Validated density matrices, pure states and POVMs, plus seeded random
//! generators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, hermitian_eig, psd_inv_sqrt, real, ComplexMatrix, ComplexVector, C64, PSD_TOL,
};

/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Completeness tolerance for POVMs.
pub const POVM_TOL: f64 = 1e-10;
/// Norm tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;

/// Hermitian, unit-trace, positive semi-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let eig = hermitian_eig(&mat)?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        if eig.min() < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min(),
            });
        }
        Ok(DensityMatrix { mat })
    }

    /// Normalizes a nonzero PSD matrix to unit trace first.
    pub fn from_unnormalized(mat: ComplexMatrix) -> Result<Self> {
        let tr = mat.trace().re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(mat.scale_real(1.0 / tr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            mat: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    pub fn pure(state: &PureState) -> Self {
        DensityMatrix {
            mat: state.projector(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// Unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: ComplexVector,
}

impl PureState {
    pub fn new(vec: ComplexVector) -> Result<Self> {
        if vec.is_empty() {
            return Err(Error::InvalidDimension("empty state vector".into()));
        }
        let n = vec.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState { vec })
    }

    pub fn normalized(vec: ComplexVector) -> Result<Self> {
        let n = vec.norm();
        if n <= 1e-300 || !n.is_finite() || vec.is_empty() {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState { vec: vec / real(n) })
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vec
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.vec)
    }

    pub fn conj(&self) -> PureState {
        PureState {
            vec: self.vec.map(|z| z.conj()),
        }
    }
}

/// Positive operator valued measure: PSD elements summing to the identity.
/// Elements are stored exactly as given.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<ComplexMatrix> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Checks positivity, non-vanishing elements and completeness.
pub fn validate_povm(elements: Vec<ComplexMatrix>) -> Result<Povm> {
    let first = elements
        .first()
        .ok_or_else(|| Error::InvalidParameter("POVM needs at least one element".into()))?;
    let d = first.rows();
    let mut sum = ComplexMatrix::zeros(d, d);
    for (index, f) in elements.iter().enumerate() {
        if f.rows() != d || f.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "POVM element {index} is {}x{}, expected {d}x{d}",
                f.rows(),
                f.cols()
            )));
        }
        if f.frobenius_norm() <= 1e-12 {
            return Err(Error::ZeroPovmElement(index));
        }
        let min_eigenvalue = hermitian_eig(f)?.min();
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::PovmElementNotPsd {
                index,
                min_eigenvalue,
            });
        }
        sum = sum + f;
    }
    let residual = sum.distance(&ComplexMatrix::identity(d));
    if residual > POVM_TOL {
        return Err(Error::IncompleteSum(residual));
    }
    Ok(Povm { elements })
}

/// `d^{-1/2} sum_j |j> (x) |j>`.
pub fn maximally_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    let mut v = ComplexVector::zeros(d * d);
    let amp = real(1.0 / (d as f64).sqrt());
    for j in 0..d {
        v[j * d + j] = amp;
    }
    PureState::new(v)
}

/// Generator behind every seeded constructor in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexVector {
    ginibre(rng, d, 1).as_na().column(0).into_owned()
}

pub fn random_pure_state_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PureState {
    PureState::normalized(random_vector(rng, d)).expect("Gaussian vector is nonzero")
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let qr = ginibre(rng, d, d).into_na().qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z: C64 = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                real(1.0)
            }
        } else {
            C64::default()
        }
    });
    ComplexMatrix::from_na(q * phases)
}

pub fn random_density_with<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    rank: usize,
) -> Result<DensityMatrix> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!(
            "random density needs 1 <= rank <= d, got rank {rank}, d {d}"
        )));
    }
    let g = ginibre(rng, d, rank);
    let w = (&g * &g.adjoint()).hermitian_part();
    DensityMatrix::from_unnormalized(w)
}

pub fn random_povm_with<R: Rng + ?Sized>(rng: &mut R, d: usize, n_elements: usize) -> Result<Povm> {
    if d == 0 || n_elements == 0 {
        return Err(Error::InvalidParameter(format!(
            "random POVM needs d >= 1 and at least one element, got d {d}, n {n_elements}"
        )));
    }
    let raw: Vec<ComplexMatrix> = (0..n_elements)
        .map(|_| {
            let g = ginibre(rng, d, d);
            (&g * &g.adjoint()).hermitian_part()
        })
        .collect();
    let total = raw
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, f| acc + f);
    let s = psd_inv_sqrt(&total, 1e-14)?;
    let elements = raw
        .iter()
        .map(|f| (&(&s * f) * &s).hermitian_part())
        .collect();
    validate_povm(elements)
}

/// Deterministic random density matrix of the given rank (Wishart construction).
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut seeded_rng(seed), d, rank)
}

/// Deterministic random POVM, `F_k -> S^{-1/2} F_k S^{-1/2}` with `S = sum F_k`.
pub fn random_povm(d: usize, n_elements: usize, seed: u64) -> Result<Povm> {
    random_povm_with(&mut seeded_rng(seed), d, n_elements)
}

pub fn random_pure_state(d: usize, seed: u64) -> PureState {
    random_pure_state_with(&mut seeded_rng(seed), d)
}

pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    random_unitary_with(&mut seeded_rng(seed), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{numerical_rank, partial_trace, trace_distance, BipartiteDims, Factor};

    #[test]
    fn maximally_entangled_components() {
        let b2 = maximally_entangled(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expected = [s, 0.0, 0.0, s];
        for (z, e) in b2.vector().iter().zip(expected) {
            assert!((z - real(e)).norm() < 1e-15);
        }
        let b3 = maximally_entangled(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        for (i, z) in b3.vector().iter().enumerate() {
            let e = if i % 4 == 0 { s } else { 0.0 };
            assert!((z - real(e)).norm() < 1e-15);
        }
        let marginal = partial_trace(
            &b3.projector(),
            BipartiteDims::new(3, 3).unwrap(),
            Factor::Second,
        )
        .unwrap();
        assert!(marginal.distance(DensityMatrix::maximally_mixed(3).matrix()) < 1e-14);
        assert!(maximally_entangled(1).is_err());
    }

    #[test]
    fn von_neumann_povm_is_valid() {
        let p0 = ComplexMatrix::matrix_unit(2, 0, 0);
        let p1 = ComplexMatrix::matrix_unit(2, 1, 1);
        assert_eq!(validate_povm(vec![p0, p1]).unwrap().len(), 2);
    }

    #[test]
    fn povm_error_paths() {
        let p0 = ComplexMatrix::matrix_unit(2, 0, 0);
        let p1 = ComplexMatrix::matrix_unit(2, 1, 1);
        assert!(matches!(
            validate_povm(vec![p0.clone()]),
            Err(Error::IncompleteSum(_))
        ));
        let neg = ComplexMatrix::from_real_diagonal(&[1.1, 0.0]);
        let fix = ComplexMatrix::from_real_diagonal(&[-0.1, 1.0]);
        assert!(matches!(
            validate_povm(vec![neg, fix]),
            Err(Error::PovmElementNotPsd { index: 1, .. })
        ));
        assert!(matches!(
            validate_povm(vec![p0.clone(), p1.clone(), ComplexMatrix::zeros(2, 2)]),
            Err(Error::ZeroPovmElement(2))
        ));
        assert!(matches!(
            validate_povm(vec![p0, ComplexMatrix::identity(3)]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(validate_povm(vec![]).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.3, 0.7])).is_ok());
        let not_square = ComplexMatrix::zeros(2, 3);
        assert!(DensityMatrix::new(not_square).is_err());
    }

    #[test]
    fn pure_state_validation() {
        assert!(PureState::new(crate::linalg::real_vector(&[1.0, 1.0])).is_err());
        assert!(PureState::normalized(crate::linalg::real_vector(&[0.0, 0.0])).is_err());
        let s = PureState::normalized(crate::linalg::real_vector(&[3.0, 4.0])).unwrap();
        assert!((s.vector().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_density_is_deterministic() {
        assert_eq!(
            random_density(3, 3, 7).unwrap(),
            random_density(3, 3, 7).unwrap()
        );
        assert_ne!(
            random_density(3, 3, 7).unwrap(),
            random_density(3, 3, 8).unwrap()
        );
    }

    #[test]
    fn random_density_has_requested_rank() {
        for d in 1..=5 {
            for r in 1..=d {
                let rho = random_density(d, r, (d * 10 + r) as u64).unwrap();
                assert_eq!(numerical_rank(rho.matrix(), Some(1e-12)), r);
            }
        }
        assert!(random_density(3, 0, 1).is_err());
        assert!(random_density(3, 4, 1).is_err());
    }

    #[test]
    fn random_povm_is_valid() {
        let p = random_povm(2, 5, 11).unwrap();
        assert_eq!(p.len(), 5);
        assert!(validate_povm(p.into_elements()).is_ok());
        assert!(
            random_povm(3, 1, 2).unwrap().elements()[0].distance(&ComplexMatrix::identity(3))
                < 1e-12
        );
        assert!(random_povm(3, 0, 2).is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(4, 3);
        assert!((&u.adjoint() * &u).distance(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn purity_matches_basis_expansion_bound() {
        for seed in 0..20 {
            let rho = random_density(3, 1 + (seed as usize % 3), seed).unwrap();
            assert!(rho.purity() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn random_density_mean_is_maximally_mixed() {
        let d = 3;
        let mut mean = ComplexMatrix::zeros(d, d);
        for seed in 0..1000 {
            mean = mean + random_density(d, d, seed).unwrap().matrix();
        }
        let mean = mean.scale_real(1.0 / 1000.0);
        let td = trace_distance(&mean, DensityMatrix::maximally_mixed(d).matrix()).unwrap();
        assert!(td < 0.1, "trace distance {td}");
    }
}
