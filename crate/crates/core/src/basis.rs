//! Hermitian operator bases, Bloch coordinates and the real transfer matrix
//! `t_jk = Tr(G_j Phi(G_k))` of a channel.

use nalgebra::DMatrix;

use crate::channels::{HolevoChannel, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{c64, hs_inner, real, ComplexMatrix};
use crate::states::DensityMatrix;

/// Imaginary parts of transfer-matrix entries up to this size are dropped.
pub const IMAG_TOL: f64 = 1e-10;

/// Hilbert-Schmidt orthonormal Hermitian basis with `G_0 = I/sqrt(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Real coordinates `Tr(G_j m)` of a Hermitian matrix.
    pub fn coordinates(&self, m: &ComplexMatrix) -> Result<Vec<f64>> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "basis dimension {} vs {}x{} matrix",
                self.dim,
                m.rows(),
                m.cols()
            )));
        }
        self.elements
            .iter()
            .map(|g| {
                let z = hs_inner(g, m)?;
                if z.im.abs() > IMAG_TOL * (1.0 + m.frobenius_norm()) {
                    return Err(Error::NotHermitian {
                        deviation: z.im.abs(),
                        tolerance: IMAG_TOL,
                    });
                }
                Ok(z.re)
            })
            .collect()
    }

    /// `sum_j x_j G_j`.
    pub fn synthesize(&self, x: &[f64]) -> Result<ComplexMatrix> {
        if x.len() != self.elements.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for a basis of {} elements",
                x.len(),
                self.elements.len()
            )));
        }
        Ok(self
            .elements
            .iter()
            .zip(x)
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, (g, &c)| {
                acc + g.scale_real(c)
            }))
    }
}

/// Generalized Gell-Mann basis: identity, symmetric off-diagonals for `j < k`
/// in lexicographic order, the matching antisymmetric ones, then the
/// traceless diagonal ladder.
pub fn gell_mann_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "operator basis needs d >= 2, got {d}"
        )));
    }
    let r2 = 1.0 / 2f64.sqrt();
    let mut elements = vec![ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())];
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (j + 1..d).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m.set(j, k, real(r2));
        m.set(k, j, real(r2));
        elements.push(m);
    }
    for &(j, k) in &pairs {
        // i(|k><j| - |j><k|) / sqrt(2)
        let mut m = ComplexMatrix::zeros(d, d);
        m.set(k, j, c64(0.0, r2));
        m.set(j, k, c64(0.0, -r2));
        elements.push(m);
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let diag: Vec<f64> = (0..d)
            .map(|m| match m.cmp(&l) {
                std::cmp::Ordering::Less => norm,
                std::cmp::Ordering::Equal => -(l as f64) * norm,
                std::cmp::Ordering::Greater => 0.0,
            })
            .collect();
        elements.push(ComplexMatrix::from_real_diagonal(&diag));
    }
    Ok(OperatorBasis { dim: d, elements })
}

/// Coordinates `w_j = Tr(rho G_j)`, so `rho = sum_j w_j G_j` and
/// `w_0 = d^{-1/2}`.
pub fn bloch_vector(rho: &DensityMatrix, basis: &OperatorBasis) -> Result<Vec<f64>> {
    basis.coordinates(rho.matrix())
}

/// Real `d^2 x d^2` matrix of a channel in an operator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    dim: usize,
    t: DMatrix<f64>,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.t
    }

    /// Distance of the first row from `(1, 0, ..., 0)`; zero for
    /// trace-preserving maps.
    pub fn first_row_residual(&self) -> f64 {
        let n = self.t.ncols();
        (0..n)
            .map(|k| {
                let target = if k == 0 { 1.0 } else { 0.0 };
                (self.t[(0, k)] - target).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Numerical rank with singular values above `1e-10 * sigma_max`.
    pub fn rank(&self) -> usize {
        let s = self.t.clone().svd(false, false).singular_values;
        let top = s.max();
        s.iter().filter(|&&x| x > 1e-10 * top).count()
    }

    /// `sum_{j >= 1} |t_jj|`.
    pub fn diagonal_sum(&self) -> f64 {
        (1..self.t.nrows()).map(|j| self.t[(j, j)].abs()).sum()
    }

    /// Maps Bloch coordinates of an input state to those of the output.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        (&self.t * nalgebra::DVector::from_column_slice(w))
            .iter()
            .copied()
            .collect()
    }
}

/// `t_jk = Tr(G_j Phi(G_k))`; entries with imaginary part above 1e-10
/// indicate a map that does not preserve Hermiticity.
pub fn transfer_matrix(
    channel: &impl QuantumChannel,
    basis: &OperatorBasis,
) -> Result<TransferMatrix> {
    let d = basis.dim();
    if channel.dim_in() != d || channel.dim_out() != d {
        return Err(Error::DimensionMismatch(format!(
            "channel {} -> {} vs basis dimension {d}",
            channel.dim_in(),
            channel.dim_out()
        )));
    }
    let n = basis.len();
    let mut t = DMatrix::zeros(n, n);
    for (k, gk) in basis.elements().iter().enumerate() {
        let image = channel.map(gk)?;
        for (j, gj) in basis.elements().iter().enumerate() {
            let z = hs_inner(gj, &image)?;
            if z.im.abs() > IMAG_TOL {
                return Err(Error::NotHermiticityPreserving(z.im.abs()));
            }
            t[(j, k)] = z.re;
        }
    }
    Ok(TransferMatrix { dim: d, t })
}

/// State and effect coordinates of a Holevo form: column `k` of `w` holds
/// `Tr(G_j R_k)`, column `k` of `u` holds `Tr(F_k G_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WuFactors {
    pub w: DMatrix<f64>,
    pub u: DMatrix<f64>,
}

impl WuFactors {
    /// `T = W U^T`.
    pub fn product(&self) -> DMatrix<f64> {
        &self.w * self.u.transpose()
    }
}

pub fn wu_factorization(h: &HolevoChannel, basis: &OperatorBasis) -> Result<WuFactors> {
    let n = basis.len();
    let mut w = DMatrix::zeros(n, h.len());
    let mut u = DMatrix::zeros(n, h.len());
    for (k, p) in h.pairs().iter().enumerate() {
        let wk = basis.coordinates(p.state.matrix())?;
        let uk = basis.coordinates(&p.effect)?;
        for j in 0..n {
            w[(j, k)] = wk[j];
            u[(j, k)] = uk[j];
        }
    }
    Ok(WuFactors { w, u })
}

/// Qubit-only necessary condition for entanglement breaking,
/// `sum_{j >= 1} |t_jj| <= 1`. Returns whether it holds and the sum.
pub fn ebt_diag_necessary(t: &TransferMatrix) -> Result<(bool, f64)> {
    if t.dim() != 2 {
        return Err(Error::UnsupportedDimension(t.dim()));
    }
    let sum = t.diagonal_sum();
    Ok((sum <= 1.0 + 1e-10, sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        compose, convex_combination, depolarizing, identity_channel, point_channel, Channel,
    };
    use crate::extremality::tetrahedron_channel;
    use crate::linalg::hs_inner;
    use crate::states::{random_density, random_unitary};

    #[test]
    fn gell_mann_is_orthonormal_and_traceless() {
        for d in 2..=4 {
            let b = gell_mann_basis(d).unwrap();
            assert_eq!(b.len(), d * d);
            for (j, gj) in b.elements().iter().enumerate() {
                assert!(gj.hermiticity_deviation() < 1e-15);
                if j > 0 {
                    assert!(gj.trace().norm() < 1e-14);
                }
                for (k, gk) in b.elements().iter().enumerate() {
                    let expected = if j == k { 1.0 } else { 0.0 };
                    assert!((hs_inner(gj, gk).unwrap() - real(expected)).norm() < 1e-12);
                }
            }
        }
        assert!(gell_mann_basis(1).is_err());
    }

    #[test]
    fn qubit_basis_is_scaled_paulis() {
        let b = gell_mann_basis(2).unwrap();
        let r2 = 1.0 / 2f64.sqrt();
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, r2], &[r2, 0.0]]).unwrap();
        let sy = ComplexMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.0, -r2)],
            vec![c64(0.0, r2), c64(0.0, 0.0)],
        ])
        .unwrap();
        let sz = ComplexMatrix::from_real_diagonal(&[r2, -r2]);
        assert!(b.elements()[1].distance(&sx) < 1e-15);
        assert!(b.elements()[2].distance(&sy) < 1e-15);
        assert!(b.elements()[3].distance(&sz) < 1e-15);
    }

    #[test]
    fn bloch_vectors() {
        let b = gell_mann_basis(3).unwrap();
        let w = bloch_vector(&DensityMatrix::maximally_mixed(3), &b).unwrap();
        assert!((w[0] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(w[1..].iter().all(|x| x.abs() < 1e-15));

        let b2 = gell_mann_basis(2).unwrap();
        let zero = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let w = bloch_vector(&zero, &b2).unwrap();
        let r2 = 1.0 / 2f64.sqrt();
        for (x, y) in w.iter().zip([r2, 0.0, 0.0, r2]) {
            assert!((x - y).abs() < 1e-15);
        }

        let rho = random_density(3, 2, 5).unwrap();
        let w = bloch_vector(&rho, &b).unwrap();
        assert!(b.synthesize(&w).unwrap().distance(rho.matrix()) < 1e-12);
        let sq: f64 = w.iter().map(|x| x * x).sum();
        assert!((sq - rho.purity()).abs() < 1e-12);
        assert!(w[1..].iter().map(|x| x * x).sum::<f64>() <= 2.0 / 3.0 + 1e-10);
    }

    #[test]
    fn depolarizing_transfer_matrix_is_diagonal() {
        let b = gell_mann_basis(2).unwrap();
        let t = transfer_matrix(&depolarizing(2, 0.5).unwrap(), &b).unwrap();
        let expected =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, 0.5, 0.5]));
        assert!((t.matrix() - expected).norm() < 1e-12);
        let (ok, sum) = ebt_diag_necessary(&t).unwrap();
        assert!(!ok && (sum - 1.5).abs() < 1e-12);
        let (ok, sum) =
            ebt_diag_necessary(&transfer_matrix(&depolarizing(2, 0.25).unwrap(), &b).unwrap())
                .unwrap();
        assert!(ok && (sum - 0.75).abs() < 1e-12);
    }

    #[test]
    fn identity_and_point_transfer_matrices() {
        let b = gell_mann_basis(2).unwrap();
        let t = transfer_matrix(&identity_channel(2), &b).unwrap();
        assert!((t.matrix() - DMatrix::identity(4, 4)).norm() < 1e-14);
        let (ok, sum) = ebt_diag_necessary(&t).unwrap();
        assert!(!ok && (sum - 3.0).abs() < 1e-12);

        let t = transfer_matrix(
            &point_channel(DensityMatrix::maximally_mixed(2), 2).unwrap(),
            &b,
        )
        .unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        expected[(0, 0)] = 1.0;
        assert!((t.matrix() - expected).norm() < 1e-14);
        assert!(t.first_row_residual() < 1e-14);
    }

    #[test]
    fn transfer_matrix_consistent_with_apply() {
        let b = gell_mann_basis(3).unwrap();
        let phi = tetrahedron_channel();
        let t = transfer_matrix(&phi, &b).unwrap();
        let rho = random_density(3, 3, 2).unwrap();
        let lhs = bloch_vector(&phi.apply(&rho).unwrap(), &b).unwrap();
        let rhs = t.apply(&bloch_vector(&rho, &b).unwrap());
        assert!(lhs.iter().zip(&rhs).all(|(x, y)| (x - y).abs() < 1e-9));
        assert!(ebt_diag_necessary(&t).is_err());
    }

    #[test]
    fn wu_product_matches_transfer_matrix() {
        let b = gell_mann_basis(3).unwrap();
        let phi = tetrahedron_channel();
        let t = transfer_matrix(&phi, &b).unwrap();
        let wu = wu_factorization(&phi, &b).unwrap();
        assert!((wu.product() - t.matrix()).norm() < 1e-10);
    }

    #[test]
    fn composition_is_matrix_product() {
        let b = gell_mann_basis(2).unwrap();
        let phi: Channel = depolarizing(2, 0.3).unwrap().into();
        let ups: Channel = crate::channels::unitary_channel(random_unitary(2, 4))
            .unwrap()
            .into();
        let t = transfer_matrix(&compose(&phi, &ups).unwrap(), &b).unwrap();
        let tp = transfer_matrix(&phi, &b).unwrap();
        let tu = transfer_matrix(&ups, &b).unwrap();
        assert!((t.matrix() - tp.matrix() * tu.matrix()).norm() < 1e-9);
    }

    #[test]
    fn convex_combination_is_linear() {
        let b = gell_mann_basis(2).unwrap();
        let p1 = point_channel(random_density(2, 2, 1).unwrap(), 2).unwrap();
        let p2 = point_channel(random_density(2, 1, 2).unwrap(), 2).unwrap();
        let mix = convex_combination(0.3, &p1, &p2).unwrap();
        let t = transfer_matrix(&mix, &b).unwrap();
        let expected = transfer_matrix(&p1, &b).unwrap().into_matrix() * 0.3
            + transfer_matrix(&p2, &b).unwrap().into_matrix() * 0.7;
        assert!((t.matrix() - expected).norm() < 1e-12);
    }
}
