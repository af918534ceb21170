//! Dense Hermitian matrices and their eigendecompositions.
//!
//! Every spectral quantity in the crate (Gram matrices, localization
//! operators, finite-section frame operators) goes through
//! [`HermitianMatrix`] and [`eigh`]. Real-valued matrices take a real
//! symmetric fast path; the returned spectrum is the same either way.

use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest matrix order accepted by any assembly routine.
pub const MATRIX_SIZE_CAP: usize = 4096;

/// Relative tolerance for the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense complex matrix that is Hermitian up to [`HERMITIAN_TOL`].
#[derive(Clone, Debug)]
pub struct HermitianMatrix {
    data: Mat<Complex64>,
}

impl PartialEq for HermitianMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order()
            && (0..self.order()).all(|j| (0..self.order()).all(|i| self.get(i, j) == other.get(i, j)))
    }
}

impl HermitianMatrix {
    /// Wraps `data` after checking that it is square, within the size cap
    /// and Hermitian.
    pub fn new(data: Mat<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::input(format!(
                "matrix is {}x{}, expected square",
                data.nrows(),
                data.ncols()
            )));
        }
        check_cap(data.nrows())?;
        let scale = max_abs(&data);
        let mut defect: f64 = 0.0;
        for j in 0..data.ncols() {
            for i in 0..=j {
                defect = defect.max((data[(i, j)] - data[(j, i)].conj()).norm());
            }
        }
        if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { defect, scale });
        }
        Ok(Self { data })
    }

    /// Assembles `M[i][j] = entry(i, j)` on the upper triangle and fills the
    /// lower triangle by conjugation, so the result is exactly Hermitian.
    /// Diagonal entries are forced real.
    pub fn from_upper_fn<F>(order: usize, entry: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Complex64 + Sync,
    {
        check_cap(order)?;
        let columns: Vec<Vec<Complex64>> = (0..order)
            .into_par_iter()
            .map(|j| (0..=j).map(|i| entry(i, j)).collect())
            .collect();
        let mut data = Mat::<Complex64>::zeros(order, order);
        for (j, column) in columns.into_iter().enumerate() {
            for (i, value) in column.into_iter().enumerate() {
                if i == j {
                    data[(i, i)] = Complex64::new(value.re, 0.0);
                } else {
                    data[(i, j)] = value;
                    data[(j, i)] = value.conj();
                }
            }
        }
        Ok(Self { data })
    }

    pub fn order(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &Mat<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> Mat<Complex64> {
        self.data
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.order()).map(|i| self.data[(i, i)].re).sum()
    }

    pub fn is_real(&self) -> bool {
        let n = self.order();
        (0..n).all(|j| (0..n).all(|i| self.data[(i, j)].im == 0.0))
    }

    /// `D M D` for a diagonal `D`.
    pub fn scale_symmetric(&self, diagonal: &[f64]) -> Result<Self> {
        if diagonal.len() != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                got: diagonal.len(),
            });
        }
        let n = self.order();
        let data = Mat::from_fn(n, n, |i, j| self.data[(i, j)] * (diagonal[i] * diagonal[j]));
        Ok(Self { data })
    }

    /// `M + ridge·I`.
    pub fn add_ridge(&self, ridge: f64) -> Self {
        let mut data = self.data.clone();
        for i in 0..self.order() {
            data[(i, i)] += Complex64::from(ridge);
        }
        Self { data }
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn principal(&self, indices: &[usize]) -> Self {
        let data = Mat::from_fn(indices.len(), indices.len(), |i, j| self.data[(indices[i], indices[j])]);
        Self { data }
    }

    /// Debug dump: the order as a little-endian `u64`, then the entries
    /// row-major as little-endian `f64` pairs `(re, im)`.
    pub fn write_le<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(&(self.order() as u64).to_le_bytes())?;
        for i in 0..self.order() {
            for j in 0..self.order() {
                let z = self.data[(i, j)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Inverse of [`HermitianMatrix::write_le`].
    pub fn read_le(bytes: &[u8]) -> Result<Self> {
        let word = |at: usize| -> Result<[u8; 8]> {
            bytes
                .get(at..at + 8)
                .map(|b| b.try_into().expect("slice of length 8"))
                .ok_or_else(|| Error::input("truncated matrix dump"))
        };
        let order = u64::from_le_bytes(word(0)?) as usize;
        check_cap(order)?;
        let expected = 8 + 16 * order * order;
        if bytes.len() != expected {
            return Err(Error::input(format!(
                "matrix dump has {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let mut data = Mat::<Complex64>::zeros(order, order);
        for i in 0..order {
            for j in 0..order {
                let at = 8 + 16 * (i * order + j);
                data[(i, j)] = Complex64::new(f64::from_le_bytes(word(at)?), f64::from_le_bytes(word(at + 8)?));
            }
        }
        Self::new(data)
    }
}

fn check_cap(order: usize) -> Result<()> {
    if order > MATRIX_SIZE_CAP {
        Err(Error::MatrixTooLarge {
            order,
            cap: MATRIX_SIZE_CAP,
        })
    } else {
        Ok(())
    }
}

fn max_abs(m: &Mat<Complex64>) -> f64 {
    let mut acc: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc = acc.max(m[(i, j)].norm());
        }
    }
    acc
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
///
/// Column `k` of `vectors` is a unit eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Mat<Complex64>,
}

impl Eigen {
    /// `max_k ‖M v_k − λ_k v_k‖`.
    pub fn max_residual(&self, m: &HermitianMatrix) -> f64 {
        let mv = m.as_matrix() * &self.vectors;
        let n = self.vectors.nrows();
        (0..self.values.len())
            .map(|k| {
                (0..n)
                    .map(|i| (mv[(i, k)] - self.vectors[(i, k)] * self.values[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn real_part(m: &HermitianMatrix) -> Mat<f64> {
    let n = m.order();
    Mat::from_fn(n, n, |i, j| m.get(i, j).re)
}

/// Ascending eigenvalues of `m`.
pub fn eigvalsh(m: &HermitianMatrix) -> Vec<f64> {
    if m.order() == 0 {
        return Vec::new();
    }
    let mut values = if m.is_real() {
        real_part(m).self_adjoint_eigenvalues(Side::Lower)
    } else {
        m.as_matrix().self_adjoint_eigenvalues(Side::Lower)
    }
    .expect("self-adjoint eigensolver converges on finite input");
    values.sort_by(f64::total_cmp);
    values
}

/// Full eigendecomposition of `m`, eigenvalues ascending (ties keep the
/// solver's index order).
pub fn eigh(m: &HermitianMatrix) -> Eigen {
    let n = m.order();
    if n == 0 {
        return Eigen {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        };
    }
    let (raw_values, raw_vectors): (Vec<f64>, Mat<Complex64>) = if m.is_real() {
        let eig = real_part(m)
            .self_adjoint_eigen(Side::Lower)
            .expect("self-adjoint eigensolver converges on finite input");
        let s = eig.S().column_vector();
        let u = eig.U();
        (
            (0..n).map(|k| s[k]).collect(),
            Mat::from_fn(n, n, |i, j| Complex64::new(u[(i, j)], 0.0)),
        )
    } else {
        let eig = m
            .as_matrix()
            .self_adjoint_eigen(Side::Lower)
            .expect("self-adjoint eigensolver converges on finite input");
        let s = eig.S().column_vector();
        ((0..n).map(|k| s[k].re).collect(), eig.U().to_owned())
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let values = order.iter().map(|&k| raw_values[k]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| raw_vectors[(i, order[j])]);
    Eigen { values, vectors }
}

/// Solves `M X = B` for Hermitian positive definite `M` given its
/// eigendecomposition, refusing when `λ_min(M) ≤ floor`.
pub fn solve_hpd(eigen: &Eigen, rhs: &Mat<Complex64>, floor: f64) -> Result<Mat<Complex64>> {
    let lambda_min = eigen.values.first().copied().unwrap_or(0.0);
    if lambda_min <= floor {
        return Err(Error::Singular { lambda_min, floor });
    }
    let v = &eigen.vectors;
    let mut coeffs = v.adjoint() * rhs;
    for (k, &lambda) in eigen.values.iter().enumerate() {
        for c in 0..coeffs.ncols() {
            coeffs[(k, c)] /= lambda;
        }
    }
    Ok(v * &coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        HermitianMatrix::from_upper_fn(n, |i, j| entries[i * n + j]).unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let m = HermitianMatrix::new(Mat::identity(5, 5)).unwrap();
        assert_eq!(eigvalsh(&m), vec![1.0; 5]);
    }

    #[test]
    fn unitary_conjugation_preserves_spectrum() {
        // unitary factor from a random Hermitian matrix's eigenvectors
        let u = eigh(&random_hermitian(3, 11)).vectors;
        let d = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::from([3.0, 1.0, 2.0][i])
            } else {
                Complex64::from(0.0)
            }
        });
        let a = &u * &d * u.adjoint();
        let m = HermitianMatrix::from_upper_fn(3, |i, j| a[(i, j)]).unwrap();
        let values = eigvalsh(&m);
        for (got, want) in values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = Mat::<Complex64>::identity(2, 2);
        a[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(matches!(HermitianMatrix::new(a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_oversized() {
        let err = HermitianMatrix::from_upper_fn(MATRIX_SIZE_CAP + 1, |_, _| Complex64::from(0.0));
        assert!(matches!(err, Err(Error::MatrixTooLarge { .. })));
    }

    #[test]
    fn residual_contract_on_random_hermitian() {
        let n = 40;
        let m = random_hermitian(n, 5);
        let eig = eigh(&m);
        assert!(eig.max_residual(&m) <= 1e-10 * m.max_abs() * n as f64);
        let sum: f64 = eig.values.iter().sum();
        assert!((sum - m.trace()).abs() <= 1e-8 * n as f64 * m.max_abs());
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let plain = eigvalsh(&m);
        for (a, b) in plain.iter().zip(&eig.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn real_fast_path_matches_complex_path() {
        let n = 12;
        let real = HermitianMatrix::from_upper_fn(n, |i, j| Complex64::from(1.0 / (1.0 + (i + j) as f64))).unwrap();
        assert!(real.is_real());
        let eig = eigh(&real);
        assert!(eig.max_residual(&real) <= 1e-10 * real.max_abs() * n as f64);
    }

    #[test]
    fn dump_roundtrip() {
        let m = HermitianMatrix::from_upper_fn(4, |i, j| Complex64::new((i + j) as f64, j as f64 - i as f64)).unwrap();
        let mut bytes = Vec::new();
        m.write_le(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 8 + 16 * 16);
        assert_eq!(HermitianMatrix::read_le(&bytes).unwrap(), m);
        assert!(HermitianMatrix::read_le(&bytes[..20]).is_err());
    }

    #[test]
    fn hpd_solve_inverts_and_reports_lambda_min() {
        let m = random_hermitian(6, 3).add_ridge(10.0);
        let eig = eigh(&m);
        let x = solve_hpd(&eig, &Mat::identity(6, 6), 0.0).unwrap();
        let prod = m.as_matrix() * &x;
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - want).norm() < 1e-12);
            }
        }
        let tiny = HermitianMatrix::new(Mat::identity(2, 2)).unwrap().scale_symmetric(&[1e-7, 1e-7]).unwrap();
        let err = solve_hpd(&eigh(&tiny), &Mat::identity(2, 2), 1e-12).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }
}
