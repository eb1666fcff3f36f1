//! High-precision symmetric positive definite linear algebra: energy norms,
//! dense spectral quantities, direct solves and the structural constants that
//! feed the rounding-error bounds.

use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::precision::PrecisionFormat;
use crate::sparse::CsrMatrix;

const EIGEN_MAX_ITER: usize = 10_000;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(w: &[f64]) -> f64 {
    dot(w, w).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Eigendecomposition `A = Q diag(lambda) Q^t`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Q diag(f(lambda)) Q^t`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let s = f(l);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * q.transpose()
    }
}

pub fn symmetric_spectrum(m: &DMatrix<f64>) -> Result<Spectrum> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues =
        DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(m.nrows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Largest eigenvalue magnitude of a symmetric matrix.
pub fn spectral_norm(k: &DMatrix<f64>) -> Result<f64> {
    if !k.is_square() {
        return operator_norm(k);
    }
    let s = symmetric_spectrum(&symmetrize(k))?;
    Ok(s.lambda_min().abs().max(s.lambda_max().abs()))
}

/// Largest singular value of an arbitrary dense matrix.
pub fn operator_norm(k: &DMatrix<f64>) -> Result<f64> {
    if k.is_empty() {
        return Ok(0.0);
    }
    let svd = nalgebra::SVD::try_new(k.clone(), false, false, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    Ok(svd.singular_values.max())
}

fn symmetrize(k: &DMatrix<f64>) -> DMatrix<f64> {
    (k + k.transpose()) * 0.5
}

/// `|| |K| ||`, the spectral norm of the entrywise absolute value.
pub fn abs_matrix_norm(k: &CsrMatrix) -> f64 {
    k.abs_norm()
}

/// `(m + 1) / (1 - (m + 1) eps)` for the format's unit roundoff.
pub fn mdot_plus(m: usize, fmt: PrecisionFormat) -> Result<f64> {
    mdot_plus_eps(m, fmt.unit_roundoff())
}

pub fn mdot_plus_eps(m: usize, eps: f64) -> Result<f64> {
    let m1 = (m + 1) as f64;
    let denom = 1.0 - m1 * eps;
    if denom <= 0.0 {
        return Err(Error::PrecisionTooLow(m1 * eps));
    }
    Ok(m1 / denom)
}

/// Nonzero count and absolute norm of one operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorConstants {
    /// Maximum nonzeros per row (or column, for prolongations).
    pub m: usize,
    /// `|| |K| ||`.
    pub eta_abs: f64,
}

impl OperatorConstants {
    pub fn mdot_plus(&self, fmt: PrecisionFormat) -> Result<f64> {
        mdot_plus(self.m, fmt)
    }
}

/// Sparse symmetric positive definite matrix. Positive definiteness is
/// established at construction by a dense Cholesky factorization, which is
/// kept for direct solves. The eigendecomposition is computed on first use.
#[derive(Debug, Clone)]
pub struct SparseSpd {
    matrix: CsrMatrix,
    cholesky: Cholesky<f64, Dyn>,
    spectrum: OnceLock<Spectrum>,
}

impl SparseSpd {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSpd(format!(
                "{}x{} is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::NotSpd("empty matrix".into()));
        }
        if !matrix.is_symmetric(0.0) {
            return Err(Error::NotSpd("matrix is not symmetric".into()));
        }
        let cholesky = Cholesky::new(matrix.to_dense())
            .ok_or_else(|| Error::NotSpd("Cholesky factorization failed".into()))?;
        Ok(Self {
            matrix,
            cholesky,
            spectrum: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = symmetric_spectrum(&self.to_dense())?;
        if s.lambda_min() <= 0.0 {
            return Err(Error::NotSpd(format!(
                "smallest eigenvalue {} is not positive",
                s.lambda_min()
            )));
        }
        Ok(self.spectrum.get_or_init(|| s))
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.spectrum()?.lambda_max())
    }

    pub fn condition_number(&self) -> Result<f64> {
        let s = self.spectrum()?;
        Ok(s.lambda_max() / s.lambda_min())
    }

    /// `A^{1/2}`.
    pub fn sqrt_dense(&self) -> Result<DMatrix<f64>> {
        Ok(self.spectrum()?.apply_fn(f64::sqrt))
    }

    /// `A^{-1/2}`.
    pub fn inv_sqrt_dense(&self) -> Result<DMatrix<f64>> {
        Ok(self.spectrum()?.apply_fn(|l| 1.0 / l.sqrt()))
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("solve right-hand side", self.dim(), b.len())?;
        let x = self.cholesky.solve(&DVector::from_column_slice(b));
        Ok(x.as_slice().to_vec())
    }

    pub fn solve_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.cholesky.solve(b)
    }

    pub fn energy_norm(&self, w: &[f64]) -> Result<f64> {
        let aw = self.matrix.matvec(w)?;
        let q = dot(&aw, w);
        if q < 0.0 {
            return Err(Error::NotSpd(format!("negative quadratic form {q}")));
        }
        Ok(q.sqrt())
    }

    /// Energy norm of a dense operator, `|| A^{1/2} E A^{-1/2} ||`.
    pub fn energy_operator_norm(&self, e: &DMatrix<f64>) -> Result<f64> {
        operator_norm(&(self.sqrt_dense()? * e * self.inv_sqrt_dense()?))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.matrix.scaled(c))
    }
}

pub fn energy_norm(w: &[f64], a: &SparseSpd) -> Result<f64> {
    a.energy_norm(w)
}

pub fn condition_number(a: &SparseSpd) -> Result<f64> {
    a.condition_number()
}

pub fn solve_spd(a: &SparseSpd, b: &[f64]) -> Result<Vec<f64>> {
    a.solve(b)
}

#[cfg(test)]
#[allow(
    clippy::excessive_precision,
    clippy::field_reassign_with_default,
    clippy::type_complexity
)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn tridiag(n: usize) -> SparseSpd {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSpd::new(CsrMatrix::from_triplets(n, n, t).unwrap()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn energy_norm_examples() {
        let a = tridiag(3);
        assert_eq!(energy_norm(&[0.0; 3], &a).unwrap(), 0.0);
        let id = SparseSpd::new(CsrMatrix::identity(3)).unwrap();
        assert_eq!(energy_norm(&[1.0, 0.0, 0.0], &id).unwrap(), 1.0);
        // ones^t A ones = 2 for the n = 3 stencil
        assert!(close(
            energy_norm(&[1.0; 3], &a).unwrap(),
            2f64.sqrt(),
            1e-15
        ));
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&DMatrix::identity(4, 4)).unwrap(), 1.0);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.5]));
        assert!(close(spectral_norm(&d).unwrap(), 3.0, 1e-15));
        let t = tridiag(3).to_dense();
        assert!(close(spectral_norm(&t).unwrap(), 2.0 + 2f64.sqrt(), 1e-14));
    }

    #[test]
    fn condition_number_examples() {
        let id = SparseSpd::new(CsrMatrix::identity(5)).unwrap();
        assert!(close(condition_number(&id).unwrap(), 1.0, 1e-14));
        let d = SparseSpd::new(CsrMatrix::diagonal(&[4.0, 1.0])).unwrap();
        assert!(close(condition_number(&d).unwrap(), 4.0, 1e-14));
        let s = 2f64.sqrt();
        assert!(close(
            condition_number(&tridiag(3)).unwrap(),
            (2.0 + s) / (2.0 - s),
            1e-13
        ));
        assert!(close((2.0 + s) / (2.0 - s), 5.828427124746190, 1e-15));
    }

    #[test]
    fn abs_matrix_norm_examples() {
        assert!(close(abs_matrix_norm(&CsrMatrix::identity(3)), 1.0, 1e-15));
        assert!(close(
            abs_matrix_norm(&CsrMatrix::identity(3).scaled(-1.0)),
            1.0,
            1e-15
        ));
        assert!(close(
            abs_matrix_norm(tridiag(3).matrix()),
            2.0 + 2f64.sqrt(),
            1e-14
        ));
    }

    #[test]
    fn mdot_plus_examples() {
        let carrier = PrecisionFormat::carrier();
        assert!(close(mdot_plus(3, carrier).unwrap(), 4.0, 1e-15));
        let v = mdot_plus_eps(3, 2f64.powi(-10)).unwrap();
        assert!(close(v, 4.0 / (1.0 - 2f64.powi(-8)), 1e-15));
        assert!(close(v, 4.015686274509804, 1e-15));
        assert!(matches!(
            mdot_plus_eps(1023, 2f64.powi(-10)),
            Err(Error::PrecisionTooLow(_))
        ));
    }

    #[test]
    fn solve_examples() {
        let id = SparseSpd::new(CsrMatrix::identity(3)).unwrap();
        assert_eq!(
            solve_spd(&id, &[1.0, -2.0, 3.0]).unwrap(),
            vec![1.0, -2.0, 3.0]
        );
        assert_eq!(solve_spd(&tridiag(3), &[0.0; 3]).unwrap(), vec![0.0; 3]);
        let x = solve_spd(&tridiag(3), &[1.0, 0.0, 0.0]).unwrap();
        for (xi, ei) in x.iter().zip([0.75, 0.5, 0.25]) {
            assert!(close(*xi, ei, 1e-15));
        }
    }

    #[test]
    fn solve_residual_within_tolerance() {
        let a = tridiag(40);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b: Vec<f64> = (0..40).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = a.solve(&b).unwrap();
        let r = sub(&a.matrix().matvec(&x).unwrap(), &b);
        let kappa = a.condition_number().unwrap();
        assert!(norm2(&r) <= 1e2 * f64::EPSILON * kappa * norm2(&b));
    }

    #[test]
    fn non_spd_rejected() {
        let m =
            CsrMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)])
                .unwrap();
        assert!(matches!(SparseSpd::new(m), Err(Error::NotSpd(_))));
        let ns = CsrMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 0.1), (1, 1, 1.0)]).unwrap();
        assert!(matches!(SparseSpd::new(ns), Err(Error::NotSpd(_))));
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norm_inequalities_hold(seed in any::<u64>(), n in 3usize..30) {
            let raw = tridiag(n);
            let a = raw.scaled(1.0 / raw.norm().unwrap()).unwrap();
            let kappa = a.condition_number().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_vec(&mut rng, n);
            let tol = 1e-12;
            // ||w|| <= ||A^{-1} w||_A
            let ainv_w = a.solve(&w).unwrap();
            prop_assert!(norm2(&w) <= a.energy_norm(&ainv_w).unwrap() * (1.0 + tol));
            // ||w||_A <= ||w|| <= kappa^{1/2} ||w||_A
            let e = a.energy_norm(&w).unwrap();
            prop_assert!(e <= norm2(&w) * (1.0 + tol));
            prop_assert!(norm2(&w) <= kappa.sqrt() * e * (1.0 + tol));
            // energy norm squared is the quadratic form
            let q = dot(&a.matrix().matvec(&w).unwrap(), &w);
            prop_assert!((e * e - q).abs() <= 1e-13 * q.max(1.0));
        }

        #[test]
        fn condition_number_scale_invariant(c in 1e-3f64..1e3, n in 3usize..20) {
            let a = tridiag(n);
            let k1 = a.condition_number().unwrap();
            let k2 = a.scaled(c).unwrap().condition_number().unwrap();
            prop_assert!((k1 - k2).abs() <= 1e-10 * k1);
        }
    }
}
