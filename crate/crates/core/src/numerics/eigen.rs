//! Dense eigensolvers for the small matrices used by the single-site and
//! bath models.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension for which the residual bound is part of the contract.
pub const RESIDUAL_CONTRACT_DIM: usize = 64;
/// Residual bound relative to the Frobenius norm of the input.
pub const RESIDUAL_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;
const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenpairs of a matrix. `vectors` holds the normalized eigenvectors as
/// columns, in the order of `values`.
#[derive(Debug, Clone)]
pub struct EigenResult<T: nalgebra::Scalar> {
    pub values: Vec<T>,
    pub vectors: DMatrix<T>,
    /// max over pairs of |A v - lambda v| / |v|
    pub max_residual: f64,
}

impl<T: nalgebra::Scalar> EigenResult<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> DVector<T> {
        self.vectors.column(i).into_owned()
    }
}

/// All eigenpairs of a real symmetric matrix, eigenvalues ascending.
pub fn eig_symmetric(matrix: &DMatrix<f64>) -> Result<EigenResult<f64>> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::InvalidParams(format!(
            "eig_symmetric needs a square matrix, got {}x{}",
            n,
            matrix.ncols()
        )));
    }
    let scale = matrix.amax().max(1.0);
    let asym = (matrix - matrix.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    if n == 0 {
        return Ok(EigenResult {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
            max_residual: 0.0,
        });
    }

    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let max_residual = residual_real(matrix, &values, &vectors);
    check_contract(n, max_residual, matrix.norm())?;
    Ok(EigenResult {
        values,
        vectors,
        max_residual,
    })
}

/// Eigenvalues and right eigenvectors of a dense complex matrix.
///
/// Computed from a complex Schur form `A = Q T Q^H`; eigenvectors of the
/// triangular factor come from back substitution. Eigenvalues are ordered by
/// real part, then imaginary part.
pub fn eig_complex(matrix: &DMatrix<Complex64>) -> Result<EigenResult<Complex64>> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::InvalidParams(format!(
            "eig_complex needs a square matrix, got {}x{}",
            n,
            matrix.ncols()
        )));
    }
    if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidParams("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(EigenResult {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
            max_residual: 0.0,
        });
    }

    let schur = Schur::try_new(matrix.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::NoConvergence(format!("complex Schur iteration exceeded {SCHUR_MAX_ITER} sweeps")))?;
    let (q, t) = schur.unpack();

    let norm = matrix.norm();
    let tiny = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    let mut raw = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = DVector::<Complex64>::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                s += t[(j, l)] * y[l];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < tiny {
                // repeated eigenvalue: perturb the pivot
                denom = Complex64::new(tiny, 0.0);
            }
            y[j] = -s / denom;
        }
        let mut v = &q * y;
        let vn = v.norm();
        v /= Complex64::new(vn, 0.0);
        raw.set_column(k, &v);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (za, zb) = (t[(a, a)], t[(b, b)]);
        za.re.total_cmp(&zb.re).then(za.im.total_cmp(&zb.im))
    });
    let values: Vec<Complex64> = order.iter().map(|&i| t[(i, i)]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &raw.column(src));
    }

    let max_residual = residual_complex(matrix, &values, &vectors);
    check_contract(n, max_residual, norm)?;
    Ok(EigenResult {
        values,
        vectors,
        max_residual,
    })
}

fn check_contract(n: usize, residual: f64, norm: f64) -> Result<()> {
    if n <= RESIDUAL_CONTRACT_DIM && residual > RESIDUAL_TOL * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NoConvergence(format!(
            "eigenpair residual {residual:e} exceeds {RESIDUAL_TOL:e} * |A| = {:e}",
            RESIDUAL_TOL * norm
        )));
    }
    Ok(())
}

fn residual_real(a: &DMatrix<f64>, values: &[f64], vectors: &DMatrix<f64>) -> f64 {
    let av = a * vectors;
    values
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            let v = vectors.column(i);
            (av.column(i) - v * lam).norm() / v.norm()
        })
        .fold(0.0, f64::max)
}

fn residual_complex(a: &DMatrix<Complex64>, values: &[Complex64], vectors: &DMatrix<Complex64>) -> f64 {
    let av = a * vectors;
    values
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            let v = vectors.column(i);
            (av.column(i) - v * lam).norm() / v.norm()
        })
        .fold(0.0, f64::max)
}
