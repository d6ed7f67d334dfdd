//! Eigen-decomposition of symmetric arrowhead matrices
//!
//! ```text
//!     [ apex  z^T ]
//! A = [  z     D  ]      D = diag(d_0 < d_1 < ... < d_{n-1})
//! ```
//!
//! This is the single-excitation sector of one mode coupled to a bank of
//! independent modes. The eigenvalues are the roots of the secular equation
//! `lambda - apex - sum_k z_k^2 / (lambda - d_k) = 0`, exactly one per gap
//! between consecutive poles plus one below and one above the grid. Each root
//! is stored as an offset from its nearest pole so that `lambda - d_k` is
//! available without cancellation, which keeps the analytic eigenvectors
//! orthogonal to working precision. Cost is O(n^2) instead of O(n^3).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::find_root;

#[derive(Debug, Clone)]
pub struct ArrowheadEigen {
    apex: f64,
    diag: Vec<f64>,
    coupling: Vec<f64>,
    /// per eigenpair: pole index the root is measured from
    origin: Vec<usize>,
    /// per eigenpair: lambda - diag[origin]
    offset: Vec<f64>,
    /// per eigenpair: 1 / |(1, z_k / (lambda - d_k))|
    inv_norm: Vec<f64>,
    decoupled: bool,
}

/// Decomposes the arrowhead matrix with the given apex, pole grid and
/// couplings. Poles must be strictly increasing; couplings must be either
/// all nonzero or all zero.
pub fn eig_arrowhead(apex: f64, diag: &[f64], coupling: &[f64]) -> Result<ArrowheadEigen> {
    let n = diag.len();
    if n == 0 || coupling.len() != n {
        return Err(Error::InvalidParams(format!(
            "arrowhead needs matching nonempty pole and coupling lists ({} vs {})",
            n,
            coupling.len()
        )));
    }
    if diag.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams(
            "arrowhead poles must be strictly increasing".into(),
        ));
    }
    let zeros = coupling.iter().filter(|&&z| z == 0.0).count();
    if zeros == n {
        return Ok(ArrowheadEigen {
            apex,
            diag: diag.to_vec(),
            coupling: coupling.to_vec(),
            origin: vec![],
            offset: vec![],
            inv_norm: vec![],
            decoupled: true,
        });
    }
    if zeros > 0 {
        return Err(Error::InvalidParams(
            "arrowhead couplings must be all nonzero (or all zero)".into(),
        ));
    }

    let z2: Vec<f64> = coupling.iter().map(|z| z * z).collect();
    let z_abs_sum: f64 = coupling.iter().map(|z| z.abs()).sum();
    let z_abs_max = coupling.iter().fold(0.0_f64, |m, z| m.max(z.abs()));

    // Gershgorin bounds on the spectrum
    let lower = (apex - z_abs_sum).min(diag[0] - z_abs_max) - 1.0;
    let upper = (apex + z_abs_sum).max(diag[n - 1] + z_abs_max) + 1.0;

    // tau * f(d_o + tau); finite at tau = 0 where it equals -z_o^2
    let scaled_secular = |o: usize, tau: f64| -> f64 {
        let d_o = diag[o];
        let mut sum = 0.0;
        for (j, (&d_j, &w)) in diag.iter().zip(&z2).enumerate() {
            if j != o {
                sum += w / ((d_o - d_j) + tau);
            }
        }
        tau * ((d_o - apex) + tau) - z2[o] - tau * sum
    };
    let secular = |lambda: f64| -> f64 {
        let mut sum = 0.0;
        for (&d_j, &w) in diag.iter().zip(&z2) {
            sum += w / (lambda - d_j);
        }
        lambda - apex - sum
    };

    let mut origin = Vec::with_capacity(n + 1);
    let mut offset = Vec::with_capacity(n + 1);

    // below the lowest pole
    let tau = find_root(|t| scaled_secular(0, t), (lower - diag[0], 0.0), 0.0)?;
    origin.push(0);
    offset.push(tau);

    for k in 0..n - 1 {
        let mid = 0.5 * (diag[k] + diag[k + 1]);
        let f_mid = secular(mid);
        let (o, bracket) = if f_mid > 0.0 {
            (k, (0.0, mid - diag[k]))
        } else {
            (k + 1, (mid - diag[k + 1], 0.0))
        };
        let tau = find_root(|t| scaled_secular(o, t), bracket, 0.0)?;
        origin.push(o);
        offset.push(tau);
    }

    let tau = find_root(|t| scaled_secular(n - 1, t), (0.0, upper - diag[n - 1]), 0.0)?;
    origin.push(n - 1);
    offset.push(tau);

    let inv_norm = origin
        .iter()
        .zip(&offset)
        .map(|(&o, &tau)| {
            let d_o = diag[o];
            let mut s = 1.0;
            for (&d_j, &w) in diag.iter().zip(&z2) {
                let gap = (d_o - d_j) + tau;
                s += w / (gap * gap);
            }
            1.0 / s.sqrt()
        })
        .collect();

    Ok(ArrowheadEigen {
        apex,
        diag: diag.to_vec(),
        coupling: coupling.to_vec(),
        origin,
        offset,
        inv_norm,
        decoupled: false,
    })
}

impl ArrowheadEigen {
    /// Matrix dimension (poles + apex).
    pub fn dim(&self) -> usize {
        self.diag.len() + 1
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> Vec<f64> {
        if self.decoupled {
            let mut v = self.diag.clone();
            v.push(self.apex);
            v.sort_by(f64::total_cmp);
            return v;
        }
        self.origin
            .iter()
            .zip(&self.offset)
            .map(|(&o, &tau)| self.diag[o] + tau)
            .collect()
    }

    /// Component `row` of eigenvector `i`; row 0 is the apex mode.
    pub fn component(&self, i: usize, row: usize) -> f64 {
        if self.decoupled {
            return self.decoupled_component(i, row);
        }
        let inv = self.inv_norm[i];
        if row == 0 {
            return inv;
        }
        let k = row - 1;
        let gap = (self.diag[self.origin[i]] - self.diag[k]) + self.offset[i];
        inv * self.coupling[k] / gap
    }

    /// Dense eigenvector matrix (columns), mainly for cross-checks.
    pub fn vectors(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |row, i| self.component(i, row))
    }

    fn decoupled_component(&self, i: usize, row: usize) -> f64 {
        // order matches values(): poles with the apex inserted in place
        let apex_slot = self.diag.partition_point(|&d| d <= self.apex);
        let source_row = match i.cmp(&apex_slot) {
            std::cmp::Ordering::Less => i + 1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => i,
        };
        if row == source_row {
            1.0
        } else {
            0.0
        }
    }
}
