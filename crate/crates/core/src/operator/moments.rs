//! Per-node moment systems and the kernel-coefficient solve.
//!
//! For a node `x_p` with neighbors `x_q` and offsets `z = x_p - x_q`, the
//! kernel `η(y) = Σ_j a_j p_j(y) exp(-|y|²)` is fixed by requiring the
//! discrete moments `Σ_q p_i(z_q/ε) η(z_q/ε)` to equal
//! `b_i = (-1)^|α| D^α p_i(0)`. In matrix form, with `V_{qi} = p_i(z_q/ε)`
//! and `E = diag(exp(-|z_q|²/(2ε²)))`:
//!
//! ```text
//! B = E V,   A = Bᵀ B,   A a = b
//! ```

use nalgebra::{DMatrix, DVector};

use super::multi_index::MultiIndex;
use crate::pointcloud::{NeighborSet, PointCloud};
use crate::{Error, Result};

/// Maximum accepted solve residual relative to `1 + |b|`.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// Assembled moment system of one node.
#[derive(Debug, Clone)]
pub struct MomentSystem {
    pub center: usize,
    pub eps: f64,
    pub basis: Vec<MultiIndex>,
    /// `k × l` Vandermonde matrix of the basis at the scaled offsets.
    pub v: DMatrix<f64>,
    /// Diagonal of `E`: square roots of the window at each neighbor.
    pub e: DVector<f64>,
    /// `B = E V`.
    pub b_mat: DMatrix<f64>,
    /// `A = Bᵀ B`.
    pub a: DMatrix<f64>,
    /// Right-hand side.
    pub rhs: DVector<f64>,
}

/// Kernel coefficients and solve diagnostics.
#[derive(Debug, Clone)]
pub struct KernelSolution {
    pub coeffs: DVector<f64>,
    /// 1-norm condition number of `A`.
    pub condition: f64,
    /// `|A a - b|₂`.
    pub residual: f64,
}

/// Right-hand side `b_i = (-1)^|α| D^α p_i(0)`.
pub fn moment_rhs(basis: &[MultiIndex], alpha: &MultiIndex) -> DVector<f64> {
    let sign = if alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
    DVector::from_iterator(
        basis.len(),
        basis
            .iter()
            .map(|beta| if beta == alpha { sign * alpha.factorial() } else { 0.0 }),
    )
}

/// Vandermonde matrix `V_{qi} = p_i(z_q / ε)` for the given offsets.
pub fn vandermonde(basis: &[MultiIndex], offsets: &[Vec<f64>], eps: f64) -> DMatrix<f64> {
    let max_deg = basis.iter().map(|b| b.order()).max().unwrap_or(0) as usize;
    let mut v = DMatrix::zeros(offsets.len(), basis.len());
    let mut powers = vec![[0.0f64; 3]; max_deg + 1];
    for (row, z) in offsets.iter().enumerate() {
        for axis in 0..z.len() {
            let y = z[axis] / eps;
            let mut acc = 1.0;
            for p in powers.iter_mut() {
                p[axis] = acc;
                acc *= y;
            }
        }
        for (col, beta) in basis.iter().enumerate() {
            let mut value = 1.0;
            for (axis, &e) in beta.components().iter().enumerate() {
                value *= powers[e as usize][axis];
            }
            v[(row, col)] = value;
        }
    }
    v
}

/// Offsets `z_q = x_p - x_q` from every neighbor to the center node.
pub fn offsets(cloud: &PointCloud, neighbors: &NeighborSet) -> Vec<Vec<f64>> {
    let center = cloud.point(neighbors.center);
    neighbors
        .iter()
        .map(|nb| {
            center
                .iter()
                .zip(cloud.point(nb.id))
                .map(|(p, q)| p - q)
                .collect()
        })
        .collect()
}

/// Builds `V`, `E`, `B`, `A` and `b` for one node.
pub fn assemble_moment_system(
    cloud: &PointCloud,
    neighbors: &NeighborSet,
    basis: &[MultiIndex],
    alpha: &MultiIndex,
    eps: f64,
) -> Result<MomentSystem> {
    let (k, l) = (neighbors.len(), basis.len());
    if k < l {
        return Err(Error::InsufficientSupport {
            neighbors: k,
            conditions: l,
        });
    }
    let z = offsets(cloud, neighbors);
    let v = vandermonde(basis, &z, eps);
    let e = DVector::from_iterator(
        k,
        z.iter().map(|zi| {
            let r2: f64 = zi.iter().map(|c| c * c).sum();
            (-r2 / (2.0 * eps * eps)).exp()
        }),
    );
    let mut b_mat = v.clone();
    for (mut row, &ei) in b_mat.row_iter_mut().zip(e.iter()) {
        row *= ei;
    }
    let a = b_mat.tr_mul(&b_mat);
    Ok(MomentSystem {
        center: neighbors.center,
        eps,
        basis: basis.to_vec(),
        v,
        e,
        b_mat,
        a,
        rhs: moment_rhs(basis, alpha),
    })
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Factorization of `A` shared by every right-hand side of a node.
enum Factor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    /// Upper-triangular `R` from the QR decomposition of `B`; `A = Rᵀ R`.
    Qr(DMatrix<f64>),
}

impl Factor {
    fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Cholesky(c) => Some(c.solve(b)),
            Factor::Qr(r) => {
                let y = r.transpose().solve_lower_triangular(b)?;
                r.solve_upper_triangular(&y)
            }
        }
    }
}

impl MomentSystem {
    /// Solves `A a = b`; see [`MomentSystem::solve_many`].
    pub fn solve(&self, cond_threshold: f64) -> Result<KernelSolution> {
        let mut out = self.solve_many(std::slice::from_ref(&self.rhs), cond_threshold)?;
        Ok(out.pop().unwrap())
    }

    /// Solves `A a = b` for several right-hand sides sharing one
    /// factorization.
    ///
    /// Uses Cholesky on `A`, falling back to a QR factorization of `B` when
    /// `A` is not numerically positive definite. Fails with
    /// [`Error::IllConditioned`] when the 1-norm condition number exceeds
    /// `cond_threshold` or a residual exceeds `1e-10 (1 + |b|)`.
    pub fn solve_many(
        &self,
        rhs: &[DVector<f64>],
        cond_threshold: f64,
    ) -> Result<Vec<KernelSolution>> {
        let ill = |condition: f64| Error::IllConditioned {
            node: self.center,
            condition,
        };
        let (factor, inverse) = match self.a.clone().cholesky() {
            Some(chol) => {
                let inv = chol.inverse();
                (Factor::Cholesky(chol), inv)
            }
            None => {
                let r = self.b_mat.clone().qr().r();
                let dmax = r.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
                if r.diagonal().iter().any(|d| d.abs() <= dmax * 1e-14) {
                    return Err(ill(f64::INFINITY));
                }
                let eye = DMatrix::identity(r.nrows(), r.ncols());
                let r_inv = r.solve_upper_triangular(&eye).ok_or_else(|| ill(f64::INFINITY))?;
                let inv = &r_inv * r_inv.transpose();
                (Factor::Qr(r), inv)
            }
        };
        let condition = norm1(&self.a) * norm1(&inverse);
        if !condition.is_finite() || condition > cond_threshold {
            return Err(ill(condition));
        }
        rhs.iter()
            .map(|b| {
                let coeffs = factor.solve(b).ok_or_else(|| ill(condition))?;
                let residual = (&self.a * &coeffs - b).norm();
                if !residual.is_finite() || residual > SOLVE_RESIDUAL_TOL * (1.0 + b.norm()) {
                    return Err(ill(condition));
                }
                Ok(KernelSolution {
                    coeffs,
                    condition,
                    residual,
                })
            })
            .collect()
    }
}
