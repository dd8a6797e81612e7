//! Eigenvalues of small symmetric matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Eigenvalues of a symmetric `dim × dim` row-major matrix, descending.
pub fn symmetric_eigenvalues(dim: usize, m: &[f64]) -> Vec<f64> {
    let mut ev = match dim {
        1 => vec![m[0]],
        2 => eig2(m[0], m[1], m[3]).to_vec(),
        3 => eig3(m).map_or_else(|| eig_general(3, m), |e| e.to_vec()),
        _ => eig_general(dim, m),
    };
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

fn eig2(a: f64, b: f64, d: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b);
    [mean + rad, mean - rad]
}

fn eig3(m: &[f64]) -> Option<[f64; 3]> {
    let (a11, a12, a13, a22, a23, a33) = (m[0], m[1], m[2], m[4], m[5], m[8]);
    let off = a12 * a12 + a13 * a13 + a23 * a23;
    if off == 0.0 {
        return Some([a11, a22, a33]);
    }
    let q = (a11 + a22 + a33) / 3.0;
    let (b11, b22, b33) = (a11 - q, a22 - q, a33 - q);
    let p2 = b11 * b11 + b22 * b22 + b33 * b33 + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if !(p.is_finite() && p > 0.0) {
        return None;
    }
    let det = b11 * (b22 * b33 - a23 * a23) - a12 * (a12 * b33 - a23 * a13) + a13 * (a12 * a23 - b22 * a13);
    let r = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let ev = [e1, e2, e3];
    ev.iter().all(|v| v.is_finite()).then_some(ev)
}

fn eig_general(dim: usize, m: &[f64]) -> Vec<f64> {
    let mat = DMatrix::from_row_slice(dim, dim, m);
    SymmetricEigen::new(mat).eigenvalues.iter().copied().collect()
}
