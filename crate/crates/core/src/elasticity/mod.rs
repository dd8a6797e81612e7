//! Isotropic linear elastic recovery: displacement gradient, strain,
//! stress, deviatoric stress, von Mises and principal stresses.
//!
//! Two-dimensional inputs are plane strain. The out-of-plane stress is
//! `σ_zz = λ tr(ε) = ν (σ_xx + σ_yy)` and enters von Mises through
//! [`embed_3d`].

mod eigen;
mod tensor;

pub use eigen::symmetric_eigenvalues;
pub use tensor::{
    sym_component_names, sym_index, sym_len, DisplacementField, SymTensorField, TensorField,
    VectorField,
};

use rayon::prelude::*;

use crate::operator::{gradient_operator, OperatorSpec, StencilOperator};
use crate::pointcloud::{PointCloud, SpatialIndex};
use crate::{Error, Result};

/// Isotropic linear elastic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticMaterial {
    pub young: f64,
    pub poisson: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ElasticMaterial {
    pub fn new(young: f64, poisson: f64) -> Result<Self> {
        let (lambda, mu) = lame_from_young_poisson(young, poisson)?;
        Ok(Self {
            young,
            poisson,
            lambda,
            mu,
        })
    }
}

/// Lamé parameters `(λ, μ)` from Young's modulus and Poisson's ratio.
pub fn lame_from_young_poisson(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if poisson == 0.5 {
        return Err(Error::IncompressibleLimit);
    }
    if !(young > 0.0 && young.is_finite()) {
        return Err(Error::InvalidMaterial(format!(
            "Young's modulus must be positive, got {young}"
        )));
    }
    if !(poisson > -1.0 && poisson < 0.5) {
        return Err(Error::InvalidMaterial(format!(
            "Poisson's ratio must lie in (-1, 0.5), got {poisson}"
        )));
    }
    let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mu = young / (2.0 * (1.0 + poisson));
    Ok((lambda, mu))
}

/// `(∇u)_ij = ∂u_i/∂x_j` using prebuilt first-derivative operators (one
/// per axis, in axis order).
pub fn gradient_with(ops: &[StencilOperator], u: &DisplacementField) -> Result<TensorField> {
    let dim = u.dim();
    if ops.len() != dim {
        return Err(Error::Invalid(format!(
            "need {dim} gradient operators, got {}",
            ops.len()
        )));
    }
    let n = u.len();
    // derivs[i][j] = ∂u_i/∂x_j at every node
    let derivs: Vec<Vec<Vec<f64>>> = (0..dim)
        .map(|i| ops.iter().map(|op| op.apply(u.component(i))).collect())
        .collect::<Result<_>>()?;
    let mut data = vec![0.0; n * dim * dim];
    for (p, chunk) in data.chunks_exact_mut(dim * dim).enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                chunk[i * dim + j] = derivs[i][j][p];
            }
        }
    }
    Ok(TensorField::from_flat(dim, data))
}

/// Displacement gradient on a cloud.
pub fn displacement_gradient(
    cloud: &PointCloud,
    index: &SpatialIndex,
    u: &DisplacementField,
    spec: &OperatorSpec,
) -> Result<TensorField> {
    check_field(cloud, u)?;
    let ops = gradient_operator(cloud, index, spec)?;
    gradient_with(&ops, u)
}

fn check_field(cloud: &PointCloud, u: &DisplacementField) -> Result<()> {
    if u.dim() != cloud.dim() {
        return Err(Error::Invalid(format!(
            "displacement has {} components but the cloud is {}-dimensional",
            u.dim(),
            cloud.dim()
        )));
    }
    if u.len() != cloud.len() {
        return Err(Error::LengthMismatch {
            expected: cloud.len(),
            found: u.len(),
        });
    }
    Ok(())
}

/// Linearized strain `ε = (∇u + ∇uᵀ) / 2`.
pub fn strain_from_gradient(grad: &TensorField) -> SymTensorField {
    let dim = grad.dim();
    let mut out = SymTensorField::zeros(dim, grad.len());
    for p in 0..grad.len() {
        for i in 0..dim {
            for j in i..dim {
                out.set(p, i, j, 0.5 * (grad.get(p, i, j) + grad.get(p, j, i)));
            }
        }
    }
    out
}

/// Hooke's law `σ = 2μ ε + λ tr(ε) I`.
pub fn stress_from_strain(strain: &SymTensorField, mat: &ElasticMaterial) -> SymTensorField {
    let dim = strain.dim();
    let mut out = SymTensorField::zeros(dim, strain.len());
    for p in 0..strain.len() {
        let vol = mat.lambda * strain.trace(p);
        for i in 0..dim {
            for j in i..dim {
                let mut s = 2.0 * mat.mu * strain.get(p, i, j);
                if i == j {
                    s += vol;
                }
                out.set(p, i, j, s);
            }
        }
    }
    out
}

/// Embeds a 1D/2D stress into 3D assuming zero out-of-plane strain: the
/// missing normal components equal `λ tr(ε)`, missing shears are zero.
/// Three-dimensional input is returned unchanged.
pub fn embed_3d(stress: &SymTensorField, strain: &SymTensorField, mat: &ElasticMaterial) -> SymTensorField {
    let dim = stress.dim();
    if dim == 3 {
        return stress.clone();
    }
    let mut out = SymTensorField::zeros(3, stress.len());
    for p in 0..stress.len() {
        for i in 0..dim {
            for j in i..dim {
                out.set(p, i, j, stress.get(p, i, j));
            }
        }
        let out_of_plane = mat.lambda * strain.trace(p);
        for i in dim..3 {
            out.set(p, i, i, out_of_plane);
        }
    }
    out
}

fn require_3d(t: &SymTensorField) -> Result<()> {
    if t.dim() != 3 {
        return Err(Error::Invalid(format!(
            "expected a 3D tensor field, got dimension {} (embed with embed_3d first)",
            t.dim()
        )));
    }
    Ok(())
}

/// Deviatoric part `s = σ - tr(σ)/3 I` of a 3D tensor field.
pub fn deviatoric(sigma: &SymTensorField) -> Result<SymTensorField> {
    require_3d(sigma)?;
    let mut out = sigma.clone();
    for p in 0..sigma.len() {
        let mean = sigma.trace(p) / 3.0;
        for i in 0..3 {
            out.set(p, i, i, sigma.get(p, i, i) - mean);
        }
    }
    Ok(out)
}

/// von Mises stress `sqrt(3/2 s:s)` of a 3D tensor field.
pub fn von_mises(sigma: &SymTensorField) -> Result<Vec<f64>> {
    let s = deviatoric(sigma)?;
    Ok((0..s.len())
        .map(|p| {
            let mut ss = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let v = s.get(p, i, j);
                    ss += v * v;
                }
            }
            (1.5 * ss).sqrt()
        })
        .collect())
}

/// Eigenvalues of every node's tensor, descending; `dim` values per node,
/// flattened.
pub fn principal_stresses(sigma: &SymTensorField) -> Vec<f64> {
    (0..sigma.len())
        .flat_map(|p| symmetric_eigenvalues(sigma.dim(), &sigma.matrix(p)))
        .collect()
}

/// Everything recovered from one displacement field.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub gradient: TensorField,
    pub strain: SymTensorField,
    /// In-plane (or full 3D) stress.
    pub stress: SymTensorField,
    /// Stress including reconstructed out-of-plane components.
    pub stress_3d: SymTensorField,
    pub von_mises: Vec<f64>,
    /// `dim` eigenvalues of `stress` per node, descending.
    pub principal: Vec<f64>,
    pub diagnostics: OperatorDiagnostics,
}

/// Summary of the operators used for a recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorDiagnostics {
    pub max_condition: f64,
    pub max_moment_residual: f64,
    pub max_support: usize,
}

impl OperatorDiagnostics {
    pub fn from_operators(ops: &[StencilOperator], cloud: &PointCloud) -> Self {
        Self {
            max_condition: ops.iter().map(|o| o.max_condition()).fold(0.0, f64::max),
            max_moment_residual: ops
                .par_iter()
                .map(|o| o.verify_moments(cloud).into_iter().fold(0.0, f64::max))
                .reduce(|| 0.0, f64::max),
            max_support: ops.iter().map(|o| o.max_support_size()).max().unwrap_or(0),
        }
    }
}

/// Gradient → strain → stress → von Mises / principal stresses, sharing
/// one set of gradient operators across displacement components.
pub fn recover(
    cloud: &PointCloud,
    index: &SpatialIndex,
    u: &DisplacementField,
    mat: &ElasticMaterial,
    spec: &OperatorSpec,
) -> Result<Recovery> {
    check_field(cloud, u)?;
    let ops = gradient_operator(cloud, index, spec)?;
    let diagnostics = OperatorDiagnostics::from_operators(&ops, cloud);
    recover_with(&ops, u, mat, diagnostics)
}

/// [`recover`] with prebuilt gradient operators.
pub fn recover_with(
    ops: &[StencilOperator],
    u: &DisplacementField,
    mat: &ElasticMaterial,
    diagnostics: OperatorDiagnostics,
) -> Result<Recovery> {
    let gradient = gradient_with(ops, u)?;
    let strain = strain_from_gradient(&gradient);
    let stress = stress_from_strain(&strain, mat);
    let stress_3d = embed_3d(&stress, &strain, mat);
    let von_mises = von_mises(&stress_3d)?;
    let principal = principal_stresses(&stress);
    Ok(Recovery {
        gradient,
        strain,
        stress,
        stress_3d,
        von_mises,
        principal,
        diagnostics,
    })
}
