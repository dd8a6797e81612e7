//! Per-node tensor fields.

use crate::{Error, Result};

/// Number of independent components of a symmetric `dim × dim` tensor.
pub const fn sym_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Packed upper-triangle position of component `(i, j)`: row-major over
/// the upper triangle, i.e. `xx, xy[, xz], yy[, yz, zz]`.
pub fn sym_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows before i hold dim, dim - 1, ... entries
    i * dim - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Component suffixes in packed order.
pub fn sym_component_names(dim: usize) -> &'static [&'static str] {
    match dim {
        1 => &["xx"],
        2 => &["xx", "xy", "yy"],
        _ => &["xx", "xy", "xz", "yy", "yz", "zz"],
    }
}

/// Nodal vector field stored by component: `components[i][p]` is the
/// `i`-th component at node `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(components: Vec<Vec<f64>>) -> Result<Self> {
        if !(1..=3).contains(&components.len()) {
            return Err(Error::BadDimension(components.len()));
        }
        let n = components[0].len();
        for c in &components {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
            if let Some(node) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { node });
            }
        }
        Ok(Self { components })
    }

    /// Samples `f` (returning `dim` components) at every point.
    pub fn from_fn<'a, I, F>(dim: usize, points: I, f: F) -> Result<Self>
    where
        I: Iterator<Item = &'a [f64]>,
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let mut components = vec![Vec::new(); dim];
        for p in points {
            let v = f(p);
            for (c, x) in components.iter_mut().zip(v) {
                c.push(x);
            }
        }
        Self::new(components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }
}

/// Displacements are plain vector fields.
pub type DisplacementField = VectorField;

/// Nodal `dim × dim` tensors stored row-major per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    dim: usize,
    data: Vec<f64>,
}

impl TensorField {
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len() % (dim * dim), 0);
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.dim * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn node(&self, p: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.data[p * s..(p + 1) * s]
    }

    pub fn get(&self, p: usize, i: usize, j: usize) -> f64 {
        self.node(p)[i * self.dim + j]
    }
}

/// Nodal symmetric tensors, packed upper triangle per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    dim: usize,
    data: Vec<f64>,
}

impl SymTensorField {
    pub fn zeros(dim: usize, n: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; n * sym_len(dim)],
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len() % sym_len(dim), 0);
        Self { dim, data }
    }

    /// Builds a field from per-node full matrices (only the upper triangle
    /// is read).
    pub fn from_matrices(dim: usize, mats: &[Vec<f64>]) -> Self {
        let mut out = Self::zeros(dim, mats.len());
        for (p, m) in mats.iter().enumerate() {
            for i in 0..dim {
                for j in i..dim {
                    out.set(p, i, j, m[i * dim + j]);
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / sym_len(self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn node(&self, p: usize) -> &[f64] {
        let s = sym_len(self.dim);
        &self.data[p * s..(p + 1) * s]
    }

    pub fn get(&self, p: usize, i: usize, j: usize) -> f64 {
        self.data[p * sym_len(self.dim) + sym_index(self.dim, i, j)]
    }

    pub fn set(&mut self, p: usize, i: usize, j: usize, v: f64) {
        let k = p * sym_len(self.dim) + sym_index(self.dim, i, j);
        self.data[k] = v;
    }

    pub fn trace(&self, p: usize) -> f64 {
        (0..self.dim).map(|i| self.get(p, i, i)).sum()
    }

    /// Full row-major matrix at node `p`.
    pub fn matrix(&self, p: usize) -> Vec<f64> {
        let d = self.dim;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = self.get(p, i, j);
            }
        }
        m
    }

    /// Values of packed component `k` at every node.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.data.chunks_exact(sym_len(self.dim)).map(|c| c[k]).collect()
    }
}
