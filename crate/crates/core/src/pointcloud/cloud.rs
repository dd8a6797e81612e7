use crate::{Error, Result};

/// Immutable set of nodes in 1, 2 or 3 dimensions.
///
/// Coordinates are stored flat with stride `dim`; node ids are the dense
/// indices `0..len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (node, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::CoordinateLength {
                    node,
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// Builds a cloud from a flat coordinate buffer of length `n * dim`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        if coords.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if coords.len() % dim != 0 {
            return Err(Error::CoordinateLength {
                node: coords.len() / dim,
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate { node: pos / dim });
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false: a valid cloud holds at least one node.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Values of coordinate `axis` for every node.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        self.points().map(|p| p[axis]).collect()
    }

    /// Copy of the cloud shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Self {
        assert_eq!(offset.len(), self.dim);
        let coords = self
            .coords
            .chunks_exact(self.dim)
            .flat_map(|p| p.iter().zip(offset).map(|(x, o)| x + o))
            .collect();
        Self {
            dim: self.dim,
            coords,
        }
    }

    /// Copy of the cloud with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            coords: self.coords.iter().map(|x| x * factor).collect(),
        }
    }

    /// Evaluates `f` at every node.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        self.points().map(f).collect()
    }
}
