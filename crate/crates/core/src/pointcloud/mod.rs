//! Point clouds, spatial indexing and node-spacing estimates.

mod cloud;
mod kdtree;

pub use cloud::PointCloud;
pub use kdtree::{Neighbor, NeighborSet, SpatialIndex};

use crate::{Error, Result};

/// Component-wise average spacing of a node to its neighbors: the mean over
/// the support of the summed absolute coordinate differences.
pub fn average_spacing(cloud: &PointCloud, neighbors: &NeighborSet) -> f64 {
    debug_assert!(!neighbors.is_empty());
    let center = cloud.point(neighbors.center);
    let total: f64 = neighbors
        .iter()
        .map(|nb| {
            cloud
                .point(nb.id)
                .iter()
                .zip(center)
                .map(|(q, p)| (p - q).abs())
                .sum::<f64>()
        })
        .sum();
    total / neighbors.len() as f64
}

/// Normalized node spacing `1 / (n^(1/d) - 1)` used as the abscissa of
/// convergence plots.
pub fn normalized_spacing(n: usize, dim: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Invalid(format!(
            "normalized spacing needs at least 2 nodes, got {n}"
        )));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::BadDimension(dim));
    }
    let per_axis = match dim {
        1 => n as f64,
        2 => (n as f64).sqrt(),
        _ => (n as f64).cbrt(),
    };
    Ok(1.0 / (per_axis - 1.0))
}
