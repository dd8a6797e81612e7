//! Static k-d tree over a [`PointCloud`].
//!
//! Queries are exact: results are the same id sets a brute-force scan
//! returns, ordered by squared distance with ties broken by ascending id.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::warn;

use super::PointCloud;
use crate::{Error, Result};

const LEAF_SIZE: usize = 8;
const NONE: u32 = u32::MAX;

/// A neighbor of a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

/// Neighbors of a node, sorted by (distance, id), excluding the node itself.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub center: usize,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Neighbor> {
        self.neighbors.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.neighbors.iter().map(|n| n.id)
    }
}

#[derive(Debug, Clone)]
struct KdNode {
    start: usize,
    end: usize,
    left: u32,
    right: u32,
    lo: [f64; 3],
    hi: [f64; 3],
}

/// Ordering key for candidate neighbors: squared distance, then id.
#[derive(Debug, Clone, Copy)]
struct Key {
    d2: f64,
    id: usize,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

/// Squared Euclidean distance, accumulated axis by axis.
#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Spatial index answering k-nearest and radius queries.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    dim: usize,
    len: usize,
    points: Vec<[f64; 3]>,
    ids: Vec<usize>,
    slot: Vec<usize>,
    nodes: Vec<KdNode>,
    duplicates: Vec<(usize, usize)>,
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let dim = cloud.dim();
        let mut points: Vec<[f64; 3]> = cloud
            .points()
            .map(|p| {
                let mut q = [0.0; 3];
                q[..dim].copy_from_slice(p);
                q
            })
            .collect();
        let mut ids: Vec<usize> = (0..cloud.len()).collect();
        let mut nodes = Vec::new();
        build_node(&mut nodes, &mut points, &mut ids, 0, cloud.len(), dim);

        let mut slot = vec![0; ids.len()];
        for (pos, &id) in ids.iter().enumerate() {
            slot[id] = pos;
        }

        let duplicates = find_duplicates(cloud);
        for (a, b) in &duplicates {
            warn!("nodes {a} and {b} have identical coordinates");
        }

        Ok(Self {
            dim,
            len: cloud.len(),
            points,
            ids,
            slot,
            nodes,
            duplicates,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Pairs `(a, b)`, `a < b`, of nodes sharing identical coordinates.
    pub fn duplicates(&self) -> &[(usize, usize)] {
        &self.duplicates
    }

    /// The `k` nodes nearest to an arbitrary point (nodes at the point
    /// itself included).
    pub fn nearest_to_point(&self, point: &[f64], k: usize) -> Vec<Neighbor> {
        assert_eq!(point.len(), self.dim);
        self.knn(point, k, None)
    }

    /// The `k` nearest nodes to node `center`, excluding the center.
    pub fn k_nearest(&self, center: usize, k: usize) -> Result<NeighborSet> {
        if center >= self.len {
            return Err(Error::NodeOutOfRange {
                node: center,
                len: self.len,
            });
        }
        if k == 0 || k > self.len - 1 {
            return Err(Error::InsufficientNodes {
                requested: k,
                available: self.len - 1,
            });
        }
        let point = self.points[self.slot[center]];
        let neighbors = self.knn(&point[..self.dim], k, Some(center));
        Ok(NeighborSet { center, neighbors })
    }

    /// All nodes within `radius` of `point` (inclusive), sorted by
    /// (distance, id).
    pub fn within_radius(&self, point: &[f64], radius: f64) -> Vec<Neighbor> {
        assert_eq!(point.len(), self.dim);
        let r2 = radius * radius;
        let mut found = Vec::new();
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if self.box_dist2(node, point) > r2 {
                continue;
            }
            if node.left == NONE {
                for i in node.start..node.end {
                    let d2 = dist2(&self.points[i][..self.dim], point);
                    if d2 <= r2 {
                        found.push(Key {
                            d2,
                            id: self.ids[i],
                        });
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        found.sort_unstable();
        found
            .into_iter()
            .map(|k| Neighbor {
                id: k.id,
                distance: k.d2.sqrt(),
            })
            .collect()
    }

    fn box_dist2(&self, node: &KdNode, point: &[f64]) -> f64 {
        let mut d2 = 0.0;
        for (axis, &q) in point.iter().enumerate() {
            let gap = if q < node.lo[axis] {
                node.lo[axis] - q
            } else if q > node.hi[axis] {
                q - node.hi[axis]
            } else {
                0.0
            };
            d2 += gap * gap;
        }
        d2
    }

    fn knn(&self, point: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Key> = BinaryHeap::with_capacity(k + 1);
        self.knn_visit(0, point, k, exclude, &mut heap);
        heap.into_sorted_vec()
            .into_iter()
            .map(|key| Neighbor {
                id: key.id,
                distance: key.d2.sqrt(),
            })
            .collect()
    }

    fn knn_visit(
        &self,
        ni: u32,
        point: &[f64],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Key>,
    ) {
        let node = &self.nodes[ni as usize];
        if heap.len() == k && self.box_dist2(node, point) > heap.peek().unwrap().d2 {
            return;
        }
        if node.left == NONE {
            for i in node.start..node.end {
                let id = self.ids[i];
                if Some(id) == exclude {
                    continue;
                }
                let key = Key {
                    d2: dist2(&self.points[i][..self.dim], point),
                    id,
                };
                if heap.len() < k {
                    heap.push(key);
                } else if key < *heap.peek().unwrap() {
                    heap.pop();
                    heap.push(key);
                }
            }
            return;
        }
        let (l, r) = (node.left, node.right);
        let dl = self.box_dist2(&self.nodes[l as usize], point);
        let dr = self.box_dist2(&self.nodes[r as usize], point);
        if dl <= dr {
            self.knn_visit(l, point, k, exclude, heap);
            self.knn_visit(r, point, k, exclude, heap);
        } else {
            self.knn_visit(r, point, k, exclude, heap);
            self.knn_visit(l, point, k, exclude, heap);
        }
    }
}

fn build_node(
    nodes: &mut Vec<KdNode>,
    points: &mut [[f64; 3]],
    ids: &mut [usize],
    start: usize,
    end: usize,
    dim: usize,
) -> u32 {
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for axis in 0..dim {
        lo[axis] = f64::INFINITY;
        hi[axis] = f64::NEG_INFINITY;
        for p in &points[start..end] {
            lo[axis] = lo[axis].min(p[axis]);
            hi[axis] = hi[axis].max(p[axis]);
        }
    }
    let index = nodes.len() as u32;
    nodes.push(KdNode {
        start,
        end,
        left: NONE,
        right: NONE,
        lo,
        hi,
    });
    if end - start <= LEAF_SIZE {
        return index;
    }

    let axis = (0..dim)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap();
    if hi[axis] - lo[axis] == 0.0 {
        // all points coincide
        return index;
    }

    // median split, keeping ids paired with their points
    let mid = start + (end - start) / 2;
    let mut order: Vec<usize> = (start..end).collect();
    order.select_nth_unstable_by(mid - start, |&a, &b| {
        points[a][axis]
            .total_cmp(&points[b][axis])
            .then(ids[a].cmp(&ids[b]))
    });
    let pts: Vec<[f64; 3]> = order.iter().map(|&i| points[i]).collect();
    let idv: Vec<usize> = order.iter().map(|&i| ids[i]).collect();
    points[start..end].copy_from_slice(&pts);
    ids[start..end].copy_from_slice(&idv);

    let left = build_node(nodes, points, ids, start, mid, dim);
    let right = build_node(nodes, points, ids, mid, end, dim);
    nodes[index as usize].left = left;
    nodes[index as usize].right = right;
    index
}

fn find_duplicates(cloud: &PointCloud) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    let cmp = |a: &usize, b: &usize| {
        cloud
            .point(*a)
            .iter()
            .zip(cloud.point(*b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    };
    order.sort_by(|a, b| cmp(a, b).then(a.cmp(b)));
    let mut pairs = Vec::new();
    let mut run_start = 0;
    for i in 1..=order.len() {
        if i == order.len() || cmp(&order[run_start], &order[i]).is_ne() {
            for a in run_start..i {
                for b in a + 1..i {
                    let (x, y) = (order[a], order[b]);
                    pairs.push((x.min(y), x.max(y)));
                }
            }
            run_start = i;
        }
    }
    pairs.sort_unstable();
    pairs
}
