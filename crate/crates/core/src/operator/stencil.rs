use log::{debug, error};
use nalgebra::DVector;
use rayon::prelude::*;

use super::moments::{assemble_moment_system, moment_rhs, offsets, vandermonde};
use super::multi_index::{monomial_basis, MultiIndex};
use super::OperatorSpec;
use crate::pointcloud::{average_spacing, PointCloud, SpatialIndex};
use crate::{Error, Result};

/// Support growth factor applied when a node's moment system is
/// ill-conditioned.
const GROWTH_FACTOR: f64 = 1.5;

/// Stencil of one node.
#[derive(Debug, Clone, Copy)]
pub struct Stencil<'a> {
    pub center: usize,
    pub neighbors: &'a [usize],
    pub weights: &'a [f64],
    pub eps: f64,
    pub sign: f64,
}

/// A built DC PSE operator for one derivative `D^α` on one cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilOperator {
    alpha: MultiIndex,
    order: u32,
    basis: Vec<MultiIndex>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    eps: Vec<f64>,
    condition: Vec<f64>,
}

impl StencilOperator {
    pub fn alpha(&self) -> MultiIndex {
        self.alpha
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// `+1` for odd `|α|`, `-1` for even.
    pub fn sign(&self) -> f64 {
        if self.alpha.order() % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn stencil(&self, p: usize) -> Stencil<'_> {
        let range = self.offsets[p]..self.offsets[p + 1];
        Stencil {
            center: p,
            neighbors: &self.neighbors[range.clone()],
            weights: &self.weights[range],
            eps: self.eps[p],
            sign: self.sign(),
        }
    }

    pub fn support_size(&self, p: usize) -> usize {
        self.offsets[p + 1] - self.offsets[p]
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Per-node 1-norm condition number of the moment matrix.
    pub fn conditions(&self) -> &[f64] {
        &self.condition
    }

    pub fn max_condition(&self) -> f64 {
        self.condition.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_support_size(&self) -> usize {
        (0..self.len()).map(|p| self.support_size(p)).max().unwrap_or(0)
    }

    /// Applies the operator to a nodal scalar field.
    pub fn apply(&self, field: &[f64]) -> Result<Vec<f64>> {
        if field.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: field.len(),
            });
        }
        if let Some(node) = field.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { node });
        }
        let sign = self.sign();
        Ok((0..self.len())
            .map(|p| {
                let st = self.stencil(p);
                let fp = sign * field[p];
                st.neighbors
                    .iter()
                    .zip(st.weights)
                    .map(|(&q, &w)| w * (field[q] + fp))
                    .sum()
            })
            .collect())
    }

    /// Largest deviation of the discrete moments from their targets, per
    /// node.
    ///
    /// The moments are recomputed from the stored weights as
    /// `Z^β = Σ_q (z_q/ε)^β ε^|α| w_q` with `z_q = x_p - x_q`; the target is
    /// `(-1)^|α| α!` for `β = α` and 0 for the other basis monomials.
    pub fn verify_moments(&self, cloud: &PointCloud) -> Vec<f64> {
        let target = moment_rhs(&self.basis, &self.alpha);
        let scale_order = self.alpha.order() as i32;
        (0..self.len())
            .map(|p| {
                let st = self.stencil(p);
                let center = cloud.point(p);
                let z: Vec<Vec<f64>> = st
                    .neighbors
                    .iter()
                    .map(|&q| center.iter().zip(cloud.point(q)).map(|(a, b)| a - b).collect())
                    .collect();
                let v = vandermonde(&self.basis, &z, st.eps);
                let scale = st.eps.powi(scale_order);
                (0..self.basis.len())
                    .map(|i| {
                        let moment: f64 = st
                            .weights
                            .iter()
                            .enumerate()
                            .map(|(q, &w)| v[(q, i)] * w * scale)
                            .sum();
                        (moment - target[i]).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

struct NodeBuild {
    neighbors: Vec<usize>,
    weights: Vec<Vec<f64>>,
    eps: f64,
    condition: f64,
}

fn build_node(
    cloud: &PointCloud,
    index: &SpatialIndex,
    spec: &OperatorSpec,
    alphas: &[MultiIndex],
    basis: &[MultiIndex],
    rhs: &[DVector<f64>],
    p: usize,
) -> Result<NodeBuild> {
    let available = cloud.len() - 1;
    let l = basis.len();
    let mut k = ((spec.neighbor_factor * l as f64).ceil() as usize).min(available);
    let mut attempt = 0;
    loop {
        let nb = index.k_nearest(p, k)?;
        if let Some(dup) = nb.iter().find(|n| n.distance == 0.0) {
            return Err(Error::DuplicateNode {
                node: p,
                neighbor: dup.id,
            });
        }
        let eps = spec.eps_factor * average_spacing(cloud, &nb);
        let sys = assemble_moment_system(cloud, &nb, basis, &alphas[0], eps)?;
        match sys.solve_many(rhs, spec.cond_threshold) {
            Ok(solutions) => {
                let z = offsets(cloud, &nb);
                let v = vandermonde(basis, &z, eps);
                let weights = alphas
                    .iter()
                    .zip(&solutions)
                    .map(|(alpha, sol)| {
                        let scale = eps.powi(-(alpha.order() as i32));
                        (0..k)
                            .map(|q| {
                                let kernel = (v.row(q) * &sol.coeffs)[0];
                                scale * kernel * sys.e[q] * sys.e[q]
                            })
                            .collect()
                    })
                    .collect();
                return Ok(NodeBuild {
                    neighbors: nb.ids().collect(),
                    weights,
                    eps,
                    condition: solutions[0].condition,
                });
            }
            Err(err @ Error::IllConditioned { .. }) => {
                if attempt >= spec.max_growth_attempts || k >= available {
                    return Err(err);
                }
                attempt += 1;
                let grown = ((k as f64 * GROWTH_FACTOR).ceil() as usize).min(available);
                debug!("node {p}: {err}; growing support {k} -> {grown}");
                k = grown;
            }
            Err(err) => return Err(err),
        }
    }
}

/// Builds operators for several derivatives of equal total order that
/// share supports and moment matrices (e.g. all first partials).
pub fn build_operators(
    cloud: &PointCloud,
    index: &SpatialIndex,
    spec: &OperatorSpec,
    alphas: &[MultiIndex],
) -> Result<Vec<StencilOperator>> {
    let Some(first) = alphas.first() else {
        return Ok(Vec::new());
    };
    for alpha in alphas {
        spec.with_alpha(*alpha).validate()?;
        if alpha.dim() != cloud.dim() {
            return Err(Error::InvalidSpec(format!(
                "multi-index {alpha} has dimension {} but the cloud has dimension {}",
                alpha.dim(),
                cloud.dim()
            )));
        }
        if alpha.order() != first.order() {
            return Err(Error::InvalidSpec(
                "operators built together must share the derivative order".into(),
            ));
        }
    }
    if index.len() != cloud.len() || index.dim() != cloud.dim() {
        return Err(Error::Invalid("spatial index does not match the cloud".into()));
    }

    let basis = monomial_basis(first, spec.order);
    let l = basis.len();
    if cloud.len() - 1 < l {
        return Err(Error::InsufficientNodes {
            requested: l,
            available: cloud.len() - 1,
        });
    }
    let rhs: Vec<DVector<f64>> = alphas.iter().map(|a| moment_rhs(&basis, a)).collect();

    let results: Vec<Result<NodeBuild>> = (0..cloud.len())
        .into_par_iter()
        .map(|p| build_node(cloud, index, spec, alphas, &basis, &rhs, p))
        .collect();

    let mut failed = Vec::new();
    let mut reason = String::new();
    let mut nodes = Vec::with_capacity(results.len());
    for (p, res) in results.into_iter().enumerate() {
        match res {
            Ok(node) => nodes.push(node),
            Err(err) if err.is_numerical() => {
                error!("node {p}: {err}");
                if failed.is_empty() {
                    reason = err.to_string();
                }
                failed.push(p);
            }
            Err(err) => return Err(err),
        }
    }
    if !failed.is_empty() {
        return Err(Error::BuildFailed {
            nodes: failed,
            reason,
        });
    }

    let mut offsets = Vec::with_capacity(nodes.len() + 1);
    offsets.push(0);
    let mut neighbors = Vec::new();
    for node in &nodes {
        neighbors.extend_from_slice(&node.neighbors);
        offsets.push(neighbors.len());
    }
    let eps: Vec<f64> = nodes.iter().map(|n| n.eps).collect();
    let condition: Vec<f64> = nodes.iter().map(|n| n.condition).collect();

    Ok(alphas
        .iter()
        .enumerate()
        .map(|(i, alpha)| StencilOperator {
            alpha: *alpha,
            order: spec.order,
            basis: basis.clone(),
            offsets: offsets.clone(),
            neighbors: neighbors.clone(),
            weights: nodes.iter().flat_map(|n| n.weights[i].iter().copied()).collect(),
            eps: eps.clone(),
            condition: condition.clone(),
        })
        .collect())
}

/// Builds the operator for `spec.alpha`.
pub fn build_operator(
    cloud: &PointCloud,
    index: &SpatialIndex,
    spec: &OperatorSpec,
) -> Result<StencilOperator> {
    Ok(build_operators(cloud, index, spec, &[spec.alpha])?.remove(0))
}

/// One first-derivative operator per axis. `spec.alpha` is ignored.
pub fn gradient_operator(
    cloud: &PointCloud,
    index: &SpatialIndex,
    spec: &OperatorSpec,
) -> Result<Vec<StencilOperator>> {
    let dim = cloud.dim();
    let alphas: Vec<MultiIndex> = (0..dim).map(|axis| MultiIndex::unit(dim, axis)).collect();
    build_operators(cloud, index, spec, &alphas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::nodes::jittered_box;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e).unwrap()
    }

    fn uniform_line(n: usize, h: f64) -> PointCloud {
        PointCloud::new(1, (0..n).map(|i| vec![i as f64 * h]).collect()).unwrap()
    }

    fn jittered_square(m: usize, seed: u64) -> PointCloud {
        jittered_box(&[m, m], &[1.0, 1.0], 0.25, seed)
    }

    #[test]
    fn linear_field_first_derivative() {
        let cloud = jittered_square(12, 7);
        let index = SpatialIndex::build(&cloud).unwrap();
        let op = build_operator(&cloud, &index, &OperatorSpec::new(mi(&[1, 0]))).unwrap();
        let out = op.apply(&cloud.axis(0)).unwrap();
        for v in out {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_grid_interior_weights_are_central() {
        let h = 0.05;
        let cloud = uniform_line(11, h);
        let index = SpatialIndex::build(&cloud).unwrap();
        // k = l = 3: neighbors at -h, +h and the lower-id tie at -2h
        let spec = OperatorSpec::new(mi(&[1])).with_neighbor_factor(1.0);
        let op = build_operator(&cloud, &index, &spec).unwrap();
        let st = op.stencil(5);
        assert_eq!(st.neighbors, &[4, 6, 3]);
        assert!((st.weights[0] + 0.5 / h).abs() < 1e-9 / h);
        assert!((st.weights[1] - 0.5 / h).abs() < 1e-9 / h);
        assert!(st.weights[2].abs() < 1e-9 / h);
        // applied: (f(x+h) - f(x-h)) / 2h
        let f: Vec<f64> = cloud.sample(|x| (3.0 * x[0]).sin());
        let d = op.apply(&f).unwrap();
        assert!((d[5] - (f[6] - f[4]) / (2.0 * h)).abs() < 1e-8);
    }

    #[test]
    fn translation_leaves_weights_unchanged() {
        use rand::{Rng, SeedableRng};
        // fully random nodes: no exact distance ties to be reordered by rounding
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cloud = PointCloud::new(2, (0..100).map(|_| vec![rng.gen(), rng.gen()]).collect()).unwrap();
        let moved = cloud.translated(&[0.5, 0.25]);
        let spec = OperatorSpec::new(mi(&[0, 1]));
        let a = build_operator(&cloud, &SpatialIndex::build(&cloud).unwrap(), &spec).unwrap();
        let b = build_operator(&moved, &SpatialIndex::build(&moved).unwrap(), &spec).unwrap();
        assert_eq!(a.neighbors, b.neighbors);
        for (wa, wb) in a.weights.iter().zip(&b.weights) {
            assert!((wa - wb).abs() <= 1e-9 * wa.abs().max(1.0));
        }
    }

    #[test]
    fn constant_field_even_operator_is_exactly_zero() {
        let cloud = jittered_square(9, 11);
        let index = SpatialIndex::build(&cloud).unwrap();
        for alpha in [mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])] {
            let op = build_operator(&cloud, &index, &OperatorSpec::new(alpha)).unwrap();
            let out = op.apply(&vec![3.7; cloud.len()]).unwrap();
            assert!(out.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn x_squared_second_derivative() {
        let cloud = jittered_square(11, 5);
        let index = SpatialIndex::build(&cloud).unwrap();
        let op = build_operator(&cloud, &index, &OperatorSpec::new(mi(&[2, 0]))).unwrap();
        let out = op.apply(&cloud.sample(|x| x[0] * x[0])).unwrap();
        for v in out {
            assert!((v - 2.0).abs() < 1e-8 * 2.0);
        }
    }

    #[test]
    fn apply_is_linear() {
        let cloud = jittered_square(8, 2);
        let index = SpatialIndex::build(&cloud).unwrap();
        let op = build_operator(&cloud, &index, &OperatorSpec::new(mi(&[1, 0]))).unwrap();
        let f = cloud.sample(|x| (x[0] * 4.0).sin() + x[1]);
        let g = cloud.sample(|x| (x[1] * 3.0).cos() * x[0]);
        let (a, b) = (2.5, -0.75);
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let lhs = op.apply(&combo).unwrap();
        let (qf, qg) = (op.apply(&f).unwrap(), op.apply(&g).unwrap());
        for i in 0..lhs.len() {
            let rhs = a * qf[i] + b * qg[i];
            assert!((lhs[i] - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn apply_rejects_bad_fields() {
        let cloud = jittered_square(6, 1);
        let index = SpatialIndex::build(&cloud).unwrap();
        let op = build_operator(&cloud, &index, &OperatorSpec::new(mi(&[1, 0]))).unwrap();
        assert!(matches!(op.apply(&[1.0; 3]), Err(Error::LengthMismatch { .. })));
        let mut f = vec![0.0; cloud.len()];
        f[4] = f64::NAN;
        assert!(matches!(op.apply(&f), Err(Error::NonFiniteValue { node: 4 })));
    }

    #[test]
    fn moments_are_verified() {
        let cloud = jittered_square(10, 9);
        let index = SpatialIndex::build(&cloud).unwrap();
        for (alpha, target) in [(mi(&[1, 0]), -1.0), (mi(&[2, 0]), 2.0)] {
            let op = build_operator(&cloud, &index, &OperatorSpec::new(alpha)).unwrap();
            let i = op.basis().iter().position(|b| *b == alpha).unwrap();
            assert_eq!(moment_rhs(op.basis(), &alpha)[i], target);
            let res = op.verify_moments(&cloud);
            assert!(res.iter().all(|&r| r <= 1e-8), "max residual {:?}", res.iter().cloned().fold(0.0, f64::max));
        }
    }

    #[test]
    fn gradient_of_coordinates_is_identity() {
        for dim in 1..=3 {
            let m = [40, 9, 5][dim - 1];
            let cloud = jittered_box(&vec![m; dim], &vec![1.0; dim], 0.2, 4);
            let index = SpatialIndex::build(&cloud).unwrap();
            let ops = gradient_operator(&cloud, &index, &OperatorSpec::new(MultiIndex::unit(dim, 0))).unwrap();
            assert_eq!(ops.len(), dim);
            for (j, op) in ops.iter().enumerate() {
                for i in 0..dim {
                    let d = op.apply(&cloud.axis(i)).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(d.iter().all(|v| (v - expect).abs() < 1e-8));
                }
            }
        }
    }

    #[test]
    fn deterministic_and_thread_count_invariant() {
        let cloud = jittered_square(16, 21);
        let index = SpatialIndex::build(&cloud).unwrap();
        let spec = OperatorSpec::new(mi(&[1, 1])).with_order(3);
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = many.install(|| build_operator(&cloud, &index, &spec).unwrap());
        let b = build_operator(&cloud, &index, &spec).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = one.install(|| build_operator(&cloud, &index, &spec).unwrap());
        assert_eq!(a, b);
        let bits = |op: &StencilOperator| op.weights.iter().map(|w| w.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&c));
    }

    #[test]
    fn duplicate_nodes_fail_the_build() {
        let mut pts: Vec<Vec<f64>> = (0..25).map(|i| vec![(i % 5) as f64, (i / 5) as f64]).collect();
        pts.push(vec![2.0, 2.0]);
        let cloud = PointCloud::new(2, pts).unwrap();
        let index = SpatialIndex::build(&cloud).unwrap();
        let err = build_operator(&cloud, &index, &OperatorSpec::new(mi(&[1, 0]))).unwrap_err();
        match err {
            Error::BuildFailed { nodes, .. } => assert_eq!(nodes, vec![12, 25]),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn collinear_cloud_fails_after_growth() {
        let cloud = PointCloud::new(2, (0..30).map(|i| vec![i as f64, 2.0 * i as f64]).collect()).unwrap();
        let index = SpatialIndex::build(&cloud).unwrap();
        let err = build_operator(&cloud, &index, &OperatorSpec::new(mi(&[1, 0]))).unwrap_err();
        assert!(matches!(err, Error::BuildFailed { ref nodes, .. } if nodes.len() == 30));
        assert!(err.is_numerical());
    }

    #[test]
    fn too_small_cloud() {
        let cloud = uniform_line(3, 0.1);
        let index = SpatialIndex::build(&cloud).unwrap();
        // l = 3 moment conditions but only 2 neighbors per node
        assert!(matches!(
            build_operator(&cloud, &index, &OperatorSpec::new(mi(&[1]))),
            Err(Error::InsufficientNodes { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let cloud = uniform_line(10, 0.1);
        let index = SpatialIndex::build(&cloud).unwrap();
        assert!(build_operator(&cloud, &index, &OperatorSpec::new(mi(&[1, 0]))).is_err());
    }
}
