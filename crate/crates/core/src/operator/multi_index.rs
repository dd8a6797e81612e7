use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Derivative multi-index `(m, n[, o])`: the number of differentiations
/// along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    dim: usize,
    exps: [u32; 3],
}

impl MultiIndex {
    pub fn new(exps: &[u32]) -> Result<Self> {
        if !(1..=3).contains(&exps.len()) {
            return Err(Error::BadDimension(exps.len()));
        }
        let mut e = [0; 3];
        e[..exps.len()].copy_from_slice(exps);
        Ok(Self {
            dim: exps.len(),
            exps: e,
        })
    }

    /// First partial derivative along `axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        assert!((1..=3).contains(&dim) && axis < dim);
        let mut exps = [0; 3];
        exps[axis] = 1;
        Self { dim, exps }
    }

    pub fn zero(dim: usize) -> Self {
        assert!((1..=3).contains(&dim));
        Self { dim, exps: [0; 3] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[u32] {
        &self.exps[..self.dim]
    }

    /// Total order `|α|`.
    pub fn order(&self) -> u32 {
        self.components().iter().sum()
    }

    /// `α!`, the product of the component factorials.
    pub fn factorial(&self) -> f64 {
        self.components()
            .iter()
            .map(|&e| (1..=e).map(f64::from).product::<f64>())
            .product()
    }

    /// Evaluates the monomial `x^α`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.components()
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }

    /// Applies `D^γ` (self = γ) to the monomial `x^β` and evaluates the
    /// result at `x`.
    pub fn differentiate_monomial(&self, beta: &MultiIndex, x: &[f64]) -> f64 {
        let mut value = 1.0;
        for axis in 0..self.dim {
            let (g, b) = (self.exps[axis], beta.exps[axis]);
            if g > b {
                return 0.0;
            }
            let falling: f64 = (b - g + 1..=b).map(f64::from).product();
            value *= falling * x[axis].powi((b - g) as i32);
        }
        value
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components().iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let exps = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidSpec(format!("bad multi-index component {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::new(&exps)
    }
}

/// Smallest degree included in the basis: 0 (constant monomial, enforcing
/// a vanishing zeroth moment) for odd `|α|`, 1 for even `|α|` where the
/// `f(x_q) - f(x_p)` difference already cancels the zeroth moment.
pub fn min_basis_degree(alpha: &MultiIndex) -> u32 {
    if alpha.order() % 2 == 1 {
        0
    } else {
        1
    }
}

/// Monomial basis for the kernel of `D^α` at accuracy order `r`: every
/// multi-index β with `min_basis_degree(α) <= |β| <= |α| + r - 1`, in
/// graded lexicographic order.
pub fn monomial_basis(alpha: &MultiIndex, r: u32) -> Vec<MultiIndex> {
    let dim = alpha.dim();
    let max_degree = alpha.order() + r - 1;
    let mut basis = Vec::new();
    for degree in min_basis_degree(alpha)..=max_degree {
        push_degree(dim, degree, &mut basis);
    }
    basis
}

fn push_degree(dim: usize, degree: u32, out: &mut Vec<MultiIndex>) {
    match dim {
        1 => out.push(MultiIndex { dim, exps: [degree, 0, 0] }),
        2 => {
            for i in (0..=degree).rev() {
                out.push(MultiIndex { dim, exps: [i, degree - i, 0] });
            }
        }
        _ => {
            for i in (0..=degree).rev() {
                for j in (0..=degree - i).rev() {
                    out.push(MultiIndex { dim, exps: [i, j, degree - i - j] });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e).unwrap()
    }

    // independent oracle: all tuples in a box, filtered by degree, sorted
    fn enumerate(dim: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
        let mut all = Vec::new();
        let ranges = |d: usize| if d < dim { hi } else { 0 };
        for i in 0..=ranges(0) {
            for j in 0..=ranges(1) {
                for k in 0..=ranges(2) {
                    let e = [i, j, k];
                    let deg: u32 = e.iter().sum();
                    if deg >= lo && deg <= hi {
                        all.push(e[..dim].to_vec());
                    }
                }
            }
        }
        all.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then(b.cmp(a))
        });
        all
    }

    #[test]
    fn first_derivative_2d_basis() {
        let basis = monomial_basis(&mi(&[1, 0]), 2);
        let expect: Vec<MultiIndex> = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
            .iter()
            .map(|e| mi(e))
            .collect();
        assert_eq!(basis, expect);
    }

    #[test]
    fn second_derivative_2d_basis_excludes_constant() {
        let basis = monomial_basis(&mi(&[2, 0]), 2);
        assert_eq!(basis.len(), 9);
        assert!(basis.iter().all(|b| (1..=3).contains(&b.order())));
    }

    #[test]
    fn first_derivative_3d_basis() {
        assert_eq!(monomial_basis(&mi(&[1, 0, 0]), 2).len(), 10);
        assert_eq!(monomial_basis(&mi(&[0, 0, 1]), 3).len(), 20);
    }

    #[test]
    fn basis_matches_enumeration() {
        for dim in 1..=3 {
            for order in 1..=2u32 {
                for r in 1..=3 {
                    let mut e = vec![0; dim];
                    e[0] = order;
                    let alpha = mi(&e);
                    let got: Vec<Vec<u32>> = monomial_basis(&alpha, r)
                        .iter()
                        .map(|b| b.components().to_vec())
                        .collect();
                    let lo = if order % 2 == 1 { 0 } else { 1 };
                    assert_eq!(got, enumerate(dim, lo, order + r - 1));
                }
            }
        }
    }

    #[test]
    fn factorial_and_order() {
        assert_eq!(mi(&[2, 3]).factorial(), 12.0);
        assert_eq!(mi(&[1, 0, 2]).order(), 3);
        assert_eq!(mi(&[0]).factorial(), 1.0);
    }

    #[test]
    fn differentiate_monomials() {
        // D^(1,0) x^2 y = 2 x y
        let v = mi(&[1, 0]).differentiate_monomial(&mi(&[2, 1]), &[3.0, 5.0]);
        assert_eq!(v, 30.0);
        // D^(2,0) x y = 0
        assert_eq!(mi(&[2, 0]).differentiate_monomial(&mi(&[1, 1]), &[3.0, 5.0]), 0.0);
        // D^α x^α = α!
        let a = mi(&[2, 1, 3]);
        assert_eq!(a.differentiate_monomial(&a, &[0.0, 0.0, 0.0]), a.factorial());
    }

    #[test]
    fn parse_and_display() {
        let a: MultiIndex = "1, 0".parse().unwrap();
        assert_eq!(a, mi(&[1, 0]));
        assert_eq!(a.to_string(), "1,0");
        assert!("1,x".parse::<MultiIndex>().is_err());
        assert!("1,0,0,0".parse::<MultiIndex>().is_err());
    }
}
