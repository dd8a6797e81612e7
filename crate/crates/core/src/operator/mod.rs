//! DC PSE derivative operators.
//!
//! An operator for `D^α` stores, for every node `x_p`, a stencil of
//! neighbor ids and weights such that
//!
//! ```text
//! Q f(x_p) = Σ_q w_q (f(x_q) + s f(x_p)),   s = +1 for odd |α|, -1 for even |α|
//! ```
//!
//! reproduces `D^α f(x_p)` to order `r` in the local spacing. Weights are
//! obtained per node by solving a small moment system, see [`moments`].

pub mod moments;
mod multi_index;
mod stencil;

pub use moments::{assemble_moment_system, KernelSolution, MomentSystem};
pub use multi_index::{min_basis_degree, monomial_basis, MultiIndex};
pub use stencil::{build_operator, build_operators, gradient_operator, Stencil, StencilOperator};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Highest polynomial degree `|α| + r - 1` a basis may reach.
pub const MAX_BASIS_DEGREE: u32 = 6;

/// Parameters of one operator build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub alpha: MultiIndex,
    /// Desired asymptotic order of accuracy `r`.
    pub order: u32,
    /// `ε(x_p) = eps_factor · h(x_p)`.
    pub eps_factor: f64,
    /// Support size is `ceil(neighbor_factor · l)` for `l` moment conditions.
    pub neighbor_factor: f64,
    /// How many times the support may grow by 1.5x on ill-conditioning.
    pub max_growth_attempts: u32,
    /// Largest accepted 1-norm condition number of the moment matrix.
    pub cond_threshold: f64,
}

impl OperatorSpec {
    pub fn new(alpha: MultiIndex) -> Self {
        Self {
            alpha,
            ..Self::default_for(alpha.dim())
        }
    }

    fn default_for(dim: usize) -> Self {
        Self {
            alpha: MultiIndex::unit(dim, 0),
            order: 2,
            eps_factor: 1.0,
            neighbor_factor: 2.0,
            max_growth_attempts: 5,
            cond_threshold: 1e12,
        }
    }

    pub fn with_order(mut self, r: u32) -> Self {
        self.order = r;
        self
    }

    pub fn with_alpha(mut self, alpha: MultiIndex) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_eps_factor(mut self, c: f64) -> Self {
        self.eps_factor = c;
        self
    }

    pub fn with_neighbor_factor(mut self, f: f64) -> Self {
        self.neighbor_factor = f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.order() == 0 {
            return Err(Error::InvalidSpec(
                "derivative order |alpha| must be at least 1 (interpolation is not supported)".into(),
            ));
        }
        if self.order == 0 {
            return Err(Error::InvalidSpec("accuracy order r must be at least 1".into()));
        }
        if self.alpha.order() + self.order - 1 > MAX_BASIS_DEGREE {
            return Err(Error::InvalidSpec(format!(
                "|alpha| + r - 1 = {} exceeds the maximum basis degree {MAX_BASIS_DEGREE}",
                self.alpha.order() + self.order - 1
            )));
        }
        if !(self.eps_factor > 0.0 && self.eps_factor.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "eps factor must be positive, got {}",
                self.eps_factor
            )));
        }
        if !(self.neighbor_factor >= 1.0 && self.neighbor_factor.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "neighbor factor must be at least 1, got {}",
                self.neighbor_factor
            )));
        }
        if !(self.cond_threshold > 1.0) {
            return Err(Error::InvalidSpec(format!(
                "condition threshold must exceed 1, got {}",
                self.cond_threshold
            )));
        }
        Ok(())
    }

    pub fn echo(&self) -> SpecEcho {
        SpecEcho {
            alpha: self.alpha.to_string(),
            r: self.order,
            eps_factor: self.eps_factor,
            neighbor_factor: self.neighbor_factor,
        }
    }
}

/// Serializable summary of an [`OperatorSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub alpha: String,
    pub r: u32,
    pub eps_factor: f64,
    pub neighbor_factor: f64,
}
