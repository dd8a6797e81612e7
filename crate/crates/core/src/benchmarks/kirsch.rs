//! Infinite plate with a circular hole under uniaxial far-field tension
//! along x (plane strain).

use crate::elasticity::ElasticMaterial;
use crate::{Error, Result};

/// Geometry, loading and material of the plate benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KirschPlate {
    pub sigma0: f64,
    /// Hole radius `a`.
    pub radius: f64,
    /// Half-width `w` of the modeled square.
    pub half_width: f64,
    pub material: ElasticMaterial,
}

impl Default for KirschPlate {
    fn default() -> Self {
        Self {
            sigma0: 1.0,
            radius: 1.0,
            half_width: 4.0,
            material: ElasticMaterial::new(200e9, 0.3).expect("valid material"),
        }
    }
}

fn polar(x: f64, y: f64, a: f64) -> Result<(f64, f64)> {
    let r = x.hypot(y);
    if !(r >= a * (1.0 - 1e-12)) {
        return Err(Error::OutsideDomain { x, y, r, a });
    }
    Ok((r, y.atan2(x)))
}

/// Plane-strain displacement `(u_x, u_y)` with Kolosov constant `k = 3 - 4ν`.
pub fn kirsch_displacement(x: f64, y: f64, sigma0: f64, a: f64, young: f64, nu: f64) -> Result<(f64, f64)> {
    let (r, th) = polar(x, y, a)?;
    let mu = young / (2.0 * (1.0 + nu));
    let k = 3.0 - 4.0 * nu;
    let c = sigma0 * a / (8.0 * mu);
    let (ra, ar, ar3) = (r / a, a / r, (a / r).powi(3));
    let ux = c * (ra * (k + 1.0) * th.cos() + 2.0 * ar * ((1.0 + k) * th.cos() + (3.0 * th).cos())
        - 2.0 * ar3 * (3.0 * th).cos());
    let uy = c * (ra * (k - 3.0) * th.sin() + 2.0 * ar * ((1.0 - k) * th.sin() + (3.0 * th).sin())
        - 2.0 * ar3 * (3.0 * th).sin());
    Ok((ux, uy))
}

/// In-plane stress `(σ_xx, σ_yy, σ_xy)`.
pub fn kirsch_stress(x: f64, y: f64, sigma0: f64, a: f64) -> Result<(f64, f64, f64)> {
    let (r, th) = polar(x, y, a)?;
    let q2 = (a / r).powi(2);
    let q4 = q2 * q2;
    let (c2, c4, s2, s4) = ((2.0 * th).cos(), (4.0 * th).cos(), (2.0 * th).sin(), (4.0 * th).sin());
    let sxx = sigma0 * (1.0 - q2 * (1.5 * c2 + c4) + 1.5 * q4 * c4);
    let syy = sigma0 * (-q2 * (0.5 * c2 - c4) - 1.5 * q4 * c4);
    let sxy = sigma0 * (-q2 * (0.5 * s2 + s4) + 1.5 * q4 * s4);
    Ok((sxx, syy, sxy))
}

impl KirschPlate {
    pub fn displacement(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        kirsch_displacement(x, y, self.sigma0, self.radius, self.material.young, self.material.poisson)
    }

    pub fn stress(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        kirsch_stress(x, y, self.sigma0, self.radius)
    }
}
