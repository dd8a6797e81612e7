//! Rectangular cantilever under an end shear load: the beam occupies
//! `[-a, a] × [-b, b] × [0, L]` and carries the force at `z = 0`.

use std::f64::consts::PI;

use crate::elasticity::ElasticMaterial;

/// Upper bound on series terms.
pub const MAX_SERIES_TERMS: usize = 50;
/// Series stop once `exp(-nπ(b - |y|)/a)` falls below this.
pub const SERIES_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantileverBeam {
    pub force: f64,
    pub a: f64,
    pub b: f64,
    pub length: f64,
    pub material: ElasticMaterial,
}

impl Default for CantileverBeam {
    fn default() -> Self {
        Self {
            force: 1.0,
            a: 1.0,
            b: 1.0,
            length: 10.0,
            material: ElasticMaterial::new(1e7, 0.3).expect("valid material"),
        }
    }
}

/// Number of series terms used at height `y`.
pub fn series_terms(a: f64, b: f64, y: f64) -> usize {
    let gap = b - y.abs();
    if gap <= 0.0 {
        return MAX_SERIES_TERMS;
    }
    let n = (-SERIES_TOLERANCE.ln() * a / (PI * gap)).floor() as usize + 1;
    n.clamp(1, MAX_SERIES_TERMS)
}

/// `sinh(ky)/cosh(kb)` and `cosh(ky)/cosh(kb)` without overflow.
fn hyperbolic_ratios(k: f64, y: f64, b: f64) -> (f64, f64) {
    let p = (k * (y - b)).exp();
    let m = (-k * (y + b)).exp();
    let den = 1.0 + (-2.0 * k * b).exp();
    ((p - m) / den, (p + m) / den)
}

fn alternating(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl CantileverBeam {
    /// Second moment of area `4ab³/3`.
    pub fn inertia(&self) -> f64 {
        4.0 * self.a * self.b.powi(3) / 3.0
    }

    pub fn displacement(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        let (a, b) = (self.a, self.b);
        let nu = self.material.poisson;
        let c = self.force / (self.material.young * self.inertia());
        let mut series = 0.0;
        for n in 1..=series_terms(a, b, y) {
            let k = n as f64 * PI / a;
            let (sh, _) = hyperbolic_ratios(k, y, b);
            series += alternating(n) / (n as f64).powi(3) * (k * x).cos() * sh;
        }
        let ux = -c * nu * x * y * z;
        let uy = c * (0.5 * nu * (x * x - y * y) * z - z.powi(3) / 6.0);
        let uz = c * (0.5 * y * (nu * x * x + z * z) + nu * y.powi(3) / 6.0 + (1.0 + nu) * (b * b * y - y.powi(3) / 3.0)
            - a * a * nu * y / 3.0
            - 4.0 * a.powi(3) * nu / PI.powi(3) * series);
        [ux, uy, uz]
    }

    /// `(σ_zz, σ_xz, σ_yz)`; the remaining components vanish.
    pub fn stress(&self, x: f64, y: f64, z: f64) -> (f64, f64, f64) {
        let (a, b) = (self.a, self.b);
        let nu = self.material.poisson;
        let fi = self.force / self.inertia();
        let (mut sx, mut sy) = (0.0, 0.0);
        for n in 1..=series_terms(a, b, y) {
            let k = n as f64 * PI / a;
            let (sh, ch) = hyperbolic_ratios(k, y, b);
            let coef = alternating(n) / (n as f64).powi(2);
            sx += coef * (k * x).sin() * sh;
            sy += coef * (k * x).cos() * ch;
        }
        let ratio = nu / (1.0 + nu);
        let g = 2.0 * a * a / (PI * PI);
        let szz = fi * y * z;
        let sxz = fi * g * ratio * sx;
        let syz = fi * (b * b - y * y) / 2.0 + fi * ratio * ((3.0 * x * x - a * a) / 6.0 - g * sy);
        (szz, sxz, syz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn interior_points(n: usize, seed: u64) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| [rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95), rng.gen_range(0.5..9.5)])
            .collect()
    }

    #[test]
    fn axial_stress_at_support() {
        let beam = CantileverBeam::default();
        let (szz, _, _) = beam.stress(0.3, 1.0, 10.0);
        assert!((szz - 7.5).abs() < 1e-12);
    }

    #[test]
    fn trivial_values() {
        let beam = CantileverBeam::default();
        assert_eq!(beam.displacement(0.0, 0.4, 3.0)[0], 0.0);
        assert_eq!(beam.stress(0.0, 0.4, 3.0).1, 0.0);
        let z = 7.0;
        let ei = beam.material.young * beam.inertia();
        let uy = beam.displacement(0.0, 0.0, z)[1];
        assert!((uy + z.powi(3) / (6.0 * ei)).abs() < 1e-15);
    }

    #[test]
    fn series_terms_decay() {
        let (a, b) = (1.0, 1.0);
        let bound = |n: f64| (-n * PI * b / a).exp() / n.powi(3);
        assert!(bound(10.0) < 1e-13 * bound(1.0));
        assert_eq!(series_terms(a, b, 1.0), MAX_SERIES_TERMS);
        assert!(series_terms(a, b, 0.0) <= 11);
        assert!((-(series_terms(a, b, 0.5) as f64) * PI * 0.5).exp() < SERIES_TOLERANCE);
    }

    #[test]
    fn free_faces_are_traction_free() {
        let beam = CantileverBeam::default();
        let fi = beam.force / beam.inertia();
        let nu = beam.material.poisson;
        // tail of Σ 1/n² beyond the cap
        let tail = fi * 2.0 / (PI * PI) * nu / (1.0 + nu) / MAX_SERIES_TERMS as f64;
        for i in 0..=10 {
            let x = -1.0 + 0.2 * i as f64;
            // y = ±b: σ_yz = 0
            for y in [-1.0, 1.0] {
                let (_, _, syz) = beam.stress(x, y, 5.0);
                assert!(syz.abs() <= tail, "σyz({x}, {y}) = {syz}");
            }
            // x = ±a: σ_xz = 0
            for xs in [-1.0, 1.0] {
                let (_, sxz, _) = beam.stress(xs, x, 5.0);
                assert!(sxz.abs() < 1e-12 * fi);
            }
        }
    }

    #[test]
    fn stress_matches_hooke_of_displacement() {
        let beam = CantileverBeam::default();
        let (l, m) = (beam.material.lambda, beam.material.mu);
        let h = 1e-6;
        let fi = beam.force / beam.inertia();
        for p in interior_points(20, 4) {
            let mut grad = [[0.0; 3]; 3];
            for j in 0..3 {
                let (mut pp, mut pm) = (p, p);
                pp[j] += h;
                pm[j] -= h;
                let (up, um) = (beam.displacement(pp[0], pp[1], pp[2]), beam.displacement(pm[0], pm[1], pm[2]));
                for i in 0..3 {
                    grad[i][j] = (up[i] - um[i]) / (2.0 * h);
                }
            }
            let tr = grad[0][0] + grad[1][1] + grad[2][2];
            let s = |i: usize, j: usize| m * (grad[i][j] + grad[j][i]) + if i == j { l * tr } else { 0.0 };
            let (szz, sxz, syz) = beam.stress(p[0], p[1], p[2]);
            let scale = fi * beam.length;
            for (fd, exact) in [(s(2, 2), szz), (s(0, 2), sxz), (s(1, 2), syz), (s(0, 0), 0.0), (s(1, 1), 0.0), (s(0, 1), 0.0)] {
                assert!((fd - exact).abs() < 1e-5 * scale, "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn stress_is_in_equilibrium() {
        let beam = CantileverBeam::default();
        let h = 1e-5;
        let fi = beam.force / beam.inertia();
        for p in interior_points(20, 9) {
            let s = |dx: f64, dy: f64, dz: f64| beam.stress(p[0] + dx, p[1] + dy, p[2] + dz);
            let div = (s(h, 0.0, 0.0).1 - s(-h, 0.0, 0.0).1) / (2.0 * h)
                + (s(0.0, h, 0.0).2 - s(0.0, -h, 0.0).2) / (2.0 * h)
                + (s(0.0, 0.0, h).0 - s(0.0, 0.0, -h).0) / (2.0 * h);
            assert!(div.abs() < 1e-8 * fi, "div = {div}");
        }
    }
}
