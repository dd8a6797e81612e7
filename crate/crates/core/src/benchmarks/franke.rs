//! Franke's test function on the unit square.

fn terms(x: f64, y: f64) -> [f64; 4] {
    let (u, v) = (9.0 * x, 9.0 * y);
    [
        0.75 * (-((u - 2.0).powi(2) + (v - 2.0).powi(2)) / 4.0).exp(),
        0.75 * (-(u + 1.0).powi(2) / 49.0 - (v + 1.0) / 10.0).exp(),
        0.5 * (-((u - 7.0).powi(2) + (v - 3.0).powi(2)) / 4.0).exp(),
        -0.2 * (-(u - 4.0).powi(2) - (v - 7.0).powi(2)).exp(),
    ]
}

/// Two Gaussian peaks, a sharper dip and a gentle ridge.
pub fn franke(x: f64, y: f64) -> f64 {
    terms(x, y).iter().sum()
}

/// `(∂f/∂x, ∂f/∂y)`.
pub fn franke_grad(x: f64, y: f64) -> (f64, f64) {
    let [f1, f2, f3, f4] = terms(x, y);
    let (u, v) = (9.0 * x, 9.0 * y);
    let dx = -4.5 * (u - 2.0) * f1 - 18.0 * (u + 1.0) / 49.0 * f2 - 4.5 * (u - 7.0) * f3 - 18.0 * (u - 4.0) * f4;
    let dy = -4.5 * (v - 2.0) * f1 - 0.9 * f2 - 4.5 * (v - 3.0) * f3 - 18.0 * (v - 7.0) * f4;
    (dx, dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn value_at_origin() {
        let expect = 0.75 * (-2.0f64).exp() + 0.75 * (-1.0f64 / 49.0 - 0.1).exp() + 0.5 * (-58.0f64 / 4.0).exp()
            - 0.2 * (-65.0f64).exp();
        assert!((franke(0.0, 0.0) - expect).abs() < 1e-15);
        assert!((franke(0.0, 0.0) - 0.766).abs() < 1e-3);
        assert!(terms(0.0, 0.0)[3].abs() < 1e-20);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = 1e-6;
        for _ in 0..50 {
            let (x, y) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let (gx, gy) = franke_grad(x, y);
            let fx = (franke(x + h, y) - franke(x - h, y)) / (2.0 * h);
            let fy = (franke(x, y + h) - franke(x, y - h)) / (2.0 * h);
            assert!((gx - fx).abs() < 1e-6, "{gx} vs {fx}");
            assert!((gy - fy).abs() < 1e-6, "{gy} vs {fy}");
        }
    }
}
