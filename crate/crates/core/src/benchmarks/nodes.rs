//! Node-set generators for the benchmark geometries.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::cantilever::CantileverBeam;
use crate::benchmarks::kirsch::KirschPlate;
use crate::pointcloud::PointCloud;
use crate::{Error, Result};

/// Fraction of the local spacing by which jittered nodes may move.
pub const JITTER_FRACTION: f64 = 0.25;

/// Structured grid or interior-jittered grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridKind {
    #[default]
    Structured,
    Jittered,
}

impl GridKind {
    fn jitter(self) -> f64 {
        match self {
            GridKind::Structured => 0.0,
            GridKind::Jittered => JITTER_FRACTION,
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKind::Structured => "structured",
            GridKind::Jittered => "jittered",
        })
    }
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structured" => Ok(GridKind::Structured),
            "jittered" => Ok(GridKind::Jittered),
            other => Err(Error::Invalid(format!(
                "unknown grid kind '{other}' (expected structured or jittered)"
            ))),
        }
    }
}

/// Tensor grid with `counts[i]` nodes on `[0, lengths[i]]` along axis `i`.
/// Nodes off the boundary are moved by up to `jitter · spacing` per axis.
/// Axis 0 varies fastest.
pub fn jittered_box(counts: &[usize], lengths: &[f64], jitter: f64, seed: u64) -> PointCloud {
    let lower = vec![0.0; counts.len()];
    jittered_grid(counts, &lower, lengths, jitter, seed)
}

fn jittered_grid(counts: &[usize], lower: &[f64], lengths: &[f64], jitter: f64, seed: u64) -> PointCloud {
    assert_eq!(counts.len(), lengths.len());
    assert!(counts.iter().all(|&c| c >= 2), "each axis needs at least 2 nodes");
    let dim = counts.len();
    let spacing: Vec<f64> = counts.iter().zip(lengths).map(|(&c, &l)| l / (c - 1) as f64).collect();
    let total: usize = counts.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(total * dim);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let interior = idx.iter().zip(counts).all(|(&i, &c)| i > 0 && i + 1 < c);
        for axis in 0..dim {
            let mut x = lower[axis] + idx[axis] as f64 * spacing[axis];
            if interior && jitter > 0.0 {
                x += rng.gen_range(-1.0..=1.0) * jitter * spacing[axis];
            }
            coords.push(x);
        }
        for axis in 0..dim {
            idx[axis] += 1;
            if idx[axis] < counts[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    PointCloud::from_flat(dim, coords).expect("grid coordinates are finite")
}

/// Intervals per axis of the unit-square grid at `level`.
pub fn unit_square_intervals(level: u32) -> usize {
    8 << level
}

/// `(m+1)²` nodes on the unit square with `m = 8·2^level`.
pub fn unit_square(level: u32, kind: GridKind, seed: u64) -> PointCloud {
    let n = unit_square_intervals(level) + 1;
    jittered_box(&[n, n], &[1.0, 1.0], kind.jitter(), seed)
}

/// Strength of the geometric radial grading of plate nodes toward the hole.
pub const PLATE_GRADING: f64 = 2.0;

/// Geometric grading `(e^{βs} - 1)/(e^β - 1)` of `s ∈ [0, 1]`.
pub fn graded(s: f64, beta: f64) -> f64 {
    (beta * s).exp_m1() / beta.exp_m1()
}

/// Quarter plate with a hole: `(m+1)²` nodes blended from the arc `r = a`
/// to the outer square `max(x, y) = w`, `m = 8·2^level`, radially graded
/// so cells next to the hole are close to square.
pub fn plate(plate: &KirschPlate, level: u32, kind: GridKind, seed: u64) -> PointCloud {
    let n = unit_square_intervals(level) + 1;
    let params = jittered_box(&[n, n], &[1.0, 1.0], kind.jitter(), seed);
    let coords: Vec<f64> = params
        .points()
        .flat_map(|st| plate_map(plate.radius, plate.half_width, graded(st[0], PLATE_GRADING), st[1]))
        .collect();
    PointCloud::from_flat(2, coords).expect("plate coordinates are finite")
}

/// Maps `(s, t) ∈ [0,1]²` to the quarter plate: `t` sweeps the angle
/// `θ = tπ/2`, `s` blends linearly along the ray from the arc to the square.
pub fn plate_map(a: f64, w: f64, s: f64, t: f64) -> [f64; 2] {
    let theta = t * FRAC_PI_2;
    let (sin, cos) = theta.sin_cos();
    let inner = [a * cos, a * sin];
    let outer = if theta <= FRAC_PI_2 / 2.0 {
        [w, w * sin / cos]
    } else {
        [w * cos / sin, w]
    };
    [inner[0] + s * (outer[0] - inner[0]), inner[1] + s * (outer[1] - inner[1])]
}

/// Intervals `(nx, ny, nz)` of the cantilever grid at `level`.
pub fn cantilever_intervals(level: u32) -> [usize; 3] {
    [4 << level, 4 << level, 20 << level]
}

/// Box grid on `[-a, a] × [-b, b] × [0, L]`; level 0 has `5 × 5 × 21` nodes.
pub fn cantilever(beam: &CantileverBeam, level: u32, kind: GridKind, seed: u64) -> PointCloud {
    let [nx, ny, nz] = cantilever_intervals(level);
    jittered_grid(
        &[nx + 1, ny + 1, nz + 1],
        &[-beam.a, -beam.b, 0.0],
        &[2.0 * beam.a, 2.0 * beam.b, beam.length],
        kind.jitter(),
        seed,
    )
}
