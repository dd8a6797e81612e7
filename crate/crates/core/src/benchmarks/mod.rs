//! Analytic benchmark problems, node generators, error measures and
//! convergence studies.

pub mod cantilever;
pub mod franke;
pub mod kirsch;
pub mod metrics;
pub mod nodes;
mod study;

pub use cantilever::CantileverBeam;
pub use franke::{franke, franke_grad};
pub use kirsch::{kirsch_displacement, kirsch_stress, KirschPlate};
pub use metrics::{fit_loglog, linf, nrmse, SlopeFit};
pub use nodes::GridKind;
pub use study::{
    convergence_study, run_level, BenchmarkProblem, ComponentValues, ConvergenceReport, Evaluation, LevelMetrics,
    StudyOptions,
};

use crate::pointcloud::PointCloud;

/// Node set of `problem` at `level`.
pub fn generate_nodes(problem: &BenchmarkProblem, level: u32, kind: GridKind, seed: u64) -> PointCloud {
    problem.nodes(level, kind, seed)
}
