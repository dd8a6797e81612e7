//! Benchmark problems and convergence studies.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::benchmarks::cantilever::CantileverBeam;
use crate::benchmarks::franke::{franke, franke_grad};
use crate::benchmarks::kirsch::KirschPlate;
use crate::benchmarks::metrics::{fit_loglog, linf, nrmse, SlopeFit};
use crate::benchmarks::nodes::{self, GridKind};
use crate::elasticity::{recover_with, DisplacementField, OperatorDiagnostics};
use crate::operator::{gradient_operator, MultiIndex, OperatorSpec};
use crate::pointcloud::{normalized_spacing, PointCloud, SpatialIndex};
use crate::{Error, Result};

/// One of the built-in analytic benchmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchmarkProblem {
    /// Gradient of Franke's function on the unit square.
    Franke,
    /// Stress around a hole from the exact plane-strain displacement.
    Plate(KirschPlate),
    /// Stress in a 3D cantilever from the exact displacement.
    Cantilever(CantileverBeam),
}

impl BenchmarkProblem {
    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkProblem::Franke => "franke",
            BenchmarkProblem::Plate(_) => "plate",
            BenchmarkProblem::Cantilever(_) => "cantilever",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BenchmarkProblem::Cantilever(_) => 3,
            _ => 2,
        }
    }

    /// Names of the compared output components.
    pub fn components(&self) -> &'static [&'static str] {
        match self {
            BenchmarkProblem::Franke => &["dudx", "dudy"],
            BenchmarkProblem::Plate(_) => &["sxx", "syy", "sxy"],
            BenchmarkProblem::Cantilever(_) => &["szz", "sxz", "syz"],
        }
    }

    /// Refinement levels used by default in studies.
    pub fn default_levels(&self) -> Vec<u32> {
        match self {
            BenchmarkProblem::Cantilever(_) => vec![0, 1, 2],
            _ => vec![1, 2, 3, 4],
        }
    }

    pub fn nodes(&self, level: u32, kind: GridKind, seed: u64) -> PointCloud {
        match self {
            BenchmarkProblem::Franke => nodes::unit_square(level, kind, seed),
            BenchmarkProblem::Plate(p) => nodes::plate(p, level, kind, seed),
            BenchmarkProblem::Cantilever(b) => nodes::cantilever(b, level, kind, seed),
        }
    }

    /// Recovers the output components on `cloud` and pairs them with the
    /// analytic values.
    pub fn evaluate(&self, cloud: &PointCloud, index: &SpatialIndex, spec: &OperatorSpec) -> Result<Evaluation> {
        let spec = spec.with_alpha(MultiIndex::unit(cloud.dim(), 0));
        let ops = gradient_operator(cloud, index, &spec)?;
        let diagnostics = OperatorDiagnostics::from_operators(&ops, cloud);
        let names = self.components();
        let (computed, exact): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match self {
            BenchmarkProblem::Franke => {
                let u = cloud.sample(|p| franke(p[0], p[1]));
                let computed = ops.iter().map(|op| op.apply(&u)).collect::<Result<Vec<_>>>()?;
                let grads: Vec<(f64, f64)> = cloud.points().map(|p| franke_grad(p[0], p[1])).collect();
                (computed, vec![grads.iter().map(|g| g.0).collect(), grads.iter().map(|g| g.1).collect()])
            }
            BenchmarkProblem::Plate(plate) => {
                let u = DisplacementField::from_fn(2, cloud.points(), |p| {
                    let (ux, uy) = plate.displacement(p[0], p[1]).unwrap_or((f64::NAN, f64::NAN));
                    vec![ux, uy]
                })?;
                let rec = recover_with(&ops, &u, &plate.material, diagnostics)?;
                let exact: Vec<(f64, f64, f64)> =
                    cloud.points().map(|p| plate.stress(p[0], p[1])).collect::<Result<_>>()?;
                let n = cloud.len();
                let computed = [(0, 0), (1, 1), (0, 1)]
                    .iter()
                    .map(|&(i, j)| (0..n).map(|p| rec.stress.get(p, i, j)).collect())
                    .collect();
                (
                    computed,
                    vec![
                        exact.iter().map(|s| s.0).collect(),
                        exact.iter().map(|s| s.1).collect(),
                        exact.iter().map(|s| s.2).collect(),
                    ],
                )
            }
            BenchmarkProblem::Cantilever(beam) => {
                let u = DisplacementField::from_fn(3, cloud.points(), |p| beam.displacement(p[0], p[1], p[2]).to_vec())?;
                let rec = recover_with(&ops, &u, &beam.material, diagnostics)?;
                let exact: Vec<(f64, f64, f64)> = cloud.points().map(|p| beam.stress(p[0], p[1], p[2])).collect();
                let n = cloud.len();
                let computed = [(2, 2), (0, 2), (1, 2)]
                    .iter()
                    .map(|&(i, j)| (0..n).map(|p| rec.stress.get(p, i, j)).collect())
                    .collect();
                (
                    computed,
                    vec![
                        exact.iter().map(|s| s.0).collect(),
                        exact.iter().map(|s| s.1).collect(),
                        exact.iter().map(|s| s.2).collect(),
                    ],
                )
            }
        };
        Ok(Evaluation {
            components: names
                .iter()
                .zip(computed.into_iter().zip(exact))
                .map(|(name, (computed, exact))| ComponentValues {
                    name: name.to_string(),
                    computed,
                    exact,
                })
                .collect(),
            diagnostics,
        })
    }
}

impl fmt::Display for BenchmarkProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "franke" => Ok(BenchmarkProblem::Franke),
            "plate" => Ok(BenchmarkProblem::Plate(KirschPlate::default())),
            "cantilever" => Ok(BenchmarkProblem::Cantilever(CantileverBeam::default())),
            other => Err(Error::Invalid(format!(
                "unknown benchmark '{other}' (expected franke, plate or cantilever)"
            ))),
        }
    }
}

/// Recovered and analytic values of one output component.
#[derive(Debug, Clone)]
pub struct ComponentValues {
    pub name: String,
    pub computed: Vec<f64>,
    pub exact: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub components: Vec<ComponentValues>,
    pub diagnostics: OperatorDiagnostics,
}

/// Errors and operator diagnostics at one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    pub level: u32,
    pub n: usize,
    pub h: f64,
    pub nrmse: BTreeMap<String, f64>,
    pub linf: BTreeMap<String, f64>,
    pub max_condition: f64,
    pub max_moment_residual: f64,
    pub max_support: usize,
}

/// Generates, evaluates and scores one level.
pub fn run_level(
    problem: &BenchmarkProblem,
    level: u32,
    kind: GridKind,
    seed: u64,
    spec: &OperatorSpec,
) -> Result<LevelMetrics> {
    let cloud = problem.nodes(level, kind, seed);
    let index = SpatialIndex::build(&cloud)?;
    let eval = problem.evaluate(&cloud, &index, spec)?;
    let mut out = LevelMetrics {
        level,
        n: cloud.len(),
        h: normalized_spacing(cloud.len(), cloud.dim())?,
        nrmse: BTreeMap::new(),
        linf: BTreeMap::new(),
        max_condition: eval.diagnostics.max_condition,
        max_moment_residual: eval.diagnostics.max_moment_residual,
        max_support: eval.diagnostics.max_support,
    };
    for c in &eval.components {
        out.nrmse.insert(c.name.clone(), nrmse(&c.exact, &c.computed)?);
        out.linf.insert(c.name.clone(), linf(&c.exact, &c.computed)?);
    }
    Ok(out)
}

/// Node layout and fit options of a study.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StudyOptions {
    pub kind: GridKind,
    pub seed: u64,
    /// Leave the coarsest level out of the slope fit.
    pub exclude_coarsest: bool,
}

/// Per-level errors and fitted convergence slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub problem: String,
    pub grid: String,
    pub seed: u64,
    /// Sorted by decreasing `h`.
    pub levels: Vec<LevelMetrics>,
    pub slopes: BTreeMap<String, SlopeFit>,
    pub exclude_coarsest: bool,
}

pub fn convergence_study(
    problem: &BenchmarkProblem,
    levels: &[u32],
    spec: &OperatorSpec,
    options: &StudyOptions,
) -> Result<ConvergenceReport> {
    let mut sorted = levels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 3 {
        return Err(Error::Invalid(format!(
            "a convergence study needs at least 3 distinct levels, got {}",
            sorted.len()
        )));
    }
    let results = sorted
        .iter()
        .map(|&level| run_level(problem, level, options.kind, options.seed, spec))
        .collect::<Result<Vec<_>>>()?;
    let fitted = if options.exclude_coarsest { &results[1..] } else { &results[..] };
    let h: Vec<f64> = fitted.iter().map(|l| l.h).collect();
    let mut slopes = BTreeMap::new();
    for name in problem.components() {
        let e: Vec<f64> = fitted.iter().map(|l| l.nrmse[*name]).collect();
        slopes.insert(name.to_string(), fit_loglog(&h, &e)?);
    }
    Ok(ConvergenceReport {
        problem: problem.name().to_string(),
        grid: options.kind.to_string(),
        seed: options.seed,
        levels: results,
        slopes,
        exclude_coarsest: options.exclude_coarsest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec2() -> OperatorSpec {
        OperatorSpec::new(MultiIndex::unit(2, 0))
    }

    #[test]
    fn parse_problems() {
        for name in ["franke", "plate", "cantilever"] {
            assert_eq!(name.parse::<BenchmarkProblem>().unwrap().name(), name);
        }
        assert!("beam".parse::<BenchmarkProblem>().is_err());
    }

    #[test]
    fn franke_level_metrics() {
        let m = run_level(&BenchmarkProblem::Franke, 0, GridKind::Structured, 0, &spec2()).unwrap();
        assert_eq!(m.n, 81);
        assert_eq!(m.h, 0.125);
        assert!(m.nrmse["dudx"] > 0.0 && m.nrmse["dudx"] < 0.2);
        assert!(m.max_moment_residual < 1e-8);
    }

    #[test]
    fn study_orders_levels_and_fits_slopes() {
        let r = convergence_study(&BenchmarkProblem::Franke, &[2, 0, 1], &spec2(), &StudyOptions::default()).unwrap();
        let hs: Vec<f64> = r.levels.iter().map(|l| l.h).collect();
        assert!(hs.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(r.slopes.len(), 2);
        assert!(r.slopes["dudx"].slope > 1.0);
        assert!(r.slopes["dudx"].residual.is_finite());
    }

    #[test]
    fn study_needs_three_levels() {
        assert!(convergence_study(&BenchmarkProblem::Franke, &[0, 1, 1], &spec2(), &StudyOptions::default()).is_err());
    }

    #[test]
    fn plate_stress_recovery_coarse() {
        let plate = BenchmarkProblem::Plate(KirschPlate::default());
        let m = run_level(&plate, 1, GridKind::Jittered, 3, &spec2()).unwrap();
        assert!(m.nrmse["sxx"] < 0.1, "{:?}", m.nrmse);
    }
}
