//! `dcpse`: meshfree derivatives, stress recovery and benchmark studies.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use dcpse::benchmarks::{convergence_study, run_level, BenchmarkProblem, GridKind, LevelMetrics, StudyOptions};
use dcpse::elasticity::{recover, DisplacementField, ElasticMaterial};
use dcpse::io::{read_points_csv, recovery_fields, write_field_csv, write_report, ReportDocument};
use dcpse::operator::{build_operator, MultiIndex, OperatorSpec};
use dcpse::{Error, SpatialIndex};

#[derive(Parser)]
#[command(name = "dcpse", version, about = "DC PSE meshfree derivatives and stress recovery")]
struct Cli {
    /// Worker threads for operator construction (default: all cores).
    #[arg(long, global = true, env = "DCPSE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a derivative operator to a scalar field of a CSV file.
    Derive(DeriveArgs),
    /// Recover strain, stress, von Mises and principal stresses from displacements.
    Recover(RecoverArgs),
    /// Run one refinement level of a benchmark problem.
    Benchmark(BenchmarkArgs),
    /// Run a benchmark over several levels and fit convergence slopes.
    Convergence(ConvergenceArgs),
}

#[derive(Args, Clone, Copy)]
struct OperatorArgs {
    /// Accuracy order r.
    #[arg(long = "r", default_value_t = 2)]
    order: u32,
    /// Kernel width factor c in eps = c * h.
    #[arg(long, default_value_t = 1.0)]
    eps_factor: f64,
    /// Support size factor: k = ceil(factor * number of moment conditions).
    #[arg(long, default_value_t = 2.0)]
    neighbor_factor: f64,
}

impl OperatorArgs {
    fn spec(&self, alpha: MultiIndex) -> OperatorSpec {
        OperatorSpec::new(alpha)
            .with_order(self.order)
            .with_eps_factor(self.eps_factor)
            .with_neighbor_factor(self.neighbor_factor)
    }
}

#[derive(Args)]
struct DeriveArgs {
    /// Input CSV with columns x,y[,z] and named fields.
    #[arg(short, long)]
    input: PathBuf,
    /// Output CSV: input columns plus `<field>_d<alpha>`.
    #[arg(short, long)]
    output: PathBuf,
    /// Name of the scalar field to differentiate.
    #[arg(short, long)]
    field: String,
    /// Derivative orders per axis, e.g. "1,0" for d/dx in 2D.
    #[arg(long)]
    alpha: String,
    #[command(flatten)]
    operator: OperatorArgs,
}

#[derive(Args)]
struct RecoverArgs {
    /// Input CSV with columns x,y[,z],ux,uy[,uz].
    #[arg(short, long)]
    input: PathBuf,
    /// Output CSV with strain, stress, vm and principal columns appended.
    #[arg(short, long)]
    output: PathBuf,
    /// Young's modulus.
    #[arg(long)]
    young: f64,
    /// Poisson's ratio.
    #[arg(long)]
    poisson: f64,
    #[command(flatten)]
    operator: OperatorArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Node layout: structured or jittered.
    #[arg(long, default_value = "structured")]
    kind: String,
    /// Seed of the jittered layout.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// franke, plate or cantilever.
    problem: String,
    #[arg(long, default_value_t = 0)]
    level: u32,
    /// JSON report path.
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    operator: OperatorArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// franke, plate or cantilever.
    problem: String,
    /// Comma-separated levels, or a single count N for the first N
    /// levels of the problem's default sequence.
    #[arg(long)]
    levels: Option<String>,
    /// Leave the coarsest level out of the slope fit.
    #[arg(long)]
    exclude_coarsest: bool,
    /// JSON report path.
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    operator: OperatorArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Derive(args) => cmd_derive(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Convergence(args) => cmd_convergence(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err.downcast_ref::<Error>().is_some_and(Error::is_numerical);
            ExitCode::from(if numerical { 1 } else { 2 })
        }
    }
}

fn diagnostics(max_condition: f64, max_residual: f64, max_support: usize) {
    eprintln!("max condition estimate: {max_condition:.3e}");
    eprintln!("max moment residual:    {max_residual:.3e}");
    eprintln!("max support size:       {max_support}");
}

fn cmd_derive(args: DeriveArgs) -> anyhow::Result<()> {
    let alpha: MultiIndex = args.alpha.parse()?;
    let (cloud, mut fields) = read_points_csv(&args.input)?;
    let values = fields.get(&args.field).ok_or_else(|| {
        let known: Vec<&str> = fields.keys().map(String::as_str).collect();
        anyhow!("field '{}' not found in {} (available: {})", args.field, args.input.display(), known.join(", "))
    })?;
    let index = SpatialIndex::build(&cloud)?;
    let op = build_operator(&cloud, &index, &args.operator.spec(alpha))?;
    let derived = op.apply(values)?;
    let residual = op.verify_moments(&cloud).into_iter().fold(0.0, f64::max);
    diagnostics(op.max_condition(), residual, op.max_support_size());
    let suffix: String = alpha.components().iter().map(u32::to_string).collect();
    fields.insert(format!("{}_d{suffix}", args.field), derived);
    write_field_csv(&args.output, &cloud, &fields)?;
    Ok(())
}

fn cmd_recover(args: RecoverArgs) -> anyhow::Result<()> {
    let material = ElasticMaterial::new(args.young, args.poisson)?;
    let (cloud, mut fields) = read_points_csv(&args.input)?;
    let names = &["ux", "uy", "uz"][..cloud.dim()];
    let components = names
        .iter()
        .map(|n| {
            fields
                .get(*n)
                .cloned()
                .with_context(|| format!("displacement column '{n}' missing in {}", args.input.display()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let u = DisplacementField::new(components)?;
    let index = SpatialIndex::build(&cloud)?;
    let spec = args.operator.spec(MultiIndex::unit(cloud.dim(), 0));
    let rec = recover(&cloud, &index, &u, &material, &spec)?;
    let d = rec.diagnostics;
    diagnostics(d.max_condition, d.max_moment_residual, d.max_support);
    fields.extend(recovery_fields(&rec));
    write_field_csv(&args.output, &cloud, &fields)?;
    Ok(())
}

fn problem_and_kind(problem: &str, grid: &GridArgs) -> anyhow::Result<(BenchmarkProblem, GridKind)> {
    Ok((problem.parse()?, grid.kind.parse()?))
}

fn print_table(problem: &BenchmarkProblem, levels: &[LevelMetrics]) {
    let names = problem.components();
    let mut header = format!("{:>5} {:>8} {:>10}", "level", "n", "h");
    for name in names {
        header += &format!(" {:>12} {:>12}", format!("nrmse({name})"), format!("linf({name})"));
    }
    println!("{header}");
    for l in levels {
        let mut row = format!("{:>5} {:>8} {:>10.4e}", l.level, l.n, l.h);
        for name in names {
            row += &format!(" {:>12.4e} {:>12.4e}", l.nrmse[*name], l.linf[*name]);
        }
        println!("{row}");
    }
}

fn level_diagnostics(levels: &[LevelMetrics]) {
    let cond = levels.iter().map(|l| l.max_condition).fold(0.0, f64::max);
    let res = levels.iter().map(|l| l.max_moment_residual).fold(0.0, f64::max);
    let support = levels.iter().map(|l| l.max_support).max().unwrap_or(0);
    diagnostics(cond, res, support);
}

fn cmd_benchmark(args: BenchmarkArgs) -> anyhow::Result<()> {
    let (problem, kind) = problem_and_kind(&args.problem, &args.grid)?;
    let spec = args.operator.spec(MultiIndex::unit(problem.dim(), 0));
    let metrics = run_level(&problem, args.level, kind, args.grid.seed, &spec)?;
    let levels = vec![metrics];
    print_table(&problem, &levels);
    level_diagnostics(&levels);
    let doc = ReportDocument::new(problem.name(), &kind.to_string(), args.grid.seed, &spec, levels);
    write_report(&args.output, &doc)?;
    Ok(())
}

fn parse_levels(text: Option<&str>, problem: &BenchmarkProblem) -> anyhow::Result<Vec<u32>> {
    let defaults = problem.default_levels();
    let Some(text) = text else {
        return Ok(defaults);
    };
    let values = text
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| anyhow!("bad level '{t}' in --levels")))
        .collect::<anyhow::Result<Vec<u32>>>()?;
    if let [count] = values[..] {
        if count < 3 {
            bail!("a convergence study needs at least 3 levels, got {count}");
        }
        return Ok((defaults[0]..defaults[0] + count).collect());
    }
    Ok(values)
}

fn cmd_convergence(args: ConvergenceArgs) -> anyhow::Result<()> {
    let (problem, kind) = problem_and_kind(&args.problem, &args.grid)?;
    let levels = parse_levels(args.levels.as_deref(), &problem)?;
    let spec = args.operator.spec(MultiIndex::unit(problem.dim(), 0));
    let options = StudyOptions {
        kind,
        seed: args.grid.seed,
        exclude_coarsest: args.exclude_coarsest,
    };
    let report = convergence_study(&problem, &levels, &spec, &options)?;
    print_table(&problem, &report.levels);
    for (name, fit) in &report.slopes {
        println!("slope({name}) = {:.4} (fit residual {:.3e})", fit.slope, fit.residual);
    }
    level_diagnostics(&report.levels);
    write_report(&args.output, &ReportDocument::from_study(&report, &spec))?;
    Ok(())
}
