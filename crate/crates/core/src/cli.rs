//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors or
//! failed verification checks.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cur;
use crate::dense::{self, DenseMatrix};
use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig, ExperimentRun, SeriesSpec, StructuredFamily};
use crate::sampling::SelectionPair;
use crate::tangent;
use crate::verify::{self, Suite, SuiteSizes};

#[derive(Debug, Parser)]
#[command(name = "curtangent", version, about = "Rank-truncated CUR perturbation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep a perturbation family and write the error table as CSV.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a log-log SVG plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run Monte Carlo property checks.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Print the 3×3 worked example: CUR exactness, SVD error and projectors.
    Example41,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Generic,
    Invisible,
    Normal,
    Visibility,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Projectors,
    Calculus,
    Bounds,
    All,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long, default_value_t = 80)]
    m: usize,
    #[arg(long, default_value_t = 70)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    rank: usize,
    /// Number of sampled rows.
    #[arg(long, default_value_t = 10)]
    rows: usize,
    /// Number of sampled columns.
    #[arg(long, default_value_t = 10)]
    cols: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-8)]
    eps_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    eps_max: f64,
    #[arg(long, default_value_t = 2)]
    eps_per_decade: u32,
    #[arg(long, default_value_t = 1e-3)]
    alpha_min: f64,
    #[arg(long, default_value_t = 10.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 5)]
    alpha_per_decade: u32,
}

fn config(problem: &ProblemArgs, grid: Option<&GridArgs>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        m: problem.m,
        n: problem.n,
        rank: problem.rank,
        rows: problem.rows,
        cols: problem.cols,
        seed: problem.seed,
        ..ExperimentConfig::default()
    };
    if let Some(g) = grid {
        cfg.eps_grid = experiment::log_grid(g.eps_min, g.eps_max, g.eps_per_decade)?;
        cfg.alpha_grid = experiment::log_grid(g.alpha_min, g.alpha_max, g.alpha_per_decade)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<(ExperimentRun, SeriesSpec)> {
    Ok(match kind {
        ExperimentKind::Generic => {
            (experiment::run_generic_experiment(cfg)?, SeriesSpec::versus_epsilon("Generic perturbation"))
        }
        ExperimentKind::Invisible => (
            experiment::run_structured_experiment(cfg, StructuredFamily::Invisible)?,
            SeriesSpec::versus_epsilon("Sampling-invisible perturbation"),
        ),
        ExperimentKind::Normal => (
            experiment::run_structured_experiment(cfg, StructuredFamily::Normal)?,
            SeriesSpec::versus_epsilon("Normal perturbation"),
        ),
        ExperimentKind::Visibility => {
            (experiment::run_visibility_experiment(cfg)?, SeriesSpec::versus_alpha("Gradually visible perturbation"))
        }
    })
}

fn experiment_command(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    out: Option<&PathBuf>,
    svg: Option<&PathBuf>,
) -> Result<()> {
    let (run, spec) = run_experiment(kind, cfg)?;
    let records = run.records();
    match out {
        Some(path) => experiment::write_csv(&records, path)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            experiment::write_records(&records, &mut lock)
                .map_err(|source| Error::Csv { path: PathBuf::from("<stdout>"), source })?;
        }
    }
    if let Some(path) = svg {
        experiment::write_svg_loglog(&records, &spec, path)?;
    }
    Ok(())
}

fn verify_command(suite: SuiteArg, cfg: &ExperimentConfig) -> Result<bool> {
    let suite = match suite {
        SuiteArg::Projectors => Suite::Projectors,
        SuiteArg::Calculus => Suite::Calculus,
        SuiteArg::Bounds => Suite::Bounds,
        SuiteArg::All => Suite::All,
    };
    let outcomes = verify::run_suite(suite, cfg, &SuiteSizes::default())?;
    let mut ok = true;
    for o in &outcomes {
        println!("{o}");
        ok &= o.passed;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} checks, {} failed", outcomes.len(), failed);
    Ok(ok)
}

fn example_command() -> Result<()> {
    let m = DenseMatrix::from_element(3, 3, 1.0 / 3.0);
    let svd = dense::compact_svd(&m, dense::DEFAULT_REL_TOL)?;
    let sel = SelectionPair::new(vec![0], vec![0], 3, 3)?;
    let tp = tangent::make_tangent_point(&svd, &sel)?;
    let e = DenseMatrix::from_fn(3, 3, |i, j| if i == 2 && j == 2 { 1.0 } else { 0.0 });
    println!("M = ones(3,3)/3, row 1 and column 1 sampled, E = e3 e3ᵀ");
    for eps in [1e-3, 2.0 / 3.0, 10.0] {
        let a = &m + &e * eps;
        let cur_err = dense::fro_norm(&(cur::cur_rank_truncated(&a, &sel, 1)? - &m));
        let svd_err = dense::fro_norm(&(dense::truncate_rank(&a, 1)? - &m));
        println!("eps = {eps:.6}: ‖Φ₁(M+εE) − M‖_F = {cur_err:.3e}, ‖(M+εE)₁ − M‖_F = {svd_err:.15}");
    }
    println!("√33/9 = {:.15}", 33f64.sqrt() / 9.0);
    print_matrix("(M + 2/3 E)₁", &dense::truncate_rank(&(&m + &e * (2.0 / 3.0)), 1)?);
    print_matrix("Π_U", tp.pi_u());
    print_matrix("Π_V", tp.pi_v());
    let ob = tangent::obliqueness(&tp);
    println!("δ_U = {:.15}, δ_V = {:.15}, ‖Π_V‖₂ = {:.15}", ob.delta_u, ob.delta_v, ob.norm_pi_v);
    println!("I(E) has Frobenius norm {:.3e}", dense::fro_norm(&tangent::oblique_tangent_project(&tp, &e)?));
    let _ = io::stdout().flush();
    Ok(())
}

fn print_matrix(name: &str, a: &DenseMatrix) {
    println!("{name} =");
    for i in 0..a.nrows() {
        let row: Vec<String> = a.row(i).iter().map(|x| format!("{x:9.5}")).collect();
        println!("  [{}]", row.join(" "));
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Experiment { kind, problem, grid, out, svg } => config(problem, Some(grid))
            .and_then(|cfg| experiment_command(*kind, &cfg, out.as_ref(), svg.as_ref()))
            .map(|()| true),
        Command::Verify { suite, problem } => config(problem, None).and_then(|cfg| verify_command(*suite, &cfg)),
        Command::Example41 => example_command().map(|()| true),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_problem_exits_two() {
        assert_eq!(cli_main(["curtangent", "experiment", "generic", "--rank", "20"]), 2);
    }
}
