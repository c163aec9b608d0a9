use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand};

use tvsbm::eval::{error_report, report_csv};
use tvsbm::io::{self, Dataset, FitArtifact, Truth};
use tvsbm::optimizer::OptimizerConfig;
use tvsbm::pipeline::FusionSelection;
use tvsbm::simulator::{example_scenario, generate, ErrorScale, Example};
use tvsbm::{fit, Error, FitConfig, PartitionMode, ShapeConstraint};

#[derive(Parser)]
#[command(
    name = "tvsbm",
    version,
    about = "Time-varying stochastic blockmodels for multi-subject networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    #[command(group(ArgGroup::new("design").required(true).args(["example", "scenario"])))]
    Simulate {
        #[arg(long, value_parser = clap::value_parser!(Example))]
        example: Option<Example>,
        /// JSON scenario (same layout as the `scenario` object of truth.json).
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        n_subjects: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a dataset directory and write fit.json.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        intervals: usize,
        #[arg(long, default_value = "equal-length")]
        partition: PartitionMode,
        #[arg(long, default_value = "unimodal")]
        shape: ShapeConstraint,
        #[arg(long, default_value_t = 5)]
        quad_points: usize,
        /// Fix the number of fused groups instead of choosing it by BIC.
        #[arg(long)]
        groups: Option<usize>,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Min-max rescale times even when they already lie in [0, 1].
        #[arg(long)]
        normalize_times: bool,
        /// Fail with exit code 3 if the optimizer does not converge.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relative L2 error of every stage against the truth (CSV on stdout).
    Eval {
        #[arg(long)]
        fit: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value = "probability")]
        scale: ErrorScale,
    },
    /// Evaluate fitted curves on a uniform grid.
    ExportCurves {
        #[arg(long)]
        fit: PathBuf,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
    NotConverged(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::NotConverged(iters)) => {
            eprintln!("error: optimizer did not converge within {iters} iterations");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidArgument(_) => 1,
                Error::Numerical(_) => 3,
                _ => 2,
            })
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate {
            example,
            scenario,
            n_subjects,
            seed,
            out,
        } => {
            let (mut sc, name) = match (example, scenario) {
                (Some(ex), _) => {
                    let n = n_subjects.ok_or_else(|| {
                        Failure::Usage("--n-subjects is required with --example".into())
                    })?;
                    (
                        example_scenario(ex, n, seed.unwrap_or(0)),
                        Some(ex.to_string()),
                    )
                }
                (None, Some(path)) => (io::read_scenario(&path)?, None),
                (None, None) => unreachable!("clap enforces the group"),
            };
            if let Some(n) = n_subjects {
                sc.n_subjects = n;
            }
            if let Some(s) = seed {
                sc.seed = s;
            }
            let data = Dataset::from(generate(&sc)?);
            io::write_dataset(&out, &data)?;
            io::write_truth(&out.join(io::TRUTH_FILE), &Truth::new(sc, name))?;
            Ok(())
        }
        Command::Fit {
            data,
            intervals,
            partition,
            shape,
            quad_points,
            groups,
            max_iters,
            tol,
            normalize_times,
            strict,
            out,
        } => {
            let start = Instant::now();
            let dataset = io::read_dataset(&data, normalize_times)?;
            let stats = dataset.stats()?;
            let mut config = FitConfig::new(intervals);
            config.partition = partition;
            config.shape = shape;
            config.quad_points = quad_points;
            config.fusion = groups.map_or(FusionSelection::Bic, FusionSelection::Fixed);
            config.optimizer = OptimizerConfig {
                max_outer_iters: max_iters,
                rel_tol: tol,
                ..OptimizerConfig::default()
            };
            let result = fit(&dataset.times(), &stats, &config)?;
            let ids: Vec<String> = dataset
                .networks
                .iter()
                .map(|n| n.subject_id.clone())
                .collect();
            let artifact = FitArtifact::new(&config, &result, &ids, dataset.time_scale);
            io::write_fit(&out, &artifact)?;
            eprintln!(
                "fit: {} subjects, {} iterations, converged: {}, wall-clock {:.3} s",
                ids.len(),
                artifact.diagnostics.iterations,
                artifact.diagnostics.converged,
                start.elapsed().as_secs_f64()
            );
            if strict && !artifact.diagnostics.converged {
                return Err(Failure::NotConverged(artifact.diagnostics.iterations));
            }
            Ok(())
        }
        Command::Eval { fit, truth, scale } => {
            let artifact = io::read_fit(&fit)?;
            let truth = io::read_truth(&truth)?;
            let rows = error_report(&artifact, &truth.scenario, scale)?;
            print!("{}", report_csv(&rows));
            Ok(())
        }
        Command::ExportCurves { fit, grid, out } => {
            let artifact = io::read_fit(&fit)?;
            io::atomic_write(&out, &io::curves_csv(&artifact, grid)?)?;
            Ok(())
        }
    }
}
