//! `latstretch`: batch experiments on lattice points under stretched curves.
//!
//! Every subcommand writes one CSV table (stdout unless `--out`) whose first
//! line is a `# latstretch <table> v1` comment. Exit status is 0 on success,
//! 1 when an experiment finds an invariant violation or fails numerically,
//! and 2 on usage errors.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latstretch::curves::{CurveSpec, Exponent};
use latstretch::experiments::{default_step, Objective, RGrid};
use latstretch::spectral::Problem;
use latstretch::Quadrant;

use config::{Experiment, ExperimentConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn usage(e: latstretch::Error) -> CliError {
        use latstretch::Error as E;
        match e {
            E::InvalidParameter(_) | E::Domain { .. } | E::Precondition { .. } | E::Spec(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failure(e.to_string()),
        }
    }

    fn io(e: std::io::Error) -> CliError {
        CliError::Failure(format!("write failed: {e}"))
    }

    fn csv(e: csv::Error) -> CliError {
        CliError::Failure(format!("write failed: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "latstretch",
    version,
    about = "Lattice points under stretched concave curves"
)]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    /// Run the experiment described by a JSON config instead of a subcommand.
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Output path for a config run (overrides `output_path`).
    #[arg(long, requires = "config")]
    out: Option<PathBuf>,
    /// Worker threads for a config run (overrides `parallelism`).
    #[arg(long, requires = "config")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct Common {
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Figure2,
    Figure5,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScanMode {
    /// Maximise the open-quadrant count.
    Max,
    /// Minimise the closed-quadrant count.
    Min,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CountMode {
    Positive,
    Nonnegative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EigenProblem {
    Dirichlet,
    Neumann,
    Oscillator,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal stretch factors over a radius grid.
    Scan {
        /// Curve exponent; `inf` for the square.
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        preset: Option<Preset>,
        /// Explicit radius (repeatable); replaces the grid.
        #[arg(long)]
        r: Vec<f64>,
        /// First grid multiple.
        #[arg(long, default_value_t = 1)]
        r_start: u64,
        #[arg(long, default_value_t = 2330)]
        r_count: usize,
        /// Grid spacing, `√3/10` by default.
        #[arg(long)]
        r_step: Option<f64>,
        #[arg(long, value_enum, default_value_t = ScanMode::Max)]
        mode: ScanMode,
        #[command(flatten)]
        common: Common,
    },
    /// Counts at several stretch factors.
    Counterexample {
        #[arg(long)]
        p: Option<String>,
        /// JSON curve description, replacing `--p`.
        #[arg(long, value_name = "JSON")]
        curve: Option<PathBuf>,
        #[arg(long, required = true)]
        r: Vec<f64>,
        #[arg(long, required = true)]
        s: Vec<f64>,
        #[arg(long, value_enum, default_value_t = CountMode::Positive)]
        mode: CountMode,
        #[command(flatten)]
        common: Common,
    },
    /// The diamond at `r = √2(m + ½)` against the balanced diamond.
    Cluster {
        #[arg(long, default_value_t = 1000)]
        max_m: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluates every counting bound on seeded random draws.
    Audit {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Optimised eigenvalues against their two-term prediction.
    Eigen {
        #[arg(long, value_enum, default_value_t = EigenProblem::Dirichlet)]
        problem: EigenProblem,
        /// Eigenvalue index (repeatable); 100, 1000, 10⁴ and 10⁵ by default.
        #[arg(long)]
        n: Vec<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal stretch factors for the oscillator levels `1..=max-n`.
    Oscillator {
        #[arg(long, default_value_t = 50)]
        max_n: u64,
        #[command(flatten)]
        common: Common,
    },
}

fn exponent(p: Option<String>) -> Option<Exponent> {
    p.map(Exponent::Text)
}

fn build(cli: Cli) -> Result<ExperimentConfig, CliError> {
    if let Some(path) = cli.config {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let mut config = ExperimentConfig::from_json(&text)?;
        if cli.out.is_some() {
            config.output_path = cli.out;
        }
        if let Some(jobs) = cli.jobs {
            config.parallelism = jobs;
        }
        return Ok(config);
    }
    let Some(command) = cli.command else {
        return Err(CliError::Usage(
            "a subcommand or --config is required (see --help)".into(),
        ));
    };
    let (mut config, common) = match command {
        Command::Scan {
            p,
            preset,
            r,
            r_start,
            r_count,
            r_step,
            mode,
            common,
        } => {
            let experiment = match preset {
                Some(Preset::Figure2) => Experiment::Figure2,
                Some(Preset::Figure5) => Experiment::Figure5,
                None => Experiment::Scan,
            };
            let mut config = ExperimentConfig::new(experiment);
            config.p = exponent(p);
            config.r_grid = Some(RGrid {
                start: r_start,
                count: r_count,
                step: r_step.unwrap_or_else(default_step),
            });
            config.r = (!r.is_empty()).then_some(r);
            config.objective = Some(match mode {
                ScanMode::Max => Objective::Max,
                ScanMode::Min => Objective::Min,
            });
            (config, common)
        }
        Command::Counterexample {
            p,
            curve,
            r,
            s,
            mode,
            common,
        } => {
            let mut config = ExperimentConfig::new(Experiment::Counterexample);
            config.p = exponent(p);
            if let Some(path) = curve {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                let spec: CurveSpec = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("curve: {e}")))?;
                config.curve = Some(spec);
            }
            config.r = Some(r);
            config.s = Some(s);
            config.quadrant = Some(match mode {
                CountMode::Positive => Quadrant::Positive,
                CountMode::Nonnegative => Quadrant::Nonnegative,
            });
            (config, common)
        }
        Command::Cluster { max_m, common } => {
            let mut config = ExperimentConfig::new(Experiment::Cluster);
            config.max_m = max_m;
            (config, common)
        }
        Command::Audit {
            seed,
            draws,
            common,
        } => {
            let mut config = ExperimentConfig::new(Experiment::Audit);
            config.seed = seed;
            config.draws = draws;
            (config, common)
        }
        Command::Eigen { problem, n, common } => {
            let mut config = ExperimentConfig::new(Experiment::EigenAsymptotics);
            config.problem = Some(match problem {
                EigenProblem::Dirichlet => Problem::DirichletMin,
                EigenProblem::Neumann => Problem::NeumannMax,
                EigenProblem::Oscillator => Problem::OscillatorMin,
            });
            config.n = (!n.is_empty()).then_some(n);
            (config, common)
        }
        Command::Oscillator { max_n, common } => {
            let mut config = ExperimentConfig::new(Experiment::Oscillator);
            config.max_n = max_n;
            (config, common)
        }
    };
    config.output_path = common.out;
    config.parallelism = common.jobs;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    let outcome = build(cli).and_then(|config| run::run(&config).map(|summary| (config, summary)));
    match outcome {
        Ok((config, summary)) => {
            eprintln!(
                "{}: {} rows, {} violations",
                config.experiment.tag(),
                summary.rows,
                summary.violations
            );
            ExitCode::from(u8::from(summary.violations > 0))
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
