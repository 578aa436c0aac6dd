use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use pdbrw::brw::{Beta, Engine, Variant};
use pdbrw::estimators::CnMode;
use pdbrw::experiment::{run_experiment, ExperimentConfig, Format, MeasureKind, Subcommand};
use pdbrw::rng::{entropy_seed, threads_from_env};

#[derive(Parser)]
#[command(
    name = "pdbrw",
    version,
    about = "Branching random walks with selection, Poisson-Dirichlet weights and their genealogies",
    after_help = "Set PDBRW_THREADS to cap the worker pool. Every run prints a one-line JSON summary."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file with flat keys mirroring the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (default 0x5EED000020160001).
    #[arg(long, conflicts_with = "entropy")]
    seed: Option<u64>,
    /// Draw the master seed from the operating system.
    #[arg(long)]
    entropy: bool,
    /// Output file; CSV runs with several tables add `<stem>.<table>.csv` siblings.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct BrwArgs {
    /// Population size N.
    #[arg(long)]
    n: Option<usize>,
    /// Selection strength, a real above 1 or "inf".
    #[arg(long)]
    beta: Option<Beta>,
    /// direct, pd_exact or exponential_model.
    #[arg(long)]
    engine: Option<Engine>,
    /// standard or drop_first_sampled.
    #[arg(long)]
    variant: Option<Variant>,
    /// Stick count for the pd_exact engine.
    #[arg(long)]
    sticks: Option<usize>,
    #[arg(long)]
    truncation_epsilon: Option<f64>,
}

#[derive(Args)]
struct PdArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Defaults to 0.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Run one population and write per-generation summaries and parents.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        brw: BrwArgs,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Estimate the speed of the equivalent position.
    Speed {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        brw: BrwArgs,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Estimate the pair coalescence probability under PD weights.
    Cn {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pd: PdArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        /// semi_analytic (default) or empirical_pair.
        #[arg(long)]
        mode: Option<CnMode>,
    },
    /// Simulate coalescent trajectories and first-merger statistics.
    Coalescent {
        #[command(flatten)]
        common: Common,
        /// beta, kingman, or pd for the discrete genealogy under PD weights.
        #[arg(long)]
        measure: Option<MeasureKind>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        lineages: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        #[command(flatten)]
        pd: PdArgs,
        /// Population size for measure pd.
        #[arg(long)]
        n: Option<usize>,
        /// Generation cap for measure pd.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Tabulate Lambda-coalescent rates.
    Rates {
        #[command(flatten)]
        common: Common,
        /// beta or kingman.
        #[arg(long)]
        measure: Option<MeasureKind>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        bmax: Option<usize>,
    },
    /// Convergence diagnostics of the stick-breaking scheme.
    PdDiagnostics {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pd: PdArgs,
        #[arg(long)]
        sticks: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Moment order (default 1).
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<f64>,
    },
    /// Scaled tail of the largest weight.
    Tails {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pd: PdArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Comma-separated grid in (0, 1) (default 0.1,...,0.9).
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<f64>>,
    },
    /// Scaling constants lambda, c_{alpha,theta} and L_N.
    Constants {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pd: PdArgs,
        #[arg(long)]
        n: Option<usize>,
    },
}

impl BrwArgs {
    fn apply(self, c: &mut ExperimentConfig) {
        c.n = self.n;
        c.beta = self.beta;
        c.engine = self.engine;
        c.variant = self.variant;
        c.sticks = self.sticks;
        c.truncation_epsilon = self.truncation_epsilon;
    }
}

impl PdArgs {
    fn apply(self, c: &mut ExperimentConfig) {
        c.alpha = self.alpha;
        c.theta = self.theta;
    }
}

fn flags(command: Command) -> (Common, ExperimentConfig) {
    match command {
        Command::Simulate { common, brw, horizon } => {
            let mut c = ExperimentConfig::new(Subcommand::Simulate);
            brw.apply(&mut c);
            c.horizon = horizon;
            (common, c)
        }
        Command::Speed { common, brw, steps, replicates } => {
            let mut c = ExperimentConfig::new(Subcommand::Speed);
            brw.apply(&mut c);
            c.steps = steps;
            c.replicates = replicates;
            (common, c)
        }
        Command::Cn { common, pd, n, replicates, mode } => {
            let mut c = ExperimentConfig::new(Subcommand::Cn);
            pd.apply(&mut c);
            c.n = n;
            c.replicates = replicates;
            c.mode = mode;
            (common, c)
        }
        Command::Coalescent { common, measure, lambda, lineages, replicates, pd, n, horizon } => {
            let mut c = ExperimentConfig::new(Subcommand::Coalescent);
            pd.apply(&mut c);
            c.measure = measure;
            c.lambda = lambda;
            c.lineages = lineages;
            c.replicates = replicates;
            c.n = n;
            c.horizon = horizon;
            (common, c)
        }
        Command::Rates { common, measure, lambda, bmax } => {
            let mut c = ExperimentConfig::new(Subcommand::Rates);
            c.measure = measure;
            c.lambda = lambda;
            c.bmax = bmax;
            (common, c)
        }
        Command::PdDiagnostics { common, pd, sticks, replicates, gamma } => {
            let mut c = ExperimentConfig::new(Subcommand::PdDiagnostics);
            pd.apply(&mut c);
            c.sticks = sticks;
            c.replicates = replicates;
            c.gamma = gamma;
            (common, c)
        }
        Command::Tails { common, pd, n, replicates, x } => {
            let mut c = ExperimentConfig::new(Subcommand::Tails);
            pd.apply(&mut c);
            c.n = n;
            c.replicates = replicates;
            c.x = x;
            (common, c)
        }
        Command::Constants { common, pd, n } => {
            let mut c = ExperimentConfig::new(Subcommand::Constants);
            pd.apply(&mut c);
            c.n = n;
            (common, c)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, mut overrides) = flags(cli.command);
    overrides.seed = if common.entropy { Some(entropy_seed()) } else { common.seed };
    overrides.output = common.output;
    overrides.format = common.format;
    let config = match common.config {
        Some(path) => ExperimentConfig::load(&path, Some(overrides.subcommand)).and_then(|f| f.merge(overrides)),
        None => Ok(overrides),
    };
    let (code, summary) = match config {
        Ok(config) => {
            let outcome = run_experiment(&config, threads_from_env());
            (outcome.exit_code, outcome.summary)
        }
        Err(e) => (
            e.exit_code(),
            serde_json::json!({ "status": "error", "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() }),
        ),
    };
    println!("{summary}");
    ExitCode::from(code as u8)
}
