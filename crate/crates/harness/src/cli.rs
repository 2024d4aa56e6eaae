use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "coalesce", version, about = "Exact tables, simulations and comparisons for Lambda-coalescents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate an exact quantity.
    Exact {
        #[arg(long, value_enum)]
        quantity: ExactQuantity,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        params: Params,
    },
    /// Run a simulation campaign and tabulate empirical frequencies.
    Simulate {
        #[arg(long, value_enum)]
        model: Model,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        params: Params,
        /// Write one line per replica to this file.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Compare exact values with simulation and issue a verdict.
    Compare {
        #[arg(long, value_enum)]
        quantity: CompareQuantity,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactQuantity {
    Rates,
    Renewal,
    Records,
    RecordGf,
    Depth,
    LastCoalescence,
    LastCoalescenceLimit,
    Hitting,
    HittingLimit,
    HittingAsymptote,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    BlockCounting,
    Partition,
    FixationLine,
    Lookdown,
    BsBranching,
    BsDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompareQuantity {
    LastCoalescence,
    Hitting,
    Records,
    Renewal,
    Depth,
    TauVsAlpha,
    BsBranching,
    BsDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Beta(2-α, α) driving measure, α in (0, 2).
    #[arg(long, conflicts_with = "measure_file")]
    pub alpha: Option<f64>,
    /// Generic driving measure described in a key-value file.
    #[arg(long)]
    pub measure_file: Option<PathBuf>,
    #[arg(long, env = "COALESCE_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub replicas: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for replicas; defaults to the hardware parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Emit `(x, exact, empirical, band)` columns only.
    #[arg(long)]
    pub plot_data: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Sample size n of the coalescent.
    #[arg(long)]
    pub n: Option<usize>,
    /// Block or start level j.
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub jmax: Option<usize>,
    #[arg(long)]
    pub imax: Option<usize>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Number of levels N of partitions and lookdown, or the fixation-line cap.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Time horizon.
    #[arg(long)]
    pub t: Option<f64>,
    /// Generating-function arguments, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<f64>,
}
