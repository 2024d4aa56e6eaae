//! Command-line harness around `coalesce-core`: exact tables, simulation campaigns
//! and exact-vs-empirical comparison reports.

pub mod cli;
mod compare;
mod exact;
pub mod measure_file;
pub mod report;
mod simulate;

use cli::{Cli, Command, CommonArgs, Format, Params};
use coalesce_core::rates::LambdaMeasure;
use report::{MeasureConfig, Report, RunConfig, Verdict, REPORT_VERSION};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] coalesce_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Defaults applied when a parameter flag is absent; recorded in the report config.
pub mod defaults {
    pub const N: usize = 50;
    pub const J: usize = 1;
    pub const JMAX: usize = 20;
    pub const IMAX: usize = 10;
    pub const KMAX: usize = 30;
    pub const LEVELS: usize = 10;
    pub const T: f64 = 3.0;
    pub const S: [f64; 5] = [0.25, 0.5, 0.75, 0.9, 1.0];
}

/// Resolved inputs of one command.
pub(crate) struct Ctx {
    pub measure: LambdaMeasure,
    pub config: RunConfig,
}

impl Ctx {
    pub fn alpha(&self) -> Result<f64> {
        self.measure.alpha().ok_or_else(|| {
            HarnessError::Usage(format!(
                "{} {} needs a Beta measure (--alpha)",
                self.config.command, self.config.target
            ))
        })
    }

    pub fn n(&mut self) -> usize {
        *self.config.n.get_or_insert(defaults::N)
    }

    pub fn j(&mut self) -> usize {
        *self.config.j.get_or_insert(defaults::J)
    }

    pub fn jmax(&mut self) -> usize {
        *self.config.jmax.get_or_insert(defaults::JMAX)
    }

    pub fn imax(&mut self) -> usize {
        *self.config.imax.get_or_insert(defaults::IMAX)
    }

    pub fn kmax(&mut self) -> usize {
        *self.config.kmax.get_or_insert(defaults::KMAX)
    }

    pub fn levels(&mut self) -> usize {
        *self.config.levels.get_or_insert(defaults::LEVELS)
    }

    pub fn t(&mut self) -> f64 {
        *self.config.t.get_or_insert(defaults::T)
    }

    pub fn s(&mut self) -> Vec<f64> {
        if self.config.s.is_empty() {
            self.config.s = defaults::S.to_vec();
        }
        self.config.s.clone()
    }

    pub fn sim(&self, size: usize) -> coalesce_core::simulator::SimConfig {
        coalesce_core::simulator::SimConfig::new(self.measure.clone(), size)
            .seed(self.config.seed)
            .replicas(self.config.replicas)
    }
}

/// Output settings of a parsed command line.
pub struct Output {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub plot_data: bool,
    pub threads: Option<usize>,
}

fn context(command: &str, target: &str, common: &CommonArgs, params: &Params) -> Result<Ctx> {
    let (measure, measure_config) = match (&common.alpha, &common.measure_file) {
        (Some(a), None) => (LambdaMeasure::beta(*a)?, MeasureConfig::Beta { alpha: *a }),
        (None, Some(path)) => {
            let (m, description) = measure_file::load_measure(path)?;
            (
                m,
                MeasureConfig::File {
                    path: path.display().to_string(),
                    description,
                },
            )
        }
        // the Bolthausen-Sznitman models fix the measure
        (None, None) if target.starts_with("bs-") => (LambdaMeasure::beta(1.0)?, MeasureConfig::Beta { alpha: 1.0 }),
        _ => return Err(HarnessError::Usage("exactly one of --alpha or --measure-file is required".into())),
    };
    if common.replicas < 1 {
        return Err(HarnessError::Usage("--replicas must be at least 1".into()));
    }
    Ok(Ctx {
        measure,
        config: RunConfig {
            command: command.into(),
            target: target.into(),
            measure: measure_config,
            seed: common.seed,
            replicas: common.replicas,
            n: params.n,
            j: params.j,
            jmax: params.jmax,
            imax: params.imax,
            kmax: params.kmax,
            levels: params.levels,
            t: params.t,
            s: params.s.clone(),
        },
    })
}

fn name<T: clap::ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// Output settings without running anything (used to set up the thread pool first).
pub fn output_of(cli: &Cli) -> Output {
    let common = match &cli.command {
        Command::Exact { common, .. } | Command::Simulate { common, .. } | Command::Compare { common, .. } => common,
    };
    Output {
        format: common.format,
        out: common.out.clone(),
        plot_data: common.plot_data,
        threads: common.threads,
    }
}

/// Runs a parsed command and returns its report.
pub fn run(cli: &Cli) -> Result<Report> {
    let started = Instant::now();
    let (ctx, rows, verdict, notes) = match &cli.command {
        Command::Exact { quantity, common, params } => {
            let mut ctx = context("exact", &name(quantity), common, params)?;
            let (rows, notes) = exact::run(*quantity, &mut ctx)?;
            let verdict = Verdict::from_rows(&rows, Vec::new());
            (ctx, rows, verdict, notes)
        }
        Command::Simulate {
            model,
            common,
            params,
            samples,
        } => {
            let mut ctx = context("simulate", &name(model), common, params)?;
            let (rows, tests, notes) = simulate::run(*model, &mut ctx, samples.as_deref())?;
            let verdict = Verdict::from_rows(&rows, tests);
            (ctx, rows, verdict, notes)
        }
        Command::Compare { quantity, common, params } => {
            let mut ctx = context("compare", &name(quantity), common, params)?;
            let (rows, tests, notes) = compare::run(*quantity, &mut ctx)?;
            let verdict = Verdict::from_rows(&rows, tests);
            (ctx, rows, verdict, notes)
        }
    };
    Ok(Report {
        version: REPORT_VERSION,
        config: ctx.config,
        rows,
        verdict,
        notes,
        runtime_ms: started.elapsed().as_millis() as u64,
    })
}

/// Renders a report in the requested output format.
pub fn render(report: &Report, output: &Output) -> String {
    match (output.format, output.plot_data) {
        (Format::Csv, false) => report.to_csv(),
        (Format::Csv, true) => report.to_plot_csv(),
        (Format::Json, _) => report.to_json(),
    }
}
