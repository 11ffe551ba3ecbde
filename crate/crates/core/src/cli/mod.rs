//! The `newsprop` command line.
//!
//! Every subcommand writes a CSV table (with a leading `# key=value ...`
//! metadata line) or a JSON document, to stdout or to `--out`. Commands that
//! produce several tables take a directory for `--out` and also write a
//! `manifest.json` listing them.
//!
//! Exit codes: 0 success, 2 validation error, 3 I/O error, 4 non-convergence.

mod commands;
mod config;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::model::{BuiltinDistribution, ModelParams, Side};
use crate::optimizer::{DEFAULT_GRID_STEP, DEFAULT_MAX_SWEEP_ROWS, DEFAULT_REFINE_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "newsprop",
    version,
    about = "Bias/truthfulness news propagation model toolkit"
)]
pub struct Cli {
    /// JSON object of flag values; flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sharing probability of one article for a reader or a population.
    Eval(EvalArgs),
    /// Propagation-maximizing article for a reader or a population.
    Optimize(OptimizeArgs),
    /// Fit (f, k) or the extreme-user model to a counts CSV.
    Fit(FitArgs),
    /// Slope tests of the alignment and truthfulness assumptions.
    Validate(ValidateArgs),
    /// Level curves with one of b, t, belief held fixed.
    SweepLevels(SweepLevelsArgs),
    /// Population sharing over the feasible half-triangle of one side.
    PopulationCurves(PopulationCurvesArgs),
    /// Optimum for every seven-group weight vector on a lattice.
    SweepMoments(SweepMomentsArgs),
    /// Low/high parameter grid and low-truth argmax shifts.
    Sensitivity(SensitivityArgs),
    /// Unimodal versus partisan population sharing across truthfulness.
    PartisanReport(PartisanArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Left-reader scale f_l [default: 0.010]
    #[arg(long)]
    pub fl: Option<f64>,
    /// Left-reader rate k_l [default: 4.465]
    #[arg(long)]
    pub kl: Option<f64>,
    /// Right-reader scale f_r [default: 0.007]
    #[arg(long)]
    pub fr: Option<f64>,
    /// Right-reader rate k_r [default: 5.581]
    #[arg(long)]
    pub kr: Option<f64>,
}

impl ParamArgs {
    pub fn params(&self) -> crate::Result<ModelParams> {
        let base = ModelParams::BASE;
        ModelParams::new(
            self.fl.unwrap_or(base.f_left),
            self.kl.unwrap_or(base.k_left),
            self.fr.unwrap_or(base.f_right),
            self.kr.unwrap_or(base.k_right),
        )
    }
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("reader").required(true).args(["belief", "dist"]))]
pub struct EvalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long)]
    pub t: f64,
    /// Single reader belief B.
    #[arg(long, allow_negative_numbers = true)]
    pub belief: Option<f64>,
    /// Built-in population.
    #[arg(long)]
    pub dist: Option<BuiltinDistribution>,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("reader").required(true).args(["belief", "dist"]))]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub belief: Option<f64>,
    #[arg(long)]
    pub dist: Option<BuiltinDistribution>,
    /// Hold truthfulness fixed and optimize bias only.
    #[arg(long)]
    pub t: Option<f64>,
    /// With --t and --dist, restrict bias to one side.
    #[arg(long)]
    pub side: Option<Side>,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long, default_value_t = DEFAULT_REFINE_TOL)]
    pub refine_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Unweighted,
    Exposures,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Counts CSV `domain_id,bias,truth,group,exposures,shares[,extreme]`.
    #[arg(long)]
    pub data: PathBuf,
    /// Justification CSV `domain_id,color,fraction` for empty truth cells.
    #[arg(long)]
    pub justifications: Option<PathBuf>,
    #[arg(long, default_value = "right")]
    pub side: Side,
    /// Fit the extreme-user model (f, k, f_e, k_e).
    #[arg(long)]
    pub extreme: bool,
    #[arg(long, value_enum, default_value_t = WeightingArg::Unweighted)]
    pub weighting: WeightingArg,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub justifications: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("fixed").required(true).args(["b", "t", "belief"]))]
pub struct SweepLevelsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub belief: Option<f64>,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_POINTS)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PopulationCurvesArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub dist: BuiltinDistribution,
    #[arg(long, default_value = "right")]
    pub side: Side,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_POINTS)]
    pub points: usize,
    /// Truthfulness of the reported argmax slice.
    #[arg(long, default_value_t = crate::analysis::LOW_TRUTH)]
    pub t: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    /// Output directory (both orientations plus manifest); stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepMomentsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0.1)]
    pub weight_step: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long, default_value_t = DEFAULT_REFINE_TOL)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEP_ROWS)]
    pub max_rows: usize,
    /// Optimize bias only, at this truthfulness.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SensitivityArgs {
    /// Base scenario the shifts are measured against.
    #[command(flatten)]
    pub params: ParamArgs,
    /// Distributions to analyse [default: all six]
    #[arg(long, value_delimiter = ',')]
    pub dist: Vec<BuiltinDistribution>,
    #[arg(long, default_value = "right")]
    pub side: Side,
    #[arg(long, default_value_t = crate::analysis::LOW_TRUTH)]
    pub t: f64,
    #[arg(long, default_value_t = crate::analysis::SHIFT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_POINTS)]
    pub points: usize,
    /// LOW,HIGH for f_l [default: 0.005,0.014]
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub fl_range: Option<Vec<f64>>,
    /// LOW,HIGH for k_l [default: 2.232,6.697]
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub kl_range: Option<Vec<f64>>,
    /// LOW,HIGH for f_r [default: 0.004,0.011]
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub fr_range: Option<Vec<f64>>,
    /// LOW,HIGH for k_r [default: 2.791,8.372]
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub kr_range: Option<Vec<f64>>,
    /// Output directory for the summary, 16 x distributions curve tables
    /// and manifest; summary to stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PartisanArgs {
    /// Shared scale f = f_l = f_r.
    #[arg(long, default_value_t = ModelParams::BASE.f_right)]
    pub f: f64,
    /// Shared rate k = k_l = k_r.
    #[arg(long, default_value_t = ModelParams::BASE.k_right)]
    pub k: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub belief: f64,
    /// Share of the partisan population at B (the rest sits at -B).
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub q: Vec<f64>,
    /// Number of evenly spaced t values on [0, 1].
    #[arg(long, default_value_t = 21)]
    pub t_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match config::parse_with_config(&args) {
        Ok(cli) => cli,
        Err(config::ParseFailure::Clap(e)) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
        Err(config::ParseFailure::Library(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    match commands::dispatch(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
