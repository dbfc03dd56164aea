mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "vhp", version, about = "B-rep <-> token sequence codec built on Voronoi half-patches")]
struct Cli {
    /// More log output (-v, -vv)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus of watertight models
    Synth(SynthArgs),
    /// Check models and write validation reports
    Validate(ValidateArgs),
    /// Encode models as token sequences
    Tokenize(TokenizeArgs),
    /// Train a residual codebook on model descriptors
    TrainCodebook(TrainCodebookArgs),
    /// Decode token sequences back into models
    Detokenize(DetokenizeArgs),
    /// Tokenize, decode and compare each model
    Roundtrip(RoundtripArgs),
    /// Fit an n-gram sequence model on a token file
    FitLm(FitLmArgs),
    /// Sample sequences from an n-gram model and decode them
    Generate(GenerateArgs),
    /// Complete a partial sequence with an n-gram model
    Autocomplete(AutocompleteArgs),
    /// Distribution and novelty metrics of generated models
    Eval(EvalArgs),
    /// Tessellate a model to OBJ
    ExportObj(ExportArgs),
    /// Dump Voronoi cells and half-patch samples as JSON
    ExportVhpDebug(ExportArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Corpus recipe (JSON); omitted fields take defaults
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the recipe's seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Model files or directories
    #[arg(required = true)]
    models: Vec<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TokenizeArgs {
    #[arg(required = true)]
    models: Vec<PathBuf>,
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainCodebookArgs {
    /// Model files or directories
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, short = 'd', default_value_t = vhp_core::pipeline::DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long, short = 'k', default_value_t = vhp_core::pipeline::DEFAULT_CODEBOOK_SIZE)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DetokenizeArgs {
    tokens: PathBuf,
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RoundtripArgs {
    #[arg(required = true)]
    models: Vec<PathBuf>,
    /// Trained on the inputs when omitted
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[arg(long, short = 'd', default_value_t = vhp_core::pipeline::DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long, short = 'k', default_value_t = vhp_core::pipeline::DEFAULT_CODEBOOK_SIZE)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitLmArgs {
    tokens: PathBuf,
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long, short = 'n', default_value_t = vhp_core::lm::DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = vhp_core::lm::DEFAULT_SMOOTHING)]
    smoothing: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long)]
    greedy: bool,
    #[arg(long, default_value_t = vhp_core::codec::DEFAULT_MAX_LEN)]
    max_len: usize,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    lm: PathBuf,
    #[arg(long)]
    codebook: PathBuf,
    #[arg(short = 'n', long = "count", default_value_t = 1)]
    count: usize,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AutocompleteArgs {
    #[arg(long)]
    lm: PathBuf,
    #[arg(long)]
    codebook: PathBuf,
    /// Token file whose first sequence supplies the prefix
    #[arg(long)]
    prefix: PathBuf,
    /// Whole components kept from a complete prefix sequence
    #[arg(long, default_value_t = 1)]
    keep: usize,
    #[arg(short = 'n', long = "count", default_value_t = 1)]
    count: usize,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    gen: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Enables Novel/Unique via canonical token sequences
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[arg(long, default_value_t = vhp_core::metrics::CLOUD_SIZE)]
    points: usize,
    #[arg(long, default_value_t = vhp_core::metrics::JSD_RESOLUTION)]
    resolution: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: PathBuf,
    /// Nearest-neighbor Chamfer table for plotting
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Validate(a) => commands::validate(a),
        Command::Tokenize(a) => commands::tokenize(a),
        Command::TrainCodebook(a) => commands::train_codebook(a),
        Command::Detokenize(a) => commands::detokenize(a),
        Command::Roundtrip(a) => commands::roundtrip(a),
        Command::FitLm(a) => commands::fit_lm(a),
        Command::Generate(a) => commands::generate(a),
        Command::Autocomplete(a) => commands::autocomplete(a),
        Command::Eval(a) => commands::eval(a),
        Command::ExportObj(a) => commands::export_obj(a),
        Command::ExportVhpDebug(a) => commands::export_vhp_debug(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code)
        }
    }
}
