use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sos_core::compression::InitMode;
use sos_core::fock::VerifyMode;
use sos_core::tensor::Convention;

mod commands;
mod report;

#[derive(Parser)]
#[command(name = "sos-compress", version, about = "Sum-of-squares factorization of two-body fermion operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize a coefficient tensor and write factors, a CSV report and a manifest.
    Decompose(DecomposeArgs),
    /// Compile a factor list into the layered circuit IR.
    Compile(CompileArgs),
    /// Check a factor list against the dense Fock-space operator.
    OracleVerify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Takagi,
    Svd,
    /// Greedy unitary compression, random starts unless `--init` says otherwise.
    Uc,
    /// Greedy unitary compression seeded from the Takagi vectors.
    UcTakagi,
    /// Eigendecomposition of real two-electron integrals.
    Cholesky,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Init {
    Random,
    TakagiSeed,
}

impl From<Init> for InitMode {
    fn from(i: Init) -> Self {
        match i {
            Init::Random => InitMode::Random,
            Init::TakagiSeed => InitMode::TakagiSeed,
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct DecomposeArgs {
    /// Input tensor (FTEN JSON or binary).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "takagi")]
    pub method: Method,
    /// Convention of a binary input; checked against JSON inputs.
    #[arg(long)]
    pub convention: Option<Convention>,
    /// JSON file with compression settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub max_factors: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub init: Option<Init>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Keep every rotation inside one spin sector.
    #[arg(long)]
    pub sz_adapted: bool,
    /// Check the result against the Fock-space operator.
    #[arg(long)]
    pub verify: bool,
    /// Fail when the verified operator error exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Antisymmetrized integrals for the doubles-energy column.
    #[arg(long)]
    pub energy_fixture: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct CompileArgs {
    pub factors: PathBuf,
    /// One-body correction applied as the closing rotation.
    #[arg(long)]
    pub one_body: Option<PathBuf>,
    /// Keep separate basis changes around every slice.
    #[arg(long)]
    pub no_merge: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    pub tensor: PathBuf,
    pub factors: PathBuf,
    /// One-body correction; derived from the tensor when omitted.
    #[arg(long)]
    pub one_body: Option<PathBuf>,
    #[arg(long)]
    pub convention: Option<Convention>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value = "trotter")]
    pub mode: VerifyMode,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose(a) => commands::decompose(&a),
        Command::Compile(a) => commands::compile(&a),
        Command::OracleVerify(a) => commands::oracle_verify(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
