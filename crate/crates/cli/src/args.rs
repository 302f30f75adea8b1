use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "popqc", version, about = "Parallel local optimizer for quantum circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimize an OpenQASM 2.0 circuit
    Optimize(OptimizeArgs),
    /// Check an optimized circuit against its original
    Verify(VerifyArgs),
    /// Run size and thread sweeps, writing one CSV row per run
    Bench(BenchArgs),
    /// Write a seeded synthetic circuit
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    /// `builtin`, or `exec:CMD` to run CMD once per segment
    #[arg(long, env = "POPQC_ORACLE", default_value = "builtin")]
    pub oracle: String,

    /// Seconds before an external oracle call is killed
    #[arg(long, env = "POPQC_ORACLE_TIMEOUT", default_value_t = 60.0)]
    pub timeout: f64,

    #[arg(long, env = "POPQC_TRANSPORT", value_enum, default_value_t = TransportArg::Stdio)]
    pub transport: TransportArg,

    /// Cap on concurrently running oracle processes (default: thread count)
    #[arg(long, env = "POPQC_MAX_CONCURRENT")]
    pub max_concurrent: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Segment radius; windows span 2Ω gates
    #[arg(long, env = "POPQC_OMEGA", default_value_t = popqc_core::DEFAULT_OMEGA)]
    pub omega: usize,

    /// Worker threads (default: all cores)
    #[arg(long, env = "POPQC_THREADS")]
    pub threads: Option<usize>,

    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    pub input: PathBuf,

    /// Output path (default: stdout)
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    pub run: RunArgs,

    /// Stop after this many rounds; exits 3 if work was left
    #[arg(long, env = "POPQC_MAX_ROUNDS")]
    pub max_rounds: Option<usize>,

    /// Write per-round stats here
    #[arg(long, env = "POPQC_STATS")]
    pub stats: Option<PathBuf>,

    #[arg(long, env = "POPQC_FORMAT", value_enum, default_value_t = StatsFormat::Csv)]
    pub format: StatsFormat,

    #[arg(long, env = "POPQC_ON_ORACLE_ERROR", value_enum, default_value_t = ErrorPolicyArg::Abort)]
    pub on_oracle_error: ErrorPolicyArg,

    /// Check potential and selection invariants every round
    #[arg(long)]
    pub audit: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub original: PathBuf,
    pub optimized: PathBuf,

    #[command(flatten)]
    pub run: RunArgs,

    /// Skip the unitary check above this many qubits
    #[arg(long, env = "POPQC_QUBIT_CAP", default_value_t = 12)]
    pub qubit_cap: u32,

    #[arg(long, env = "POPQC_TOL", default_value_t = 1e-9)]
    pub tol: f64,

    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Benchmark every .qasm file in this directory
    #[arg(long)]
    pub dir: Option<PathBuf>,

    /// Synthetic circuit sizes; used when --dir is absent
    #[arg(long, value_delimiter = ',', default_value = "10000,100000")]
    pub sizes: Vec<usize>,

    /// Thread counts to sweep; speedup is relative to the first
    #[arg(long = "thread-counts", value_delimiter = ',', default_value = "1")]
    pub thread_counts: Vec<usize>,

    #[command(flatten)]
    pub synth: SynthArgs,

    #[arg(long, env = "POPQC_OMEGA", default_value_t = popqc_core::DEFAULT_OMEGA)]
    pub omega: usize,

    #[command(flatten)]
    pub oracle: OracleArgs,

    /// CSV output (default: stdout)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 8)]
    pub qubits: u32,

    /// Fraction of positions that start a planted cancelling pair
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,

    #[arg(long, env = "POPQC_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub gates: usize,

    #[command(flatten)]
    pub synth: SynthArgs,

    /// Output path (default: stdout)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsFormat {
    Csv,
    Jsonl,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportArg {
    Stdio,
    Files,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorPolicyArg {
    Abort,
    Skip,
}
