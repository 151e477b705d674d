//! `fblb`: finite-blocklength bounds for the noncoherent Rayleigh
//! block-fading channel from the command line.

mod bench;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: u8 = 0;
pub const EXIT_SELFTEST: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

/// A bad request: reported with exit code 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "fblb", version, about = "Saddlepoint, Monte-Carlo and asymptotic finite-blocklength bounds for the noncoherent Rayleigh block-fading channel")]
struct Cli {
    /// Defaults file (TOML, `version = 1`); the built-in defaults are used otherwise.
    #[arg(long, global = true, env = "FBLB_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every requested kind at one parameter point (JSON).
    Point(Request),
    /// Evaluate the requested kinds along one axis (CSV).
    Sweep {
        #[command(flatten)]
        request: Request,
        /// Axis to sweep.
        #[arg(long, env = "FBLB_SWEEP", value_enum)]
        sweep: Axis,
        /// `start:stop:step`, inclusive. The eps axis takes log10 values.
        #[arg(long, env = "FBLB_RANGE", allow_hyphen_values = true)]
        range: String,
    },
    /// Time the saddlepoint and Monte-Carlo evaluations at L = 10 and 100.
    Bench(bench::BenchArgs),
    /// Run the fast invariant battery.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "L")]
    Blocks,
    Eps,
    Snr,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Request {
    /// Channel uses per coherence interval.
    #[arg(long = "T", env = "FBLB_T")]
    pub coherence: Option<usize>,
    /// Number of coherence intervals per codeword.
    #[arg(long = "L", env = "FBLB_L")]
    pub blocks: Option<usize>,
    /// Blocklength n = L·T; fixes T = n/L when L is given or swept.
    #[arg(long = "n", env = "FBLB_N")]
    pub blocklength: Option<usize>,
    /// Average SNR in dB.
    #[arg(long, env = "FBLB_SNR_DB", allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Target error probability.
    #[arg(long, env = "FBLB_EPS")]
    pub eps: Option<f64>,
    /// Target rate in nats per channel use.
    #[arg(long, env = "FBLB_RATE")]
    pub rate: Option<f64>,
    /// Comma-separated bound kinds.
    #[arg(long, env = "FBLB_KINDS", value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    /// Monte-Carlo sample count.
    #[arg(long, env = "FBLB_SAMPLES")]
    pub samples: Option<u64>,
    /// Monte-Carlo seed.
    #[arg(long, env = "FBLB_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (0: all cores).
    #[arg(long, env = "FBLB_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, env = "FBLB_FORMAT", value_enum)]
    pub format: Option<Format>,
    /// Write the output here instead of stdout.
    #[arg(long, env = "FBLB_OUT")]
    pub out: Option<PathBuf>,
    /// Use s = 1/(1+τ) instead of searching over s.
    #[arg(long, env = "FBLB_FAST_S")]
    pub fast_s: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = config::DefaultsFile::load(cli.config.as_deref()).map_err(|e| usage(format!("{e:#}"))).and_then(|defaults| {
        match cli.command {
            Command::Point(req) => run::point(&req, &defaults),
            Command::Sweep { request, sweep, range } => run::sweep(&request, sweep, &range, &defaults),
            Command::Bench(args) => bench::run(&args, &defaults),
            Command::Selftest => run::selftest(),
        }
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = if e.downcast_ref::<UsageError>().is_some() { EXIT_USAGE } else { EXIT_INFEASIBLE };
            let record = serde_json::json!({ "error": { "type": if code == EXIT_USAGE { "usage" } else { "failure" }, "message": format!("{e:#}") } });
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}
