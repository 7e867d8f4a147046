mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reeb_mec::mec::SurgeryMode;
use reeb_mec::Error;

#[derive(Parser, Debug)]
#[command(name = "reeb-mec", version, about = "Indices of symplectic paths and mean Euler characteristics of contact manifolds")]
pub struct Cli {
    /// Emit a single JSON document on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Show decimal approximations next to exact rationals.
    #[arg(long, global = true)]
    pub approx: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mean Euler characteristic of a model.
    Mec {
        /// Manifest path or `catalog:NAME`.
        manifest: String,
        #[command(flatten)]
        params: CatalogParams,
    },
    /// Compare truncated generator counts against the closed form.
    Oracle {
        manifest: String,
        #[command(flatten)]
        params: CatalogParams,
        /// Degree cutoffs, strictly increasing.
        #[arg(long, value_delimiter = ',', default_values_t = [100_i64, 1_000, 10_000, 100_000])]
        max_degree: Vec<i64>,
    },
    /// Apply a sequence of subcritical surgeries.
    Surgery {
        manifest: String,
        #[command(flatten)]
        params: CatalogParams,
        /// Handle indices, applied in order.
        #[arg(long = "k", value_delimiter = ',', required = true)]
        handles: Vec<u32>,
        #[arg(long, value_enum, default_value_t = ModeArg::Generator)]
        mode: ModeArg,
        /// Use the linearized theory, which admits surgery in dimension 3.
        #[arg(long)]
        linearized: bool,
        /// Degree cutoff for the listed injected generators.
        #[arg(long, default_value_t = 200)]
        max_degree: i64,
    },
    /// Indices of a path read from a file or generated from rotation rates.
    Index(IndexArgs),
    /// List or emit built-in models.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Run seeded property suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random cases per property.
        #[arg(long, default_value_t = reeb_mec::suites::DEFAULT_SIZE)]
        size: usize,
    },
}

#[derive(Args, Debug, Default, Clone)]
pub struct CatalogParams {
    #[arg(long)]
    pub n: Option<i64>,
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long = "chi-b", allow_hyphen_values = true)]
    pub chi_b: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub pairing: Option<i64>,
    /// Handle index for `sphere_with_handle`.
    #[arg(long = "handle")]
    pub handle: Option<i64>,
}

#[derive(Args, Debug)]
pub struct IndexArgs {
    /// JSON array of `{"t": .., "A": [..]}` samples.
    #[arg(long, conflicts_with = "rotation")]
    pub path: Option<String>,
    /// Comma-separated rotation rates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rotation: Option<Vec<f64>>,
    /// Duration for `--rotation`.
    #[arg(long = "T", alias = "duration", default_value_t = 1.0)]
    pub t_end: f64,
    /// Sample count for `--rotation`; chosen from the rates when absent.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub cz: bool,
    #[arg(long)]
    pub rs: bool,
    #[arg(long)]
    pub mean: bool,
    #[arg(long)]
    pub unitary: bool,
    #[arg(long)]
    pub dgw: bool,
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = reeb_mec::indices::DEFAULT_K_MAX)]
    pub k_max: usize,
}

#[derive(Subcommand, Debug)]
pub enum CatalogAction {
    List,
    /// Print the manifest of an entry.
    Emit {
        name: String,
        #[command(flatten)]
        params: CatalogParams,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ModeArg {
    Generator,
    Corollary,
}

impl From<ModeArg> for SurgeryMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Generator => SurgeryMode::Generator,
            ModeArg::Corollary => SurgeryMode::Corollary,
        }
    }
}

/// 0 ok, 1 failed check, 2 input, 3 undefined, 4 incomplete data, 5 dimension 3, 6 degeneracy.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Undefined(_) => 3,
        Error::IncompleteData(_) => 4,
        Error::DimensionThree => 5,
        Error::Degenerate { .. } | Error::NonIsolatedCrossing(_) => 6,
        _ => 2,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("REEB_MEC_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("REEB_MEC_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::dispatch(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("serializable report"));
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(report.code)
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            if cli.json {
                let doc = serde_json::json!({ "error": e.to_string(), "exit_code": code });
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializable report"));
            }
            ExitCode::from(code)
        }
    }
}
