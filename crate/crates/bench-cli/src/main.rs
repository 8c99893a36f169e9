//! `ckks-bench`: self-tests, throughput sweeps and a small encrypted workload.
//!
//! Exit codes: 0 on success, 1 when a self-test suite fails, 2 on usage errors.

mod bench;
mod report;
mod selftest;
mod workload;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ckks_kernels::{CkksParams, NttBackend};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "ckks-bench",
    version,
    about = "Self-tests and benchmarks for ckks-kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Preset name (default, full, resnet20, lr, lstm, packed_boot, set_a, set_b, set_c)
    /// or a path to a parameter JSON document.
    #[arg(long, default_value = "default")]
    preset: String,
    /// butterfly, gemm, segmented, or all.
    #[arg(long = "ntt-backend")]
    ntt_backend: Option<String>,
    /// Worker threads; defaults to the number of hardware threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write rows to this path; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the correctness suites and print one line per suite.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Corrupt one twiddle factor before running (test hook).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Throughput of one operation over a list of batch sizes.
    Bench {
        #[command(flatten)]
        common: Common,
        /// ntt, intt, hmult, hadd, hrotate, rescale, cmult or forbenius_map.
        #[arg(long, default_value = "ntt")]
        op: String,
        #[arg(
            long = "batch-sizes",
            value_delimiter = ',',
            default_value = "1,32,128"
        )]
        batch_sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Memory budget for batch planning; defaults to the available system memory.
        #[arg(long = "mem-budget-mib")]
        mem_budget_mib: Option<u64>,
    },
    /// Throughput of one operation over a list of ring degrees.
    SweepN {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "ntt")]
        op: String,
        /// Comma-separated ring degrees; an empty list emits only the header.
        #[arg(long = "n-values", default_value = "2048,4096,8192,16384,32768,65536")]
        n_values: String,
        #[arg(long = "batch-sizes", value_delimiter = ',', default_value = "1")]
        batch_sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long = "mem-budget-mib")]
        mem_budget_mib: Option<u64>,
    },
    /// Encrypted dot product of two random vectors.
    WorkloadDot {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 128)]
        length: usize,
        /// Use all-zero vectors.
        #[arg(long)]
        zeros: bool,
    },
    /// Print the parameter document of a preset.
    Params {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<ckks_kernels::Error> for CliError {
    fn from(e: ckks_kernels::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn load_params(preset: &str) -> CliResult<CkksParams> {
    let path = Path::new(preset);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {preset}: {e}")))?;
        return CkksParams::from_json(&text).map_err(|e| CliError::Usage(e.to_string()));
    }
    CkksParams::preset(preset).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn parse_backends(arg: Option<&str>, default_all: bool) -> CliResult<Vec<NttBackend>> {
    match arg {
        None if default_all => Ok(NttBackend::ALL.to_vec()),
        None => Ok(vec![NttBackend::default()]),
        Some("all") => Ok(NttBackend::ALL.to_vec()),
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<NttBackend>()
                    .map_err(|e| CliError::Usage(e.to_string()))
            })
            .collect(),
    }
}

fn init_threads(threads: Option<usize>) -> CliResult<usize> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    Ok(rayon::current_num_threads())
}

fn memory_budget(mib: Option<u64>) -> u64 {
    if let Some(m) = mib {
        return m << 20;
    }
    std::fs::read_to_string("/proc/meminfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("MemAvailable:"))
                .and_then(|l| l.split_whitespace().nth(1))
                .and_then(|kb| kb.parse::<u64>().ok())
        })
        .map_or(4 << 30, |kb| kb << 10)
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Selftest {
            common,
            inject_fault,
        } => {
            let params = load_params(&common.preset)?;
            let backends = parse_backends(common.ntt_backend.as_deref(), true)?;
            init_threads(common.threads)?;
            Ok(selftest::run(&params, &backends, common.seed, inject_fault))
        }
        Command::Bench {
            common,
            op,
            batch_sizes,
            reps,
            mem_budget_mib,
        } => {
            let params = load_params(&common.preset)?;
            let backends = parse_backends(common.ntt_backend.as_deref(), false)?;
            let threads = init_threads(common.threads)?;
            let cfg = bench::Config {
                op: bench::BenchOp::parse(&op)?,
                batch_sizes,
                reps: check_reps(reps)?,
                threads,
                seed: common.seed,
                budget: memory_budget(mem_budget_mib),
            };
            let mut rows = Vec::new();
            for backend in backends {
                rows.extend(bench::bench(&params, backend, &cfg)?);
            }
            report::emit(&rows, common.out.as_deref())?;
            Ok(true)
        }
        Command::SweepN {
            common,
            op,
            n_values,
            batch_sizes,
            reps,
            mem_budget_mib,
        } => {
            let params = load_params(&common.preset)?;
            let backends = parse_backends(common.ntt_backend.as_deref(), false)?;
            let threads = init_threads(common.threads)?;
            let cfg = bench::Config {
                op: bench::BenchOp::parse(&op)?,
                batch_sizes,
                reps: check_reps(reps)?,
                threads,
                seed: common.seed,
                budget: memory_budget(mem_budget_mib),
            };
            let n_values = parse_degrees(&n_values)?;
            let mut rows = Vec::new();
            for &n in &n_values {
                if !n.is_power_of_two()
                    || !(ckks_kernels::params::MIN_DEGREE..=ckks_kernels::params::MAX_DEGREE).contains(&n)
                {
                    return Err(CliError::Usage(format!("unsupported ring degree {n}")));
                }
            }
            for &n in &n_values {
                let p = bench::params_for_degree(&params, n)?;
                for &backend in &backends {
                    rows.extend(bench::bench(&p, backend, &cfg)?);
                }
            }
            report::emit(&rows, common.out.as_deref())?;
            Ok(true)
        }
        Command::WorkloadDot {
            common,
            length,
            zeros,
        } => {
            let params = load_params(&common.preset)?;
            let backend = parse_backends(common.ntt_backend.as_deref(), false)?[0];
            init_threads(common.threads)?;
            let rep = workload::dot_product(params, backend, length, zeros, common.seed)?;
            let text = serde_json::to_string_pretty(&rep).expect("report serializes");
            write_text(common.out.as_deref(), &text)?;
            Ok(true)
        }
        Command::Params { common } => {
            let params = load_params(&common.preset)?;
            write_text(common.out.as_deref(), &params.to_json())?;
            Ok(true)
        }
    }
}

fn parse_degrees(list: &str) -> CliResult<Vec<usize>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("invalid ring degree {s:?}")))
        })
        .collect()
}

/// Writes to `path`, or stdout when absent. A closed stdout pipe is not an error.
fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => match writeln!(std::io::stdout(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        },
    }
    Ok(())
}

fn check_reps(reps: usize) -> CliResult<usize> {
    if reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    Ok(reps)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
