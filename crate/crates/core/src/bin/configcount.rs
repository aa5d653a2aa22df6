use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use configcount::harness::acceptance::{run_suite, Suite};
use configcount::harness::{
    configure_threads, execute, run, write_atomic, FamilyKind, FfCountParams, FfDecayParams, FfRegularizeParams,
    LatticeCountParams, LatticeScanParams, Scenario, SetGenerator, SetParams, SimplexSource, Task,
};
use configcount::lattice::SURROGATE_MODULUS;
use configcount::Error;

#[derive(Parser)]
#[command(name = "configcount", version, about = "Configuration counting in F_q^2 and Z^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// N, M and the counting gap for random sets in F_q^{2d}.
    FfCount {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Comma-separated side lengths; all nonzero tuples when omitted.
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weak regularity decomposition of a random family.
    FfRegularize {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "signs")]
        family: Family,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fourier decay constants of every sphere for primes in a range.
    FfDecay {
        #[arg(long, default_value_t = 3)]
        q_min: u64,
        #[arg(long, default_value_t = 101)]
        q_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of lattice copies of a dilated simplex.
    LatticeCount {
        /// Simplex JSON file: {"n": 5, "points": [[0,...], ...]}.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        lambda2: u64,
        #[arg(long, default_value_t = 1)]
        q: u64,
        #[arg(long)]
        verify_naive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Raw and normalized counts over a range of dilates.
    LatticeScan {
        #[arg(long)]
        spec: PathBuf,
        /// Inclusive range `lo..hi`.
        #[arg(long, value_parser = parse_range)]
        lambda2_range: (u64, u64),
        #[arg(long, default_value_t = 1)]
        q: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residue-class uniformity of a generated set.
    Uniformity {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Density increment on a generated set.
    Increment {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Run a scenario file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the acceptance criteria.
    Acceptance {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Family {
    Signs,
    Bounded,
}

#[derive(clap::Args)]
struct SetArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    side: u64,
    /// Window corner, comma separated; the origin by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    corner: Option<Vec<i64>>,
    /// Generator as JSON, e.g. {"kind":"random_density","delta":0.3}.
    #[arg(long)]
    generator: String,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = SURROGATE_MODULUS)]
    modulus: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SetArgs {
    fn params(&self) -> Result<SetParams, Error> {
        let generator: SetGenerator =
            serde_json::from_str(&self.generator).map_err(|e| Error::Parse(format!("--generator: {e}")))?;
        Ok(SetParams {
            n: self.n,
            side: self.side,
            corner: self.corner.clone(),
            generator,
            eps: self.eps,
            modulus: self.modulus,
        })
    }
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let lo = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    Ok((lo, hi))
}

fn emit(task: Task, seed: u64, out: Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(output) => {
            run(&Scenario { seed, output, task })?;
        }
        None => {
            let bytes = execute(&task, seed)?;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::FfCount { q, d, t, density, trials, seed, out } => {
            emit(Task::FfCount(FfCountParams { q, d, t, density, trials }), seed, out)?
        }
        Command::FfRegularize { q, d, k, eps, family, seed, out } => {
            let family = match family {
                Family::Signs => FamilyKind::Signs,
                Family::Bounded => FamilyKind::Bounded,
            };
            emit(Task::FfRegularize(FfRegularizeParams { q, d, k, eps, family }), seed, out)?
        }
        Command::FfDecay { q_min, q_max, out } => emit(Task::FfDecay(FfDecayParams { q_min, q_max }), 0, out)?,
        Command::LatticeCount { spec, lambda2, q, verify_naive, out } => emit(
            Task::LatticeCount(LatticeCountParams { simplex: SimplexSource::File(spec), lambda2, q, verify_naive }),
            0,
            out,
        )?,
        Command::LatticeScan { spec, lambda2_range, q, out } => emit(
            Task::LatticeScan(LatticeScanParams {
                simplex: SimplexSource::File(spec),
                q,
                lambda2_min: lambda2_range.0,
                lambda2_max: lambda2_range.1,
            }),
            0,
            out,
        )?,
        Command::Uniformity { set } => emit(Task::Uniformity(set.params()?), set.seed, set.out)?,
        Command::Increment { set } => emit(Task::Increment(set.params()?), set.seed, set.out)?,
        Command::Run { config } => {
            let scenario = Scenario::load(&config)?;
            let manifest = run(&scenario)?;
            eprintln!("wrote {} ({:.3}s)", manifest.output, manifest.wall_time_seconds);
        }
        Command::Acceptance { suite, json } => {
            let suite: Suite = suite.parse()?;
            let report = run_suite(suite);
            for c in &report.criteria {
                println!("{c}");
            }
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report).expect("plain data");
                write_atomic(&path, format!("{text}\n").as_bytes())?;
            }
            return Ok(ExitCode::from(report.exit_code() as u8));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
