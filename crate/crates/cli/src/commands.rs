use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Subcommand, ValueEnum};

use selfjoin::{
    brute_force, count_only_join, generate_uniform, load_csv, read_csv, self_join, CountingSink,
    Dataset, GridIndex, JoinConfig, JoinMode, MemorySink, PairWriter, ResultPair,
};

use crate::bench;
use crate::report::{RunReport, REPORT_HEADER};

/// The brute-force reference is quadratic; refuse to validate beyond this.
const MAX_VALIDATE_POINTS: usize = 100_000;

#[derive(Subcommand)]
pub enum Command {
    /// Generate a uniform synthetic dataset and write it as CSV.
    Generate(GenerateArgs),
    /// Build the grid index, run the self-join and print a run report.
    Join(JoinArgs),
    /// Cross-check the engine against the brute-force reference (PASS/FAIL).
    Validate(ValidateArgs),
    /// Run a benchmark sweep described by a key=value spec file.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Baseline,
    Unicomp,
}

impl From<ModeArg> for JoinMode {
    fn from(mode: ModeArg) -> JoinMode {
        match mode {
            ModeArg::Baseline => JoinMode::Baseline,
            ModeArg::Unicomp => JoinMode::Unicomp,
        }
    }
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Number of points.
    #[arg(long)]
    count: usize,
    /// Dimensionality of each point.
    #[arg(long)]
    dims: usize,
    /// Lower bound of every coordinate.
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    /// Upper bound of every coordinate.
    #[arg(long, default_value_t = 100.0)]
    hi: f64,
    /// RNG seed; the same seed reproduces the file byte for byte.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct JoinArgs {
    /// Input CSV of points.
    #[arg(long)]
    input: PathBuf,
    /// Dimensionality of the input points.
    #[arg(long)]
    dims: usize,
    /// Query radius (also the grid cell length).
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Baseline)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Target pairs per result batch.
    #[arg(long, default_value_t = 1 << 20)]
    buffer: usize,
    #[arg(long, default_value_t = 3)]
    min_batches: usize,
    /// Write the result pairs to this CSV file ("key,value" lines).
    #[arg(long, conflicts_with = "count_only")]
    out: Option<PathBuf>,
    /// Count pairs without materializing them.
    #[arg(long)]
    count_only: bool,
    /// Skip the first input line.
    #[arg(long)]
    header: bool,
    /// Label for the report row; defaults to the input file stem.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    dims: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Baseline)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Sweep spec file (key = value lines).
    #[arg(long)]
    spec: PathBuf,
    /// Write the report CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Join(args) => join(args),
        Command::Validate(args) => validate(args),
        Command::Bench(args) => run_bench(args),
    }
}

pub(crate) fn load_input(path: &Path, dims: usize, header: bool) -> Result<Dataset> {
    let result = if header {
        let file = File::open(path).map_err(selfjoin::Error::from);
        file.and_then(|f| read_csv(std::io::BufReader::new(f), dims, true))
    } else {
        load_csv(path, dims)
    };
    result.with_context(|| format!("reading {}", path.display()))
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let data = generate_uniform::<f64>(args.count, args.dims, args.lo, args.hi, args.seed)?;
    data.save_csv(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} points ({} dims) to {}",
        data.len(),
        data.dims(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn join(args: JoinArgs) -> Result<ExitCode> {
    let data = load_input(&args.input, args.dims, args.header)?;

    let build_start = Instant::now();
    let index = GridIndex::build(&data, args.eps)?;
    let build_s = build_start.elapsed().as_secs_f64();

    let cfg = JoinConfig {
        eps: args.eps,
        mode: args.mode.into(),
        include_self_pairs: true,
        buffer_capacity: args.buffer,
        min_batches: args.min_batches,
        workers: args.workers,
    };

    let join_start = Instant::now();
    let (pairs, stats) = if args.count_only {
        count_only_join(&data, &index, &cfg)?
    } else if let Some(out) = &args.out {
        let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
        let mut sink = PairWriter::new(file);
        let stats = self_join(&data, &index, &cfg, &mut sink)?;
        sink.finish()?;
        (stats.pairs_emitted, stats)
    } else {
        let mut sink = CountingSink::default();
        let stats = self_join(&data, &index, &cfg, &mut sink)?;
        (sink.pairs, stats)
    };
    let join_s = join_start.elapsed().as_secs_f64();

    let report = RunReport {
        dataset: args.input.display().to_string(),
        label: args.label.unwrap_or_else(|| file_stem(&args.input)),
        count: data.len(),
        dims: data.dims(),
        eps: args.eps,
        mode: cfg.mode,
        workers: cfg.workers,
        build_s,
        join_s,
        stats,
        pairs,
    };
    println!("{REPORT_HEADER}");
    println!("{}", report.csv_row());
    Ok(ExitCode::SUCCESS)
}

/// Outcome of comparing the engine's sorted pairs against the reference.
#[derive(Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass {
        pairs: u64,
    },
    Fail {
        index: usize,
        engine: Option<ResultPair>,
        oracle: Option<ResultPair>,
    },
}

pub fn compare_sorted(engine: &[ResultPair], oracle: &[ResultPair]) -> Verdict {
    let common = engine.len().min(oracle.len());
    for i in 0..common {
        if engine[i] != oracle[i] {
            return Verdict::Fail {
                index: i,
                engine: Some(engine[i]),
                oracle: Some(oracle[i]),
            };
        }
    }
    if engine.len() != oracle.len() {
        return Verdict::Fail {
            index: common,
            engine: engine.get(common).copied(),
            oracle: oracle.get(common).copied(),
        };
    }
    Verdict::Pass {
        pairs: engine.len() as u64,
    }
}

fn describe(pair: Option<ResultPair>) -> String {
    match pair {
        Some(p) => format!("({},{})", p.key, p.value),
        None => "<end>".to_string(),
    }
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let data = load_input(&args.input, args.dims, args.header)?;
    if data.len() > MAX_VALIDATE_POINTS {
        eprintln!(
            "refusing to validate {} points: the brute-force reference is limited to {}",
            data.len(),
            MAX_VALIDATE_POINTS
        );
        return Ok(ExitCode::from(2));
    }

    let index = GridIndex::build(&data, args.eps)?;
    let cfg = JoinConfig {
        eps: args.eps,
        mode: args.mode.into(),
        include_self_pairs: true,
        workers: args.workers,
        ..JoinConfig::new(args.eps)
    };
    let mut sink = MemorySink::default();
    self_join(&data, &index, &cfg, &mut sink)?;
    let engine = sink.into_sorted_pairs();
    let (oracle, _) = brute_force(&data, args.eps, true)?;

    match compare_sorted(&engine, &oracle) {
        Verdict::Pass { pairs } => {
            println!("PASS: {pairs} pairs match brute force");
            Ok(ExitCode::SUCCESS)
        }
        Verdict::Fail {
            index,
            engine,
            oracle,
        } => {
            println!(
                "FAIL: divergence at sorted index {index}: engine={} oracle={}",
                describe(engine),
                describe(oracle)
            );
            Ok(ExitCode::from(1))
        }
    }
}

fn run_bench(args: BenchArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;
    let spec = bench::parse_spec(&text)?;
    match &args.out {
        Some(path) => {
            let mut file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            bench::run_sweep(&spec, &mut file)?;
        }
        None => {
            let stdout = std::io::stdout();
            bench::run_sweep(&spec, &mut stdout.lock())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string())
}
