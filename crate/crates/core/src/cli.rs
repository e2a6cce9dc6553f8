//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input error (bad flags, unreadable or invalid
//! assignment files), 3 verification failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    compute_leftover_matrix, compute_shuffle_matrix, verify_conservation, RateReport, DEFAULT_EXACT_K_LIMIT,
};
use crate::codec::{decode_worker, encode, WorkerCache};
use crate::error::Error;
use crate::model::{make_dataset, Assignment, ShufflePair};
use crate::sim::{run_simulation, worst_case_pair, EpochMetrics, ShuffleKind, SimConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

pub const CSV_HEADER: &str = "epoch,rate,uncoded,theorem1,lower_bound,lb_exact,ignored_worker,max_chain_depth,decode_ok";

#[derive(Debug, Parser)]
#[command(name = "coded-shuffle", version, about = "Coded data shuffling: analysis, encoding, verification and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shuffle and leftover matrices, conservation checks and rates for two assignment files.
    Analyze {
        prev: PathBuf,
        next: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EXACT_K_LIMIT)]
        exact_lb_limit: usize,
    },
    /// Print the transmission plan for two assignment files.
    Encode {
        prev: PathBuf,
        next: PathBuf,
        #[command(flatten)]
        payload: PayloadArgs,
    },
    /// Encode, decode at every worker and compare the payloads byte for byte.
    Verify {
        prev: PathBuf,
        next: PathBuf,
        #[command(flatten)]
        payload: PayloadArgs,
    },
    /// Run a multi-epoch simulation and emit per-epoch metrics as CSV.
    Simulate(SimulateArgs),
    /// Encode the cyclic worst-case shuffle and check it against (K-1)N/K.
    Worstcase {
        #[arg(short = 'k', long = "workers")]
        workers: usize,
        #[arg(short = 'n', long = "points")]
        points: usize,
        /// Worker order of the cycle, 1-based, comma separated.
        #[arg(long)]
        sigma: Option<String>,
        #[command(flatten)]
        payload: PayloadArgs,
        #[arg(long, default_value_t = DEFAULT_EXACT_K_LIMIT)]
        exact_lb_limit: usize,
    },
}

#[derive(Debug, Args)]
struct PayloadArgs {
    #[arg(short = 'd', long = "block-size", default_value_t = 64)]
    block_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ShuffleArg {
    Random,
    WorstCase,
    Files,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(short = 'k', long = "workers")]
    workers: Option<usize>,
    #[arg(short = 'n', long = "points")]
    points: Option<usize>,
    #[arg(short = 'd', long = "block-size", default_value_t = 64)]
    block_size: usize,
    #[arg(short = 't', long = "epochs")]
    epochs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ShuffleArg::Random)]
    shuffle: ShuffleArg,
    /// Worker order for the worst-case cycle, 1-based, comma separated.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long, default_value_t = DEFAULT_EXACT_K_LIMIT)]
    exact_lb_limit: usize,
    /// Output path, or `-` for stdout.
    #[arg(long, default_value = "-")]
    csv: String,
    /// Assignment files, one per epoch, for `--shuffle files`.
    files: Vec<PathBuf>,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { EXIT_INPUT } else { EXIT_VERIFY };
        Failure { code, message: e.to_string() }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

type CliResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze { prev, next, exact_lb_limit } => cmd_analyze(&prev, &next, exact_lb_limit, out),
        Command::Encode { prev, next, payload } => cmd_encode(&prev, &next, &payload, out),
        Command::Verify { prev, next, payload } => cmd_verify(&prev, &next, &payload, out),
        Command::Simulate(args) => cmd_simulate(&args, out, err),
        Command::Worstcase { workers, points, sigma, payload, exact_lb_limit } => {
            cmd_worstcase(workers, points, sigma.as_deref(), &payload, exact_lb_limit, out)
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_err(e: std::io::Error) -> Failure {
    input_failure(format!("write failed: {e}"))
}

fn read_assignment(path: &Path, epoch: u64) -> Result<Assignment, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_failure(format!("{}: {e}", path.display())))?;
    let a = Assignment::parse(&text, epoch).map_err(|e| input_failure(format!("{}: {e}", path.display())))?;
    a.validate(a.n_points())
        .into_result()
        .map_err(|e| input_failure(format!("{}: {e}", path.display())))?;
    Ok(a)
}

fn read_pair(prev: &Path, next: &Path) -> Result<ShufflePair, Failure> {
    let a = read_assignment(prev, 0)?;
    let b = read_assignment(next, 1)?;
    Ok(ShufflePair::new(a, b)?)
}

fn parse_sigma(text: &str, k: usize) -> Result<Vec<usize>, Failure> {
    let sigma = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().ok().filter(|&w| w >= 1).map(|w| w - 1))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| input_failure(format!("bad --sigma `{text}`: expected 1-based worker indices")))?;
    let mut sorted = sigma.clone();
    sorted.sort_unstable();
    if sorted != (0..k).collect::<Vec<_>>() {
        return Err(input_failure(format!("--sigma `{text}` is not a permutation of 1..={k}")));
    }
    Ok(sigma)
}

fn one_based(sigma: &[usize]) -> String {
    sigma.iter().map(|w| (w + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn render_rates(r: &RateReport) -> String {
    let mut s = String::new();
    let lb_kind = if r.lower_bound_exact { "exact" } else { "greedy" };
    let _ = writeln!(s, "rates (symbols of one block each)");
    let _ = writeln!(s, "  uncoded        {:>6}", r.uncoded);
    let _ = writeln!(s, "  phase 1        {:>6}", r.phase1);
    let _ = writeln!(s, "  phase 2        {:>6}", r.phase2);
    let _ = writeln!(s, "  achievable     {:>6}   ignored worker w{}", r.proposed_total, r.ignored_worker + 1);
    let _ = writeln!(s, "  lower bound    {:>6}   {lb_kind}, sigma = {}", r.lower_bound, one_based(&r.best_sigma));
    let _ = writeln!(s, "  gap            {:>6}", r.gap());
    let _ = writeln!(
        s,
        "uncoded / achievable / lower bound: {} / {} / {}",
        r.uncoded, r.proposed_total, r.lower_bound
    );
    s
}

fn cmd_analyze(prev: &Path, next: &Path, exact_limit: usize, out: &mut dyn Write) -> CliResult {
    let pair = read_pair(prev, next)?;
    let s = compute_shuffle_matrix(&pair);
    let omega = compute_leftover_matrix(&s);
    let checks = verify_conservation(&s, &omega);
    let report = RateReport::compute(&s, &omega, exact_limit)?;

    let mut text = String::new();
    let _ = writeln!(text, "K={} N={} N/K={}\n", pair.k_workers(), pair.n_points(), pair.batch_size());
    let _ = writeln!(text, "shuffle matrix S\n{}", s.s);
    let _ = writeln!(text, "leftover matrix\n{}", omega.omega);
    let _ = writeln!(text, "conservation\n{checks}");
    text.push_str(&render_rates(&report));
    out.write_all(text.as_bytes()).map_err(io_err)?;

    if !checks.all_passed() {
        return Err(Failure { code: EXIT_VERIFY, message: "conservation checks failed".into() });
    }
    Ok(())
}

fn cmd_encode(prev: &Path, next: &Path, payload: &PayloadArgs, out: &mut dyn Write) -> CliResult {
    let pair = read_pair(prev, next)?;
    let data = make_dataset(pair.n_points(), payload.block_size, payload.seed)?;
    let plan = encode(&pair, &data)?;
    write!(out, "{plan}").map_err(io_err)
}

/// Decodes at every worker; returns one line per problem.
fn decode_all(pair: &ShufflePair, plan: &crate::TransmissionPlan, data: &crate::Dataset) -> Vec<String> {
    let mut problems = Vec::new();
    for w in 0..pair.k_workers() {
        let cache = WorkerCache::from_dataset(data, pair.prev(), w);
        match decode_worker(plan, w, &cache, pair) {
            Err(e) => problems.push(e.to_string()),
            Ok(d) => {
                let wrong: Vec<String> = d
                    .recovered
                    .iter()
                    .filter(|(id, block)| data.block(**id) != block.as_slice())
                    .map(|(id, _)| id.to_string())
                    .collect();
                if !wrong.is_empty() {
                    problems.push(format!("w{}: wrong bytes for points {}", w + 1, wrong.join(",")));
                }
            }
        }
    }
    problems
}

fn cmd_verify(prev: &Path, next: &Path, payload: &PayloadArgs, out: &mut dyn Write) -> CliResult {
    let pair = read_pair(prev, next)?;
    let data = make_dataset(pair.n_points(), payload.block_size, payload.seed)?;
    let plan = encode(&pair, &data)?;
    let problems = decode_all(&pair, &plan, &data);
    if !problems.is_empty() {
        return Err(Failure { code: EXIT_VERIFY, message: format!("decoding failed\n  {}", problems.join("\n  ")) });
    }
    writeln!(out, "{} symbols, all {} workers decoded", plan.rate_points(), pair.k_workers()).map_err(io_err)
}

pub fn csv_row(m: &EpochMetrics) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        m.epoch,
        m.rate_points,
        m.uncoded,
        m.theorem1,
        m.lower_bound,
        m.lower_bound_exact,
        m.ignored_worker + 1,
        m.max_chain_depth,
        m.decode_ok
    )
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (k, n, epochs, shuffle) = match args.shuffle {
        ShuffleArg::Files => {
            if args.files.len() < 2 {
                return Err(input_failure("--shuffle files needs at least two assignment files"));
            }
            let script = args
                .files
                .iter()
                .enumerate()
                .map(|(t, p)| read_assignment(p, t as u64))
                .collect::<Result<Vec<_>, _>>()?;
            let (k, n) = (script[0].k_workers(), script[0].n_points());
            if args.workers.is_some_and(|w| w != k) || args.points.is_some_and(|p| p != n) {
                return Err(input_failure(format!("-k/-n disagree with the files (K={k}, N={n})")));
            }
            let epochs = script.len() - 1;
            if args.epochs.is_some_and(|t| t != epochs) {
                return Err(input_failure(format!("{} files give {epochs} epochs", script.len())));
            }
            (k, n, epochs, ShuffleKind::Scripted(script))
        }
        kind => {
            if !args.files.is_empty() {
                return Err(input_failure("assignment files are only read with --shuffle files"));
            }
            let k = args.workers.ok_or_else(|| input_failure("-k/--workers is required"))?;
            let n = args.points.ok_or_else(|| input_failure("-n/--points is required"))?;
            let shuffle = if kind == ShuffleArg::Random { ShuffleKind::Random } else { ShuffleKind::WorstCaseCyclic };
            (k, n, args.epochs.unwrap_or(1), shuffle)
        }
    };
    let mut cfg = SimConfig::new(k, n, epochs, args.seed, shuffle);
    cfg.block_size_bytes = args.block_size;
    cfg.exact_lb_limit = args.exact_lb_limit;
    if let Some(text) = &args.sigma {
        if args.shuffle != ShuffleArg::WorstCase {
            return Err(input_failure("--sigma only applies to --shuffle worst-case"));
        }
        cfg.sigma = Some(parse_sigma(text, k)?);
    }
    cfg.validate()?;

    let data = make_dataset(n, cfg.block_size_bytes, cfg.seed)?;
    let metrics = run_simulation(&cfg, &data)?;

    let mut csv = String::with_capacity(64 * (metrics.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for m in &metrics {
        csv.push_str(&csv_row(m));
        csv.push('\n');
    }
    let mean = metrics.iter().map(|m| m.rate_points as f64).sum::<f64>() / metrics.len() as f64;
    let worst = metrics.iter().map(|m| m.rate_points).max().unwrap_or(0);
    let summary = format!("# epochs={} mean_rate={mean:.3} worst_rate={worst}\n", metrics.len());

    if args.csv == "-" {
        out.write_all(csv.as_bytes()).map_err(io_err)?;
        err.write_all(summary.as_bytes()).map_err(io_err)?;
    } else {
        fs::write(&args.csv, csv).map_err(|e| input_failure(format!("{}: {e}", args.csv)))?;
        out.write_all(summary.as_bytes()).map_err(io_err)?;
    }
    Ok(())
}

fn cmd_worstcase(
    k: usize,
    n: usize,
    sigma: Option<&str>,
    payload: &PayloadArgs,
    exact_limit: usize,
    out: &mut dyn Write,
) -> CliResult {
    crate::model::assignment::check_divisible(n, k)?;
    let sigma = match sigma {
        Some(text) => parse_sigma(text, k)?,
        None => (0..k).collect(),
    };
    let pair = worst_case_pair(n, k, &sigma)?;
    let data = make_dataset(n, payload.block_size, payload.seed)?;
    let plan = encode(&pair, &data)?;
    let s = compute_shuffle_matrix(&pair);
    let report = RateReport::compute(&s, &compute_leftover_matrix(&s), exact_limit)?;
    let problems = decode_all(&pair, &plan, &data);
    let optimum = ((k - 1) * n / k) as u64;
    let achieved = plan.rate_points() as u64;

    let lb_kind = if report.lower_bound_exact { "exact" } else { "greedy" };
    let mut text = String::new();
    let _ = writeln!(text, "worst-case cyclic shuffle K={k} N={n} sigma={}", one_based(&sigma));
    let _ = writeln!(text, "achieved rate   {achieved}");
    let _ = writeln!(text, "(K-1)N/K        {optimum}");
    let _ = writeln!(text, "lower bound     {} ({lb_kind})", report.lower_bound);
    if problems.is_empty() {
        let _ = writeln!(text, "all {k} workers decoded");
    }
    out.write_all(text.as_bytes()).map_err(io_err)?;

    if !problems.is_empty() {
        return Err(Failure { code: EXIT_VERIFY, message: format!("decoding failed\n  {}", problems.join("\n  ")) });
    }
    if achieved != optimum {
        return Err(Failure { code: EXIT_VERIFY, message: format!("achieved {achieved} != (K-1)N/K = {optimum}") });
    }
    Ok(())
}
