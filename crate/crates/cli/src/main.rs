mod keys;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use log::info;

use naef_core::dimacs::write_dimacs;
use naef_core::filter::{build_cnf, FilterParams, EXTERNAL_ENGINE_ID};
use naef_core::metrics::{measure_fpr, sig6, write_fpr_csv, FprRow};
use naef_core::nae::to_sat_cnf;
use naef_core::solvers::CollectOptions;
use naef_core::{Assignment, Engine, Error, HashMode, HashSpec, NaeSatFilter, SolverBudget};

use keys::{random_keys, read_keys};

#[derive(Parser)]
#[command(
    name = "naef",
    version,
    about = "NAE-SAT probabilistic membership filters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a filter from a keys file.
    Build(BuildArgs),
    /// Query keys against a filter; prints "maybe" or "no" per key.
    Query(QueryArgs),
    /// Measure false-positive rates over a range of s.
    BenchFpr(BenchFprArgs),
    /// Time a batch of random queries.
    BenchQuery(BenchQueryArgs),
    /// Write the formula for a key set as DIMACS.
    ExportCnf(ExportArgs),
    /// Pack externally computed solutions into a filter.
    ImportSolutions(ImportArgs),
    /// Print a filter's header and derived figures.
    Info(InfoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Walksat,
    Pt,
}

impl EngineArg {
    fn engine(self) -> Engine {
        match self {
            EngineArg::Walksat => Engine::walksat(),
            EngineArg::Pt => Engine::tempering(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HashModeArg {
    One,
    Two,
}

impl From<HashModeArg> for HashMode {
    fn from(m: HashModeArg) -> Self {
        match m {
            HashModeArg::One => HashMode::OneHash,
            HashModeArg::Two => HashMode::TwoHash,
        }
    }
}

#[derive(Args)]
struct KeySource {
    /// Newline-delimited hex keys, or raw records with --raw.
    #[arg(long)]
    keys: PathBuf,
    /// Read the keys file as fixed-width binary records.
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 8)]
    key_bytes: usize,
}

impl KeySource {
    fn load(&self) -> Result<Vec<Vec<u8>>, Failure> {
        read_keys(&self.keys, self.raw, self.key_bytes).map_err(Failure::Usage)
    }
}

#[derive(Args)]
struct HashArgs {
    #[arg(long, value_enum, default_value = "one")]
    hash_mode: HashModeArg,
    #[arg(long, default_value_t = 0)]
    hash_seed: u32,
}

impl HashArgs {
    fn spec(&self) -> HashSpec {
        HashSpec::new(self.hash_mode.into(), self.hash_seed)
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "walksat")]
    engine: EngineArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-solve step budget (flips for walksat, sweeps for pt).
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long)]
    max_restarts: Option<u32>,
    /// Reject solutions closer than this fraction of n to an accepted one.
    #[arg(long, default_value_t = 0.0)]
    min_hamming_frac: f64,
}

impl SolverArgs {
    fn options(&self, n: usize) -> Result<CollectOptions, Failure> {
        let engine = self.engine.engine();
        let mut budget = engine.default_budget(n);
        if let Some(steps) = self.max_steps {
            budget = SolverBudget::new(steps, budget.max_restarts, budget.rng_seed)?;
        }
        if let Some(r) = self.max_restarts {
            budget.max_restarts = r;
        }
        Ok(CollectOptions::new(engine, budget).with_min_hamming_frac(self.min_hamming_frac))
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("size").required(true).args(["n", "alpha"])))]
struct BuildArgs {
    #[command(flatten)]
    keys: KeySource,
    #[arg(long)]
    k: usize,
    /// Number of variables.
    #[arg(long)]
    n: Option<usize>,
    /// Clause density m / n; sets n = round(m / alpha).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    s: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    hash: HashArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["key", "keys"])))]
struct QueryArgs {
    #[arg(long)]
    filter: PathBuf,
    /// Hex key; may be repeated.
    #[arg(long)]
    key: Vec<String>,
    #[arg(long)]
    keys: Option<PathBuf>,
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 8)]
    key_bytes: usize,
}

#[derive(Args)]
struct BenchFprArgs {
    #[arg(long)]
    k: usize,
    /// Inclusive range LO..HI, or a single value.
    #[arg(long)]
    s_range: String,
    #[arg(long, default_value_t = 1024)]
    m: usize,
    #[arg(long, default_value_t = 8.0)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, value_enum, default_value = "walksat")]
    engine: EngineArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    hash_seed: u32,
    #[arg(long, value_enum, default_value = "one")]
    hash_mode: HashModeArg,
    /// Emit rows for both hash modes.
    #[arg(long)]
    compare_hash_modes: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchQueryArgs {
    #[arg(long)]
    filter: PathBuf,
    #[arg(long)]
    num_keys: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    keys: KeySource,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    hash: HashArgs,
    /// Write the penalty-encoded SAT formula instead of the NAE one.
    #[arg(long)]
    nae_encoded: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportArgs {
    #[command(flatten)]
    keys: KeySource,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    hash: HashArgs,
    /// One assignment per line as n characters of 0/1, x0 first.
    #[arg(long)]
    solutions: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InfoArgs {
    #[arg(long)]
    filter: PathBuf,
}

enum Failure {
    /// Bad arguments, unreadable input, malformed files.
    Usage(String),
    /// A solver ran out of budget or a solution failed verification.
    Solve(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Solve(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) => Failure::Solve(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::BenchFpr(a) => cmd_bench_fpr(a),
        Command::BenchQuery(a) => cmd_bench_query(a),
        Command::ExportCnf(a) => cmd_export_cnf(a),
        Command::ImportSolutions(a) => cmd_import_solutions(a),
        Command::Info(a) => cmd_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Solve(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("NAEF_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("NAEF_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load_filter(path: &Path) -> Result<NaeSatFilter, Failure> {
    NaeSatFilter::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn print_summary(f: &NaeSatFilter) {
    let h = f.header();
    let bits = f.solution_bits();
    let file_bytes = f.serialized_len();
    println!("k          {}", h.k);
    println!("n          {}", h.n);
    println!("m          {}", h.m);
    println!("s          {}", h.s);
    println!("alpha      {}", sig6(h.alpha()));
    println!(
        "hash       {:?} {} seed {}",
        h.hash_spec.algorithm, h.hash_spec.mode, h.hash_spec.base_seed
    );
    println!("engine     {}", engine_name(h.build_engine_id));
    println!("fpr theory {}", sig6(f.theoretical_fpr()));
    println!(
        "storage    {bits} bits ({} bytes of solutions), {file_bytes} bytes on disk",
        bits.div_ceil(8)
    );
    println!(
        "efficiency {} (solution bits)",
        sig6(f.theoretical_efficiency())
    );
    let per_key_file = (file_bytes * 8) as f64 / h.m as f64;
    println!(
        "efficiency {} (file bytes)",
        sig6(-f.theoretical_fpr().log2() / per_key_file)
    );
}

fn engine_name(id: u16) -> &'static str {
    match id {
        EXTERNAL_ENGINE_ID => "external",
        1 => "walksat",
        2 => "pt",
        _ => "unknown",
    }
}

fn cmd_build(a: BuildArgs) -> Result<(), Failure> {
    let keys = a.keys.load()?;
    if keys.is_empty() {
        return Err(Failure::Usage("keys file holds no keys".into()));
    }
    let m = keys.len();
    let n = match (a.n, a.alpha) {
        (Some(n), None) => n,
        (None, Some(alpha)) if alpha.is_finite() && alpha > 0.0 => {
            (m as f64 / alpha).round() as usize
        }
        (None, Some(alpha)) => {
            return Err(Failure::Usage(format!(
                "alpha must be positive, got {alpha}"
            )))
        }
        _ => unreachable!("clap enforces exactly one of --n and --alpha"),
    };
    let params = FilterParams {
        k: a.k,
        n,
        s: a.s,
        hash_spec: a.hash.spec(),
        collect: a.solver.options(n)?,
        seed: a.solver.seed,
    };
    let start = Instant::now();
    let f = NaeSatFilter::build(&keys, &params)?;
    let elapsed = start.elapsed();
    f.save(&a.out)?;
    info!("wrote {}", a.out.display());
    print_summary(&f);
    println!("build time {:.3}s", elapsed.as_secs_f64());
    Ok(())
}

fn cmd_query(a: QueryArgs) -> Result<(), Failure> {
    let f = load_filter(&a.filter)?;
    let mut keys = Vec::new();
    for h in &a.key {
        keys.push(hex::decode(h).map_err(|e| Failure::Usage(format!("--key {h:?}: {e}")))?);
    }
    if let Some(path) = &a.keys {
        keys.extend(read_keys(path, a.raw, a.key_bytes).map_err(Failure::Usage)?);
    }
    let out = io::stdout();
    let mut out = BufWriter::new(out.lock());
    for key in &keys {
        let word = if f.query(key).is_maybe() {
            "maybe"
        } else {
            "no"
        };
        writeln!(out, "{word}")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_range(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || {
        Failure::Usage(format!(
            "invalid --s-range {text:?}; expected LO..HI with 1 <= LO <= HI"
        ))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo.trim(), hi.trim().trim_start_matches('=')),
        None => (text.trim(), text.trim()),
    };
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn cmd_bench_fpr(a: BenchFprArgs) -> Result<(), Failure> {
    let (lo, hi) = parse_range(&a.s_range)?;
    if a.m == 0 || a.trials == 0 {
        return Err(Failure::Usage("--m and --trials must be positive".into()));
    }
    if !(a.alpha.is_finite() && a.alpha > 0.0) {
        return Err(Failure::Usage(format!(
            "alpha must be positive, got {}",
            a.alpha
        )));
    }
    let n = ((a.m as f64 / a.alpha).round() as usize).max(1);
    let modes: Vec<HashMode> = if a.compare_hash_modes {
        vec![HashMode::OneHash, HashMode::TwoHash]
    } else {
        vec![a.hash_mode.into()]
    };
    let (keys, members) = random_keys(a.m, a.seed);
    let engine = a.engine.engine();

    let mut rows = Vec::new();
    for mode in modes {
        let params = FilterParams {
            k: a.k,
            n,
            s: hi,
            hash_spec: HashSpec::new(mode, a.hash_seed),
            collect: CollectOptions::defaults(engine.clone(), n),
            seed: a.seed,
        };
        let full = NaeSatFilter::build(&keys, &params)?;
        for s in lo..=hi {
            let f = full.prefix(s)?;
            let est = measure_fpr(&f, a.trials, a.seed.wrapping_add(s as u64), &members);
            rows.push(FprRow::new(a.k, s, n, a.m, est, mode.to_string()));
        }
    }
    let comment = format!(
        "bench-fpr k={} s={}..{} m={} n={} alpha={} trials={} engine={} seed={} hash_seed={}",
        a.k,
        lo,
        hi,
        a.m,
        n,
        a.alpha,
        a.trials,
        engine_name(engine.id()),
        a.seed,
        a.hash_seed
    );
    let mut out = output(&a.csv)?;
    write_fpr_csv(&mut out, &comment, &rows)?;
    out.flush()?;
    Ok(())
}

fn cmd_bench_query(a: BenchQueryArgs) -> Result<(), Failure> {
    if a.num_keys == 0 {
        return Err(Failure::Usage("--num-keys must be at least 1".into()));
    }
    let f = load_filter(&a.filter)?;
    let (keys, _) = random_keys(a.num_keys, a.seed);
    let batch = f.query_batch(&keys);
    let maybe = batch.maybe_count();
    let total = batch.total.as_secs_f64();
    let per = total / a.num_keys as f64;
    println!(
        "{} queries: {} maybe, {} no; {:.6}s total, {:.1} ns/query",
        a.num_keys,
        maybe,
        a.num_keys - maybe,
        total,
        per * 1e9
    );
    if let Some(path) = &a.csv {
        let h = f.header();
        let mut out = BufWriter::new(fs::File::create(path)?);
        writeln!(
            out,
            "# bench-query filter={} k={} n={} m={} num_keys={} seed={} maybe={}",
            a.filter.display(),
            h.k,
            h.n,
            h.m,
            a.num_keys,
            a.seed,
            maybe
        )?;
        writeln!(out, "s,total_t,t_per_query")?;
        writeln!(out, "{},{},{}", h.s, sig6(total), sig6(per))?;
        out.flush()?;
    }
    Ok(())
}

fn cmd_export_cnf(a: ExportArgs) -> Result<(), Failure> {
    let keys = a.keys.load()?;
    let mut f = build_cnf(&keys, a.k, a.n, &a.hash.spec())?;
    if a.nae_encoded {
        f = to_sat_cnf(&f)?;
    }
    fs::write(&a.out, write_dimacs(&f))?;
    Ok(())
}

fn cmd_import_solutions(a: ImportArgs) -> Result<(), Failure> {
    let keys = a.keys.load()?;
    let text = fs::read_to_string(&a.solutions)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.solutions.display())))?;
    let mut sols: Vec<Assignment> = Vec::new();
    for (i, line) in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
    {
        let sol = Assignment::from_bit_str(line)
            .map_err(|e| Failure::Solve(format!("solution {i}: {e}")))?;
        if let Some(first) = sols.first() {
            if sol.len() != first.len() {
                return Err(Failure::Solve(format!(
                    "solution {i}: {} variables, expected {}",
                    sol.len(),
                    first.len()
                )));
            }
        }
        sols.push(sol);
    }
    if sols.is_empty() {
        return Err(Failure::Usage("solutions file holds no assignments".into()));
    }
    let f = NaeSatFilter::from_solutions(&keys, a.k, a.hash.spec(), EXTERNAL_ENGINE_ID, &sols)
        .map_err(|e| match e {
            Error::Contract(m) => Failure::Solve(m),
            other => other.into(),
        })?;
    f.save(&a.out)?;
    print_summary(&f);
    Ok(())
}

fn cmd_info(a: InfoArgs) -> Result<(), Failure> {
    let f = load_filter(&a.filter)?;
    println!("version    {}", f.header().version);
    print_summary(&f);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert!(matches!(parse_range("1..8"), Ok((1, 8))));
        assert!(matches!(parse_range("2..=4"), Ok((2, 4))));
        assert!(matches!(parse_range("5"), Ok((5, 5))));
        for bad in ["0..3", "4..2", "x", "1..", ""] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
