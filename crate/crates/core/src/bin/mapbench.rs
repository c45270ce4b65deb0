use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use map_memetic::bench::{
    aggregate, read_records, refresh_errors, render_text, run_experiment, run_seed, run_single, write_records,
    write_table_csv, BestKnownStore, ClockMode, ExperimentConfig, Heuristic, RunRecord,
};
use map_memetic::instances::{bed_sizes, generate, write_instance};
use map_memetic::memetic::VirtualClock;
use map_memetic::tuning::{collect_errors, default_local_search, gamma, gamma_fixed, tune, ErrorCache, Grid};
use map_memetic::{Family, InstanceId, MapError, Result};

#[derive(Parser)]
#[command(name = "mapbench", version, about = "Memetic MAP solver and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write instance files.
    Gen(GenArgs),
    /// Solve one instance and print its result record.
    Solve(SolveArgs),
    /// Run a grid of instances, budgets and heuristics.
    Bench(BenchArgs),
    /// Collect (or load) the error cache and grid-search a, b, c.
    Tune(TuneArgs),
    /// Aggregate a results file into a summary table.
    Report(ReportArgs),
}

#[derive(Args)]
struct Selection {
    /// Family codes (r, cq, sr, ge, pr), comma separated.
    #[arg(long, default_value = "r,cq,sr")]
    families: String,
    /// Dimension counts, comma separated.
    #[arg(long = "s", default_value = "3,4,5,6")]
    dims: String,
    /// Instance sizes; defaults to the bed sizes of each s.
    #[arg(long = "n")]
    sizes: Option<String>,
    /// Instance indices, e.g. `1-10` or `1,4`.
    #[arg(long, default_value = "1-10")]
    indices: String,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    select: Selection,
    #[arg(long, default_value = "instances")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    family: String,
    #[arg(long = "s")]
    dims: usize,
    #[arg(long = "n")]
    size: usize,
    #[arg(long, default_value_t = 1)]
    index: usize,
    /// Time budget in seconds.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Heuristic: `gk` or a local-search code for a standalone run.
    #[arg(long, default_value = "gk")]
    heuristic: String,
    /// Local search used inside `gk` (default depends on the family).
    #[arg(long)]
    ls: Option<String>,
    /// Seed of the solver's generator.
    #[arg(long)]
    seed_override: Option<i32>,
    /// Count local searches instead of reading the wall clock.
    #[arg(long)]
    virtual_clock: bool,
    /// Seconds charged per local search under the virtual clock.
    #[arg(long, default_value_t = VirtualClock::DEFAULT_TICK)]
    tick: f64,
    /// Best-known store to read and update.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Also write the best assignment (1-based vectors) here.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    select: Selection,
    /// Budgets in seconds, comma separated.
    #[arg(long, default_value = "0.3,1,3")]
    budgets: String,
    /// Heuristic codes, comma separated.
    #[arg(long, default_value = "gk")]
    heuristics: String,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    #[arg(long, default_value = "best_known.json")]
    store: PathBuf,
    #[arg(long)]
    virtual_clock: bool,
    #[arg(long, default_value_t = VirtualClock::DEFAULT_TICK)]
    tick: f64,
}

#[derive(Args)]
struct TuneArgs {
    /// Grid as `a=lo:hi:step,b=...,c=...`; omitted constants use defaults.
    #[arg(long, default_value = "")]
    grid: String,
    /// Directory holding errors.csv and ls_time.csv; collected if absent.
    #[arg(long, default_value = "tuning-cache")]
    cache: PathBuf,
    #[command(flatten)]
    select: Selection,
    #[arg(long, default_value = "1,3")]
    budgets: String,
    /// Candidate population sizes.
    #[arg(long, default_value = "2,3,5,8,12,18,27,40,60,90,135")]
    pop_sizes: String,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, default_value = "results.csv")]
    input: PathBuf,
    /// Best-known store used to refresh the errors.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Write the table as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Keep Geometric and Product instances in the table.
    #[arg(long)]
    all_families: bool,
}

fn config_err(msg: impl Into<String>) -> MapError {
    MapError::Config(msg.into())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| config_err(format!("bad {what} `{x}`"))))
        .collect()
}

fn parse_indices(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.parse().map_err(|_| config_err(format!("bad index range `{part}`")))?;
                let hi: usize = hi.parse().map_err(|_| config_err(format!("bad index range `{part}`")))?;
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| config_err(format!("bad index `{part}`")))?),
        }
    }
    if out.contains(&0) {
        return Err(config_err("indices start at 1"));
    }
    Ok(out)
}

fn family(code: &str) -> Result<Family> {
    Family::from_code(code).map_err(|_| config_err(format!("unknown family `{code}`")))
}

fn selection(sel: &Selection) -> Result<Vec<InstanceId>> {
    let families = sel.families.split(',').map(str::trim).map(family).collect::<Result<Vec<_>>>()?;
    let dims: Vec<usize> = parse_list(&sel.dims, "s")?;
    let indices = parse_indices(&sel.indices)?;
    let explicit: Option<Vec<usize>> = sel.sizes.as_deref().map(|t| parse_list(t, "n")).transpose()?;
    let mut ids = Vec::new();
    for &f in &families {
        for &s in &dims {
            let sizes = match &explicit {
                Some(v) => v.clone(),
                None => bed_sizes(s)
                    .ok_or_else(|| config_err(format!("no bed sizes for s = {s}; pass --n")))?
                    .to_vec(),
            };
            for &n in &sizes {
                for &i in &indices {
                    ids.push(InstanceId::new(f, s, n, i));
                }
            }
        }
    }
    if ids.is_empty() {
        return Err(config_err("selection is empty"));
    }
    Ok(ids)
}

fn clock_mode(virtual_clock: bool, tick: f64) -> Result<ClockMode> {
    if !virtual_clock {
        return Ok(ClockMode::Wall);
    }
    if !(tick > 0.0 && tick.is_finite()) {
        return Err(config_err(format!("tick must be positive, got {tick}")));
    }
    Ok(ClockMode::Virtual(tick))
}

fn gen(args: GenArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    for id in selection(&args.select)? {
        let inst = generate(id)?;
        std::fs::write(args.out.join(format!("{id}.map")), write_instance(&inst))?;
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let id = InstanceId::new(family(&args.family)?, args.dims, args.size, args.index);
    if args.index == 0 {
        return Err(config_err("index starts at 1"));
    }
    if !(args.tau > 0.0 && args.tau.is_finite()) {
        return Err(config_err(format!("tau must be positive, got {}", args.tau)));
    }
    let heuristic = match (args.heuristic.parse::<Heuristic>()?, &args.ls) {
        (Heuristic::Memetic(None), Some(ls)) => Heuristic::Memetic(Some(ls.parse()?)),
        (_, Some(_)) => return Err(config_err("--ls only applies to the gk heuristic")),
        (h, None) => h,
    };
    let inst = generate(id)?;
    let seed = args.seed_override.unwrap_or_else(|| run_seed(id, 0));
    let out = run_single(&inst, &heuristic, args.tau, seed, clock_mode(args.virtual_clock, args.tick)?)?;

    let mut store = match &args.store {
        Some(path) => BestKnownStore::load(path)?,
        None => BestKnownStore::new(),
    };
    store.seed_random(id);
    store.update(id, out.weight, Some((&inst, &out.best)))?;
    if let Some(path) = &args.store {
        store.save(path)?;
    }
    if let Some(path) = &args.solution {
        let text: String = out
            .best
            .to_one_based()
            .iter()
            .map(|v| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ") + "\n")
            .collect();
        std::fs::write(path, text)?;
    }
    let mut records = vec![RunRecord {
        instance_id: id.to_string(),
        heuristic: heuristic.to_string(),
        tau_s: args.tau,
        weight: out.weight,
        best_known: f64::NAN,
        rel_err_pct: f64::NAN,
        generations: out.generations,
        pop_size: out.pop_size,
        ls_time_s: out.ls_time,
        elapsed_s: out.elapsed,
    }];
    refresh_errors(&mut records, &store)?;
    write_records(std::io::stdout().lock(), &records)
}

fn bench(args: BenchArgs) -> Result<()> {
    let config = ExperimentConfig {
        instances: selection(&args.select)?,
        budgets: parse_list(&args.budgets, "budget")?,
        heuristics: args.heuristics.split(',').map(|h| h.trim().to_string()).collect(),
        reps: args.reps,
        workers: args.workers,
        clock: clock_mode(args.virtual_clock, args.tick)?,
    };
    let mut store = BestKnownStore::load(&args.store)?;
    let result = run_experiment(&config, &mut store);
    // Improvements found before a failure are still worth keeping.
    store.save(&args.store)?;
    let records = result?;
    write_records(std::fs::File::create(&args.out)?, &records)?;
    print!("{}", render_text(&aggregate(&default_rows(records, false)?)?));
    Ok(())
}

fn default_rows(records: Vec<RunRecord>, all_families: bool) -> Result<Vec<RunRecord>> {
    if all_families {
        return Ok(records);
    }
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        if !matches!(r.id()?.family, Family::Geometric | Family::Product) {
            kept.push(r);
        }
    }
    Ok(kept)
}

fn cache_paths(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join("errors.csv"), dir.join("ls_time.csv"))
}

fn tune_cmd(args: TuneArgs) -> Result<()> {
    let grid = Grid::parse(&args.grid)?;
    let (weights, times) = cache_paths(&args.cache);
    let cache = if weights.exists() && times.exists() {
        ErrorCache::load(&weights, &times)?
    } else {
        let ids = selection(&args.select)?;
        let budgets: Vec<f64> = parse_list(&args.budgets, "budget")?;
        let sizes: Vec<usize> = parse_list(&args.pop_sizes, "population size")?;
        let cache = collect_errors(&ids, &budgets, &sizes, args.reps, &default_local_search, args.workers)?;
        std::fs::create_dir_all(&args.cache)?;
        cache.save(&weights, &times)?;
        cache
    };
    let best = tune(&cache, &grid)?;
    println!("a = {}, b = {}, c = {}: gamma = {:.2}%", best.a, best.b, best.c, best.gamma);
    println!("defaults (0.08, 0.35, 0.85): gamma = {:.2}%", gamma(0.08, 0.35, 0.85, &cache)?);
    for &m in cache.sizes() {
        println!("fixed m = {m}: gamma = {:.2}%", gamma_fixed(m, &cache)?);
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let mut records = read_records(&args.input)?;
    if let Some(path) = &args.store {
        refresh_errors(&mut records, &BestKnownStore::load(path)?)?;
    }
    let table = aggregate(&default_rows(records, args.all_families)?)?;
    if let Some(path) = &args.csv {
        write_table_csv(std::fs::File::create(path)?, &table)?;
    }
    print!("{}", render_text(&table));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Tune(a) => tune_cmd(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mapbench: {e}");
            match e {
                MapError::Integrity(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
