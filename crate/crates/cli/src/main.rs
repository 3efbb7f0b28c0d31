//! `cvrpq` — CVRP-to-QUBO pipeline front end.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 runtime failure.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvrpq_core::bench::{self, BenchConfig, SamplerChoice};
use cvrpq_core::decode::{decode, format_sol};
use cvrpq_core::instance::{
    check_tau_against_published, euclid_distance_matrix, load_instance, Instance,
};
use cvrpq_core::model::{build_model, model_stats, sec_size, ConstraintKind, SecFormulation};
use cvrpq_core::qubo::{compile, PenaltyConfig};
use cvrpq_core::remote::RemoteConfig;
use cvrpq_core::report::{
    format_results_table, format_sec_table, format_stats_table, results_csv, sec_csv, stats_csv,
    ResultsColumn, ResultsFixture, StatsRow,
};
use cvrpq_core::sampler::{sample_brute_force, sample_sa, SamplerParams};
use cvrpq_core::Error as CoreError;

use config::FileConfig;

const ENDPOINT_ENV: &str = "CVRPQ_ENDPOINT";

#[derive(Parser)]
#[command(name = "cvrpq", version, about = "CVRP -> constrained model -> QUBO solver toolkit")]
struct Cli {
    /// Defaults file with `key = value` lines; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for anything randomized; fixed seeds make runs reproducible.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse instances and print their summaries.
    Parse(ParseArgs),
    /// Model size statistics (variables, constraints, biases, tightness).
    Stats(StatsArgs),
    /// Constraint counts of the DFJ and MTZ subtour-elimination formulations.
    SecTable(SecArgs),
    /// Compile an instance into a QUBO document with a variable ledger.
    Compile(CompileArgs),
    /// Compile, sample and decode a single instance.
    Solve(SolveArgs),
    /// Repeated sampler runs with persisted logs, summaries and histograms.
    Bench(BenchArgs),
    /// Render the results table from a fixtures JSON file.
    Report(ReportArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// Instance files (.vrp).
    #[arg(long = "instance", required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    /// Truck count override when the name carries no -k suffix.
    #[arg(long)]
    trucks: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// Instance files (.vrp).
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long)]
    trucks: Option<usize>,
    /// Directory for the CSV twin of the printed table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SecArgs {
    /// Node counts to tabulate.
    #[arg(required = true)]
    n: Vec<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    trucks: Option<usize>,
    /// Penalty override `kind=value`; kinds are visit_once, depot_leave,
    /// flow_conservation, capacity, mtz, or `all`. Repeatable.
    #[arg(long = "penalty")]
    penalties: Vec<String>,
    /// Output directory for qubo.txt, ledger.json and model.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SamplerArgs {
    /// One of: sa, brute, remote.
    #[arg(long)]
    sampler: Option<String>,
    /// Restarts per sampler invocation.
    #[arg(long)]
    reads: Option<usize>,
    /// Sweeps per read.
    #[arg(long)]
    sweeps: Option<usize>,
    /// Starting temperature; defaults to the largest |coefficient|.
    #[arg(long)]
    t_initial: Option<f64>,
    /// Geometric cooling ratio in (0, 1).
    #[arg(long)]
    ratio: Option<f64>,
    /// Remote service URL; also read from the CVRPQ_ENDPOINT env var.
    #[arg(long)]
    endpoint: Option<String>,
    /// Remote time limit per call, in milliseconds.
    #[arg(long)]
    time_limit_ms: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    trucks: Option<usize>,
    #[arg(long = "penalty")]
    penalties: Vec<String>,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Directory for the .sol file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    trucks: Option<usize>,
    #[arg(long = "penalty")]
    penalties: Vec<String>,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Repetitions of the sample-and-score protocol.
    #[arg(long)]
    runs: Option<usize>,
    /// Reference cost when the instance is not in the bundled table.
    #[arg(long)]
    best_known: Option<i64>,
    /// Histogram bins for the error density CSV.
    #[arg(long)]
    bins: Option<usize>,
    /// Persist local wall-clock times (artifacts stop being byte-stable).
    #[arg(long)]
    wall_clock: bool,
    /// Artifact directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Results fixture (JSON with a `columns` array).
    #[arg(long)]
    fixtures: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Core(CoreError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                CoreError::Io(_) | CoreError::Remote(_) => 3,
                _ => 2,
            },
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let file_config = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(cfg) => cfg,
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(1);
            }
        },
        None => FileConfig::empty(),
    };

    match run(cli, &file_config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Core(err) => eprintln!("error: {err}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli, cfg: &FileConfig) -> Result<(), CliError> {
    let seed = cfg
        .merge(cli.seed, "seed")
        .map_err(CliError::usage)?
        .unwrap_or(42);
    match cli.command {
        Command::Parse(args) => cmd_parse(args, cfg),
        Command::Stats(args) => cmd_stats(args, cfg),
        Command::SecTable(args) => cmd_sec_table(args),
        Command::Compile(args) => cmd_compile(args, cfg),
        Command::Solve(args) => cmd_solve(args, cfg, seed),
        Command::Bench(args) => cmd_bench(args, cfg, seed),
        Command::Report(args) => cmd_report(args),
    }
}

fn load_with_trucks(
    path: &Path,
    trucks: Option<usize>,
    cfg: &FileConfig,
) -> Result<Instance, CliError> {
    let trucks = cfg.merge(trucks, "trucks").map_err(CliError::usage)?;
    Ok(load_instance(path, trucks)?)
}

fn parse_penalty_flags(
    flags: &[String],
    cfg: &FileConfig,
    instance: &Instance,
) -> Result<PenaltyConfig, CliError> {
    let distances = euclid_distance_matrix(instance);
    let mut config = PenaltyConfig::default_for(distances.max_cost(), instance.n_customers);
    let mut entries: Vec<(String, String)> = cfg.penalty_entries();
    for flag in flags {
        let (kind, value) = flag
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--penalty wants kind=value, got `{flag}`")))?;
        entries.push((kind.trim().to_string(), value.trim().to_string()));
    }
    for (kind, value) in entries {
        let p: f64 = value
            .parse()
            .map_err(|_| CliError::usage(format!("penalty `{kind}` has bad value `{value}`")))?;
        if p <= 0.0 {
            return Err(CliError::usage(format!("penalty `{kind}` must be positive")));
        }
        if kind == "all" {
            config = PenaltyConfig::uniform(p);
        } else {
            let kind: ConstraintKind = kind.parse().map_err(CliError::Core)?;
            config = config.with(kind, p);
        }
    }
    Ok(config)
}

fn build_sampler(
    args: &SamplerArgs,
    cfg: &FileConfig,
    seed: u64,
) -> Result<SamplerChoice, CliError> {
    let name = cfg
        .merge(args.sampler.clone(), "sampler")
        .map_err(CliError::usage)?
        .unwrap_or_else(|| "sa".to_string());
    let reads = cfg.merge(args.reads, "reads").map_err(CliError::usage)?;
    match name.as_str() {
        "sa" => {
            let defaults = SamplerParams::default();
            Ok(SamplerChoice::Sa(SamplerParams {
                num_reads: reads.unwrap_or(defaults.num_reads),
                sweeps: cfg
                    .merge(args.sweeps, "sweeps")
                    .map_err(CliError::usage)?
                    .unwrap_or(defaults.sweeps),
                t_initial: cfg.merge(args.t_initial, "t_initial").map_err(CliError::usage)?,
                ratio: cfg
                    .merge(args.ratio, "ratio")
                    .map_err(CliError::usage)?
                    .unwrap_or(defaults.ratio),
                seed,
                ..defaults
            }))
        }
        "brute" => Ok(SamplerChoice::BruteForce),
        "remote" => {
            let endpoint = cfg
                .merge(args.endpoint.clone(), "endpoint")
                .map_err(CliError::usage)?
                .or_else(|| std::env::var(ENDPOINT_ENV).ok())
                .ok_or_else(|| {
                    CliError::usage(format!("remote sampler needs --endpoint or ${ENDPOINT_ENV}"))
                })?;
            let mut remote = RemoteConfig::new(endpoint);
            if let Some(r) = reads {
                remote.num_reads = r;
            }
            if let Some(t) = cfg
                .merge(args.time_limit_ms, "time_limit_ms")
                .map_err(CliError::usage)?
            {
                remote.time_limit_ms = t;
            }
            Ok(SamplerChoice::Remote(remote))
        }
        other => Err(CliError::usage(format!(
            "unknown sampler `{other}` (expected sa, brute or remote)"
        ))),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(CoreError::Io)?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(CoreError::Io)?;
    Ok(path)
}

fn cmd_parse(args: ParseArgs, cfg: &FileConfig) -> Result<(), CliError> {
    for path in &args.instances {
        let inst = load_with_trucks(path, args.trucks, cfg)?;
        let tau = check_tau_against_published(&inst);
        println!("name: {}", inst.name);
        println!("customers: {}", inst.n_customers);
        println!("capacity: {}", inst.capacity);
        println!("trucks: {}", inst.fleet_size);
        println!("total demand: {}", inst.total_demand());
        println!("tightness: {tau:.3}");
        match inst.best_known {
            Some(b) => println!("best known: {b}"),
            None => println!("best known: -"),
        }
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for path in &args.instances {
        match load_with_trucks(path, args.trucks, cfg) {
            Ok(inst) => {
                let distances = euclid_distance_matrix(&inst);
                let (model, map) = build_model(&inst, &distances)?;
                let tau = check_tau_against_published(&inst);
                rows.push(StatsRow::new(&inst.name, &model_stats(&model, &map, tau)));
            }
            Err(CliError::Core(e)) => {
                eprintln!("{}: {e}", path.display());
                failures += 1;
            }
            Err(other) => return Err(other),
        }
    }
    print!("{}", format_stats_table(&rows));
    if let Some(dir) = &args.out {
        let path = write_file(dir, "stats.csv", &stats_csv(&rows))?;
        eprintln!("wrote {}", path.display());
    }
    if failures > 0 {
        return Err(CliError::Core(CoreError::Validation(format!(
            "{failures} instance(s) failed to parse"
        ))));
    }
    Ok(())
}

fn cmd_sec_table(args: SecArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &n in &args.n {
        let dfj = sec_size(SecFormulation::Dfj, n)?;
        let mtz = sec_size(SecFormulation::Mtz, n)?;
        rows.push((n, dfj, mtz));
    }
    print!("{}", format_sec_table(&rows));
    if let Some(dir) = &args.out {
        let path = write_file(dir, "sec_table.csv", &sec_csv(&rows))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_compile(args: CompileArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let inst = load_with_trucks(&args.instance, args.trucks, cfg)?;
    let distances = euclid_distance_matrix(&inst);
    let (model, map) = build_model(&inst, &distances)?;
    let penalties = parse_penalty_flags(&args.penalties, cfg, &inst)?;
    let qubo = compile(&model, &penalties)?;

    write_file(&args.out, "qubo.txt", &qubo.export_text())?;
    let ledger =
        serde_json::to_string_pretty(&qubo.ledger_json(Some(&map))).map_err(CoreError::Json)?;
    write_file(&args.out, "ledger.json", &ledger)?;
    let model_doc = serde_json::json!({
        "instance": inst.name,
        "var_map": map,
        "objective": model.objective,
        "constraints": model.constraints,
        "integer_bounds": model.integer_bounds,
    });
    let model_text = serde_json::to_string(&model_doc).map_err(CoreError::Json)?;
    write_file(&args.out, "model.json", &model_text)?;

    println!(
        "{}: {} bits, {} quadratic terms, offset {}",
        inst.name,
        qubo.dim,
        qubo.quadratic().len(),
        qubo.offset
    );
    println!("wrote {}", args.out.join("qubo.txt").display());
    Ok(())
}

fn cmd_solve(args: SolveArgs, cfg: &FileConfig, seed: u64) -> Result<(), CliError> {
    let inst = load_with_trucks(&args.instance, args.trucks, cfg)?;
    let distances = euclid_distance_matrix(&inst);
    let (model, map) = build_model(&inst, &distances)?;
    let penalties = parse_penalty_flags(&args.penalties, cfg, &inst)?;
    let qubo = compile(&model, &penalties)?;
    let sampler = build_sampler(&args.sampler, cfg, seed)?;

    let set = match &sampler {
        SamplerChoice::Sa(params) => sample_sa(&qubo, params)?,
        SamplerChoice::BruteForce => sample_brute_force(&qubo)?,
        SamplerChoice::Remote(remote) => cvrpq_core::remote::sample_remote(&qubo, remote)?,
    };

    // Best feasible sample by decoded cost.
    let mut best: Option<(i64, cvrpq_core::decode::RouteSet)> = None;
    for sample in &set.samples {
        if let Ok(routes) = decode(&sample.bits, &map, &inst, &distances) {
            if best.as_ref().map_or(true, |(c, _)| routes.total_cost < *c) {
                best = Some((routes.total_cost, routes));
            }
        }
    }

    match best {
        Some((cost, routes)) => {
            println!("feasible solution with cost {cost}");
            if let Some(b) = inst.best_known {
                println!(
                    "best known {b}, absolute error {:.4}",
                    bench::absolute_error(cost, b)?
                );
            }
            print!("{}", format_sol(&routes));
            if let Some(dir) = &args.out {
                let path = write_file(dir, &format!("{}.sol", inst.name), &format_sol(&routes))?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        None => {
            let best_sample = set.samples.first().expect("samplers return samples");
            let breakdown = qubo.penalty_breakdown(&best_sample.bits)?;
            eprintln!(
                "no feasible sample in {} reads; lowest energy {} (objective {}, penalties {})",
                set.samples.len(),
                best_sample.energy,
                breakdown.objective,
                breakdown.total_penalty()
            );
            for (kind, p) in &breakdown.penalties {
                if *p > 0.0 {
                    eprintln!("  {}: {p}", kind.name());
                }
            }
            Err(CliError::Core(CoreError::Domain(
                "sampler produced no feasible solution".into(),
            )))
        }
    }
}

fn cmd_bench(args: BenchArgs, cfg: &FileConfig, seed: u64) -> Result<(), CliError> {
    let inst = load_with_trucks(&args.instance, args.trucks, cfg)?;
    let sampler = build_sampler(&args.sampler, cfg, seed)?;
    let penalties = parse_penalty_flags(&args.penalties, cfg, &inst)?;
    let runs = cfg
        .merge(args.runs, "runs")
        .map_err(CliError::usage)?
        .unwrap_or(100);
    let out = cfg
        .merge(args.out.clone(), "out")
        .map_err(CliError::usage)?
        .unwrap_or_else(|| PathBuf::from("out"));

    let config = BenchConfig {
        penalties: Some(penalties),
        best_known: cfg.merge(args.best_known, "best_known").map_err(CliError::usage)?,
        bins: cfg
            .merge(args.bins, "bins")
            .map_err(CliError::usage)?
            .unwrap_or(10),
        record_wall_time: args.wall_clock,
        ..BenchConfig::new(sampler, runs, seed)
    };

    let report = bench::run_benchmark(&inst, &config)?;

    std::fs::create_dir_all(&out).map_err(CoreError::Io)?;
    bench::write_runlog(&report, &out.join("runlog.jsonl"))?;
    bench::write_summary_csv(&report, &out.join("summary.csv"))?;
    bench::write_histogram_csv(&report, &out.join("histogram.csv"))?;
    let columns = vec![ResultsColumn::from_report(&report)];
    write_file(&out, "results.csv", &results_csv(&columns))?;

    print!("{}", format_results_table(&columns));
    println!(
        "feasible {}/{} runs; artifacts in {}",
        report.records.iter().filter(|r| r.feasible).count(),
        report.runs,
        out.display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.fixtures).map_err(CoreError::Io)?;
    let fixture = ResultsFixture::from_json(&text)?;
    print!("{}", format_results_table(&fixture.columns));
    if let Some(dir) = &args.out {
        let path = write_file(dir, "results.csv", &results_csv(&fixture.columns))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
