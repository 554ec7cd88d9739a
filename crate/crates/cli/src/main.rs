//! `gridspin` command-line interface.
//!
//! Subcommands: `gen` (synthetic datasets), `solve` (one QUBO or
//! scheduling instance), `bench` (full benchmark suite), `carbon`
//! (emission attribution), `report` (digest of a saved benchmark
//! report).
//!
//! Contract:
//! - exit 0 on success, 2 on usage/input errors, 1 on internal errors;
//! - stdout carries machine-readable payloads only (JSON by default,
//!   line/CSV-oriented with `--format text`); diagnostics go to stderr;
//! - every random draw derives from `--seed`, and nothing reads the
//!   clock, so identical invocations produce identical bytes.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use gridspin::baselines::{brute_force, solve_sa, SaConfig};
use gridspin::bench::{export, run_benchmark, SuiteConfig};
use gridspin::carbon::{
    aggregate, attribute, read_series_csv, write_series_csv, Bucket, CarbonIntensitySeries,
    EnergySeries,
};
use gridspin::instance_gen::{
    gen_carbon_intensity, gen_consumption_panel, gen_demand, gen_node_panel,
    gen_scheduling_instance, GenParams,
};
use gridspin::qubo::{energy, read_qubo_json, QuboMatrix};
use gridspin::sb::{solve_sb, SbConfig};
use gridspin::scheduler::{
    build_qubo, calibrate_penalties, solve_greedy_schedule, PenaltyWeights, ScheduleMetrics,
    SchedulingInstance,
};
use gridspin::{SolveResult, TracePoint};

#[derive(Parser)]
#[command(
    name = "gridspin",
    version,
    about = "Quantum-inspired scheduling benchmarks: generate, solve, benchmark, attribute carbon"
)]
struct Cli {
    /// Master random seed; every stochastic component derives from it.
    #[arg(long, global = true, default_value_t = gridspin::DEFAULT_SEED)]
    seed: u64,

    /// Directory that receives generated files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Shape of the stdout payload.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    /// One pretty-printed JSON document.
    Json,
    /// Line-oriented `key=value` / CSV output.
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset: scheduling instance, demand and
    /// carbon-intensity series, consumption and node panels.
    Gen(GenArgs),
    /// Solve one QUBO or scheduling-instance JSON file.
    Solve(SolveArgs),
    /// Run a benchmark suite and export the report plus solver traces.
    Bench(BenchArgs),
    /// Attribute emissions to a metered energy series and aggregate them.
    Carbon(CarbonArgs),
    /// Summarize a report.json written by `bench`.
    Report(ReportArgs),
}

/// How a failed run should exit: 2 for problems in what the user gave
/// us, 1 for everything that goes wrong after the inputs checked out.
enum Failure {
    Usage(String),
    Internal(String),
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn internal<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Internal(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(cli, args),
        Command::Solve(args) => cmd_solve(cli, args),
        Command::Bench(args) => cmd_bench(cli, args),
        Command::Carbon(args) => cmd_carbon(cli, args),
        Command::Report(args) => cmd_report(cli, args),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    println!("{text}");
    Ok(())
}

/// Write one `interval,value` CSV file and hand back its path.
fn write_csv_file(path: &Path, values: &[f64]) -> Result<PathBuf, Failure> {
    let file = File::create(path).map_err(internal)?;
    let mut w = BufWriter::new(file);
    write_series_csv(&mut w, values).map_err(internal)?;
    w.flush().map_err(internal)?;
    Ok(path.to_path_buf())
}

// ---------------------------------------------------------------- gen

#[derive(Args)]
struct GenArgs {
    /// Days covered by the demand/consumption panels.
    #[arg(long)]
    days: Option<usize>,
    /// Pipeline nodes in the synthetic network panel.
    #[arg(long)]
    nodes: Option<usize>,
    /// Metered customers in the consumption panel.
    #[arg(long)]
    customers: Option<usize>,
    /// Metering intervals per day (96 = 15-minute).
    #[arg(long)]
    intervals_per_day: Option<usize>,
    /// Compressor units in the scheduling instance.
    #[arg(long)]
    compressors: Option<usize>,
    /// Curtailable loads in the scheduling instance.
    #[arg(long)]
    dr_loads: Option<usize>,
    /// Scheduling horizon in hourly intervals.
    #[arg(long)]
    horizon: Option<usize>,
    /// Lower carbon-intensity bound, gCO2/kWh.
    #[arg(long)]
    carbon_min: Option<f64>,
    /// Upper carbon-intensity bound, gCO2/kWh.
    #[arg(long)]
    carbon_max: Option<f64>,
    /// Gaussian noise on demand/consumption shapes, kWh.
    #[arg(long)]
    demand_noise_std: Option<f64>,
    /// Gaussian noise on the carbon sinusoid, gCO2/kWh.
    #[arg(long)]
    carbon_noise_std: Option<f64>,
}

impl GenArgs {
    fn to_params(&self, seed: u64) -> GenParams {
        let mut p = GenParams { seed, ..GenParams::default() };
        if let Some(v) = self.days {
            p.days = v;
        }
        if let Some(v) = self.nodes {
            p.nodes = v;
        }
        if let Some(v) = self.customers {
            p.customers = v;
        }
        if let Some(v) = self.intervals_per_day {
            p.intervals_per_day = v;
        }
        if let Some(v) = self.compressors {
            p.compressors = v;
        }
        if let Some(v) = self.dr_loads {
            p.dr_loads = v;
        }
        if let Some(v) = self.horizon {
            p.horizon = v;
        }
        if let Some(v) = self.carbon_min {
            p.carbon_min = v;
        }
        if let Some(v) = self.carbon_max {
            p.carbon_max = v;
        }
        if let Some(v) = self.demand_noise_std {
            p.demand_noise_std = v;
        }
        if let Some(v) = self.carbon_noise_std {
            p.carbon_noise_std = v;
        }
        p
    }
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<(), Failure> {
    let params = args.to_params(cli.seed);
    params.validate().map_err(usage)?;
    fs::create_dir_all(&cli.out_dir).map_err(usage)?;

    let mut written: Vec<PathBuf> = Vec::new();

    let instance = gen_scheduling_instance(&params).map_err(usage)?;
    let instance_path = cli.out_dir.join("instance.json");
    let mut text = instance.to_json().map_err(internal)?;
    text.push('\n');
    fs::write(&instance_path, text).map_err(internal)?;
    written.push(instance_path);

    let demand = gen_demand(&params).map_err(usage)?;
    written.push(write_csv_file(&cli.out_dir.join("demand.csv"), &demand)?);

    let carbon = gen_carbon_intensity(&params).map_err(usage)?;
    written.push(write_csv_file(
        &cli.out_dir.join("carbon_intensity.csv"),
        &carbon.values,
    )?);

    let customers = gen_consumption_panel(&params).map_err(usage)?;
    let customer_dir = cli.out_dir.join("customers");
    fs::create_dir_all(&customer_dir).map_err(internal)?;
    for (i, series) in customers.iter().enumerate() {
        let path = customer_dir.join(format!("customer_{i:03}.csv"));
        written.push(write_csv_file(&path, &series.values)?);
    }

    let nodes = gen_node_panel(&params).map_err(usage)?;
    let node_dir = cli.out_dir.join("nodes");
    fs::create_dir_all(&node_dir).map_err(internal)?;
    for (i, series) in nodes.iter().enumerate() {
        let path = node_dir.join(format!("node_{i:03}.csv"));
        written.push(write_csv_file(&path, series)?);
    }

    match cli.format {
        Format::Json => print_json(&json!({ "seed": params.seed, "files": written })),
        Format::Text => {
            for p in &written {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

// -------------------------------------------------------------- solve

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Solver {
    /// Simulated bifurcation.
    Sb,
    /// Simulated annealing.
    Sa,
    /// Constructive greedy dispatch (instances only).
    Greedy,
    /// Exhaustive enumeration (n <= 24).
    Brute,
}

impl Solver {
    fn name(self) -> &'static str {
        match self {
            Solver::Sb => "sb",
            Solver::Sa => "sa",
            Solver::Greedy => "greedy",
            Solver::Brute => "brute",
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Input file: QUBO JSON (keys "n"/"entries") or scheduling-instance JSON.
    #[arg(long)]
    input: PathBuf,

    /// Which solver to run.
    #[arg(long, value_enum, default_value_t = Solver::Sb)]
    solver: Solver,

    /// Independent restarts for sb/sa.
    #[arg(long)]
    restarts: Option<usize>,

    /// sb: outer iterations (evaluation budget per restart).
    #[arg(long)]
    i_max: Option<usize>,
    /// sb: integration micro-steps between readouts.
    #[arg(long)]
    steps_per_iter: Option<usize>,
    /// sb: integration time step.
    #[arg(long)]
    dt: Option<f64>,
    /// sb: coupling strength in front of the Ising force.
    #[arg(long)]
    coupling: Option<f64>,
    /// sb: initial positions are uniform in [-scale, scale].
    #[arg(long)]
    x_init_scale: Option<f64>,

    /// sa: number of full sweeps per restart.
    #[arg(long)]
    sweeps: Option<usize>,
    /// sa: geometric cooling factor per sweep, in (0, 1).
    #[arg(long)]
    cooling_ratio: Option<f64>,
    /// sa: starting temperature (default 2 * max|Q|).
    #[arg(long)]
    initial_temperature: Option<f64>,

    /// Carbon price in the objective, cost units per gCO2 (instances only).
    #[arg(long, default_value_t = 1e-3)]
    w_carbon: f64,
    /// Override the calibrated pressure-balance penalty weight.
    #[arg(long)]
    w_pressure: Option<f64>,
    /// Override the calibrated comfort penalty weight.
    #[arg(long)]
    w_comfort: Option<f64>,

    /// Convergence-trace CSV path (default <out-dir>/trace.csv).
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

/// A solve input is either a bare QUBO or a scheduling instance that
/// still needs encoding.
enum SolveInput {
    Qubo(QuboMatrix),
    Instance(Box<SchedulingInstance>),
}

fn load_solve_input(path: &Path) -> Result<SolveInput, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{} is not valid JSON: {e}", path.display())))?;
    let obj = value
        .as_object()
        .ok_or_else(|| usage(format!("{}: expected a JSON object", path.display())))?;
    if obj.contains_key("n") && obj.contains_key("entries") {
        let q = read_qubo_json(text.as_bytes()).map_err(usage)?;
        Ok(SolveInput::Qubo(q))
    } else if obj.contains_key("horizon") {
        let inst = SchedulingInstance::from_json(&text).map_err(usage)?;
        Ok(SolveInput::Instance(Box::new(inst)))
    } else {
        Err(usage(format!(
            "{}: neither a QUBO (keys \"n\"/\"entries\") nor a scheduling instance (key \"horizon\")",
            path.display()
        )))
    }
}

/// Everything `solve` reports beyond the raw solver result.
#[derive(Serialize)]
struct SolveOutput<'a> {
    solver: &'static str,
    n_bits: usize,
    seed: u64,
    evals: u64,
    /// Raw QUBO energy of the best point.
    best_energy: f64,
    /// Full objective `best_energy + offset` (instances only).
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    /// Penalty weights the QUBO was built with (instances only).
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<PenaltyWeights>,
    /// Physical readout of the decoded schedule (instances only).
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<ScheduleMetrics>,
    bits: &'a [u8],
    trace_path: PathBuf,
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> Result<(), Failure> {
    struct InstanceCtx {
        instance: Box<SchedulingInstance>,
        offset: f64,
        weights: PenaltyWeights,
    }

    let (matrix, ctx) = match load_solve_input(&args.input)? {
        SolveInput::Qubo(q) => (q, None),
        SolveInput::Instance(instance) => {
            let mut weights = calibrate_penalties(&instance, args.w_carbon).map_err(usage)?;
            if let Some(w) = args.w_pressure {
                weights.w_pressure = w;
            }
            if let Some(w) = args.w_comfort {
                weights.w_comfort = w;
            }
            let sq = build_qubo(&instance, &weights).map_err(usage)?;
            (sq.matrix, Some(InstanceCtx { instance, offset: sq.offset, weights }))
        }
    };

    let result: SolveResult = match args.solver {
        Solver::Sb => {
            let mut cfg = SbConfig { seed: cli.seed, ..SbConfig::default() };
            if let Some(v) = args.restarts {
                cfg.restarts = v;
            }
            if let Some(v) = args.i_max {
                cfg.i_max = v;
            }
            if let Some(v) = args.steps_per_iter {
                cfg.steps_per_iter = v;
            }
            if let Some(v) = args.dt {
                cfg.dt = v;
            }
            if let Some(v) = args.coupling {
                cfg.coupling = v;
            }
            if let Some(v) = args.x_init_scale {
                cfg.x_init_scale = v;
            }
            solve_sb(&matrix, &cfg).map_err(internal)?
        }
        Solver::Sa => {
            let mut cfg = SaConfig { seed: cli.seed, ..SaConfig::default() };
            if let Some(v) = args.restarts {
                cfg.restarts = v;
            }
            if let Some(v) = args.sweeps {
                cfg.sweeps = v;
            }
            if let Some(v) = args.cooling_ratio {
                cfg.cooling_ratio = v;
            }
            if args.initial_temperature.is_some() {
                cfg.initial_temperature = args.initial_temperature;
            }
            solve_sa(&matrix, &cfg).map_err(internal)?
        }
        Solver::Brute => {
            // Size and finiteness problems are input problems: exit 2.
            let (bits, e) = brute_force(&matrix).map_err(usage)?;
            let evals = 1u64 << matrix.n();
            SolveResult {
                best_bits: bits,
                best_energy: e,
                trace: vec![TracePoint { evals, best_energy: e }],
                evals,
                seed: cli.seed,
            }
        }
        Solver::Greedy => {
            let ctx = ctx
                .as_ref()
                .ok_or_else(|| usage("--solver greedy needs a scheduling-instance input"))?;
            let decision = solve_greedy_schedule(&ctx.instance).map_err(internal)?;
            let bits = ctx.instance.encode(&decision).map_err(internal)?;
            let e = energy(&matrix, &bits).map_err(internal)?;
            SolveResult {
                best_bits: bits,
                best_energy: e,
                trace: vec![TracePoint { evals: 1, best_energy: e }],
                evals: 1,
                seed: cli.seed,
            }
        }
    };

    let trace_path = match &args.trace_out {
        Some(p) => p.clone(),
        None => {
            fs::create_dir_all(&cli.out_dir).map_err(usage)?;
            cli.out_dir.join("trace.csv")
        }
    };
    if let Some(parent) = trace_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(usage)?;
        }
    }
    let mut w = BufWriter::new(File::create(&trace_path).map_err(usage)?);
    result.write_trace_csv(&mut w).map_err(internal)?;
    w.flush().map_err(internal)?;

    let (objective, weights, metrics) = match &ctx {
        Some(c) => {
            let decision = c.instance.decode(&result.best_bits).map_err(internal)?;
            let m = c.instance.evaluate(&decision).map_err(internal)?;
            (Some(result.best_energy + c.offset), Some(c.weights), Some(m))
        }
        None => (None, None, None),
    };

    let out = SolveOutput {
        solver: args.solver.name(),
        n_bits: result.best_bits.len(),
        seed: result.seed,
        evals: result.evals,
        best_energy: result.best_energy,
        objective,
        weights,
        metrics,
        bits: result.best_bits.bits(),
        trace_path,
    };

    match cli.format {
        Format::Json => print_json(&out),
        Format::Text => {
            println!("solver={}", out.solver);
            println!("n_bits={}", out.n_bits);
            println!("seed={}", out.seed);
            println!("evals={}", out.evals);
            println!("best_energy={}", out.best_energy);
            if let Some(v) = out.objective {
                println!("objective={v}");
            }
            if let Some(w) = &out.weights {
                println!("w_carbon={}", w.w_carbon);
                println!("w_pressure={}", w.w_pressure);
                println!("w_comfort={}", w.w_comfort);
            }
            if let Some(m) = &out.metrics {
                println!("energy_cost={}", m.energy_cost);
                println!("carbon_g={}", m.carbon_g);
                println!("pressure_deviation={}", m.pressure_deviation);
                println!("comfort_deviation={}", m.comfort_deviation);
                println!("violations={}", m.violations);
            }
            let bits: String = out.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
            println!("bits={bits}");
            println!("trace_path={}", out.trace_path.display());
            Ok(())
        }
    }
}

// -------------------------------------------------------------- bench

#[derive(Args)]
struct BenchArgs {
    /// Suite configuration JSON (generator params + solver configs).
    #[arg(long)]
    suite: PathBuf,
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.suite)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.suite.display())))?;
    let cfg: SuiteConfig = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: {e}", args.suite.display())))?;
    for params in &cfg.instances {
        params.validate().map_err(usage)?;
    }
    let report = run_benchmark(&cfg).map_err(internal)?;
    fs::create_dir_all(&cli.out_dir).map_err(usage)?;
    let files = export(&report, &cli.out_dir).map_err(internal)?;

    match cli.format {
        Format::Json => print_json(&json!({ "files": files, "summary": report.summary })),
        Format::Text => {
            for f in &files {
                println!("{}", f.display());
            }
            let summary = serde_json::to_value(&report.summary).map_err(internal)?;
            if let Some(map) = summary.as_object() {
                for (k, v) in map {
                    println!("{k}={v}");
                }
            }
            Ok(())
        }
    }
}

// ------------------------------------------------------------- carbon

#[derive(Args)]
struct CarbonArgs {
    /// Metered energy CSV (header `interval,value`), kWh per interval.
    #[arg(long)]
    energy: PathBuf,
    /// Grid intensity CSV (header `interval,value`), gCO2 per kWh.
    #[arg(long)]
    intensity: PathBuf,
    /// Aggregation granularity: daily, monthly or total.
    #[arg(long, default_value = "total")]
    bucket: Bucket,
    /// Interval width in hours (0.25 = 15-minute metering).
    #[arg(long, default_value_t = 1.0)]
    interval_hours: f64,
    /// Index of the first interval relative to midnight of day 0.
    #[arg(long, default_value_t = 0)]
    start: i64,
    /// Per-interval emission CSV path (default <out-dir>/emissions.csv).
    #[arg(long)]
    emissions_out: Option<PathBuf>,
}

fn read_csv_path(path: &Path) -> Result<Vec<f64>, Failure> {
    let file =
        File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    read_series_csv(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_carbon(cli: &Cli, args: &CarbonArgs) -> Result<(), Failure> {
    let energy_values = read_csv_path(&args.energy)?;
    if energy_values.is_empty() {
        return Err(usage(format!("{}: energy series has no rows", args.energy.display())));
    }
    let intensity_values = read_csv_path(&args.intensity)?;
    let energy = EnergySeries::new(energy_values, args.interval_hours, args.start).map_err(usage)?;
    let intensity = CarbonIntensitySeries::new(intensity_values, args.interval_hours, args.start)
        .map_err(usage)?;
    let emissions = attribute(&energy, &intensity).map_err(usage)?;
    let buckets = aggregate(&emissions, args.bucket);
    let total: f64 = emissions.values.iter().sum();

    let emissions_path = match &args.emissions_out {
        Some(p) => p.clone(),
        None => {
            fs::create_dir_all(&cli.out_dir).map_err(usage)?;
            cli.out_dir.join("emissions.csv")
        }
    };
    if let Some(parent) = emissions_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(usage)?;
        }
    }
    write_csv_file(&emissions_path, &emissions.values)?;

    match cli.format {
        Format::Json => print_json(&json!({
            "total_gco2": total,
            "bucket": args.bucket.to_string(),
            "buckets": buckets
                .iter()
                .map(|(label, v)| json!({ "label": label, "gco2": v }))
                .collect::<Vec<_>>(),
            "emissions_path": emissions_path,
        })),
        Format::Text => {
            for (label, v) in &buckets {
                println!("{label},{v}");
            }
            if args.bucket != Bucket::Total {
                println!("total,{total}");
            }
            Ok(())
        }
    }
}

// ------------------------------------------------------------- report

#[derive(Args)]
struct ReportArgs {
    /// report.json written by `bench`.
    #[arg(long)]
    input: PathBuf,
}

fn cmd_report(cli: &Cli, args: &ReportArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.input.display())))?;
    let report: gridspin::bench::BenchReport = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: {e}", args.input.display())))?;

    match cli.format {
        Format::Json => print_json(&json!({
            "n_instances": report.instances.len(),
            "summary": report.summary,
            "instances": report.instances,
        })),
        Format::Text => {
            println!("seed,n_bits,best_known,solver,best_energy,evals,evals_to_within,carbon_g,violations");
            for inst in &report.instances {
                for s in &inst.solvers {
                    let within = s
                        .evals_to_within
                        .map_or_else(|| "-".to_string(), |v| v.to_string());
                    println!(
                        "{},{},{},{},{},{},{},{},{}",
                        inst.seed,
                        inst.n_bits,
                        inst.best_known,
                        s.name,
                        s.best_energy,
                        s.evals,
                        within,
                        s.carbon_g,
                        s.violations
                    );
                }
            }
            println!();
            let summary = serde_json::to_value(&report.summary).map_err(internal)?;
            if let Some(map) = summary.as_object() {
                for (k, v) in map {
                    println!("{k}={v}");
                }
            }
            Ok(())
        }
    }
}
