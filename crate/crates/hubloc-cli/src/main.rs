//! Command line front end: validate instances, run the three solve modes,
//! print the alpha comparison grid, and compare re-configuration policies.
//!
//! Exit codes: 0 solved to optimality, 1 input or usage error, 2 model
//! infeasible. Output files are byte-identical across identical runs when
//! `--no-timestamp` is given.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use hubloc::analysis::{self, AnalysisOptions, ReconfigCostBasis};
use hubloc::io;
use hubloc::search::{self, SearchConfig};
use hubloc::{Instance, Solution, SolveStatus};

#[derive(Parser)]
#[command(
    name = "hubloc",
    version,
    about = "Exact solver for capacitated hub location with multiple allocation\n\
             under demand and setup cost scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and report any violations
    Validate { instance: PathBuf },
    /// Solve one model and print the chosen hubs
    Solve(SolveArgs),
    /// Hub choices of every model across a list of alpha values
    Table3(Table3Args),
    /// Seasonal re-configuration vs. the fixed minimax network across phi
    Breakeven(BreakevenArgs),
    /// Print the instance and solution document formats
    Schema,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Mean demand, mean setup costs
    Deterministic,
    /// Expected flow with one setup scenario (--scenario)
    Scenario,
    /// Minimize the worst regret over all setup scenarios
    Minimax,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Deterministic)]
    mode: Mode,
    /// Setup scenario, 1-based; required with --mode scenario
    #[arg(long)]
    scenario: Option<usize>,
    /// Override the hub-to-hub cost coefficient
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the origin-to-hub cost coefficient
    #[arg(long)]
    beta: Option<f64>,
    /// Override the hub-to-destination cost coefficient
    #[arg(long)]
    delta: Option<f64>,
    /// Disable search pruning (same answer, slower)
    #[arg(long)]
    no_prune: bool,
    /// Write the solution document here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the generation timestamp from --out documents
    #[arg(long)]
    no_timestamp: bool,
    /// Accepted for interface stability; the exact search uses no randomness
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Abort the search after this many seconds
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args)]
struct Table3Args {
    instance: PathBuf,
    /// Comma-separated alpha values
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.3, 0.5, 0.7, 1.0])]
    alphas: Vec<f64>,
    /// Print raw cost values instead of rounded thousands
    #[arg(long)]
    full_precision: bool,
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    /// Each event charges phi times the incoming configuration's mean setup cost
    Installed,
    /// Each event charges phi times the summed setup of all distinct configurations
    GrandTotal,
}

#[derive(Args)]
struct BreakevenArgs {
    instance: PathBuf,
    /// Operating horizon in days
    #[arg(long, default_value_t = 360.0)]
    horizon_days: f64,
    /// Days represented by each demand scenario
    #[arg(long, default_value_t = 90.0)]
    season_days: f64,
    #[arg(long, default_value_t = 0.0)]
    phi_min: f64,
    #[arg(long, default_value_t = 0.05)]
    phi_max: f64,
    /// Number of grid points between phi-min and phi-max
    #[arg(long, default_value_t = 11)]
    phi_steps: usize,
    /// Reference cost charged per re-configuration event
    #[arg(long, value_enum, default_value_t = BasisArg::Installed)]
    basis: BasisArg,
    /// Write the grid as tab-separated text here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Validate { instance } => cmd_validate(&instance),
        Command::Solve(args) => cmd_solve(args),
        Command::Table3(args) => cmd_table3(args),
        Command::Breakeven(args) => cmd_breakeven(args),
        Command::Schema => {
            print!("{}", io::SCHEMA_DOC);
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}

fn set_thread_count(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool already configured")?;
    }
    Ok(())
}

fn load(path: &PathBuf) -> Result<Instance> {
    Ok(io::load_instance(path)?)
}

fn apply_overrides(instance: &mut Instance, alpha: Option<f64>, beta: Option<f64>, delta: Option<f64>) {
    if let Some(a) = alpha {
        instance.coefficients.alpha = a;
    }
    if let Some(b) = beta {
        instance.coefficients.beta = b;
    }
    if let Some(d) = delta {
        instance.coefficients.delta = d;
    }
}

/// Rounds to `digits` significant digits and prints the shortest decimal
/// form, falling back to scientific notation outside a readable range.
fn fmt_sig(v: f64, digits: i32) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-4..=15).contains(&exp) {
        return format!("{:.*e}", (digits - 1) as usize, v);
    }
    let scale = 10f64.powi(exp - (digits - 1));
    let rounded = (v / scale).round() * scale;
    if exp >= digits {
        format!("{rounded:.0}")
    } else {
        format!("{rounded}")
    }
}

fn hub_list(solution: &Solution) -> String {
    let indices: Vec<String> = solution.hub_set.iter_open().map(|k| (k + 1).to_string()).collect();
    if indices.is_empty() {
        "-".to_string()
    } else {
        indices.join(",")
    }
}

fn timestamp(no_timestamp: bool) -> Option<u64> {
    if no_timestamp {
        None
    } else {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
    }
}

fn cmd_validate(path: &PathBuf) -> Result<ExitCode> {
    let instance = load(path)?;
    println!(
        "ok: {} nodes, {} demand scenarios, {} setup scenarios",
        instance.node_count(),
        instance.demand_scenario_count(),
        instance.setup_scenario_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    set_thread_count(args.threads)?;
    let _ = args.seed; // reserved: exact search has no random choices
    let mut instance = load(&args.instance)?;
    apply_overrides(&mut instance, args.alpha, args.beta, args.delta);
    let config = SearchConfig {
        enable_pruning: !args.no_prune,
        time_limit: args.time_limit.map(Duration::from_secs_f64),
        ..SearchConfig::default()
    };

    let started = Instant::now();
    let mut report = None;
    let solution = match args.mode {
        Mode::Deterministic => {
            let demand = instance.expected_demand();
            let setup = instance.mean_setup_costs();
            search::solve_deterministic(&instance, &demand, &setup, &config)?
        }
        Mode::Scenario => {
            let index = args
                .scenario
                .ok_or_else(|| anyhow!("--mode scenario requires --scenario <t>"))?;
            if index == 0 {
                bail!("setup scenario index is 1-based; got 0");
            }
            search::solve_scenario(&instance, index - 1, &config)?
        }
        Mode::Minimax => {
            let r = search::solve_minimax_regret(&instance, &config)?;
            let solution = r.solution.clone();
            report = Some(r);
            solution
        }
    };
    let wall = started.elapsed();

    if solution.status == SolveStatus::Infeasible {
        println!("status: infeasible");
        println!("wall: {:.3} s", wall.as_secs_f64());
        if let Some(out) = &args.out {
            io::write_solution(out, &solution, timestamp(args.no_timestamp))?;
        }
        return Ok(ExitCode::from(2));
    }

    println!("hubs: {}", hub_list(&solution));
    match &report {
        Some(r) => {
            println!("max regret: {}", fmt_sig(r.max_regret, 6));
            let regrets: Vec<String> = r.entries.iter().map(|e| fmt_sig(e.regret, 6)).collect();
            println!("per-scenario regret: {}", regrets.join(", "));
        }
        None => {
            println!("objective: {}", fmt_sig(solution.objective, 6));
            println!(
                "flow: {}  setup: {}",
                fmt_sig(solution.flow_cost, 6),
                fmt_sig(solution.setup_cost, 6)
            );
        }
    }
    println!("wall: {:.3} s", wall.as_secs_f64());

    if let Some(out) = &args.out {
        match &report {
            Some(r) => io::write_regret_report(out, r, timestamp(args.no_timestamp))?,
            None => io::write_solution(out, &solution, timestamp(args.no_timestamp))?,
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table3(args: Table3Args) -> Result<ExitCode> {
    set_thread_count(args.threads)?;
    let base = load(&args.instance)?;
    if base.setup_scenario_count() == 0 {
        bail!("instance has no setup scenarios");
    }
    if args.alphas.is_empty() {
        bail!("--alphas needs at least one value");
    }
    let config = SearchConfig { enable_pruning: !args.no_prune, ..SearchConfig::default() };
    let scenario_count = base.setup_scenario_count();

    // Cost cells are reported in thousands of the instance's cost unit and
    // left as "-" for minimax rows, whose objective is a regret.
    let cost_cell = |objective: f64| {
        if args.full_precision {
            format!("{objective}")
        } else {
            format!("{:.0}", objective / 1000.0)
        }
    };

    let started = Instant::now();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut labels = vec!["deterministic".to_string()];
    labels.extend((1..=scenario_count).map(|t| format!("setup sc.{t}")));
    labels.push("minimax".to_string());
    for label in &labels {
        rows.push(vec![label.clone()]);
    }

    for &alpha in &args.alphas {
        let mut instance = base.clone();
        instance.coefficients.alpha = alpha;

        let demand = instance.expected_demand();
        let setup = instance.mean_setup_costs();
        let bdm = search::solve_deterministic(&instance, &demand, &setup, &config)?;
        push_cells(&mut rows[0], &bdm, cost_cell(bdm.objective));

        for t in 0..scenario_count {
            let sol = search::solve_scenario(&instance, t, &config)?;
            let cell = cost_cell(sol.objective);
            push_cells(&mut rows[t + 1], &sol, cell);
        }

        let mrm = search::solve_minimax_regret(&instance, &config)?;
        push_cells(&mut rows[scenario_count + 1], &mrm.solution, "-".to_string());
    }
    let wall = started.elapsed();

    let mut header = vec![String::new()];
    for &alpha in &args.alphas {
        header.push(format!("alpha={alpha}"));
        header.push("hubs".to_string());
    }
    let mut table = vec![header];
    table.extend(rows);
    print_table(&table);
    if !args.full_precision {
        println!("(costs in thousands of the instance cost unit)");
    }
    println!("wall: {:.3} s", wall.as_secs_f64());
    Ok(ExitCode::SUCCESS)
}

fn push_cells(row: &mut Vec<String>, solution: &Solution, cost: String) {
    if solution.status == SolveStatus::Infeasible {
        row.push("infeasible".to_string());
        row.push("-".to_string());
    } else {
        row.push(cost);
        row.push(hub_list(solution));
    }
}

fn print_table(table: &[Vec<String>]) {
    let columns = table.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| table.iter().filter_map(|row| row.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    for row in table {
        let line: Vec<String> =
            row.iter().enumerate().map(|(c, cell)| format!("{cell:<width$}", width = widths[c])).collect();
        println!("{}", line.join("  ").trim_end());
    }
}

fn cmd_breakeven(args: BreakevenArgs) -> Result<ExitCode> {
    set_thread_count(args.threads)?;
    let instance = load(&args.instance)?;
    if args.phi_steps == 0 {
        bail!("--phi-steps must be at least 1");
    }
    if args.phi_max < args.phi_min {
        bail!("--phi-max must not be below --phi-min");
    }
    let grid: Vec<f64> = if args.phi_steps == 1 {
        vec![args.phi_min]
    } else {
        let step = (args.phi_max - args.phi_min) / (args.phi_steps - 1) as f64;
        (0..args.phi_steps).map(|i| args.phi_min + step * i as f64).collect()
    };
    let options = AnalysisOptions {
        season_days: args.season_days,
        basis: match args.basis {
            BasisArg::Installed => ReconfigCostBasis::InstalledPerEvent,
            BasisArg::GrandTotal => ReconfigCostBasis::GrandTotalPerEvent,
        },
        ..AnalysisOptions::default()
    };

    let started = Instant::now();
    let report = analysis::break_even(&instance, args.horizon_days, &grid, &options)?;
    let wall = started.elapsed();

    match &args.out {
        Some(path) => io::write_breakeven_tsv(path, &report)?,
        None => {
            println!("phi\tseasonal_total\tfixed_total");
            for point in &report.grid {
                println!("{}\t{}\t{}", point.phi, point.seasonal_total, point.fixed_total);
            }
        }
    }

    for (s, sol) in report.seasonal.season_solutions.iter().enumerate() {
        println!("season {} hubs: {}", s + 1, hub_list(sol));
    }
    println!(
        "re-configuration events per horizon: {}",
        report.seasonal.reconfig_events
    );
    println!("fixed hubs: {}", hub_list(&report.fixed.solution));
    match report.break_even_phi {
        Some(phi) => println!("break-even phi: {}", fmt_sig(phi, 6)),
        None if report.seasonal.reconfig_base <= 0.0 => {
            println!("no crossing (curves parallel)")
        }
        None => println!("fixed policy is cheaper at every phi >= 0"),
    }
    println!("wall: {:.3} s", wall.as_secs_f64());
    Ok(ExitCode::SUCCESS)
}
