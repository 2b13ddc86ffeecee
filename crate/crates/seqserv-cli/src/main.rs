//! Command-line front end for the scheduling library.
//!
//! Exit codes: 0 on success, 1 when work completed but the answer is
//! negative (an infeasible schedule, a violated validation, a search that
//! ran out of time without a solution), 2 on input errors (unreadable or
//! malformed files, out-of-range values, rejected flag combinations).

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqserv::generator::benchmark_grid;
use seqserv::heuristics::HeuristicError;
use seqserv::{
    exact_solve, generate_instance, losos, lower_bound, relative_difference, rosol,
    transform_dedicated, transform_sequence_independent, validate_schedule, warm_started_solve,
    DedicationMap, ExactLimits, GeneratorConfig, HeuristicOptions, Instance, NextTaskMode,
    Schedule, StartingMode,
};
use seqserv_cli::bench::{run_bench, standard_algorithms, render_csv, render_table, worker_count};
use seqserv_cli::formats::{emit_instance, emit_schedule, parse_instance, parse_schedule};
use seqserv_cli::gantt::emit_gantt_svg;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Parser)]
#[command(
    name = "seqserv",
    version,
    about = "Schedule tasks on identical parallel machines whose sequence-dependent \
             setups are performed by a limited pool of servers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance, or the standard 30-instance benchmark grid
    Generate(GenerateArgs),
    /// Solve an instance and print or write the schedule
    Solve(SolveArgs),
    /// Check a schedule file against its instance
    Validate(ValidateArgs),
    /// Print the lower bound breakdown for an instance
    Lb(LbArgs),
    /// Run a set of algorithms over instance files and report a table
    Bench(BenchArgs),
    /// Render a schedule as an SVG Gantt chart
    Gantt(GanttArgs),
    /// Rewrite an instance into a related model
    #[command(subcommand)]
    Transform(TransformCommand),
}

#[derive(Args)]
struct GenerateArgs {
    /// Write the 30-instance benchmark grid into this directory
    #[arg(long, value_name = "DIR", conflicts_with_all = ["machines", "servers", "tasks", "out"])]
    grid: Option<PathBuf>,
    #[arg(short, long, required_unless_present = "grid")]
    machines: Option<usize>,
    #[arg(short = 'r', long, required_unless_present = "grid")]
    servers: Option<usize>,
    #[arg(short, long, required_unless_present = "grid")]
    tasks: Option<usize>,
    /// Smallest processing time
    #[arg(long, default_value_t = 1)]
    p_min: u32,
    /// Largest processing time
    #[arg(long, default_value_t = 50)]
    p_max: u32,
    /// Smallest setup length
    #[arg(long, default_value_t = 1)]
    o_min: u32,
    /// Largest setup length
    #[arg(long, default_value_t = 50)]
    o_max: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent)
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Algo {
    /// List scheduling, setups dispatched in machine order
    Losos,
    /// List scheduling, setups dispatched in server order
    Rosol,
    /// Exhaustive branch and bound (small instances)
    Exact,
    /// Heuristic warm start improved within a time budget
    Warm,
}

#[derive(Copy, Clone, ValueEnum)]
enum StartFlag {
    /// Seed machines with random distinct tasks
    Random,
    /// Seed machines with the hardest-to-reach tasks
    Informed,
}

#[derive(Copy, Clone, ValueEnum)]
enum SelectFlag {
    /// Smallest immediate setup
    Greedy,
    /// Setup coefficient balancing now against later
    Coeff,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    algo: Algo,
    /// Starting-task rule (losos/rosol)
    #[arg(long, value_enum, default_value = "random")]
    start: StartFlag,
    /// Next-task rule (losos/rosol)
    #[arg(long, value_enum, default_value = "greedy")]
    select: SelectFlag,
    /// Prefer setups a lone free server can finish in time (losos + coeff)
    #[arg(long)]
    idle: bool,
    /// Re-optimize schedule ends after construction
    #[arg(long)]
    optimize_ends: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget in seconds (default: none for exact, 10 for warm)
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    /// Raise the exact solver's task guard
    #[arg(long)]
    max_tasks: Option<usize>,
    /// Raise the exact solver's machine guard
    #[arg(long)]
    max_machines: Option<usize>,
    /// Schedule file to write (stdout when absent)
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    schedule: PathBuf,
}

#[derive(Args)]
struct LbArgs {
    instance: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files; each becomes one table row, in the order given
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the warm-started solver with this budget in seconds
    #[arg(long, value_name = "SECONDS")]
    warm: Option<f64>,
    /// Directory for report.txt, report.csv and one solution file per
    /// (instance, algorithm); the table always prints to stdout
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GanttArgs {
    instance: PathBuf,
    schedule: PathBuf,
    /// SVG file to write (stdout when absent)
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TransformCommand {
    /// Forbid cross-class transitions so each machine serves one class
    Dedicated {
        instance: PathBuf,
        /// Class of each task, comma separated, e.g. 0,1,0,2
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Model sequence-independent setups via one virtual task per machine
    Seqindep {
        instance: PathBuf,
        /// Setup length of each task, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        setups: Vec<u32>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

/// A failed run: the message goes to stderr, the kind picks the exit code.
enum Failure {
    /// Exit 1: the tools worked but the answer is negative.
    Negative(String),
    /// Exit 2: the input (file, value, flag combination) is unusable.
    Input(String),
}

impl Failure {
    fn input(err: impl std::fmt::Display) -> Failure {
        Failure::Input(err.to_string())
    }
}

fn main() {
    match run(Cli::parse()) {
        Ok(()) => {}
        Err(Failure::Negative(message)) => {
            eprintln!("seqserv: {message}");
            std::process::exit(1);
        }
        Err(Failure::Input(message)) => {
            eprintln!("seqserv: error: {message}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Validate(args) => validate(args),
        Command::Lb(args) => lb(args),
        Command::Bench(args) => bench(args),
        Command::Gantt(args) => gantt(args),
        Command::Transform(args) => transform(args),
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|err| Failure::Input(format!("{}: {err}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read_to_string(path)?)
        .map_err(|err| Failure::Input(format!("{}: {err}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|err| Failure::Input(format!("{}: {err}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn budget(seconds: f64) -> Result<Duration, Failure> {
    if seconds.is_finite() && seconds >= 0.0 {
        Ok(Duration::from_secs_f64(seconds))
    } else {
        Err(Failure::Input(format!(
            "time limit must be a non-negative number of seconds, got {seconds}"
        )))
    }
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    if let Some(dir) = args.grid {
        std::fs::create_dir_all(&dir)
            .map_err(|err| Failure::Input(format!("{}: {err}", dir.display())))?;
        for (index, config) in benchmark_grid(args.seed).iter().enumerate() {
            let instance = generate_instance(config).map_err(Failure::input)?;
            let name = format!(
                "{index:02}_m{}_t{}_r{}.inst",
                config.machines, config.tasks, config.servers
            );
            let path = dir.join(name);
            std::fs::write(&path, emit_instance(&instance))
                .map_err(|err| Failure::Input(format!("{}: {err}", path.display())))?;
            println!("{}", path.display());
        }
        return Ok(());
    }

    let config = GeneratorConfig {
        machines: args.machines.expect("clap enforces the flag"),
        servers: args.servers.expect("clap enforces the flag"),
        tasks: args.tasks.expect("clap enforces the flag"),
        p_range: (args.p_min, args.p_max),
        o_range: (args.o_min, args.o_max),
        seed: args.seed,
    };
    let instance = generate_instance(&config).map_err(Failure::input)?;
    write_output(args.out.as_deref(), &emit_instance(&instance))
}

/// Map a heuristic failure to an exit class: rejected configurations are
/// input errors, a construction that dead-ends on INF entries is a negative
/// answer.
fn heuristic_failure(err: HeuristicError) -> Failure {
    match err {
        HeuristicError::TooFewTasks { .. } | HeuristicError::IdlenessNotApplicable => {
            Failure::Input(err.to_string())
        }
        _ => Failure::Negative(err.to_string()),
    }
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let options = HeuristicOptions {
        starting_mode: match args.start {
            StartFlag::Random => StartingMode::Random,
            StartFlag::Informed => StartingMode::Informed,
        },
        next_task_mode: match args.select {
            SelectFlag::Greedy => NextTaskMode::Greedy,
            SelectFlag::Coeff => NextTaskMode::Coefficient,
        },
        idleness_reduction: args.idle,
        optimize_ends: args.optimize_ends,
        seed: args.seed,
    };

    let (schedule, proven): (Schedule, Option<bool>) = match args.algo {
        Algo::Losos => (losos(&instance, &options).map_err(heuristic_failure)?, None),
        Algo::Rosol => (rosol(&instance, &options).map_err(heuristic_failure)?, None),
        Algo::Exact => {
            let defaults = ExactLimits::default();
            let limits = ExactLimits {
                max_tasks: args.max_tasks.unwrap_or(defaults.max_tasks),
                max_machines: args.max_machines.unwrap_or(defaults.max_machines),
                time_limit: args.time_limit.map(budget).transpose()?,
                warm_start: None,
            };
            let result = exact_solve(&instance, &limits).map_err(|err| {
                use seqserv::exact::ExactError;
                match err {
                    ExactError::Infeasible | ExactError::Timeout => {
                        Failure::Negative(err.to_string())
                    }
                    _ => Failure::Input(err.to_string()),
                }
            })?;
            (result.schedule, Some(result.proven_optimal))
        }
        Algo::Warm => {
            let limit = budget(args.time_limit.unwrap_or(10.0))?;
            let report =
                warm_started_solve(&instance, args.seed, limit).map_err(heuristic_failure)?;
            eprintln!(
                "warm start {}, final {} (rd to bound {:.2}%), {:.3}s",
                report.warm_start_makespan,
                report.makespan,
                report.rd_to_lb * 100.0,
                report.runtime.as_secs_f64()
            );
            (report.schedule, Some(report.proven_optimal))
        }
    };

    let bound = lower_bound(&instance).bound_int;
    match proven {
        Some(true) => eprintln!("makespan {} (lower bound {bound}, proven optimal)", schedule.makespan),
        Some(false) => eprintln!("makespan {} (lower bound {bound}, not proven optimal)", schedule.makespan),
        None => match relative_difference(schedule.makespan, bound) {
            Ok(rd) => eprintln!(
                "makespan {} (lower bound {bound}, rd {:.2}%)",
                schedule.makespan,
                rd * 100.0
            ),
            Err(_) => eprintln!("makespan {} (lower bound {bound})", schedule.makespan),
        },
    }
    write_output(args.out.as_deref(), &emit_schedule(&schedule))
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let schedule = parse_schedule(&read_to_string(&args.schedule)?, &instance)
        .map_err(|err| Failure::Input(format!("{}: {err}", args.schedule.display())))?;
    let report = validate_schedule(&instance, &schedule)
        .map_err(|err| Failure::Input(format!("{}: {err}", args.schedule.display())))?;
    if report.feasible() {
        println!("feasible: makespan {}", schedule.makespan);
        Ok(())
    } else {
        for violation in &report.violations {
            println!("violated {}: {}", violation.condition, violation.detail);
        }
        Err(Failure::Negative(format!(
            "schedule is infeasible ({} violation{})",
            report.violations.len(),
            if report.violations.len() == 1 { "" } else { "s" }
        )))
    }
}

fn lb(args: LbArgs) -> Result<(), Failure> {
    let report = lower_bound(&load_instance(&args.instance)?);
    println!("machine processing load: {}/{}", report.mbar_p.num, report.mbar_p.den);
    println!("machine setup load: {}/{}", report.mbar_o.num, report.mbar_o.den);
    println!("server setup load: {}/{}", report.rbar_o.num, report.rbar_o.den);
    println!("bound: {}/{}", report.bound.num, report.bound.den);
    println!("integer bound: {}", report.bound_int);
    Ok(())
}

/// File-name-safe version of an algorithm name.
fn slug(name: &str) -> String {
    let mut slug: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    while slug.ends_with('_') {
        slug.pop();
    }
    slug
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut instances = Vec::with_capacity(args.instances.len());
    for path in &args.instances {
        let id = path
            .file_stem()
            .map(|stem| stem.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        instances.push((id, load_instance(path)?));
    }
    let warm = args.warm.map(budget).transpose()?;
    let algorithms = standard_algorithms(args.seed, warm);
    let rows = run_bench(&instances, &algorithms, worker_count(instances.len()));

    let table = render_table(&algorithms, &rows);
    print!("{table}");

    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir)
            .map_err(|err| Failure::Input(format!("{}: {err}", dir.display())))?;
        let write = |name: &str, text: &str| {
            let path = dir.join(name);
            std::fs::write(&path, text)
                .map_err(|err| Failure::Input(format!("{}: {err}", path.display())))
        };
        write("report.txt", &table)?;
        write("report.csv", &render_csv(&algorithms, &rows))?;
        for row in &rows {
            for (algorithm, cell) in algorithms.iter().zip(&row.cells) {
                if let Ok(cell) = cell {
                    write(
                        &format!("{}.{}.sched", row.id, slug(&algorithm.name)),
                        &emit_schedule(&cell.schedule),
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn gantt(args: GanttArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let schedule = parse_schedule(&read_to_string(&args.schedule)?, &instance)
        .map_err(|err| Failure::Input(format!("{}: {err}", args.schedule.display())))?;
    let report = validate_schedule(&instance, &schedule)
        .map_err(|err| Failure::Input(format!("{}: {err}", args.schedule.display())))?;
    if !report.feasible() {
        for violation in &report.violations {
            eprintln!("violated {}: {}", violation.condition, violation.detail);
        }
        return Err(Failure::Negative("schedule is infeasible".to_string()));
    }
    let svg = emit_gantt_svg(&schedule).map_err(Failure::input)?;
    write_output(args.out.as_deref(), &svg)
}

fn transform(command: TransformCommand) -> Result<(), Failure> {
    let (instance, out) = match command {
        TransformCommand::Dedicated {
            instance,
            classes,
            out,
        } => {
            let instance = load_instance(&instance)?;
            let transformed = transform_dedicated(&instance, &DedicationMap::new(classes))
                .map_err(Failure::input)?;
            (transformed, out)
        }
        TransformCommand::Seqindep {
            instance,
            setups,
            out,
        } => {
            let instance = load_instance(&instance)?;
            let transformed =
                transform_sequence_independent(&instance, &setups).map_err(Failure::input)?;
            (transformed, out)
        }
    };
    write_output(out.as_deref(), &emit_instance(&instance))
}
