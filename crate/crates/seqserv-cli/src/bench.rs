//! Benchmark harness: run a list of algorithms over a list of instances and
//! render the results as an aligned text table and a `;`-separated CSV.
//!
//! Instances fan out to a bounded worker pool (each worker owns its solver
//! state); the report is assembled order-stable by instance position, so the
//! output is independent of scheduling. The table closes with a `Σ` row
//! summing every objective column and an `RD[%]` row giving each column's
//! aggregate relative difference to the summed lower bound — the difference
//! of the sums, not the mean of the per-instance differences.

use seqserv::heuristics::HeuristicError;
use seqserv::{
    losos, lower_bound, relative_difference, rosol, warm_started_solve, HeuristicOptions,
    Instance, Schedule, Time,
};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// How a benchmark column produces a schedule.
pub enum AlgoSpec {
    /// List scheduling with machine-order setup dispatch.
    Losos(HeuristicOptions),
    /// List scheduling with server-order setup dispatch.
    Rosol(HeuristicOptions),
    /// Heuristic warm start followed by exact or local-search improvement
    /// within a wall-clock budget.
    Warm { seed: u64, limit: Duration },
}

/// One column of the report.
pub struct BenchAlgorithm {
    pub name: String,
    pub spec: AlgoSpec,
}

/// The standard column set: the two list-scheduling baselines, the two
/// improved configurations, and optionally the warm-started solver, whose
/// column is labeled with its budget, e.g. `CP_WS-SEIC (10s)`.
pub fn standard_algorithms(seed: u64, warm: Option<Duration>) -> Vec<BenchAlgorithm> {
    let mut algorithms = vec![
        BenchAlgorithm {
            name: "LOSOS".into(),
            spec: AlgoSpec::Losos(HeuristicOptions::baseline(seed)),
        },
        BenchAlgorithm {
            name: "ROSOL".into(),
            spec: AlgoSpec::Rosol(HeuristicOptions::baseline(seed)),
        },
        BenchAlgorithm {
            name: "LOSOS_SE".into(),
            spec: AlgoSpec::Losos(HeuristicOptions::se(seed)),
        },
        BenchAlgorithm {
            name: "LOSOS_SEIC".into(),
            spec: AlgoSpec::Losos(HeuristicOptions::seic(seed)),
        },
    ];
    if let Some(limit) = warm {
        algorithms.push(BenchAlgorithm {
            name: format!("CP_WS-SEIC ({}s)", limit.as_secs()),
            spec: AlgoSpec::Warm { seed, limit },
        });
    }
    algorithms
}

/// One algorithm's result on one instance.
pub struct BenchCell {
    pub makespan: Time,
    /// Relative difference to the instance's lower bound, as a fraction.
    pub rd: f64,
    pub runtime: Duration,
    pub schedule: Schedule,
}

/// One instance's row: identity, sizes, lower bound, and one cell (or error
/// message) per algorithm.
pub struct BenchRow {
    pub id: String,
    pub machines: usize,
    pub tasks: usize,
    pub servers: usize,
    pub lb: Time,
    pub cells: Vec<Result<BenchCell, String>>,
}

/// Relative difference that tolerates a zero bound: a zero makespan matches
/// it exactly, anything else is infinitely far away.
fn rd_to_lb(makespan: Time, lb: Time) -> f64 {
    match relative_difference(makespan, lb) {
        Ok(rd) => rd,
        Err(_) if makespan == 0 => 0.0,
        Err(_) => f64::INFINITY,
    }
}

fn bench_row(id: &str, instance: &Instance, algorithms: &[BenchAlgorithm]) -> BenchRow {
    let lb = lower_bound(instance).bound_int;
    let mut cells = Vec::with_capacity(algorithms.len());
    for algorithm in algorithms {
        let started = Instant::now();
        let outcome: Result<Schedule, HeuristicError> = match &algorithm.spec {
            AlgoSpec::Losos(options) => losos(instance, options),
            AlgoSpec::Rosol(options) => rosol(instance, options),
            AlgoSpec::Warm { seed, limit } => {
                warm_started_solve(instance, *seed, *limit).map(|report| report.schedule)
            }
        };
        let runtime = started.elapsed();
        cells.push(match outcome {
            Ok(schedule) => Ok(BenchCell {
                makespan: schedule.makespan,
                rd: rd_to_lb(schedule.makespan, lb),
                runtime,
                schedule,
            }),
            Err(err) => Err(err.to_string()),
        });
    }
    BenchRow {
        id: id.to_string(),
        machines: instance.machines(),
        tasks: instance.tasks(),
        servers: instance.servers(),
        lb,
        cells,
    }
}

/// Worker count for a run: `SEQSERV_WORKERS` when set to a positive number,
/// otherwise the machine's parallelism, never more than one per instance.
pub fn worker_count(instances: usize) -> usize {
    let capped = std::env::var("SEQSERV_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w >= 1);
    let hardware = std::thread::available_parallelism().map_or(1, |n| n.get());
    capped.unwrap_or(hardware).min(instances.max(1))
}

/// Run every algorithm on every instance using up to `workers` threads.
/// Rows come back in input order; a failing algorithm yields an error cell
/// and the run continues.
pub fn run_bench(
    instances: &[(String, Instance)],
    algorithms: &[BenchAlgorithm],
    workers: usize,
) -> Vec<BenchRow> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BenchRow>>> =
        Mutex::new((0..instances.len()).map(|_| None).collect());
    let workers = workers.clamp(1, instances.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= instances.len() {
                    break;
                }
                let (id, instance) = &instances[i];
                let row = bench_row(id, instance, algorithms);
                slots.lock().unwrap()[i] = Some(row);
            });
        }
    });

    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|row| row.expect("every instance index was claimed by a worker"))
        .collect()
}

/// Percentage with two decimals, or `inf` for an unbounded difference.
fn percent(rd: f64) -> String {
    if rd.is_finite() {
        format!("{:.2}", rd * 100.0)
    } else {
        "inf".to_string()
    }
}

/// Column sums for the aggregate rows: per algorithm, the summed objective,
/// its RD to the summed bound, and the summed runtime — or `None` once any
/// cell in the column failed.
#[allow(clippy::type_complexity)]
fn aggregates(rows: &[BenchRow], algorithms: usize) -> (Time, Vec<Option<(Time, f64, Duration)>>) {
    let lb_sum: Time = rows.iter().map(|r| r.lb).sum();
    let columns = (0..algorithms)
        .map(|a| {
            let mut makespan_sum: Time = 0;
            let mut runtime_sum = Duration::ZERO;
            for row in rows {
                match &row.cells[a] {
                    Ok(cell) => {
                        makespan_sum += cell.makespan;
                        runtime_sum += cell.runtime;
                    }
                    Err(_) => return None,
                }
            }
            Some((makespan_sum, rd_to_lb(makespan_sum, lb_sum), runtime_sum))
        })
        .collect();
    (lb_sum, columns)
}

/// Aligned text table; one line per instance plus `Σ` and `RD[%]` rows.
pub fn render_table(algorithms: &[BenchAlgorithm], rows: &[BenchRow]) -> String {
    let mut grid: Vec<Vec<String>> = Vec::new();

    let mut header = vec![
        "instance".to_string(),
        "m".to_string(),
        "t".to_string(),
        "r".to_string(),
        "LB".to_string(),
    ];
    for algorithm in algorithms {
        header.push(algorithm.name.clone());
        header.push("RD[%]".to_string());
        header.push("t[ms]".to_string());
    }
    grid.push(header);

    for row in rows {
        let mut line = vec![
            row.id.clone(),
            row.machines.to_string(),
            row.tasks.to_string(),
            row.servers.to_string(),
            row.lb.to_string(),
        ];
        for cell in &row.cells {
            match cell {
                Ok(cell) => {
                    line.push(cell.makespan.to_string());
                    line.push(percent(cell.rd));
                    line.push(cell.runtime.as_millis().to_string());
                }
                Err(message) => {
                    line.push(format!("error: {message}"));
                    line.push("-".to_string());
                    line.push("-".to_string());
                }
            }
        }
        grid.push(line);
    }

    if !rows.is_empty() {
        let (lb_sum, columns) = aggregates(rows, algorithms.len());
        let mut sum_line = vec![
            "Σ".to_string(),
            String::new(),
            String::new(),
            String::new(),
            lb_sum.to_string(),
        ];
        let mut rd_line = vec![
            "RD[%]".to_string(),
            String::new(),
            String::new(),
            String::new(),
            percent(rd_to_lb(lb_sum, lb_sum)),
        ];
        for column in &columns {
            match column {
                Some((makespan_sum, rd, runtime_sum)) => {
                    sum_line.push(makespan_sum.to_string());
                    sum_line.push(String::new());
                    sum_line.push(runtime_sum.as_millis().to_string());
                    rd_line.push(percent(*rd));
                    rd_line.push(String::new());
                    rd_line.push(String::new());
                }
                None => {
                    sum_line.extend(["-".to_string(), String::new(), String::new()]);
                    rd_line.extend(["-".to_string(), String::new(), String::new()]);
                }
            }
        }
        grid.push(sum_line);
        grid.push(rd_line);
    }

    // Right-align every column but the first to its widest entry. `Σ` is
    // two bytes but one display column; measure in characters.
    let columns = grid[0].len();
    let width = |c: usize| {
        grid.iter()
            .map(|line| line[c].chars().count())
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..columns).map(width).collect();

    let mut out = String::new();
    for line in &grid {
        for (c, cell) in line.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            let pad = widths[c].saturating_sub(cell.chars().count());
            if c == 0 {
                out.push_str(cell);
                out.push_str(&" ".repeat(pad));
            } else {
                out.push_str(&" ".repeat(pad));
                out.push_str(cell);
            }
        }
        // Trailing blanks from empty cells serve alignment only.
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

/// `;`-separated CSV with the same content as the table. RD cells hold
/// percentages with six decimals so they recompute from the objective and
/// LB columns; runtimes are integer milliseconds.
pub fn render_csv(algorithms: &[BenchAlgorithm], rows: &[BenchRow]) -> String {
    use std::fmt::Write;

    let mut out = String::from("instance;m;t;r;lb");
    for algorithm in algorithms {
        write!(out, ";{0};{0}_rd_percent;{0}_ms", algorithm.name).unwrap();
    }
    out.push('\n');

    let csv_percent = |rd: f64| {
        if rd.is_finite() {
            format!("{:.6}", rd * 100.0)
        } else {
            "inf".to_string()
        }
    };

    for row in rows {
        write!(
            out,
            "{};{};{};{};{}",
            row.id, row.machines, row.tasks, row.servers, row.lb
        )
        .unwrap();
        for cell in &row.cells {
            match cell {
                Ok(cell) => write!(
                    out,
                    ";{};{};{}",
                    cell.makespan,
                    csv_percent(cell.rd),
                    cell.runtime.as_millis()
                )
                .unwrap(),
                Err(message) => {
                    write!(out, ";error: {};;", message.replace(';', ",")).unwrap()
                }
            }
        }
        out.push('\n');
    }

    if !rows.is_empty() {
        let (lb_sum, columns) = aggregates(rows, algorithms.len());
        write!(out, "sum;;;;{lb_sum}").unwrap();
        for column in &columns {
            match column {
                Some((makespan_sum, _, runtime_sum)) => {
                    write!(out, ";{};;{}", makespan_sum, runtime_sum.as_millis()).unwrap()
                }
                None => out.push_str(";;;"),
            }
        }
        out.push('\n');
        write!(out, "rd_percent;;;;{}", csv_percent(rd_to_lb(lb_sum, lb_sum))).unwrap();
        for column in &columns {
            match column {
                Some((_, rd, _)) => write!(out, ";{};;", csv_percent(*rd)).unwrap(),
                None => out.push_str(";;;"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqserv::{generate_instance, GeneratorConfig, Setup};

    fn tiny_set(count: usize) -> Vec<(String, Instance)> {
        (0..count)
            .map(|k| {
                let config = GeneratorConfig::new(2, 1, 5, 100 + k as u64);
                (format!("i{k}"), generate_instance(&config).unwrap())
            })
            .collect()
    }

    #[test]
    fn empty_set_renders_headers_only() {
        let algorithms = standard_algorithms(1, None);
        let table = render_table(&algorithms, &[]);
        assert_eq!(table.lines().count(), 1);
        assert!(table.starts_with("instance"));
        let csv = render_csv(&algorithms, &[]);
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.contains("LOSOS_SEIC;LOSOS_SEIC_rd_percent;LOSOS_SEIC_ms"));
    }

    #[test]
    fn rows_keep_input_order_under_parallelism() {
        let instances = tiny_set(7);
        let algorithms = standard_algorithms(3, None);
        let rows = run_bench(&instances, &algorithms, 4);
        let ids: Vec<&str> = rows.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["i0", "i1", "i2", "i3", "i4", "i5", "i6"]);
        for row in &rows {
            for cell in &row.cells {
                let cell = cell.as_ref().unwrap();
                assert!(cell.makespan >= row.lb);
                assert!(cell.rd >= 0.0);
            }
        }
    }

    #[test]
    fn warm_cells_report_nonnegative_distance_to_the_bound() {
        let instances = tiny_set(1);
        let algorithms = standard_algorithms(3, Some(Duration::from_secs(1)));
        let rows = run_bench(&instances, &algorithms, 1);
        let warm = rows[0].cells.last().unwrap().as_ref().unwrap();
        assert!(warm.rd >= 0.0);
        assert!(warm.makespan >= rows[0].lb);
    }

    #[test]
    fn failures_are_recorded_without_stopping_the_run() {
        // Task 1 cannot follow task 0 and vice versa, but one machine must
        // hold both: every algorithm fails on the first instance.
        let blocked = Instance::new(
            1,
            1,
            vec![2, 3],
            vec![Setup::finite(0), Setup::INF, Setup::INF, Setup::finite(0)],
        )
        .unwrap();
        let mut instances = tiny_set(1);
        instances.insert(0, ("blocked".to_string(), blocked));
        let algorithms = standard_algorithms(5, None);
        let rows = run_bench(&instances, &algorithms, 2);
        assert!(rows[0].cells.iter().all(|c| c.is_err()));
        assert!(rows[1].cells.iter().all(|c| c.is_ok()));
        let table = render_table(&algorithms, &rows);
        assert!(table.contains("error: "));
        let csv = render_csv(&algorithms, &rows);
        assert!(csv.lines().count() >= 3);
    }

    #[test]
    fn aggregate_rows_sum_the_columns() {
        let instances = tiny_set(3);
        let algorithms = standard_algorithms(9, None);
        let rows = run_bench(&instances, &algorithms, 1);
        let lb_sum: Time = rows.iter().map(|r| r.lb).sum();
        let losos_sum: Time = rows
            .iter()
            .map(|r| r.cells[0].as_ref().unwrap().makespan)
            .sum();
        let table = render_table(&algorithms, &rows);
        let sum_line = table
            .lines()
            .find(|l| l.starts_with('Σ'))
            .expect("a Σ row is rendered");
        assert!(sum_line.contains(&lb_sum.to_string()));
        assert!(sum_line.contains(&losos_sum.to_string()));
        let expected_rd = percent(rd_to_lb(losos_sum, lb_sum));
        let rd_line = table
            .lines()
            .find(|l| l.starts_with("RD[%]") && !l.contains("instance"))
            .expect("an RD row is rendered");
        assert!(rd_line.contains(&expected_rd));
    }

    #[test]
    fn csv_distances_recompute_from_their_own_row() {
        let instances = tiny_set(2);
        let algorithms = standard_algorithms(11, None);
        let rows = run_bench(&instances, &algorithms, 1);
        let csv = render_csv(&algorithms, &rows);
        for line in csv.lines().skip(1).take(2) {
            let fields: Vec<&str> = line.split(';').collect();
            let lb: Time = fields[4].parse().unwrap();
            // Each algorithm occupies three fields starting at index 5.
            for a in 0..algorithms.len() {
                let makespan: Time = fields[5 + 3 * a].parse().unwrap();
                let printed = fields[6 + 3 * a];
                let recomputed = format!("{:.6}", rd_to_lb(makespan, lb) * 100.0);
                assert_eq!(printed, recomputed);
            }
        }
    }
}
