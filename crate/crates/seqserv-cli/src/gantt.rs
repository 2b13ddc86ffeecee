//! Static Gantt chart rendering: one SVG with one row per machine followed
//! by one row per server.
//!
//! Tasks appear as filled boxes labeled `T<i+1>`, setups on machine rows as
//! boxes labeled `R<s+1>` (the server that performs them), and the same
//! setups again on their server's row labeled `O<i+1>,<j+1>`. Labels are
//! 1-based to match how such charts are usually drawn; files keep 0-based
//! ids. Zero-length setups are invisible and skipped.
//!
//! The output is fully deterministic: fixed pixel scale (one time unit =
//! [`SCALE`] px), integer coordinates, stable element order (machine rows
//! top to bottom, then server rows, boxes left to right).

use seqserv::Schedule;
use thiserror::Error;

/// Pixels per time unit.
pub const SCALE: u64 = 20;

const ROW_H: u64 = 34;
const BAR_PAD: u64 = 5;
const BAR_H: u64 = ROW_H - 2 * BAR_PAD;
const LEFT: u64 = 80;
const TOP: u64 = 20;
const RIGHT_PAD: u64 = 40;
const AXIS_SPACE: u64 = 40;

const TASK_FILL: &str = "#4e79a7";
const MACHINE_SETUP_FILL: &str = "#f28e2b";
const SERVER_SETUP_FILL: &str = "#59a14f";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GanttError {
    #[error(
        "setup ({from} -> {to}) on machine {machine} has no server id; \
         assign server ids first (assign_servers)"
    )]
    UnassignedServer {
        from: usize,
        to: usize,
        machine: usize,
    },
}

fn x(time: u64) -> u64 {
    LEFT + time * SCALE
}

/// Smallest round step (1, 2, 5, 10, 20, ...) that keeps the axis at or
/// under 30 ticks.
fn tick_step(makespan: u64) -> u64 {
    let mut base = 1;
    loop {
        for mult in [1, 2, 5] {
            let step = base * mult;
            if makespan / step <= 30 {
                return step;
            }
        }
        base *= 10;
    }
}

/// Render a schedule as a standalone SVG document.
///
/// Every positive-length setup must carry a server id; an empty schedule
/// renders the axis alone.
pub fn emit_gantt_svg(schedule: &Schedule) -> Result<String, GanttError> {
    use std::fmt::Write;

    for s in &schedule.setups {
        if s.server.is_none() && s.end > s.start {
            return Err(GanttError::UnassignedServer {
                from: s.from,
                to: s.to,
                machine: s.machine,
            });
        }
    }

    let machines = schedule.machines.len();
    let servers = schedule
        .setups
        .iter()
        .filter_map(|s| s.server)
        .max()
        .map_or(0, |id| id + 1);
    let rows = machines + servers;

    let width = x(schedule.makespan) + RIGHT_PAD;
    let axis_y = TOP + rows as u64 * ROW_H + 4;
    let height = axis_y + AXIS_SPACE;

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"monospace\" font-size=\"12\">"
    )
    .unwrap();
    writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>"
    )
    .unwrap();

    let row_top = |row: usize| TOP + row as u64 * ROW_H;
    let bar = |out: &mut String, row: usize, start: u64, end: u64, fill: &str, label: &str| {
        let y = row_top(row) + BAR_PAD;
        let w = (end - start) * SCALE;
        writeln!(
            out,
            "<rect x=\"{}\" y=\"{y}\" width=\"{w}\" height=\"{BAR_H}\" fill=\"{fill}\" \
             stroke=\"#000000\"/>",
            x(start)
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"#000000\">{label}</text>",
            x(start) + w / 2,
            y + BAR_H / 2 + 4
        )
        .unwrap();
    };

    // Row labels down the left edge: machines M1.., then servers R1...
    for k in 0..machines {
        writeln!(
            out,
            "<text x=\"10\" y=\"{}\" fill=\"#000000\">M{}</text>",
            row_top(k) + ROW_H / 2 + 4,
            k + 1
        )
        .unwrap();
    }
    for s in 0..servers {
        writeln!(
            out,
            "<text x=\"10\" y=\"{}\" fill=\"#000000\">R{}</text>",
            row_top(machines + s) + ROW_H / 2 + 4,
            s + 1
        )
        .unwrap();
    }

    // Machine rows: tasks, then this machine's setups.
    for (k, row) in schedule.machines.iter().enumerate() {
        for p in row {
            bar(&mut out, k, p.start, p.end, TASK_FILL, &format!("T{}", p.task + 1));
        }
        for s in schedule.setups.iter().filter(|s| s.machine == k) {
            if s.end == s.start {
                continue;
            }
            let server = s.server.expect("positive-length setups were checked above");
            bar(
                &mut out,
                k,
                s.start,
                s.end,
                MACHINE_SETUP_FILL,
                &format!("R{}", server + 1),
            );
        }
    }

    // Server rows: the same setups grouped by the server that performs
    // them, in time order.
    for server in 0..servers {
        let mut spans: Vec<_> = schedule
            .setups
            .iter()
            .filter(|s| s.server == Some(server) && s.end > s.start)
            .collect();
        spans.sort_by_key(|s| (s.start, s.machine, s.to));
        for s in spans {
            bar(
                &mut out,
                machines + server,
                s.start,
                s.end,
                SERVER_SETUP_FILL,
                &format!("O{},{}", s.from + 1, s.to + 1),
            );
        }
    }

    // Time axis with ticks.
    writeln!(
        out,
        "<line x1=\"{}\" y1=\"{axis_y}\" x2=\"{}\" y2=\"{axis_y}\" stroke=\"#000000\"/>",
        x(0),
        x(schedule.makespan)
    )
    .unwrap();
    let step = tick_step(schedule.makespan);
    let mut tick = 0;
    while tick <= schedule.makespan {
        writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{axis_y}\" x2=\"{0}\" y2=\"{1}\" stroke=\"#000000\"/>",
            x(tick),
            axis_y + 5
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"#000000\">{tick}</text>",
            x(tick),
            axis_y + 20
        )
        .unwrap();
        tick += step;
    }

    out.push_str("</svg>\n");
    Ok(out)
}
