//! Line-oriented text formats for instances and schedules.
//!
//! Both formats round-trip bit-exactly: `emit(parse(text))` is the canonical
//! form of `text`, and `parse(emit(value))` reproduces `value`. Lines whose
//! first non-blank character is `#` and blank lines are ignored anywhere in
//! either format; emitters never produce them. All indices (tasks, machines,
//! servers) are 0-based in files, matching the library.
//!
//! Instance format:
//!
//! ```text
//! machines 3
//! servers 2
//! tasks 11
//! p: 4 2 2 2 3 2 2 1 6 4 5
//! O:
//! 0 2 inf ...   (t rows of t entries; `inf` forbids the transition)
//! ```
//!
//! Schedule format:
//!
//! ```text
//! makespan 21
//! machine 0: 0 0 4; 1 6 8
//! machine 1:
//! setup 0 1 machine 0 server 1 start 4 end 6
//! ```
//!
//! Machine lines list `<task> <start> <end>` triplets in execution order;
//! setup lines write `-` for an unassigned server. Parse errors carry
//! 1-based line and column numbers.

use seqserv::instance::InstanceError;
use seqserv::{Instance, Schedule, Setup, SetupRecord, TaskPlacement, Time};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: expected `{expected}`, found `{found}`")]
    Expected {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}, column {col}: `{token}` is not an integer")]
    NotAnInteger {
        line: usize,
        col: usize,
        token: String,
    },
    #[error("line {line}, column {col}: negative value {value}")]
    Negative { line: usize, col: usize, value: i64 },
    #[error("line {line}, column {col}: value {value} is too large (max {max})")]
    TooLarge {
        line: usize,
        col: usize,
        value: u64,
        max: u64,
    },
    #[error("line {line}: expected {expected} values on this line, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("missing {missing} at end of input")]
    UnexpectedEof { missing: &'static str },
    #[error("line {line}: machine {machine} listed twice")]
    DuplicateMachine { line: usize, machine: usize },
    #[error("line {line}: machine {machine} out of range ({machines} machines)")]
    MachineRange {
        line: usize,
        machine: usize,
        machines: usize,
    },
    #[error("line {line}: task {task} out of range ({tasks} tasks)")]
    TaskRange {
        line: usize,
        task: usize,
        tasks: usize,
    },
    #[error("line {line}: server {server} out of range ({servers} servers)")]
    ServerRange {
        line: usize,
        server: usize,
        servers: usize,
    },
    #[error("{source}")]
    Instance {
        #[from]
        source: InstanceError,
    },
}

/// One meaningful token with its 1-based line and column.
#[derive(Clone, Copy)]
struct Tok<'a> {
    line: usize,
    col: usize,
    text: &'a str,
}

/// Significant lines (comments and blanks dropped) with tokens located.
fn tokenize(text: &str) -> Vec<Vec<Tok<'_>>> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        // Split into whitespace-separated words, tracking byte offsets.
        let mut toks = Vec::new();
        let bytes = raw.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i].is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            toks.push(Tok {
                line: idx + 1,
                col: start + 1,
                text: &raw[start..i],
            });
        }
        lines.push(toks);
    }
    lines
}

fn parse_u64(tok: Tok<'_>, max: u64) -> Result<u64, FormatError> {
    let value: i64 = tok.text.parse().map_err(|_| FormatError::NotAnInteger {
        line: tok.line,
        col: tok.col,
        token: tok.text.to_string(),
    })?;
    if value < 0 {
        return Err(FormatError::Negative {
            line: tok.line,
            col: tok.col,
            value,
        });
    }
    let value = value as u64;
    if value > max {
        return Err(FormatError::TooLarge {
            line: tok.line,
            col: tok.col,
            value,
            max,
        });
    }
    Ok(value)
}

fn expect_keyword(toks: &[Tok<'_>], keyword: &'static str) -> Result<(), FormatError> {
    match toks.first() {
        Some(tok) if tok.text == keyword => Ok(()),
        Some(tok) => Err(FormatError::Expected {
            line: tok.line,
            expected: keyword,
            found: tok.text.to_string(),
        }),
        None => Err(FormatError::UnexpectedEof { missing: keyword }),
    }
}

fn header_value(toks: &[Tok<'_>], keyword: &'static str, max: u64) -> Result<u64, FormatError> {
    expect_keyword(toks, keyword)?;
    if toks.len() != 2 {
        return Err(FormatError::Arity {
            line: toks[0].line,
            expected: 1,
            found: toks.len() - 1,
        });
    }
    parse_u64(toks[1], max)
}

/// Parse the instance format described in the module docs.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let lines = tokenize(text);
    let mut it = lines.iter();

    // Counts stay within u32 so later index arithmetic cannot overflow.
    let max_count = u64::from(u32::MAX);
    let machines = header_value(
        it.next().ok_or(FormatError::UnexpectedEof {
            missing: "`machines` line",
        })?,
        "machines",
        max_count,
    )? as usize;
    let servers = header_value(
        it.next().ok_or(FormatError::UnexpectedEof {
            missing: "`servers` line",
        })?,
        "servers",
        max_count,
    )? as usize;
    let tasks = header_value(
        it.next().ok_or(FormatError::UnexpectedEof {
            missing: "`tasks` line",
        })?,
        "tasks",
        max_count,
    )? as usize;

    let p_line = it.next().ok_or(FormatError::UnexpectedEof {
        missing: "`p:` line",
    })?;
    expect_keyword(p_line, "p:")?;
    if p_line.len() != tasks + 1 {
        return Err(FormatError::Arity {
            line: p_line[0].line,
            expected: tasks,
            found: p_line.len() - 1,
        });
    }
    let mut processing = Vec::with_capacity(tasks);
    for &tok in &p_line[1..] {
        processing.push(parse_u64(tok, u64::from(u32::MAX))? as u32);
    }

    let o_line = it.next().ok_or(FormatError::UnexpectedEof {
        missing: "`O:` line",
    })?;
    expect_keyword(o_line, "O:")?;
    if o_line.len() != 1 {
        return Err(FormatError::Arity {
            line: o_line[0].line,
            expected: 0,
            found: o_line.len() - 1,
        });
    }

    let mut setups = Vec::with_capacity(tasks * tasks);
    for _ in 0..tasks {
        let row = it.next().ok_or(FormatError::UnexpectedEof {
            missing: "setup matrix row",
        })?;
        if row.len() != tasks {
            return Err(FormatError::Arity {
                line: row.first().map_or(0, |t| t.line),
                expected: tasks,
                found: row.len(),
            });
        }
        for &tok in row.iter() {
            if tok.text == "inf" {
                setups.push(Setup::INF);
            } else {
                // u32::MAX is the INF sentinel; finite entries stay below it.
                let len = parse_u64(tok, u64::from(u32::MAX) - 1)?;
                setups.push(Setup::finite(len as u32));
            }
        }
    }

    Ok(Instance::new(machines, servers, processing, setups)?)
}

/// Canonical instance text; [`parse_instance`] of the result reproduces the
/// instance bit for bit.
pub fn emit_instance(instance: &Instance) -> String {
    use std::fmt::Write;
    let t = instance.tasks();
    let mut out = String::new();
    writeln!(out, "machines {}", instance.machines()).unwrap();
    writeln!(out, "servers {}", instance.servers()).unwrap();
    writeln!(out, "tasks {t}").unwrap();
    out.push_str("p:");
    for j in 0..t {
        write!(out, " {}", instance.processing(j)).unwrap();
    }
    out.push_str("\nO:\n");
    for i in 0..t {
        for j in 0..t {
            if j > 0 {
                out.push(' ');
            }
            match instance.setup(i, j).get() {
                Some(len) => write!(out, "{len}").unwrap(),
                None => out.push_str("inf"),
            }
        }
        out.push('\n');
    }
    out
}

/// Canonical schedule text; [`parse_schedule`] of the result reproduces the
/// schedule bit for bit.
pub fn emit_schedule(schedule: &Schedule) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "makespan {}", schedule.makespan).unwrap();
    for (k, row) in schedule.machines.iter().enumerate() {
        write!(out, "machine {k}:").unwrap();
        for (pos, p) in row.iter().enumerate() {
            if pos > 0 {
                out.push(';');
            }
            write!(out, " {} {} {}", p.task, p.start, p.end).unwrap();
        }
        out.push('\n');
    }
    for s in &schedule.setups {
        let server = match s.server {
            Some(id) => id.to_string(),
            None => "-".to_string(),
        };
        writeln!(
            out,
            "setup {} {} machine {} server {} start {} end {}",
            s.from, s.to, s.machine, server, s.start, s.end
        )
        .unwrap();
    }
    out
}

/// Parse the schedule format described in the module docs. The instance
/// provides the index ranges; deeper feasibility checks belong to
/// [`seqserv::validate_schedule`].
pub fn parse_schedule(text: &str, instance: &Instance) -> Result<Schedule, FormatError> {
    let lines = tokenize(text);
    let mut it = lines.iter().peekable();

    let header = it.next().ok_or(FormatError::UnexpectedEof {
        missing: "`makespan` line",
    })?;
    let makespan: Time = header_value(header, "makespan", u64::MAX)?;

    let m = instance.machines();
    let mut machines: Vec<Option<Vec<TaskPlacement>>> = vec![None; m];
    while let Some(toks) = it.peek() {
        if toks.first().map(|t| t.text) != Some("machine") {
            break;
        }
        let toks = it.next().unwrap();
        let head = toks[0];
        let idx_tok = *toks.get(1).ok_or(FormatError::Arity {
            line: head.line,
            expected: 1,
            found: 0,
        })?;
        let idx_text = idx_tok.text.strip_suffix(':').ok_or(FormatError::Expected {
            line: idx_tok.line,
            expected: "machine index followed by `:`",
            found: idx_tok.text.to_string(),
        })?;
        let machine = parse_u64(
            Tok {
                text: idx_text,
                ..idx_tok
            },
            u64::MAX,
        )? as usize;
        if machine >= m {
            return Err(FormatError::MachineRange {
                line: head.line,
                machine,
                machines: m,
            });
        }
        if machines[machine].is_some() {
            return Err(FormatError::DuplicateMachine {
                line: head.line,
                machine,
            });
        }

        // The rest are `task start end` triplets; the emitter joins them
        // with `;`, which tokenizes onto the preceding end value.
        let mut fields = Vec::new();
        for tok in &toks[2..] {
            let text = tok.text.strip_suffix(';').unwrap_or(tok.text);
            if text.is_empty() {
                continue;
            }
            fields.push(Tok { text, ..*tok });
        }
        if fields.len() % 3 != 0 {
            return Err(FormatError::Arity {
                line: head.line,
                expected: fields.len().div_ceil(3) * 3,
                found: fields.len(),
            });
        }
        let mut row = Vec::with_capacity(fields.len() / 3);
        for triple in fields.chunks(3) {
            let task = parse_u64(triple[0], u64::MAX)? as usize;
            if task >= instance.tasks() {
                return Err(FormatError::TaskRange {
                    line: triple[0].line,
                    task,
                    tasks: instance.tasks(),
                });
            }
            row.push(TaskPlacement {
                task,
                machine,
                start: parse_u64(triple[1], u64::MAX)?,
                end: parse_u64(triple[2], u64::MAX)?,
            });
        }
        machines[machine] = Some(row);
    }

    let mut setups = Vec::new();
    for toks in it {
        expect_keyword(toks, "setup")?;
        let line = toks[0].line;
        if toks.len() != 11 {
            return Err(FormatError::Arity {
                line,
                expected: 10,
                found: toks.len() - 1,
            });
        }
        for (pos, keyword) in [(3, "machine"), (5, "server"), (7, "start"), (9, "end")] {
            if toks[pos].text != keyword {
                return Err(FormatError::Expected {
                    line,
                    expected: keyword,
                    found: toks[pos].text.to_string(),
                });
            }
        }
        let from = parse_u64(toks[1], u64::MAX)? as usize;
        let to = parse_u64(toks[2], u64::MAX)? as usize;
        for &task in &[from, to] {
            if task >= instance.tasks() {
                return Err(FormatError::TaskRange {
                    line,
                    task,
                    tasks: instance.tasks(),
                });
            }
        }
        let machine = parse_u64(toks[4], u64::MAX)? as usize;
        if machine >= m {
            return Err(FormatError::MachineRange {
                line,
                machine,
                machines: m,
            });
        }
        let server = if toks[6].text == "-" {
            None
        } else {
            let server = parse_u64(toks[6], u64::MAX)? as usize;
            if server >= instance.servers() {
                return Err(FormatError::ServerRange {
                    line,
                    server,
                    servers: instance.servers(),
                });
            }
            Some(server)
        };
        setups.push(SetupRecord {
            from,
            to,
            machine,
            server,
            start: parse_u64(toks[8], u64::MAX)?,
            end: parse_u64(toks[10], u64::MAX)?,
        });
    }

    Ok(Schedule {
        machines: machines
            .into_iter()
            .map(|row| row.unwrap_or_default())
            .collect(),
        setups,
        makespan,
    })
}
