//! Feasibility validation and server assignment.
//!
//! A schedule is feasible when:
//! - every task appears exactly once (coverage),
//! - tasks run without preemption (A1),
//! - every consecutive task pair on a machine has exactly one setup record,
//!   the successor starts at least the required setup length after the
//!   predecessor completes, the transition is allowed, and no setup precedes
//!   a machine's first task (A2),
//! - every setup is served (A3, subsumed by the capacity sweep below),
//! - setups run without preemption at exactly the required length (A4),
//! - a setup lies between its predecessor's completion and its successor's
//!   start (A5),
//! - at every moment at most `r` setups execute (A6).
//!
//! Setup intervals are half-open `[start, end)`: a setup ending at time `x`
//! does not overlap one starting at `x`. Zero-length setups never occupy a
//! server.

use thiserror::Error;

use crate::instance::{Instance, Time};
use crate::schedule::{compute_makespan, Schedule, SetupRecord};

/// Feasibility conditions checked by [`validate_schedule`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Condition {
    /// Every task appears exactly once.
    Coverage,
    /// Tasks are non-preemptive: duration equals processing time.
    A1,
    /// Consecutive pairs carry their setup; gaps respect the setup length.
    A2,
    /// Each setup is performed by exactly one server.
    A3,
    /// Setups are non-preemptive: duration equals the required length.
    A4,
    /// A setup fits between predecessor completion and successor start.
    A5,
    /// At most `r` setups execute at any moment.
    A6,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Condition::Coverage => "coverage",
            Condition::A1 => "A1",
            Condition::A2 => "A2",
            Condition::A3 => "A3",
            Condition::A4 => "A4",
            Condition::A5 => "A5",
            Condition::A6 => "A6",
        };
        f.write_str(name)
    }
}

/// First observed breach of one condition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    pub condition: Condition,
    pub detail: String,
}

/// Validation outcome: feasible, or the first violation found per condition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn passed(&self, condition: Condition) -> bool {
        !self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Malformed input, distinct from infeasibility.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidateError {
    #[error("task index {task} out of range, instance has {tasks} tasks")]
    TaskIndex { task: usize, tasks: usize },
    #[error("schedule has {got} machine rows, instance has {expected} machines")]
    MachineCount { got: usize, expected: usize },
    #[error("placement of task {task} sits in machine row {row} but names machine {named}")]
    MachineMismatch {
        task: usize,
        row: usize,
        named: usize,
    },
    #[error("setup record names machine {machine} out of range ({machines} machines)")]
    SetupMachine { machine: usize, machines: usize },
    #[error("setup record names server {server} out of range ({servers} servers)")]
    ServerIndex { server: usize, servers: usize },
    #[error("stored makespan {stored} does not match computed makespan {computed}")]
    MakespanMismatch { stored: Time, computed: Time },
}

/// Check a schedule against an instance.
///
/// Returns `Err` on malformed input (out-of-range indices, inconsistent
/// stored makespan); infeasibility is reported in the `Ok` report, one
/// violation per failed condition, first offender each.
pub fn validate_schedule(
    instance: &Instance,
    schedule: &Schedule,
) -> Result<FeasibilityReport, ValidateError> {
    check_shape(instance, schedule)?;

    let mut violations = Vec::new();
    let record = |condition: Condition, detail: String, violations: &mut Vec<Violation>| {
        if !violations.iter().any(|v: &Violation| v.condition == condition) {
            violations.push(Violation { condition, detail });
        }
    };

    // Coverage: each task exactly once.
    let mut seen = vec![0usize; instance.tasks()];
    for chain in &schedule.machines {
        for p in chain {
            seen[p.task] += 1;
        }
    }
    if let Some(task) = seen.iter().position(|&c| c > 1) {
        record(
            Condition::Coverage,
            format!("task {task} is placed {} times", seen[task]),
            &mut violations,
        );
    } else if let Some(task) = seen.iter().position(|&c| c == 0) {
        record(
            Condition::Coverage,
            format!("task {task} is never placed"),
            &mut violations,
        );
    }

    // A1: placement duration equals processing time.
    for chain in &schedule.machines {
        for p in chain {
            let expected = Time::from(instance.processing(p.task));
            if p.start.checked_add(expected) != Some(p.end) {
                record(
                    Condition::A1,
                    format!(
                        "task {} runs [{}, {}) but needs {} time units",
                        p.task, p.start, p.end, expected
                    ),
                    &mut violations,
                );
            }
        }
    }

    // A2, A4, A5: pair the setup records with consecutive tasks per machine.
    let mut used = vec![false; schedule.setups.len()];
    for (machine, chain) in schedule.machines.iter().enumerate() {
        for pair in chain.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            let matching: Vec<usize> = schedule
                .setups
                .iter()
                .enumerate()
                .filter(|(_, s)| {
                    s.machine == machine && s.from == prev.task && s.to == next.task
                })
                .map(|(idx, _)| idx)
                .collect();
            if matching.len() != 1 {
                record(
                    Condition::A2,
                    format!(
                        "pair ({}, {}) on machine {machine} has {} setup records, expected 1",
                        prev.task,
                        next.task,
                        matching.len()
                    ),
                    &mut violations,
                );
                for idx in matching {
                    used[idx] = true;
                }
                continue;
            }
            let rec = &schedule.setups[matching[0]];
            used[matching[0]] = true;

            let Some(len) = instance.setup(prev.task, next.task).get() else {
                record(
                    Condition::A2,
                    format!(
                        "task {} may not follow task {} (forbidden transition)",
                        next.task, prev.task
                    ),
                    &mut violations,
                );
                continue;
            };
            let len = Time::from(len);
            if next.start < prev.end.saturating_add(len) {
                record(
                    Condition::A2,
                    format!(
                        "task {} starts at {} but its predecessor ends at {} and the setup needs {}",
                        next.task, next.start, prev.end, len
                    ),
                    &mut violations,
                );
            }
            if rec.start.checked_add(len) != Some(rec.end) {
                record(
                    Condition::A4,
                    format!(
                        "setup ({}, {}) runs [{}, {}) but needs {} time units",
                        rec.from, rec.to, rec.start, rec.end, len
                    ),
                    &mut violations,
                );
            }
            if rec.start < prev.end || rec.end > next.start {
                record(
                    Condition::A5,
                    format!(
                        "setup ({}, {}) runs [{}, {}) outside its window [{}, {})",
                        rec.from, rec.to, rec.start, rec.end, prev.end, next.start
                    ),
                    &mut violations,
                );
            }
        }
    }
    // A2 also forbids stray setups: before a first task, between non-adjacent
    // tasks, or on the wrong machine.
    if let Some(idx) = used.iter().position(|&u| !u) {
        let rec = &schedule.setups[idx];
        record(
            Condition::A2,
            format!(
                "setup ({}, {}) on machine {} matches no consecutive task pair",
                rec.from, rec.to, rec.machine
            ),
            &mut violations,
        );
    }

    // A3 + A6: capacity sweep over all positive-length setup intervals. With
    // explicit server ids, per-server exclusivity is checked as well.
    if let Some((time, running)) = capacity_breach(&schedule.setups, instance.servers()) {
        record(
            Condition::A6,
            format!(
                "{running} setups execute at time {time}, only {} servers exist",
                instance.servers()
            ),
            &mut violations,
        );
    }
    let mut by_server: Vec<Vec<(Time, Time)>> = vec![Vec::new(); instance.servers()];
    for rec in &schedule.setups {
        if let Some(server) = rec.server {
            if rec.end > rec.start {
                by_server[server].push((rec.start, rec.end));
            }
        }
    }
    'outer: for (server, mut intervals) in by_server.into_iter().enumerate() {
        intervals.sort_unstable();
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                record(
                    Condition::A6,
                    format!("server {server} runs two setups at time {}", w[1].0),
                    &mut violations,
                );
                break 'outer;
            }
        }
    }

    Ok(FeasibilityReport { violations })
}

/// First time at which more than `servers` setups execute, with the count.
///
/// Boundary sweep over interval endpoints; at equal times, ends are applied
/// before starts so that abutting setups never count as concurrent.
fn capacity_breach(setups: &[SetupRecord], servers: usize) -> Option<(Time, usize)> {
    let mut events: Vec<(Time, i32)> = Vec::with_capacity(setups.len() * 2);
    for rec in setups {
        if rec.end > rec.start {
            events.push((rec.start, 1));
            events.push((rec.end, -1));
        }
    }
    // Sort by time with -1 (end) before +1 (start).
    events.sort_unstable();
    let mut running = 0i32;
    for (time, delta) in events {
        running += delta;
        if running as usize > servers {
            return Some((time, running as usize));
        }
    }
    None
}

fn check_shape(instance: &Instance, schedule: &Schedule) -> Result<(), ValidateError> {
    if schedule.machines.len() != instance.machines() {
        return Err(ValidateError::MachineCount {
            got: schedule.machines.len(),
            expected: instance.machines(),
        });
    }
    for (row, chain) in schedule.machines.iter().enumerate() {
        for p in chain {
            if p.task >= instance.tasks() {
                return Err(ValidateError::TaskIndex {
                    task: p.task,
                    tasks: instance.tasks(),
                });
            }
            if p.machine != row {
                return Err(ValidateError::MachineMismatch {
                    task: p.task,
                    row,
                    named: p.machine,
                });
            }
        }
    }
    for rec in &schedule.setups {
        if rec.machine >= instance.machines() {
            return Err(ValidateError::SetupMachine {
                machine: rec.machine,
                machines: instance.machines(),
            });
        }
        for task in [rec.from, rec.to] {
            if task >= instance.tasks() {
                return Err(ValidateError::TaskIndex {
                    task,
                    tasks: instance.tasks(),
                });
            }
        }
        if let Some(server) = rec.server {
            if server >= instance.servers() {
                return Err(ValidateError::ServerIndex {
                    server,
                    servers: instance.servers(),
                });
            }
        }
    }
    let computed = compute_makespan(schedule);
    if schedule.makespan != computed {
        return Err(ValidateError::MakespanMismatch {
            stored: schedule.makespan,
            computed,
        });
    }
    Ok(())
}

/// Errors raised by [`assign_servers`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssignServersError {
    #[error("no server free at time {time}, capacity {servers} exceeded")]
    Capacity { time: Time, servers: usize },
}

/// Assign explicit server ids to all positive-length setups, greedily by
/// ascending start time (ties by machine, then successor), always picking the
/// lowest-indexed free server. Zero-length setups keep `server: None`.
///
/// Succeeds on every schedule whose setup concurrency never exceeds
/// `servers`; existing ids are recomputed.
pub fn assign_servers(schedule: &mut Schedule, servers: usize) -> Result<(), AssignServersError> {
    let mut order: Vec<usize> = (0..schedule.setups.len()).collect();
    order.sort_by_key(|&idx| {
        let s = &schedule.setups[idx];
        (s.start, s.machine, s.to)
    });

    let mut free_from: Vec<Time> = vec![0; servers];
    for idx in order {
        let rec = &mut schedule.setups[idx];
        if rec.end <= rec.start {
            rec.server = None;
            continue;
        }
        let server = free_from
            .iter()
            .position(|&free| free <= rec.start)
            .ok_or(AssignServersError::Capacity {
                time: rec.start,
                servers,
            })?;
        free_from[server] = rec.end;
        rec.server = Some(server);
    }
    Ok(())
}
