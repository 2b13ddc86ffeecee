//! Warm-started solving: the best heuristic schedule, then as much exact or
//! local improvement as the time budget allows.
//!
//! The warm start is the better of the two strongest heuristic
//! configurations (construction with informed starts, coefficient selection
//! and idleness reduction; and the relaxed construction with end
//! optimization). What happens next depends on instance size:
//!
//! - Within [`ExactLimits::default`]'s caps, the exact solver runs with the
//!   warm start as incumbent and the remaining budget as its deadline. The
//!   result is never worse than the warm start and is marked proven when
//!   the search completes.
//! - Beyond the caps, a suffix re-optimization descent runs instead: it
//!   repeatedly strips the last tasks from the longest machine and a
//!   partner machine, re-appends them in every arrangement, repairs server
//!   conflicts, and keeps the best strictly improving result. Deterministic
//!   enumeration order and strict improvement make the descent reproducible
//!   whenever it reaches its fixpoint inside the budget.
//!
//! Either way the report carries the lower bound, the relative difference
//! to it, and whether the final makespan is proven optimal (exhausted
//! search, or makespan equal to the lower bound).

use std::time::{Duration, Instant};

use crate::bounds::{lower_bound, LowerBoundReport};
use crate::exact::{exact_solve, ExactLimits};
use crate::heuristics::{
    append_task, losos, optimize_ends, pop_last_task, resolve_conflicts, rosol, Chains, Elem,
    EndsMode, HeuristicError, HeuristicOptions,
};
use crate::instance::{Instance, Time};
use crate::metrics::relative_difference;
use crate::schedule::Schedule;
use crate::validate::assign_servers;

/// Everything a caller needs to judge a warm-started solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub schedule: Schedule,
    pub makespan: Time,
    /// Makespan of the heuristic schedule the solve started from.
    pub warm_start_makespan: Time,
    pub lower_bound: LowerBoundReport,
    /// Relative difference of `makespan` to the integer lower bound, as a
    /// fraction; infinite when the bound is zero but the makespan is not.
    pub rd_to_lb: f64,
    pub runtime: Duration,
    /// True when the makespan is the proven optimum: the exact search
    /// exhausted its space, or the makespan meets the lower bound.
    pub proven_optimal: bool,
}

/// Solve with a heuristic warm start and spend the remaining budget on
/// exact search (small instances) or suffix re-optimization (large ones).
///
/// The result is never worse than the warm start. `seed` feeds the
/// heuristics; the wall-clock budget covers everything including warm-start
/// construction.
pub fn warm_started_solve(
    instance: &Instance,
    seed: u64,
    time_limit: Duration,
) -> Result<SolveReport, HeuristicError> {
    let started = Instant::now();
    let deadline = started + time_limit;

    let seic = losos(instance, &HeuristicOptions::seic(seed))?;
    let se = rosol(instance, &HeuristicOptions::se(seed))?;
    let warm = if se.makespan < seic.makespan { se } else { seic };
    let warm_start_makespan = warm.makespan;

    let caps = ExactLimits::default();
    let within_caps =
        instance.tasks() <= caps.max_tasks && instance.machines() <= caps.max_machines;
    let (schedule, exact_proven) = if within_caps {
        let limits = ExactLimits {
            time_limit: Some(deadline.saturating_duration_since(Instant::now())),
            warm_start: Some(warm),
            ..caps
        };
        let result =
            exact_solve(instance, &limits).expect("the warm start seeds a feasible incumbent");
        (result.schedule, result.proven_optimal)
    } else {
        let mut improved = improve_suffixes(instance, &warm, deadline)?;
        assign_servers(&mut improved, instance.servers())
            .expect("repaired schedules respect server capacity");
        (improved, false)
    };

    let makespan = schedule.makespan;
    let lb = lower_bound(instance);
    let rd_to_lb = match relative_difference(makespan, lb.bound_int) {
        Ok(rd) => rd,
        Err(_) if makespan == 0 => 0.0,
        Err(_) => f64::INFINITY,
    };
    Ok(SolveReport {
        proven_optimal: exact_proven || makespan == lb.bound_int,
        schedule,
        makespan,
        warm_start_makespan,
        lower_bound: lb,
        rd_to_lb,
        runtime: started.elapsed(),
    })
}

/// How many tasks may be stripped from each machine of a pair per move.
const SUFFIX_DEPTH: usize = 2;

/// Local descent for instances too large to solve exactly: re-sequence the
/// suffixes of the longest machine and one partner, accepting only strict
/// makespan improvements; after each accepted move the end optimizer runs
/// again. Stops at a fixpoint or at the deadline.
fn improve_suffixes(
    instance: &Instance,
    warm: &Schedule,
    deadline: Instant,
) -> Result<Schedule, HeuristicError> {
    let servers = instance.servers();
    let machines = instance.machines();
    let mut chains = Chains::from_schedule(warm)?;

    'outer: loop {
        if Instant::now() >= deadline {
            break;
        }
        let makespan = chains.makespan();
        let longest = (0..machines)
            .max_by_key(|&k| (chains.machine_end(k), std::cmp::Reverse(k)))
            .expect("instances have at least one machine");
        if chains.rows[longest].is_empty() {
            break;
        }

        let mut best: Option<(Time, Chains)> = None;
        for partner in 0..machines {
            if partner == longest {
                continue;
            }
            if Instant::now() >= deadline {
                break 'outer;
            }
            let u_max = SUFFIX_DEPTH.min(task_count(&chains, longest));
            let v_max = SUFFIX_DEPTH.min(task_count(&chains, partner));
            for u in 1..=u_max {
                for v in 0..=v_max {
                    try_suffix_moves(
                        instance,
                        &chains,
                        servers,
                        longest,
                        partner,
                        u,
                        v,
                        makespan,
                        &mut best,
                    );
                }
            }
        }

        match best {
            Some((_, better)) => {
                chains = better;
                optimize_ends(&mut chains, instance, EndsMode::Repair { servers });
            }
            None => break,
        }
    }

    Ok(chains.to_schedule())
}

fn task_count(chains: &Chains, machine: usize) -> usize {
    chains.rows[machine]
        .iter()
        .filter(|p| matches!(p.elem, Elem::Task(_)))
        .count()
}

/// Start of the machine's last task together with its preceding setup; the
/// earliest instant a pop invalidates.
fn tail_start(chains: &Chains, machine: usize) -> Time {
    let row = &chains.rows[machine];
    let n = row.len();
    if n >= 2 && matches!(row[n - 2].elem, Elem::Setup { .. }) {
        row[n - 2].start
    } else {
        row[n - 1].start
    }
}

/// Strip `u` tasks from machine `a` and `v` from machine `b`, then try every
/// arrangement of the stripped pool over the two machine ends. Candidates
/// are repaired from the earliest modified instant and compared by repaired
/// makespan; strict improvements replace `best` (first found wins ties).
#[allow(clippy::too_many_arguments)]
fn try_suffix_moves(
    instance: &Instance,
    chains: &Chains,
    servers: usize,
    a: usize,
    b: usize,
    u: usize,
    v: usize,
    makespan: Time,
    best: &mut Option<(Time, Chains)>,
) {
    let mut stripped = chains.clone();
    let mut pool = Vec::with_capacity(u + v);
    let mut modified_from = Time::MAX;
    for _ in 0..u {
        modified_from = modified_from.min(tail_start(&stripped, a));
        pool.push(pop_last_task(&mut stripped, a));
    }
    for _ in 0..v {
        modified_from = modified_from.min(tail_start(&stripped, b));
        pool.push(pop_last_task(&mut stripped, b));
    }

    for (seq_a, seq_b) in arrangements(&pool) {
        let mut cand = stripped.clone();
        let mut from = modified_from;
        let mut feasible = true;
        for &task in seq_a.iter() {
            match append_task(&mut cand, instance, a, task) {
                Some(start) => from = from.min(start),
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible {
            for &task in seq_b.iter() {
                match append_task(&mut cand, instance, b, task) {
                    Some(start) => from = from.min(start),
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
        }
        if !feasible {
            continue;
        }
        resolve_conflicts(&mut cand, servers, from);
        let mk = cand.makespan();
        let bar = best.as_ref().map_or(makespan, |(b, _)| *b);
        if mk < bar {
            *best = Some((mk, cand));
        }
    }
}

/// Every way to deal the pool onto the two machines: an ordered selection
/// for the first, the remaining tasks in every order for the second.
fn arrangements(pool: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut used = vec![false; pool.len()];
    let mut seq_a = Vec::new();
    build_first(pool, &mut used, &mut seq_a, &mut out);
    out
}

fn build_first(
    pool: &[usize],
    used: &mut [bool],
    seq_a: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, Vec<usize>)>,
) {
    let mut seq_b = Vec::new();
    build_second(pool, used, seq_a, &mut seq_b, out);
    for i in 0..pool.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        seq_a.push(pool[i]);
        build_first(pool, used, seq_a, out);
        seq_a.pop();
        used[i] = false;
    }
}

fn build_second(
    pool: &[usize],
    used: &mut [bool],
    seq_a: &[usize],
    seq_b: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, Vec<usize>)>,
) {
    if seq_a.len() + seq_b.len() == pool.len() {
        out.push((seq_a.to_vec(), seq_b.clone()));
        return;
    }
    for i in 0..pool.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        seq_b.push(pool[i]);
        build_second(pool, used, seq_a, seq_b, out);
        seq_b.pop();
        used[i] = false;
    }
}
