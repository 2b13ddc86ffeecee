//! End-of-schedule optimization: relocate and swap the last tasks of
//! machines to shrink the makespan.
//!
//! Construction heuristics choose from ever fewer tasks near the end, so
//! the final stretch carries the longest setups and the largest imbalance
//! between machines. Two passes attack this, in order:
//!
//! 1. Relocation: while the longest machine's last task can finish earlier
//!    at the end of another machine (strictly reducing the makespan), move
//!    it there, choosing the target that ends shortest after the move.
//! 2. Swapping: repeatedly exchange the last tasks of one machine pair,
//!    preferring the swap that reduces the makespan most; when none does,
//!    accept a swap that shrinks the pair's longer schedule without growing
//!    the makespan, buying room for later improvement.
//!
//! Candidates are evaluated against the server constraint they must live
//! with: the modified tails are retimed compactly and the conflict sweep
//! reruns from the earliest modified instant, so a move is judged by the
//! makespan it achieves after repair (`Repair` mode). Mid-ROSOL, before
//! servers are imposed at all, candidates are judged directly (`ServerFree`
//! mode).
//!
//! Termination: relocations strictly decrease the makespan. Swaps strictly
//! decrease the machine-end profile (ends sorted descending, compared
//! lexicographically); a repair can ripple into other machines' tails, so
//! the profile check is enforced explicitly on every accepted swap.

use crate::instance::{Instance, Time};
use crate::schedule::Schedule;

use super::builder::{Chains, Elem, Placed};
use super::sweep::resolve_conflicts;
use super::HeuristicError;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum EndsMode {
    /// Evaluate candidates without server constraints (mid-ROSOL).
    ServerFree,
    /// Evaluate candidates after repairing server conflicts.
    Repair { servers: usize },
}

/// Re-optimize the ends of a complete schedule.
///
/// The input must place every task and, for meaningful results, respect the
/// servers. Setup records in the result carry no server assignments; run
/// [`crate::validate::assign_servers`] to add them.
pub fn optimize_schedule_ends(
    instance: &Instance,
    schedule: &Schedule,
) -> Result<Schedule, HeuristicError> {
    let mut chains = Chains::from_schedule(schedule)?;
    optimize_ends(
        &mut chains,
        instance,
        EndsMode::Repair {
            servers: instance.servers(),
        },
    );
    Ok(chains.to_schedule())
}

pub(crate) fn optimize_ends(chains: &mut Chains, instance: &Instance, mode: EndsMode) {
    relocate_longest(chains, instance, mode);
    swap_pairs(chains, instance, mode);
}

fn relocate_longest(chains: &mut Chains, instance: &Instance, mode: EndsMode) {
    let machines = chains.rows.len();
    loop {
        let makespan = chains.makespan();
        let longest = (0..machines)
            .max_by_key(|&k| (chains.machine_end(k), std::cmp::Reverse(k)))
            .expect("at least one machine");
        if chains.rows[longest].is_empty() {
            return;
        }

        let mut best: Option<(Time, usize, Chains)> = None;
        for target in 0..machines {
            if target == longest {
                continue;
            }
            let Some(cand) = try_relocate(chains, instance, mode, longest, target) else {
                continue;
            };
            if cand.makespan() >= makespan {
                continue;
            }
            let key = (cand.machine_end(target), target);
            if best
                .as_ref()
                .map_or(true, |(end, t, _)| key < (*end, *t))
            {
                best = Some((key.0, key.1, cand));
            }
        }
        match best {
            Some((_, _, cand)) => *chains = cand,
            None => return,
        }
    }
}

fn swap_pairs(chains: &mut Chains, instance: &Instance, mode: EndsMode) {
    let machines = chains.rows.len();
    loop {
        let makespan = chains.makespan();
        let profile = end_profile(chains);

        // Tier 1: largest makespan decrease. Tier 2: largest decrease of the
        // pair's longer end at unchanged makespan, guarded by a strict
        // profile decrease.
        let mut best_reduce: Option<(Time, (usize, usize), Chains)> = None;
        let mut best_balance: Option<(Time, (usize, usize), Chains)> = None;

        for a in 0..machines {
            for b in (a + 1)..machines {
                if chains.rows[a].is_empty() || chains.rows[b].is_empty() {
                    continue;
                }
                let Some(cand) = try_swap(chains, instance, mode, a, b) else {
                    continue;
                };
                let new_makespan = cand.makespan();
                if new_makespan < makespan {
                    if best_reduce
                        .as_ref()
                        .map_or(true, |(mk, pair, _)| (new_makespan, (a, b)) < (*mk, *pair))
                    {
                        best_reduce = Some((new_makespan, (a, b), cand));
                    }
                } else if new_makespan == makespan {
                    let old_pair_max = chains.machine_end(a).max(chains.machine_end(b));
                    let new_pair_max = cand.machine_end(a).max(cand.machine_end(b));
                    if new_pair_max >= old_pair_max || end_profile(&cand) >= profile {
                        continue;
                    }
                    let gain = old_pair_max - new_pair_max;
                    if best_balance
                        .as_ref()
                        .map_or(true, |(g, pair, _)| {
                            (std::cmp::Reverse(gain), (a, b))
                                < (std::cmp::Reverse(*g), *pair)
                        })
                    {
                        best_balance = Some((gain, (a, b), cand));
                    }
                }
            }
        }

        if let Some((_, _, cand)) = best_reduce {
            *chains = cand;
        } else if let Some((_, _, cand)) = best_balance {
            *chains = cand;
        } else {
            return;
        }
    }
}

/// Machine ends sorted descending; lexicographic order makes this the
/// termination potential for the swap loop.
fn end_profile(chains: &Chains) -> Vec<Time> {
    let mut ends: Vec<Time> = (0..chains.rows.len())
        .map(|k| chains.machine_end(k))
        .collect();
    ends.sort_unstable_by(|x, y| y.cmp(x));
    ends
}

fn try_relocate(
    chains: &Chains,
    instance: &Instance,
    mode: EndsMode,
    source: usize,
    target: usize,
) -> Option<Chains> {
    let mut cand = chains.clone();
    let task = pop_last_task(&mut cand, source);
    let modified_from = append_task(&mut cand, instance, target, task)?;
    repair(&mut cand, mode, modified_from);
    Some(cand)
}

fn try_swap(
    chains: &Chains,
    instance: &Instance,
    mode: EndsMode,
    a: usize,
    b: usize,
) -> Option<Chains> {
    let mut cand = chains.clone();
    let task_a = pop_last_task(&mut cand, a);
    let task_b = pop_last_task(&mut cand, b);
    let from_a = append_task(&mut cand, instance, a, task_b)?;
    let from_b = append_task(&mut cand, instance, b, task_a)?;
    repair(&mut cand, mode, from_a.min(from_b));
    Some(cand)
}

fn repair(cand: &mut Chains, mode: EndsMode, modified_from: Time) {
    if let EndsMode::Repair { servers } = mode {
        resolve_conflicts(cand, servers, modified_from);
    }
}

/// Remove a machine's last task and, when present, the setup leading to it.
pub(crate) fn pop_last_task(chains: &mut Chains, machine: usize) -> usize {
    let row = &mut chains.rows[machine];
    let last = row.pop().expect("machine not empty");
    let Elem::Task(task) = last.elem else {
        unreachable!("chains end with a task")
    };
    if matches!(row.last().map(|p| p.elem), Some(Elem::Setup { .. })) {
        row.pop();
    }
    task
}

/// Append `task` compactly at the machine's end: directly at its last
/// element, behind the connecting setup when the machine is not empty.
/// Returns the start of the first added element, or `None` on a forbidden
/// transition.
pub(crate) fn append_task(
    chains: &mut Chains,
    instance: &Instance,
    machine: usize,
    task: usize,
) -> Option<Time> {
    let end = chains.machine_end(machine);
    let row = &mut chains.rows[machine];
    let task_start = match chains_last_task(row) {
        Some(prev) => {
            let len = Time::from(instance.setup(prev, task).get()?);
            row.push(Placed {
                elem: Elem::Setup {
                    from: prev,
                    to: task,
                },
                start: end,
                end: end + len,
            });
            end + len
        }
        None => 0,
    };
    row.push(Placed {
        elem: Elem::Task(task),
        start: task_start,
        end: task_start + Time::from(instance.processing(task)),
    });
    Some(task_start.min(end))
}

fn chains_last_task(row: &[Placed]) -> Option<usize> {
    row.iter().rev().find_map(|p| match p.elem {
        Elem::Task(task) => Some(task),
        Elem::Setup { .. } => None,
    })
}
