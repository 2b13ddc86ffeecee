//! Constructive heuristics for the server-constrained scheduling problem.
//!
//! Two list-scheduling constructions share the same skeleton — seed each
//! machine with a starting task, then repeatedly extend the machine that
//! currently ends first with a selected next task — and differ in when the
//! server constraint is enforced:
//!
//! * [`losos`] respects the servers during construction: every setup waits
//!   for a free server, so the result is feasible as built.
//! * [`rosol`] first builds as if setups needed no servers at all, then
//!   repairs the overcommitments in one left-to-right sweep, postponing the
//!   excess setups wherever more than `r` would run at once.
//!
//! Both are deterministic for a given instance, options, and seed.
//!
//! [`HeuristicOptions`] selects the starting rule (random or informed by
//! incoming setups), the next-task rule (greedy shortest setup or the
//! lookahead coefficient), the idleness reduction (prefer setups a lone free
//! server can finish before it is needed elsewhere), and whether the ends of
//! the finished schedule are re-optimized by relocating and swapping final
//! tasks ([`optimize_schedule_ends`]).

mod builder;
mod ends;
mod select;
mod start;
mod sweep;

pub use builder::BuilderState;
pub use ends::optimize_schedule_ends;
pub use select::{select_next_task, task_coefficient, task_coefficient_idle};
pub use start::generate_starting_tasks;

pub(crate) use builder::{Chains, Elem};
pub(crate) use ends::{append_task, optimize_ends, pop_last_task, EndsMode};
pub(crate) use sweep::resolve_conflicts;

use crate::instance::Instance;
use crate::schedule::Schedule;
use crate::validate::assign_servers;

/// How the initial task of each machine is chosen.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StartingMode {
    /// Uniformly random distinct tasks, drawn from the run's seed.
    Random,
    /// The tasks hardest to reach: machine k gets the task with the k-th
    /// largest minimum incoming setup (unreachable tasks first), so that
    /// expensive entries are paid at time zero where they cost nothing.
    Informed,
}

/// How the next task for a machine is chosen.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NextTaskMode {
    /// Smallest immediate setup, lowest task index on ties.
    Greedy,
    /// Smallest [`task_coefficient`]: the immediate setup weighed against
    /// the three cheapest ways the candidate could be reached later.
    Coefficient,
}

/// Configuration of one heuristic run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HeuristicOptions {
    pub starting_mode: StartingMode,
    pub next_task_mode: NextTaskMode,
    /// React to a lone free server by preferring setups it can finish
    /// before another machine needs it. Only meaningful for [`losos`] with
    /// coefficient selection; greedy selection is provably unaffected, and
    /// [`rosol`] rejects it because its construction ignores servers.
    pub idleness_reduction: bool,
    /// Re-optimize schedule ends after construction (and, for [`rosol`],
    /// between construction and conflict resolution).
    pub optimize_ends: bool,
    /// Seed for the random starting mode; ignored by the informed mode.
    pub seed: u64,
}

impl HeuristicOptions {
    /// Plain construction: random start, greedy selection, no end
    /// optimization.
    pub fn baseline(seed: u64) -> Self {
        HeuristicOptions {
            starting_mode: StartingMode::Random,
            next_task_mode: NextTaskMode::Greedy,
            idleness_reduction: false,
            optimize_ends: false,
            seed,
        }
    }

    /// Informed start plus end optimization ("SE"): the strengthening that
    /// applies to both constructions.
    pub fn se(seed: u64) -> Self {
        HeuristicOptions {
            starting_mode: StartingMode::Informed,
            next_task_mode: NextTaskMode::Greedy,
            idleness_reduction: false,
            optimize_ends: true,
            seed,
        }
    }

    /// Everything on ("SEIC"): informed start, end optimization, idleness
    /// reduction, coefficient selection. Only valid for [`losos`].
    pub fn seic(seed: u64) -> Self {
        HeuristicOptions {
            starting_mode: StartingMode::Informed,
            next_task_mode: NextTaskMode::Coefficient,
            idleness_reduction: true,
            optimize_ends: true,
            seed,
        }
    }
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions::baseline(0)
    }
}

/// Failure modes of the heuristic constructions.
#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum HeuristicError {
    /// Fewer tasks than machines: each machine needs a starting task.
    #[error("cannot seed {machines} machines from {tasks} tasks")]
    TooFewTasks { tasks: usize, machines: usize },
    /// Idleness reduction requested for a construction that ignores servers.
    #[error("idleness reduction requires server-aware construction")]
    IdlenessNotApplicable,
    /// Construction painted itself into a corner: every remaining task is
    /// unreachable from machine `machine`'s last task `from` (`to` is the
    /// candidate the selection fell back to).
    #[error("no allowed transition from task {from} on machine {machine} (best candidate {to})")]
    InfeasibleConstruction {
        machine: usize,
        from: usize,
        to: usize,
    },
    /// A consecutive task pair of a schedule has no matching setup record.
    #[error("no setup record between consecutive tasks {from} and {to} on machine {machine}")]
    MissingSetupRecord {
        machine: usize,
        from: usize,
        to: usize,
    },
    /// A setup record is duplicated or matches no consecutive task pair.
    #[error("duplicate or unmatched setup record {from} -> {to} on machine {machine}")]
    DuplicateSetupRecord {
        machine: usize,
        from: usize,
        to: usize,
    },
}

/// List scheduling with server-synchronized setups.
///
/// Machines are seeded with starting tasks at time zero. Then, while tasks
/// remain, the machine with the earliest end receives the task picked by
/// the selection rule; its setup starts once the machine has finished *and*
/// a server is free, and the server stays occupied until the task starts.
/// With `optimize_ends`, final tasks are relocated and swapped afterwards
/// while that improves the makespan.
///
/// The returned schedule is feasible and carries server assignments.
pub fn losos(
    instance: &Instance,
    options: &HeuristicOptions,
) -> Result<Schedule, HeuristicError> {
    let mut chains = construct(instance, options, true)?;
    if options.optimize_ends {
        optimize_ends(
            &mut chains,
            instance,
            EndsMode::Repair {
                servers: instance.servers(),
            },
        );
    }
    Ok(finish(chains, instance))
}

/// List scheduling against relaxed servers, then conflict resolution.
///
/// The construction is the same as [`losos`] except that setups start the
/// moment their machine is free, as if servers were unlimited. A
/// left-to-right sweep then repairs the relaxation: wherever more setups
/// run than servers exist, the excess setups — those with the least slack
/// before they would grow the makespan — are postponed. With
/// `optimize_ends`, ends are re-optimized both before the sweep (ignoring
/// servers) and after it (respecting them).
///
/// Rejects `idleness_reduction`: the relaxed construction has no server
/// state to react to.
///
/// The returned schedule is feasible and carries server assignments.
pub fn rosol(
    instance: &Instance,
    options: &HeuristicOptions,
) -> Result<Schedule, HeuristicError> {
    if options.idleness_reduction {
        return Err(HeuristicError::IdlenessNotApplicable);
    }
    let mut chains = construct(instance, options, false)?;
    if options.optimize_ends {
        optimize_ends(&mut chains, instance, EndsMode::ServerFree);
    }
    resolve_conflicts(&mut chains, instance.servers(), 0);
    if options.optimize_ends {
        optimize_ends(
            &mut chains,
            instance,
            EndsMode::Repair {
                servers: instance.servers(),
            },
        );
    }
    Ok(finish(chains, instance))
}

/// The shared construction loop of both heuristics.
fn construct(
    instance: &Instance,
    options: &HeuristicOptions,
    server_gated: bool,
) -> Result<Chains, HeuristicError> {
    let starting = generate_starting_tasks(instance, options.starting_mode, options.seed)?;
    let coefficient = options.next_task_mode == NextTaskMode::Coefficient;
    let mut state = BuilderState::new(instance, &starting, server_gated, coefficient);

    while !state.unscheduled().is_empty() {
        let machine = state.closest_ending_machine();
        let current = state.last_task(machine);
        let (task, setup) = select_next_task(
            instance,
            &state,
            current,
            options.next_task_mode,
            server_gated && options.idleness_reduction,
        )
        .expect("tasks remain unscheduled");
        if setup.is_inf() {
            return Err(HeuristicError::InfeasibleConstruction {
                machine,
                from: current,
                to: task,
            });
        }
        state.place(instance, machine, task, server_gated);
    }
    Ok(state.chains)
}

/// Convert finished chains to a schedule and assign servers.
fn finish(chains: Chains, instance: &Instance) -> Schedule {
    let mut schedule = chains.to_schedule();
    assign_servers(&mut schedule, instance.servers())
        .expect("constructed schedules respect server capacity");
    schedule
}
