//! Desk-scale exact solver and the timing oracle underneath it.
//!
//! [`exact_solve`] enumerates, per machine, every canonical set of task
//! sequences (branch and bound), and for each complete set asks
//! [`exact_timing`]'s machinery for the best achievable timing under the
//! server constraint. It exists to verify heuristics and to squeeze small
//! instances to proven optimality, not to scale: [`ExactLimits`] caps the
//! accepted size and a time limit turns the proof into best-effort.
//!
//! Given fixed sequences, setup timing is still a combinatorial decision:
//! which server performs which setup, and in what order. The timing search
//! enumerates the assignments of positive-length setups to servers together
//! with each server's total order — every feasible timing induces such a
//! choice, and the earliest-start forward pass over the combined precedence
//! graph (machine chains plus server chains) dominates the induced timing,
//! so the minimum over all choices is exact. Orders whose combined graph is
//! cyclic are contradictions and are skipped; partial choices are pruned by
//! the forward pass of the partial graph, which only grows as lists extend.
//!
//! Everything here is single-threaded and deterministic: ties fall to the
//! lexicographically first choice in a fixed enumeration order.

use std::time::{Duration, Instant};

use crate::bounds::lower_bound;
use crate::instance::{Instance, Time};
use crate::schedule::{Schedule, SetupRecord, TaskPlacement};

/// Positive-length setups beyond this count make the timing enumeration
/// refuse (it is factorial); [`ExactLimits::max_tasks`] keeps [`exact_solve`]
/// safely below it.
pub const SETUP_ENUMERATION_CAP: usize = 8;

/// Size and budget gates for [`exact_solve`].
///
/// The defaults accept desk-scale instances only; construct the struct with
/// larger caps to override explicitly. `time_limit: None` means no deadline.
#[derive(Clone, Debug)]
pub struct ExactLimits {
    pub max_tasks: usize,
    pub max_machines: usize,
    pub time_limit: Option<Duration>,
    /// Feasible schedule used as the initial incumbent; the result is never
    /// worse than it.
    pub warm_start: Option<Schedule>,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_tasks: 8,
            max_machines: 3,
            time_limit: None,
            warm_start: None,
        }
    }
}

/// Outcome of an exact search.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactResult {
    pub schedule: Schedule,
    /// True when the search space was exhausted: the schedule's makespan is
    /// the optimum. False when the time limit cut the search short.
    pub proven_optimal: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ExactError {
    #[error(
        "instance with {tasks} tasks on {machines} machines exceeds the exact limits \
         ({max_tasks} tasks, {max_machines} machines); raise the limits to override"
    )]
    OverLimits {
        tasks: usize,
        machines: usize,
        max_tasks: usize,
        max_machines: usize,
    },
    #[error("sequences must span exactly {expected} machines, got {machines}")]
    MachineCount { machines: usize, expected: usize },
    #[error("sequences must place every task exactly once; task {task} appears {count} times")]
    SequenceCoverage { task: usize, count: usize },
    #[error("transition {from} -> {to} on machine {machine} is forbidden")]
    ForbiddenTransition {
        machine: usize,
        from: usize,
        to: usize,
    },
    #[error("{setups} positive-length setups exceed the timing enumeration cap of {cap}")]
    TooManySetups { setups: usize, cap: usize },
    #[error("search exhausted without finding a feasible schedule")]
    Infeasible,
    #[error("time limit reached before any feasible schedule was found")]
    Timeout,
}

/// Minimal makespan achievable for the given per-machine task orders.
///
/// `sequences` must form a partition of the instance's tasks over exactly
/// its machines (empty machines allowed). The task-to-machine assignment and
/// the order within each machine are taken as given; only the setup timing
/// under the server constraint is optimized. Fails on forbidden consecutive
/// pairs and on more than [`SETUP_ENUMERATION_CAP`] positive setups.
pub fn exact_timing(instance: &Instance, sequences: &[Vec<usize>]) -> Result<Time, ExactError> {
    check_partition(instance, sequences)?;
    let best = timing_search(instance, sequences, None, None, &mut false)?
        .expect("a feasible setup order always exists without a cutoff");
    Ok(best.0)
}

/// Exhaustive branch and bound over task assignments and sequences.
///
/// Machines are filled one at a time; identical machines are deduplicated
/// by requiring the first tasks of non-empty machines to increase (empty
/// machines trail). Partial nodes are pruned against the incumbent with a
/// load bound: the longest current chain, mean machine load (placed work
/// plus remaining processing plus unavoidable remaining setups), and mean
/// server load. Complete sequence sets are timed exactly, reusing the
/// incumbent as a cutoff.
///
/// The incumbent starts from `limits.warm_start` when given, so the result
/// is never worse than the warm start. With a time limit, the best-so-far
/// is returned with `proven_optimal: false` once the deadline passes.
pub fn exact_solve(instance: &Instance, limits: &ExactLimits) -> Result<ExactResult, ExactError> {
    if instance.tasks() > limits.max_tasks || instance.machines() > limits.max_machines {
        return Err(ExactError::OverLimits {
            tasks: instance.tasks(),
            machines: instance.machines(),
            max_tasks: limits.max_tasks,
            max_machines: limits.max_machines,
        });
    }
    let deadline = limits.time_limit.map(|d| Instant::now() + d);

    // Branch order: tasks by descending processing time (ties: lower index);
    // a pure pruning-speed choice.
    let mut order: Vec<usize> = (0..instance.tasks()).collect();
    order.sort_unstable_by_key(|&j| (std::cmp::Reverse(instance.processing(j)), j));

    let z: Vec<u64> = lower_bound(instance)
        .z
        .iter()
        .map(|v| u64::from(v.unwrap_or(0)))
        .collect();

    let sum_p: u64 = instance
        .processing_times()
        .iter()
        .map(|&p| u64::from(p))
        .sum();

    let mut search = Search {
        instance,
        order: &order,
        z: &z,
        deadline,
        timed_out: false,
        error: None,
        incumbent: limits
            .warm_start
            .as_ref()
            .map(|s| (crate::schedule::compute_makespan(s), s.clone())),
        seqs: Vec::new(),
        used: vec![false; instance.tasks()],
        loads: Vec::new(),
        sum_loads: 0,
        sum_setups: 0,
        sum_p_rem: sum_p,
    };

    for &task in &order {
        search.open_machine(task);
        search.extend();
        search.close_machine(task);
        if search.error.is_some() || search.timed_out {
            break;
        }
    }

    if let Some(err) = search.error {
        return Err(err);
    }
    match search.incumbent {
        Some((_, schedule)) => Ok(ExactResult {
            schedule,
            proven_optimal: !search.timed_out,
        }),
        None => Err(if search.timed_out {
            ExactError::Timeout
        } else {
            ExactError::Infeasible
        }),
    }
}

struct Search<'a> {
    instance: &'a Instance,
    order: &'a [usize],
    /// Cheapest incoming setup per task (0 when unbounded), for the
    /// remaining-work bound.
    z: &'a [u64],
    deadline: Option<Instant>,
    timed_out: bool,
    error: Option<ExactError>,
    incumbent: Option<(Time, Schedule)>,
    seqs: Vec<Vec<usize>>,
    used: Vec<bool>,
    /// Server-free compact end of each open machine's chain.
    loads: Vec<Time>,
    sum_loads: u64,
    sum_setups: u64,
    sum_p_rem: u64,
}

impl Search<'_> {
    fn open_machine(&mut self, task: usize) {
        let p = Time::from(self.instance.processing(task));
        self.seqs.push(vec![task]);
        self.loads.push(p);
        self.used[task] = true;
        self.sum_loads += p;
        self.sum_p_rem -= p;
    }

    fn close_machine(&mut self, task: usize) {
        let p = Time::from(self.instance.processing(task));
        self.seqs.pop();
        self.loads.pop();
        self.used[task] = false;
        self.sum_loads -= p;
        self.sum_p_rem += p;
    }

    fn push_task(&mut self, task: usize, setup: Time) {
        let cur = self.seqs.len() - 1;
        let p = Time::from(self.instance.processing(task));
        self.seqs[cur].push(task);
        self.loads[cur] += setup + p;
        self.used[task] = true;
        self.sum_loads += setup + p;
        self.sum_setups += setup;
        self.sum_p_rem -= p;
    }

    fn pop_task(&mut self, task: usize, setup: Time) {
        let cur = self.seqs.len() - 1;
        let p = Time::from(self.instance.processing(task));
        self.seqs[cur].pop();
        self.loads[cur] -= setup + p;
        self.used[task] = false;
        self.sum_loads -= setup + p;
        self.sum_setups -= setup;
        self.sum_p_rem += p;
    }

    fn extend(&mut self) {
        if self.timed_out || self.error.is_some() {
            return;
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                self.timed_out = true;
                return;
            }
        }
        if self.used.iter().all(|&u| u) {
            self.leaf();
            return;
        }
        if let Some((inc, _)) = &self.incumbent {
            if self.node_bound() >= *inc {
                return;
            }
        }

        // Extend the currently open machine.
        let cur = self.seqs.len() - 1;
        let last = *self.seqs[cur].last().expect("open machines are non-empty");
        for pos in 0..self.order.len() {
            let task = self.order[pos];
            if self.used[task] {
                continue;
            }
            let Some(setup) = self.instance.setup(last, task).get() else {
                continue;
            };
            let setup = Time::from(setup);
            self.push_task(task, setup);
            self.extend();
            self.pop_task(task, setup);
        }

        // Or open the next machine; its first task must exceed the current
        // machine's first (canonical labeling of identical machines).
        if self.seqs.len() < self.instance.machines() {
            let first_cur = self.seqs[cur][0];
            for pos in 0..self.order.len() {
                let task = self.order[pos];
                if self.used[task] || task <= first_cur {
                    continue;
                }
                self.open_machine(task);
                self.extend();
                self.close_machine(task);
            }
        }
    }

    fn leaf(&mut self) {
        let mut full: Vec<Vec<usize>> = self.seqs.clone();
        full.resize(self.instance.machines(), Vec::new());
        let cutoff = self.incumbent.as_ref().map(|(mk, _)| *mk);
        match timing_search(
            self.instance,
            &full,
            cutoff,
            self.deadline,
            &mut self.timed_out,
        ) {
            Ok(Some((makespan, schedule))) => self.incumbent = Some((makespan, schedule)),
            Ok(None) => {}
            Err(err) => self.error = Some(err),
        }
    }

    /// Lower bound on any completion of this node; valid to prune when it
    /// meets the incumbent.
    fn node_bound(&self) -> Time {
        let m = self.instance.machines() as u64;
        let r = self.instance.servers() as u64;

        // Remaining tasks each pay at least their cheapest incoming setup,
        // except those that can still start a not-yet-opened machine: drop
        // the largest such values.
        let mut z_rem: Vec<u64> = (0..self.used.len())
            .filter(|&j| !self.used[j])
            .map(|j| self.z[j])
            .collect();
        z_rem.sort_unstable_by_key(|&v| std::cmp::Reverse(v));
        let may_be_first = self.instance.machines() - self.seqs.len();
        let z_eff: u64 = z_rem.iter().skip(may_be_first).sum();

        let longest = self.loads.iter().copied().max().unwrap_or(0);
        let machine_mean = (self.sum_loads + self.sum_p_rem + z_eff).div_ceil(m);
        let server_mean = (self.sum_setups + z_eff).div_ceil(r);
        longest.max(machine_mean).max(server_mean)
    }
}

fn check_partition(instance: &Instance, sequences: &[Vec<usize>]) -> Result<(), ExactError> {
    if sequences.len() != instance.machines() {
        return Err(ExactError::MachineCount {
            machines: sequences.len(),
            expected: instance.machines(),
        });
    }
    let mut counts = vec![0usize; instance.tasks()];
    for row in sequences {
        for &task in row {
            if task >= counts.len() {
                return Err(ExactError::SequenceCoverage { task, count: 0 });
            }
            counts[task] += 1;
        }
    }
    if let Some(task) = counts.iter().position(|&c| c != 1) {
        return Err(ExactError::SequenceCoverage {
            task,
            count: counts[task],
        });
    }
    Ok(())
}

/// One node of the timing graph, for rebuilding the witness schedule.
#[derive(Clone, Copy)]
enum TimingElem {
    Task(usize),
    Setup { from: usize, to: usize },
}

/// The fixed (sequence-induced) part of a timing problem: machine chains
/// flattened into one node array, machine edges implicit between chain
/// neighbors.
struct TimingProblem {
    offsets: Vec<usize>,
    row_lens: Vec<usize>,
    lens: Vec<Time>,
    elems: Vec<TimingElem>,
    /// Node ids of positive-length setups, the enumeration targets.
    setups: Vec<usize>,
}

impl TimingProblem {
    fn build(instance: &Instance, sequences: &[Vec<usize>]) -> Result<Self, ExactError> {
        let mut offsets = Vec::with_capacity(sequences.len());
        let mut row_lens = Vec::with_capacity(sequences.len());
        let mut lens = Vec::new();
        let mut elems = Vec::new();
        let mut setups = Vec::new();
        for (k, row) in sequences.iter().enumerate() {
            offsets.push(lens.len());
            for (pos, &task) in row.iter().enumerate() {
                if pos > 0 {
                    let from = row[pos - 1];
                    let Some(o) = instance.setup(from, task).get() else {
                        return Err(ExactError::ForbiddenTransition {
                            machine: k,
                            from,
                            to: task,
                        });
                    };
                    if o > 0 {
                        setups.push(lens.len());
                    }
                    lens.push(Time::from(o));
                    elems.push(TimingElem::Setup { from, to: task });
                }
                lens.push(Time::from(instance.processing(task)));
                elems.push(TimingElem::Task(task));
            }
            row_lens.push(lens.len() - offsets[k]);
        }
        Ok(TimingProblem {
            offsets,
            row_lens,
            lens,
            elems,
            setups,
        })
    }

    /// Earliest starts under the given server chains; `None` when the
    /// combined precedence graph is cyclic (a contradictory server order).
    /// Works on partial server lists too, where it is a lower bound for
    /// every completion.
    fn forward_pass(&self, lists: &[Vec<usize>]) -> Option<(Time, Vec<Time>)> {
        let n = self.lens.len();
        let mut server_edges: Vec<(usize, usize)> = Vec::new();
        for list in lists {
            for pair in list.windows(2) {
                server_edges.push((self.setups[pair[0]], self.setups[pair[1]]));
            }
        }

        let mut indeg = vec![0u8; n];
        for (k, &off) in self.offsets.iter().enumerate() {
            for p in 1..self.row_lens[k] {
                indeg[off + p] += 1;
            }
        }
        for &(_, v) in &server_edges {
            indeg[v] += 1;
        }

        let mut next_in_row = vec![usize::MAX; n];
        for (k, &off) in self.offsets.iter().enumerate() {
            for p in 0..self.row_lens[k].saturating_sub(1) {
                next_in_row[off + p] = off + p + 1;
            }
        }

        let mut start = vec![0 as Time; n];
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut processed = 0usize;
        let mut makespan: Time = 0;
        while let Some(u) = stack.pop() {
            processed += 1;
            let end = start[u] + self.lens[u];
            makespan = makespan.max(end);
            let mut relax = |v: usize, indeg: &mut Vec<u8>, stack: &mut Vec<usize>| {
                start[v] = start[v].max(end);
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            };
            if next_in_row[u] != usize::MAX {
                relax(next_in_row[u], &mut indeg, &mut stack);
            }
            for &(a, b) in &server_edges {
                if a == u {
                    relax(b, &mut indeg, &mut stack);
                }
            }
        }
        if processed < n {
            return None;
        }
        Some((makespan, start))
    }

    /// Materialize the witness for a complete server choice.
    fn to_schedule(
        &self,
        instance: &Instance,
        lists: &[Vec<usize>],
        starts: &[Time],
        makespan: Time,
    ) -> Schedule {
        let mut server_of = vec![None; self.lens.len()];
        for (server, list) in lists.iter().enumerate() {
            for &setup in list {
                server_of[self.setups[setup]] = Some(server);
            }
        }
        let mut machines = vec![Vec::new(); instance.machines()];
        let mut setups = Vec::new();
        for (k, &off) in self.offsets.iter().enumerate() {
            for p in 0..self.row_lens[k] {
                let v = off + p;
                match self.elems[v] {
                    TimingElem::Task(task) => machines[k].push(TaskPlacement {
                        task,
                        machine: k,
                        start: starts[v],
                        end: starts[v] + self.lens[v],
                    }),
                    TimingElem::Setup { from, to } => setups.push(SetupRecord {
                        from,
                        to,
                        machine: k,
                        server: server_of[v],
                        start: starts[v],
                        end: starts[v] + self.lens[v],
                    }),
                }
            }
        }
        Schedule {
            machines,
            setups,
            makespan,
        }
    }
}

/// Best timing for fixed sequences: strictly below `cutoff` when given,
/// `None` when nothing beats it. Sets `timed_out` (and returns the best
/// found so far) when the deadline passes mid-enumeration.
fn timing_search(
    instance: &Instance,
    sequences: &[Vec<usize>],
    cutoff: Option<Time>,
    deadline: Option<Instant>,
    timed_out: &mut bool,
) -> Result<Option<(Time, Schedule)>, ExactError> {
    let problem = TimingProblem::build(instance, sequences)?;
    let s = problem.setups.len();
    if s > SETUP_ENUMERATION_CAP {
        return Err(ExactError::TooManySetups {
            setups: s,
            cap: SETUP_ENUMERATION_CAP,
        });
    }

    let mut enumerator = Enumerator {
        problem: &problem,
        servers: instance.servers(),
        cutoff,
        deadline,
        timed_out,
        best: None,
    };

    if s <= instance.servers() {
        // Every setup gets its own server: the server-free pass is exact.
        let lists: Vec<Vec<usize>> = (0..s).map(|i| vec![i]).collect();
        enumerator.consider(&lists);
    } else {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new()];
        let mut used = vec![false; s];
        enumerator.dfs(&mut lists, &mut used, 0);
    }

    let best = enumerator.best.take();
    Ok(best.map(|(makespan, lists)| {
        let (_, starts) = problem
            .forward_pass(&lists)
            .expect("recorded choices are acyclic");
        let schedule = problem.to_schedule(instance, &lists, &starts, makespan);
        (makespan, schedule)
    }))
}

struct Enumerator<'a> {
    problem: &'a TimingProblem,
    servers: usize,
    cutoff: Option<Time>,
    deadline: Option<Instant>,
    timed_out: &'a mut bool,
    best: Option<(Time, Vec<Vec<usize>>)>,
}

impl Enumerator<'_> {
    /// Anything at or above this is not worth exploring.
    fn threshold(&self) -> Option<Time> {
        match (self.cutoff, self.best.as_ref().map(|(mk, _)| *mk)) {
            (Some(c), Some(b)) => Some(c.min(b)),
            (Some(c), None) => Some(c),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    }

    fn consider(&mut self, lists: &[Vec<usize>]) {
        let Some((makespan, _)) = self.problem.forward_pass(lists) else {
            return;
        };
        if self.threshold().map_or(true, |t| makespan < t) {
            self.best = Some((makespan, lists.to_vec()));
        }
    }

    /// Build the open (last) server list by appending unused setups, close
    /// it to open the next, and record complete choices. Canonical across
    /// identical servers: first elements increase, empty servers trail.
    fn dfs(&mut self, lists: &mut Vec<Vec<usize>>, used: &mut [bool], used_count: usize) {
        if *self.timed_out {
            return;
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                *self.timed_out = true;
                return;
            }
        }
        let Some((makespan, _)) = self.problem.forward_pass(lists) else {
            return;
        };
        if self.threshold().is_some_and(|t| makespan >= t) {
            return;
        }
        if used_count == used.len() {
            self.best = Some((makespan, lists.clone()));
            return;
        }

        let open = lists.len() - 1;
        let min_first = if open == 0 {
            None
        } else {
            Some(lists[open - 1][0])
        };
        for setup in 0..used.len() {
            if used[setup] {
                continue;
            }
            if lists[open].is_empty() {
                if let Some(lo) = min_first {
                    if setup <= lo {
                        continue;
                    }
                }
            }
            lists[open].push(setup);
            used[setup] = true;
            self.dfs(lists, used, used_count + 1);
            used[setup] = false;
            lists[open].pop();
        }

        if !lists[open].is_empty() && lists.len() < self.servers {
            lists.push(Vec::new());
            self.dfs(lists, used, used_count);
            lists.pop();
        }
    }
}
