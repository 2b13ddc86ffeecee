//! Shared construction state for the sequence-building heuristics.
//!
//! Machine schedules are kept as chains of interleaved elements: a task,
//! then the setup to the next task, then that task, and so on. A chain
//! always starts and ends with a task; elements never overlap within a
//! chain and appear in start order.

use crate::instance::{Instance, Setup, Time};
use crate::schedule::{Schedule, SetupRecord, TaskPlacement};

use super::HeuristicError;

/// One element of a machine chain.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Elem {
    Task(usize),
    Setup { from: usize, to: usize },
}

/// An element with its time interval `[start, end)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct Placed {
    pub elem: Elem,
    pub start: Time,
    pub end: Time,
}

/// Per-machine element chains; the working representation of all heuristic
/// transformations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Chains {
    pub rows: Vec<Vec<Placed>>,
}

impl Chains {
    pub fn empty(machines: usize) -> Self {
        Chains {
            rows: vec![Vec::new(); machines],
        }
    }

    /// End of the machine's last element; 0 when empty.
    pub fn machine_end(&self, machine: usize) -> Time {
        self.rows[machine].last().map_or(0, |p| p.end)
    }

    /// Largest machine end. Chains end with tasks, so this is the makespan.
    pub fn makespan(&self) -> Time {
        (0..self.rows.len())
            .map(|k| self.machine_end(k))
            .max()
            .unwrap_or(0)
    }

    pub fn to_schedule(&self) -> Schedule {
        let mut machines = vec![Vec::new(); self.rows.len()];
        let mut setups = Vec::new();
        for (k, row) in self.rows.iter().enumerate() {
            for p in row {
                match p.elem {
                    Elem::Task(task) => machines[k].push(TaskPlacement {
                        task,
                        machine: k,
                        start: p.start,
                        end: p.end,
                    }),
                    Elem::Setup { from, to } => setups.push(SetupRecord {
                        from,
                        to,
                        machine: k,
                        server: None,
                        start: p.start,
                        end: p.end,
                    }),
                }
            }
        }
        let makespan = self.makespan();
        Schedule {
            machines,
            setups,
            makespan,
        }
    }

    /// Rebuild chains from a schedule by pairing each consecutive task pair
    /// with its setup record.
    pub fn from_schedule(schedule: &Schedule) -> Result<Self, HeuristicError> {
        let mut used = vec![false; schedule.setups.len()];
        let mut rows = Vec::with_capacity(schedule.machines.len());
        for (k, tasks) in schedule.machines.iter().enumerate() {
            let mut row = Vec::with_capacity(tasks.len().saturating_mul(2));
            for (pos, placement) in tasks.iter().enumerate() {
                if pos > 0 {
                    let from = tasks[pos - 1].task;
                    let to = placement.task;
                    let mut found = None;
                    for (idx, rec) in schedule.setups.iter().enumerate() {
                        if rec.machine == k && rec.from == from && rec.to == to {
                            if found.is_some() || used[idx] {
                                return Err(HeuristicError::DuplicateSetupRecord {
                                    machine: k,
                                    from,
                                    to,
                                });
                            }
                            found = Some(idx);
                        }
                    }
                    let idx = found.ok_or(HeuristicError::MissingSetupRecord {
                        machine: k,
                        from,
                        to,
                    })?;
                    used[idx] = true;
                    let rec = &schedule.setups[idx];
                    row.push(Placed {
                        elem: Elem::Setup { from, to },
                        start: rec.start,
                        end: rec.end,
                    });
                }
                row.push(Placed {
                    elem: Elem::Task(placement.task),
                    start: placement.start,
                    end: placement.end,
                });
            }
            rows.push(row);
        }
        if let Some(idx) = used.iter().position(|&u| !u) {
            let rec = &schedule.setups[idx];
            return Err(HeuristicError::DuplicateSetupRecord {
                machine: rec.machine,
                from: rec.from,
                to: rec.to,
            });
        }
        Ok(Chains { rows })
    }
}

/// Mutable state of one heuristic construction run.
///
/// Tracks per-machine progress, the set of tasks still waiting, and, when
/// the construction respects servers, the time from which each server is
/// free.
pub struct BuilderState {
    pub(crate) chains: Chains,
    tasks: usize,
    machine_end: Vec<Time>,
    machine_last: Vec<usize>,
    /// Server availability; `None` when construction ignores servers.
    free_from: Option<Vec<Time>>,
    /// Tasks not yet placed, ascending.
    unscheduled: Vec<usize>,
    /// Transposed setup matrix (`incoming[j * t + i] = o_{i,j}`), built only
    /// for coefficient selection, where per-candidate scans over incoming
    /// setups would otherwise stride across the row-major matrix.
    incoming: Option<Vec<Setup>>,
}

impl BuilderState {
    /// Seed machine `k` with `starting[k]` at time 0 and mark the rest of
    /// the tasks unscheduled. `starting` must hold one distinct task per
    /// machine.
    ///
    /// With `track_servers`, placements reserve a server for each setup (the
    /// losos construction); without, setups start the moment the machine is
    /// free (the rosol construction). `coefficient_selection` precomputes
    /// the transposed setup matrix that coefficient-based selection scans.
    pub fn new(
        instance: &Instance,
        starting: &[usize],
        track_servers: bool,
        coefficient_selection: bool,
    ) -> Self {
        let t = instance.tasks();
        debug_assert_eq!(starting.len(), instance.machines());

        let mut chains = Chains::empty(instance.machines());
        let mut machine_end = Vec::with_capacity(starting.len());
        for (k, &task) in starting.iter().enumerate() {
            let end = Time::from(instance.processing(task));
            chains.rows[k].push(Placed {
                elem: Elem::Task(task),
                start: 0,
                end,
            });
            machine_end.push(end);
        }

        let mut is_starting = vec![false; t];
        for &task in starting {
            is_starting[task] = true;
        }
        let unscheduled: Vec<usize> = (0..t).filter(|&j| !is_starting[j]).collect();

        let incoming = coefficient_selection.then(|| {
            let mut incoming = vec![Setup::finite(0); t * t];
            for i in 0..t {
                for j in 0..t {
                    incoming[j * t + i] = instance.setup(i, j);
                }
            }
            incoming
        });

        BuilderState {
            chains,
            tasks: t,
            machine_end,
            machine_last: starting.to_vec(),
            free_from: track_servers.then(|| vec![0; instance.servers()]),
            unscheduled,
            incoming,
        }
    }

    /// Machine with the earliest current end, lowest index on ties.
    pub fn closest_ending_machine(&self) -> usize {
        let mut best = 0;
        for (k, &end) in self.machine_end.iter().enumerate() {
            if end < self.machine_end[best] {
                best = k;
            }
        }
        best
    }

    pub fn machine_end(&self, machine: usize) -> Time {
        self.machine_end[machine]
    }

    pub fn last_task(&self, machine: usize) -> usize {
        self.machine_last[machine]
    }

    /// Machine whose last task is `task`, if any.
    pub fn machine_of_last(&self, task: usize) -> Option<usize> {
        self.machine_last.iter().position(|&last| last == task)
    }

    /// Tasks not yet placed, ascending.
    pub fn unscheduled(&self) -> &[usize] {
        &self.unscheduled
    }

    /// Last tasks of all machines: the "currently being executed" half of
    /// the unresolved task pool.
    pub fn machine_lasts(&self) -> &[usize] {
        &self.machine_last
    }

    /// Server free-from times; `None` when servers are not tracked.
    pub fn servers_free_from(&self) -> Option<&[Time]> {
        self.free_from.as_deref()
    }

    /// How many servers are free at `time`.
    pub fn servers_free_at(&self, time: Time) -> Option<usize> {
        self.free_from
            .as_ref()
            .map(|free| free.iter().filter(|&&f| f <= time).count())
    }

    pub(crate) fn incoming_setup(&self, from: usize, to: usize) -> Setup {
        match &self.incoming {
            Some(incoming) => incoming[to * self.tasks + from],
            None => unreachable!("incoming transpose requested without being built"),
        }
    }

    pub(crate) fn has_incoming(&self) -> bool {
        self.incoming.is_some()
    }

    /// Place `task` after the machine's last task, preceded by the
    /// connecting setup. With `server_gated`, the setup waits for a free
    /// server and occupies it until the task starts; otherwise it starts the
    /// moment the machine is free.
    ///
    /// # Panics
    ///
    /// Panics when the transition to `task` is forbidden; callers check the
    /// setup before committing to a placement.
    pub fn place(&mut self, instance: &Instance, machine: usize, task: usize, server_gated: bool) {
        let from = self.machine_last[machine];
        let setup_len = Time::from(
            instance
                .setup(from, task)
                .get()
                .expect("transition to the placed task must be allowed"),
        );
        let c_i = self.machine_end[machine];

        let setup_start = if server_gated {
            let free = self.free_from.as_ref().expect("servers tracked");
            let min_free = *free.iter().min().expect("at least one server");
            c_i.max(min_free)
        } else {
            c_i
        };
        let task_start = setup_start + setup_len;

        if server_gated {
            let free = self.free_from.as_mut().expect("servers tracked");
            let w = free
                .iter()
                .enumerate()
                .min_by_key(|&(idx, &f)| (f, idx))
                .map(|(idx, _)| idx)
                .expect("at least one server");
            free[w] = task_start;
        }

        let row = &mut self.chains.rows[machine];
        row.push(Placed {
            elem: Elem::Setup { from, to: task },
            start: setup_start,
            end: task_start,
        });
        let task_end = task_start + Time::from(instance.processing(task));
        row.push(Placed {
            elem: Elem::Task(task),
            start: task_start,
            end: task_end,
        });

        self.machine_end[machine] = task_end;
        self.machine_last[machine] = task;
        let pos = self
            .unscheduled
            .binary_search(&task)
            .expect("placed task was unscheduled");
        self.unscheduled.remove(pos);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Setup;

    fn inst(machines: usize, servers: usize, p: &[u32], o: u32) -> Instance {
        let t = p.len();
        let mut setups = vec![Setup::finite(o); t * t];
        for i in 0..t {
            setups[i * t + i] = Setup::finite(0);
        }
        Instance::new(machines, servers, p.to_vec(), setups).unwrap()
    }

    #[test]
    fn seeding_places_starting_tasks_at_zero() {
        let instance = inst(2, 1, &[3, 4, 5], 2);
        let state = BuilderState::new(&instance, &[1, 0], true, false);
        assert_eq!(state.machine_end(0), 4);
        assert_eq!(state.machine_end(1), 3);
        assert_eq!(state.last_task(0), 1);
        assert_eq!(state.unscheduled(), &[2]);
        assert_eq!(state.closest_ending_machine(), 1);
    }

    #[test]
    fn place_gates_on_server_availability() {
        let instance = inst(2, 1, &[3, 3, 3, 3], 2);
        let mut state = BuilderState::new(&instance, &[0, 1], true, false);
        // Machine 0: setup [3, 5), task 2 at [5, 8); the only server is then
        // busy until 5, so machine 1's setup waits for it.
        state.place(&instance, 0, 2, true);
        assert_eq!(state.machine_end(0), 8);
        state.place(&instance, 1, 3, true);
        let row = &state.chains.rows[1];
        assert_eq!((row[1].start, row[1].end), (5, 7));
        assert_eq!(state.machine_end(1), 10);
    }

    #[test]
    fn ungated_place_ignores_servers() {
        let instance = inst(2, 1, &[3, 3, 3, 3], 2);
        let mut state = BuilderState::new(&instance, &[0, 1], false, false);
        state.place(&instance, 0, 2, false);
        state.place(&instance, 1, 3, false);
        assert_eq!(state.machine_end(0), 8);
        assert_eq!(state.machine_end(1), 8);
    }

    #[test]
    fn chains_round_trip_through_schedule() {
        let instance = inst(2, 2, &[3, 3, 3, 3], 2);
        let mut state = BuilderState::new(&instance, &[0, 1], true, false);
        state.place(&instance, 0, 2, true);
        state.place(&instance, 1, 3, true);
        let schedule = state.chains.to_schedule();
        let back = Chains::from_schedule(&schedule).unwrap();
        assert_eq!(back, state.chains);
    }

    #[test]
    fn from_schedule_rejects_missing_records() {
        let instance = inst(1, 1, &[2, 2], 1);
        let mut state = BuilderState::new(&instance, &[0], true, false);
        state.place(&instance, 0, 1, true);
        let mut schedule = state.chains.to_schedule();
        schedule.setups.clear();
        assert_eq!(
            Chains::from_schedule(&schedule).unwrap_err(),
            HeuristicError::MissingSetupRecord {
                machine: 0,
                from: 0,
                to: 1
            }
        );
    }
}
