//! Solution representation: per-machine task placements and setup records.

use crate::instance::Time;

/// One task executed on one machine over `[start, end)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TaskPlacement {
    pub task: usize,
    pub machine: usize,
    pub start: Time,
    pub end: Time,
}

/// One setup performed between the consecutive tasks `from` and `to` on
/// `machine`, over `[start, end)`.
///
/// `server` is optional: feasibility only needs setup concurrency to stay
/// within the server count, explicit ids are produced by
/// [`crate::validate::assign_servers`] when an output wants them.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SetupRecord {
    pub from: usize,
    pub to: usize,
    pub machine: usize,
    pub server: Option<usize>,
    pub start: Time,
    pub end: Time,
}

/// A complete schedule: an ordered task sequence per machine plus the setup
/// records between consecutive tasks.
///
/// Invariants maintained by every producer in this crate:
/// - `machines[k]` lists machine `k`'s tasks in execution order,
/// - `setups` is sorted by `(machine, start, to)`,
/// - `makespan` equals the maximum task end (zero when empty).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Schedule {
    pub machines: Vec<Vec<TaskPlacement>>,
    pub setups: Vec<SetupRecord>,
    pub makespan: Time,
}

impl Schedule {
    /// An empty schedule over `machines` machines.
    pub fn empty(machines: usize) -> Self {
        Schedule {
            machines: vec![Vec::new(); machines],
            setups: Vec::new(),
            makespan: 0,
        }
    }

    /// Task id sequences per machine, without timing.
    pub fn sequences(&self) -> Vec<Vec<usize>> {
        self.machines
            .iter()
            .map(|chain| chain.iter().map(|p| p.task).collect())
            .collect()
    }

    /// Total number of placed tasks.
    pub fn placed_tasks(&self) -> usize {
        self.machines.iter().map(Vec::len).sum()
    }

    /// Restore the `setups` sort order after out-of-order insertion.
    pub fn normalize(&mut self) {
        self.setups
            .sort_by_key(|s| (s.machine, s.start, s.to, s.from));
    }
}

/// Makespan of a schedule: the maximum task completion time, zero for an
/// empty schedule. Setups never outlast the task that follows them, so task
/// ends alone determine the value.
pub fn compute_makespan(schedule: &Schedule) -> Time {
    schedule
        .machines
        .iter()
        .flat_map(|chain| chain.iter().map(|p| p.end))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn placement(task: usize, machine: usize, start: Time, end: Time) -> TaskPlacement {
        TaskPlacement {
            task,
            machine,
            start,
            end,
        }
    }

    #[test]
    fn makespan_of_empty_schedule_is_zero() {
        assert_eq!(compute_makespan(&Schedule::empty(3)), 0);
    }

    #[test]
    fn makespan_is_max_task_end() {
        let sched = Schedule {
            machines: vec![
                vec![placement(0, 0, 0, 8)],
                vec![placement(1, 1, 0, 10)],
            ],
            setups: Vec::new(),
            makespan: 10,
        };
        assert_eq!(compute_makespan(&sched), 10);
    }

    #[test]
    fn normalize_sorts_setup_records() {
        let rec = |machine, start| SetupRecord {
            from: 0,
            to: 1,
            machine,
            server: None,
            start,
            end: start + 1,
        };
        let mut sched = Schedule {
            machines: vec![Vec::new(); 2],
            setups: vec![rec(1, 5), rec(0, 9), rec(0, 2)],
            makespan: 0,
        };
        sched.normalize();
        assert_eq!(
            sched.setups.iter().map(|s| (s.machine, s.start)).collect::<Vec<_>>(),
            vec![(0, 2), (0, 9), (1, 5)]
        );
    }
}
