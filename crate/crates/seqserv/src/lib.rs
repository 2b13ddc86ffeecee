//! Scheduling on parallel identical machines with server-performed,
//! sequence-dependent setups, minimizing makespan (`P|seq,ser|C_max` in
//! Graham notation).
//!
//! An instance has `m` identical machines, `r` identical setup servers and
//! `t` non-preemptive tasks with integer processing times. When two tasks run
//! consecutively on the same machine, a setup whose length depends on the
//! ordered task pair must be performed in between by one of the servers; the
//! first task on each machine needs no setup. Setups are non-preemptive, a
//! server performs at most one setup at a time, and a machine is blocked
//! while its setup runs. The objective is to minimize the completion time of
//! the last task.
//!
//! The crate provides:
//! - problem and solution types with a feasibility validator and server
//!   assignment ([`instance`], [`schedule`], [`validate`]),
//! - two constructive heuristics plus optional improvement steps
//!   ([`heuristics`]),
//! - a combinatorial lower bound ([`bounds`]), an exhaustive branch-and-bound
//!   solver with an exact sequence-timing routine ([`exact`]), and a
//!   heuristic-warm-started solve ([`warm`]),
//! - a deterministic instance generator and two instance transformations
//!   ([`generator`]).

pub mod bounds;
pub mod exact;
pub mod generator;
pub mod heuristics;
pub mod instance;
pub mod metrics;
pub mod rng;
pub mod schedule;
pub mod validate;
pub mod warm;

pub use bounds::{lower_bound, LowerBoundReport};
pub use exact::{exact_solve, exact_timing, ExactLimits, ExactResult};
pub use generator::{
    generate_instance, transform_dedicated, transform_sequence_independent, DedicationMap,
    GeneratorConfig,
};
pub use heuristics::{
    generate_starting_tasks, losos, optimize_schedule_ends, rosol, select_next_task,
    task_coefficient, task_coefficient_idle, HeuristicOptions, NextTaskMode, StartingMode,
};
pub use instance::{Instance, Setup, Time};
pub use metrics::relative_difference;
pub use schedule::{compute_makespan, Schedule, SetupRecord, TaskPlacement};
pub use validate::{assign_servers, validate_schedule, Condition, FeasibilityReport, Violation};
pub use warm::{warm_started_solve, SolveReport};
