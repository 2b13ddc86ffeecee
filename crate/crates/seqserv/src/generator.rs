//! Random instance generation and instance transformations.
//!
//! Generation is reproducible bit for bit: a given config (including its
//! seed) always yields the same instance. The draw order is part of that
//! contract and must never change:
//!
//! 1. processing times `p_0, ..., p_{t-1}` in task order,
//! 2. setup lengths `o_{i,j}` row by row, skipping the diagonal.
//!
//! Diagonal entries are written as 0 and never drawn nor read.

use thiserror::Error;

use crate::instance::{Instance, InstanceError, Setup};
use crate::rng::SplitMix64;

/// Parameters for [`generate_instance`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GeneratorConfig {
    pub machines: usize,
    pub servers: usize,
    pub tasks: usize,
    /// Inclusive processing time range.
    pub p_range: (u32, u32),
    /// Inclusive setup length range.
    pub o_range: (u32, u32),
    pub seed: u64,
}

impl GeneratorConfig {
    /// Config with the customary `[1, 50]` ranges for both durations.
    pub fn new(machines: usize, servers: usize, tasks: usize, seed: u64) -> Self {
        GeneratorConfig {
            machines,
            servers,
            tasks,
            p_range: (1, 50),
            o_range: (1, 50),
            seed,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("empty duration range: {lo} > {hi}")]
    EmptyRange { lo: u32, hi: u32 },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Generate a random instance from `config`.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    for (lo, hi) in [config.p_range, config.o_range] {
        if lo > hi {
            return Err(GeneratorError::EmptyRange { lo, hi });
        }
    }
    let t = config.tasks;
    let mut rng = SplitMix64::new(config.seed);

    let processing: Vec<u32> = (0..t)
        .map(|_| rng.in_range(u64::from(config.p_range.0), u64::from(config.p_range.1)) as u32)
        .collect();

    let mut setups = vec![Setup::finite(0); t * t];
    for i in 0..t {
        for j in 0..t {
            if i == j {
                continue;
            }
            let len = rng.in_range(u64::from(config.o_range.0), u64::from(config.o_range.1));
            setups[i * t + j] = Setup::finite(len as u32);
        }
    }

    Ok(Instance::new(
        config.machines,
        config.servers,
        processing,
        setups,
    )?)
}

/// The 30 standard benchmark configurations: machines in {12, 14, 16, 18,
/// 20}, tasks in {15m, 20m, 25m}, servers in {2, 5}, default duration
/// ranges. Row `k` is seeded with `base_seed + k`, so one base seed pins the
/// whole set.
pub fn benchmark_grid(base_seed: u64) -> Vec<GeneratorConfig> {
    let mut grid = Vec::with_capacity(30);
    for &machines in &[12usize, 14, 16, 18, 20] {
        for mult in [15usize, 20, 25] {
            for &servers in &[2usize, 5] {
                let k = grid.len() as u64;
                grid.push(GeneratorConfig::new(
                    machines,
                    servers,
                    machines * mult,
                    base_seed.wrapping_add(k),
                ));
            }
        }
    }
    grid
}

/// Task-to-class assignment for [`transform_dedicated`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DedicationMap {
    class_of: Vec<usize>,
}

impl DedicationMap {
    pub fn new(class_of: Vec<usize>) -> Self {
        DedicationMap { class_of }
    }

    pub fn class_of(&self, task: usize) -> usize {
        self.class_of[task]
    }

    pub fn tasks(&self) -> usize {
        self.class_of.len()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("dedication map covers {got} tasks, instance has {expected}")]
    DedicationLength { got: usize, expected: usize },
    #[error("{got} per-task setup lengths given, instance has {expected} tasks")]
    SetupCount { got: usize, expected: usize },
}

/// Forbid all transitions between differently dedicated tasks.
///
/// Any feasible schedule of the result keeps each machine's tasks within a
/// single class, so solving it also solves the instance with machines
/// dedicated to classes.
pub fn transform_dedicated(
    instance: &Instance,
    dedication: &DedicationMap,
) -> Result<Instance, TransformError> {
    let t = instance.tasks();
    if dedication.tasks() != t {
        return Err(TransformError::DedicationLength {
            got: dedication.tasks(),
            expected: t,
        });
    }
    let mut setups = instance.setup_matrix().to_vec();
    for i in 0..t {
        for j in 0..t {
            if i != j && dedication.class_of(i) != dedication.class_of(j) {
                setups[i * t + j] = Setup::INF;
            }
        }
    }
    Ok(
        Instance::new(instance.machines(), instance.servers(), instance.processing_times().to_vec(), setups)
            .expect("shape preserved"),
    )
}

/// Rebuild an instance so that task `j` always pays `setup_per_task[j]`,
/// regardless of its predecessor; the input setup matrix is ignored.
///
/// A sequence-independent setup is also due when a task runs first on its
/// machine, which the base model never charges. To price it anyway, `m`
/// zero-length virtual tasks (indices `t..t+m`) are appended: nothing may
/// transition into a virtual task, so each can only stand first on a
/// machine, and every original task pays its setup wherever it runs. Optimal
/// makespans therefore coincide with the sequence-independent problem.
pub fn transform_sequence_independent(
    instance: &Instance,
    setup_per_task: &[u32],
) -> Result<Instance, TransformError> {
    let t = instance.tasks();
    if setup_per_task.len() != t {
        return Err(TransformError::SetupCount {
            got: setup_per_task.len(),
            expected: t,
        });
    }
    let m = instance.machines();
    let n = t + m;

    let mut processing = instance.processing_times().to_vec();
    processing.resize(n, 0);

    let mut setups = vec![Setup::INF; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                setups[i * n + j] = Setup::finite(0);
            } else if j < t {
                setups[i * n + j] = Setup::finite(setup_per_task[j]);
            }
        }
    }

    Ok(
        Instance::new(m, instance.servers(), processing, setups)
            .expect("shape constructed to fit"),
    )
}
