//! Starting task selection: one task per machine, placed at time 0.

use crate::instance::Instance;
use crate::rng::SplitMix64;

use super::{HeuristicError, StartingMode};

/// Choose one starting task per machine. Slot `k` of the result seeds
/// machine `k`.
///
/// Random mode draws distinct tasks uniformly from the seeded generator.
/// Informed mode prefers tasks that are expensive to reach from anywhere
/// else: each task is scored by its cheapest incoming setup `z_j` and the
/// `m` largest scores win (ties to the lowest index). A task with no
/// bounded incoming setup at all can only ever stand first, so it scores
/// above every bounded one. Informed selection ignores the seed.
pub fn generate_starting_tasks(
    instance: &Instance,
    mode: StartingMode,
    seed: u64,
) -> Result<Vec<usize>, HeuristicError> {
    let t = instance.tasks();
    let m = instance.machines();
    if t < m {
        return Err(HeuristicError::TooFewTasks {
            tasks: t,
            machines: m,
        });
    }
    match mode {
        StartingMode::Random => {
            let mut rng = SplitMix64::new(seed);
            let mut chosen = Vec::with_capacity(m);
            let mut taken = vec![false; t];
            while chosen.len() < m {
                let j = rng.below(t as u64) as usize;
                if !taken[j] {
                    taken[j] = true;
                    chosen.push(j);
                }
            }
            Ok(chosen)
        }
        StartingMode::Informed => {
            // z_j as Option, None meaning unbounded (must start first).
            let mut scored: Vec<(Option<u32>, usize)> = (0..t)
                .map(|j| (min_incoming(instance, j), j))
                .collect();
            scored.sort_by(|a, b| match (a.0, b.0) {
                (None, None) => a.1.cmp(&b.1),
                (None, Some(_)) => std::cmp::Ordering::Less,
                (Some(_), None) => std::cmp::Ordering::Greater,
                (Some(x), Some(y)) => y.cmp(&x).then(a.1.cmp(&b.1)),
            });
            Ok(scored.into_iter().take(m).map(|(_, j)| j).collect())
        }
    }
}

/// Cheapest bounded setup into `j`; `None` when every transition into `j`
/// is forbidden (or `j` is the only task).
fn min_incoming(instance: &Instance, j: usize) -> Option<u32> {
    let mut best: Option<u32> = None;
    for i in 0..instance.tasks() {
        if i == j {
            continue;
        }
        if let Some(len) = instance.setup(i, j).get() {
            best = Some(best.map_or(len, |b| b.min(len)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Setup;

    fn from_matrix(machines: usize, o: &[[u32; 4]; 4]) -> Instance {
        let mut setups = Vec::new();
        for row in o {
            for &v in row {
                setups.push(Setup::finite(v));
            }
        }
        Instance::new(machines, 1, vec![1, 1, 1, 1], setups).unwrap()
    }

    #[test]
    fn informed_picks_largest_min_incoming() {
        // Column minima: z = (1, 2, 2, 3); the two largest are T4 (z=3) and
        // T2 (z=2, beating T3 by index).
        let inst = from_matrix(
            2,
            &[[0, 5, 2, 7], [1, 0, 9, 8], [4, 6, 0, 3], [2, 2, 5, 0]],
        );
        assert_eq!(
            generate_starting_tasks(&inst, StartingMode::Informed, 0).unwrap(),
            vec![3, 1]
        );
    }

    #[test]
    fn informed_full_tie_takes_lowest_indices() {
        let inst = from_matrix(
            2,
            &[[0, 4, 4, 4], [4, 0, 4, 4], [4, 4, 0, 4], [4, 4, 4, 0]],
        );
        assert_eq!(
            generate_starting_tasks(&inst, StartingMode::Informed, 0).unwrap(),
            vec![0, 1]
        );
    }

    #[test]
    fn unreachable_tasks_are_selected_first() {
        let mut setups = vec![Setup::finite(1); 16];
        for i in 0..4 {
            setups[i * 4 + i] = Setup::finite(0);
            if i != 2 {
                setups[i * 4 + 2] = Setup::INF;
            }
        }
        let inst = Instance::new(2, 1, vec![1; 4], setups).unwrap();
        let starting = generate_starting_tasks(&inst, StartingMode::Informed, 0).unwrap();
        assert_eq!(starting[0], 2);
    }

    #[test]
    fn all_tasks_when_m_equals_t() {
        let inst = from_matrix(4, &[[0; 4]; 4]);
        let mut starting = generate_starting_tasks(&inst, StartingMode::Random, 9).unwrap();
        starting.sort_unstable();
        assert_eq!(starting, vec![0, 1, 2, 3]);
    }

    #[test]
    fn random_is_seed_deterministic_and_distinct() {
        let inst = from_matrix(2, &[[0; 4]; 4]);
        let a = generate_starting_tasks(&inst, StartingMode::Random, 42).unwrap();
        let b = generate_starting_tasks(&inst, StartingMode::Random, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn too_few_tasks_is_an_error() {
        let inst = Instance::new(3, 1, vec![1, 1], vec![Setup::finite(0); 4]).unwrap();
        assert_eq!(
            generate_starting_tasks(&inst, StartingMode::Random, 0).unwrap_err(),
            HeuristicError::TooFewTasks {
                tasks: 2,
                machines: 3
            }
        );
    }
}
