//! Cross-module properties: every construction mode against the validator
//! and the lower bound, determinism, post-pass monotonicity, and the
//! instance transformations end to end.

use seqserv::{
    assign_servers, exact_solve, generate_instance, losos, lower_bound, optimize_schedule_ends,
    rosol, transform_dedicated, transform_sequence_independent, validate_schedule, DedicationMap,
    ExactLimits, GeneratorConfig, HeuristicOptions, Instance, NextTaskMode, Schedule, Setup,
    StartingMode,
};

/// Every legal (construction, options) combination: 16 for the
/// machine-ordered construction, 8 for the server-ordered one, which
/// rejects idleness reduction.
fn all_modes() -> Vec<(String, bool, HeuristicOptions)> {
    let mut modes = Vec::new();
    for server_ordered in [false, true] {
        for starting_mode in [StartingMode::Random, StartingMode::Informed] {
            for next_task_mode in [NextTaskMode::Greedy, NextTaskMode::Coefficient] {
                for idleness_reduction in [false, true] {
                    if server_ordered && idleness_reduction {
                        continue;
                    }
                    for optimize_ends in [false, true] {
                        let label = format!(
                            "{}[{starting_mode:?},{next_task_mode:?},idle={idleness_reduction},ends={optimize_ends}]",
                            if server_ordered { "rosol" } else { "losos" },
                        );
                        modes.push((
                            label,
                            server_ordered,
                            HeuristicOptions {
                                starting_mode,
                                next_task_mode,
                                idleness_reduction,
                                optimize_ends,
                                seed: 0,
                            },
                        ));
                    }
                }
            }
        }
    }
    assert_eq!(modes.len(), 24);
    modes
}

fn run_mode(instance: &Instance, server_ordered: bool, options: &HeuristicOptions) -> Schedule {
    if server_ordered {
        rosol(instance, options).expect("construction succeeds on setup matrices without inf")
    } else {
        losos(instance, options).expect("construction succeeds on setup matrices without inf")
    }
}

fn sample_instances() -> Vec<Instance> {
    let mut sizes = Vec::new();
    for (machines, servers, tasks) in [(1, 1, 6), (2, 1, 7), (3, 2, 9), (4, 2, 17), (5, 3, 24)] {
        for seed in [11, 12, 13] {
            sizes.push(
                generate_instance(&GeneratorConfig::new(machines, servers, tasks, seed)).unwrap(),
            );
        }
    }
    sizes
}

#[test]
fn every_mode_yields_a_feasible_schedule_above_the_bound() {
    for (index, instance) in sample_instances().iter().enumerate() {
        let bound = lower_bound(instance).bound_int;
        for (label, server_ordered, mut options) in all_modes() {
            options.seed = 17 + index as u64;
            let schedule = run_mode(instance, server_ordered, &options);
            let report = validate_schedule(instance, &schedule).expect("well-formed schedule");
            assert!(
                report.feasible(),
                "{label} on sample {index}: {:?}",
                report.violations
            );
            assert!(
                schedule.makespan >= bound,
                "{label} on sample {index}: makespan {} beats the lower bound {bound}",
                schedule.makespan
            );
        }
    }
}

#[test]
fn constructions_are_deterministic_per_seed() {
    let instance = generate_instance(&GeneratorConfig::new(3, 2, 14, 5)).unwrap();
    for (label, server_ordered, mut options) in all_modes() {
        options.seed = 23;
        let first = run_mode(&instance, server_ordered, &options);
        let second = run_mode(&instance, server_ordered, &options);
        assert_eq!(first, second, "{label} differs between identical runs");
    }
}

#[test]
fn end_optimization_is_a_separate_pass_that_never_hurts() {
    for (index, instance) in sample_instances().iter().enumerate() {
        for start in [StartingMode::Random, StartingMode::Informed] {
            let options = HeuristicOptions {
                starting_mode: start,
                next_task_mode: NextTaskMode::Greedy,
                idleness_reduction: false,
                optimize_ends: false,
                seed: 31 + index as u64,
            };
            let raw = losos(instance, &options).unwrap();
            let mut optimized = optimize_schedule_ends(instance, &raw).unwrap();
            assert!(
                optimized.makespan <= raw.makespan,
                "end optimization worsened sample {index}: {} -> {}",
                raw.makespan,
                optimized.makespan
            );
            assign_servers(&mut optimized, instance.servers()).unwrap();
            let report = validate_schedule(instance, &optimized).unwrap();
            assert!(report.feasible(), "sample {index}: {:?}", report.violations);
        }
    }
}

/// With at least as many servers as machines no setup ever waits, so the
/// machine-ordered and server-ordered constructions see the same timings
/// and make the same greedy choices; results agree up to server labels.
#[test]
fn plentiful_servers_collapse_both_constructions() {
    for seed in [41, 42, 43, 44] {
        let instance = generate_instance(&GeneratorConfig::new(3, 3, 13, seed)).unwrap();
        let options = HeuristicOptions::baseline(seed);
        let a = losos(&instance, &options).unwrap();
        let b = rosol(&instance, &options).unwrap();
        assert_eq!(a.machines, b.machines, "seed {seed}: placements differ");
        assert_eq!(a.makespan, b.makespan, "seed {seed}: makespans differ");
        let strip = |schedule: &Schedule| {
            schedule
                .machines
                .iter()
                .flatten()
                .map(|p| (p.task, p.start, p.end))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b), "seed {seed}: timings differ");
    }
}

#[test]
fn the_bound_never_exceeds_a_proven_optimum() {
    for seed in 100..130 {
        let instance = generate_instance(&GeneratorConfig {
            machines: 2,
            servers: 1,
            tasks: 6,
            p_range: (1, 10),
            o_range: (1, 10),
            seed,
        })
        .unwrap();
        let result = exact_solve(&instance, &ExactLimits::default()).unwrap();
        assert!(result.proven_optimal);
        let bound = lower_bound(&instance).bound_int;
        assert!(
            bound <= result.schedule.makespan,
            "seed {seed}: bound {bound} exceeds optimum {}",
            result.schedule.makespan
        );
    }
}

#[test]
fn dedication_forbids_cross_class_transitions_and_nothing_else() {
    let instance = generate_instance(&GeneratorConfig::new(3, 2, 10, 77)).unwrap();
    let classes = vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 0];
    let transformed =
        transform_dedicated(&instance, &DedicationMap::new(classes.clone())).unwrap();
    assert_eq!(transformed.tasks(), instance.tasks());
    assert_eq!(transformed.machines(), instance.machines());
    for i in 0..instance.tasks() {
        assert_eq!(transformed.processing(i), instance.processing(i));
        for j in 0..instance.tasks() {
            if i == j {
                continue;
            }
            if classes[i] == classes[j] {
                assert_eq!(transformed.setup(i, j), instance.setup(i, j));
            } else {
                assert!(transformed.setup(i, j).is_inf());
            }
        }
    }
}

/// The sequence-independent reduction on the smallest possible input: one
/// task (p = 5, setup 4) and one machine. The virtual task runs first, the
/// real task follows after its setup: optimum 4 + 5 = 9.
#[test]
fn sequence_independent_reduction_prices_the_first_setup() {
    let instance = Instance::new(1, 1, vec![5], vec![Setup::finite(0)]).unwrap();
    let transformed = transform_sequence_independent(&instance, &[4]).unwrap();
    assert_eq!(transformed.tasks(), 2);
    assert_eq!(transformed.processing(1), 0);
    let result = exact_solve(&transformed, &ExactLimits::default()).unwrap();
    assert!(result.proven_optimal);
    assert_eq!(result.schedule.makespan, 9);
}

#[test]
fn the_benchmark_grid_is_the_published_design() {
    let grid = seqserv::generator::benchmark_grid(1);
    assert_eq!(grid.len(), 30);
    let mut seeds = std::collections::HashSet::new();
    for config in &grid {
        assert!([12, 14, 16, 18, 20].contains(&config.machines));
        assert!([2, 5].contains(&config.servers));
        let multiple = config.tasks / config.machines;
        assert_eq!(config.tasks % config.machines, 0);
        assert!([15, 20, 25].contains(&multiple));
        assert_eq!(config.p_range, (1, 50));
        assert_eq!(config.o_range, (1, 50));
        assert!(seeds.insert(config.seed), "duplicate seed {}", config.seed);
        let instance = generate_instance(config).unwrap();
        assert_eq!(instance.tasks(), config.tasks);
        assert_eq!(instance.machines(), config.machines);
        assert_eq!(instance.servers(), config.servers);
    }
}
