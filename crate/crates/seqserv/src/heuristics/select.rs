//! Next-task selection: greedy, coefficient-based, and the idleness
//! reduction that softens the coefficient when the last free server would
//! otherwise sit idle.

use crate::instance::{Instance, Setup, Time};

use super::builder::BuilderState;
use super::NextTaskMode;

/// Priority score of scheduling candidate `j` right now: `o_ij` raised to
/// the fourth power (the cost paid immediately), corrected by how much
/// cheaper or dearer `j` would be after one of its three cheapest other
/// predecessors instead.
///
/// `o_x1 <= o_x2 <= o_x3` are the three smallest setups into `j` from tasks
/// not yet finally placed; when fewer than three exist, the missing ones
/// default to `o_ij` so their terms vanish. Lower is better. Any unbounded
/// argument makes the candidate worst possible.
///
/// Saturating arithmetic: the fourth power of a near-maximal setup length
/// exceeds `i128`, and ranking only needs order, not exact magnitude.
pub fn task_coefficient(o_ij: Setup, o_x1: Setup, o_x2: Setup, o_x3: Setup) -> i128 {
    let (Some(o), Some(x1), Some(x2), Some(x3)) =
        (o_ij.get(), o_x1.get(), o_x2.get(), o_x3.get())
    else {
        return i128::MAX;
    };
    let o = i128::from(o);
    fourth(o)
        .saturating_add(signed_square(o - i128::from(x1)))
        .saturating_add(signed_square(o - i128::from(x2)))
        .saturating_add(o - i128::from(x3))
}

/// [`task_coefficient`] with the immediate-cost term discounted by the
/// interval `t_d` during which the server would have no other work anyway:
/// `o_ij^4` becomes `max(0, o_ij - t_d)^4`.
pub fn task_coefficient_idle(
    o_ij: Setup,
    t_d: Time,
    o_x1: Setup,
    o_x2: Setup,
    o_x3: Setup,
) -> i128 {
    let (Some(o), Some(x1), Some(x2), Some(x3)) =
        (o_ij.get(), o_x1.get(), o_x2.get(), o_x3.get())
    else {
        return i128::MAX;
    };
    let o = i128::from(o);
    let discounted = (o - i128::from(t_d)).max(0);
    fourth(discounted)
        .saturating_add(signed_square(o - i128::from(x1)))
        .saturating_add(signed_square(o - i128::from(x2)))
        .saturating_add(o - i128::from(x3))
}

fn fourth(v: i128) -> i128 {
    let sq = v.saturating_mul(v);
    sq.saturating_mul(sq)
}

/// `|d| * d`: keeps the sign while growing quadratically.
fn signed_square(d: i128) -> i128 {
    d.abs().saturating_mul(d)
}

/// Pick the task to follow `current` on the machine that just became the
/// shortest. Returns the task and its setup length; `None` only when no
/// candidate remains.
///
/// Greedy mode minimizes the immediate setup; coefficient mode minimizes
/// [`task_coefficient`] over candidates, with the three reference setups
/// drawn from tasks still waiting or currently last on a machine. A
/// candidate with a forbidden transition is chosen only when every
/// alternative is forbidden too (the caller then reports the dead end).
/// Ties always break to the lowest task index.
///
/// With `idleness_on`, coefficient selection additionally reacts to the
/// situation where exactly one server is free at the machine's end: until
/// the next other machine needs a server (`t_d` away), the free server has
/// nothing else to do, so candidates whose setup fits into `t_d` are
/// preferred outright, compared by [`task_coefficient_idle`]. When none
/// fits, the shortest setup wins, with the plain coefficient breaking ties.
/// Greedy selection is unchanged by idleness: both rules reduce to "take
/// the smallest setup".
pub fn select_next_task(
    instance: &Instance,
    state: &BuilderState,
    current: usize,
    mode: NextTaskMode,
    idleness_on: bool,
) -> Option<(usize, Setup)> {
    let candidates = state.unscheduled();
    if candidates.is_empty() {
        return None;
    }
    match mode {
        NextTaskMode::Greedy => {
            let best = candidates
                .iter()
                .copied()
                .min_by_key(|&j| (instance.setup(current, j), j))
                .expect("candidates non-empty");
            Some((best, instance.setup(current, best)))
        }
        NextTaskMode::Coefficient => {
            let idle = idleness_on
                .then(|| idle_window(state, current))
                .flatten();
            let best = match idle {
                Some(t_d) => select_idle(instance, state, current, t_d),
                None => candidates
                    .iter()
                    .copied()
                    .min_by_key(|&j| (coefficient_of(instance, state, current, j, None), j))
                    .expect("candidates non-empty"),
            };
            Some((best, instance.setup(current, best)))
        }
    }
}

/// The idleness window `t_d`, or `None` when the reduction does not apply:
/// it needs tracked servers with exactly one free at the machine's end, and
/// at least one other machine to wait for.
fn idle_window(state: &BuilderState, current: usize) -> Option<Time> {
    let machine = state.machine_of_last(current)?;
    let c_i = state.machine_end(machine);
    if state.servers_free_at(c_i)? != 1 {
        return None;
    }
    let c_j = state
        .machine_lasts()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != machine)
        .map(|(k, _)| state.machine_end(k))
        .min()?;
    Some(c_j - c_i)
}

fn select_idle(instance: &Instance, state: &BuilderState, current: usize, t_d: Time) -> usize {
    let fitting = state
        .unscheduled()
        .iter()
        .copied()
        .filter(|&j| matches!(instance.setup(current, j).get(), Some(o) if Time::from(o) <= t_d))
        .min_by_key(|&j| (coefficient_of(instance, state, current, j, Some(t_d)), j));
    if let Some(best) = fitting {
        return best;
    }
    // Nothing fits: the server will idle regardless, so take the shortest
    // setup and fall back to the undiscounted coefficient between equals.
    state
        .unscheduled()
        .iter()
        .copied()
        .min_by_key(|&j| {
            (
                instance.setup(current, j),
                coefficient_of(instance, state, current, j, None),
                j,
            )
        })
        .expect("candidates non-empty")
}

/// Coefficient of candidate `j` following `current`, with the three
/// reference setups taken from the unresolved pool (waiting tasks plus every
/// machine's last task, minus `j`).
fn coefficient_of(
    instance: &Instance,
    state: &BuilderState,
    current: usize,
    j: usize,
    idle_discount: Option<Time>,
) -> i128 {
    let o_ij = instance.setup(current, j);

    // Three smallest incoming setups; INF sorts above finite, so unbounded
    // entries fill leftover slots naturally.
    let mut smallest = [Setup::INF; 3];
    let mut filled = 0usize;
    let mut offer = |s: Setup| {
        if filled < 3 {
            smallest[filled] = s;
            filled += 1;
            smallest[..filled].sort_unstable();
        } else if s < smallest[2] {
            smallest[2] = s;
            if smallest[1] > smallest[2] {
                smallest.swap(1, 2);
            }
            if smallest[0] > smallest[1] {
                smallest.swap(0, 1);
            }
        }
    };
    if state.has_incoming() {
        for &x in state.unscheduled() {
            if x != j {
                offer(state.incoming_setup(x, j));
            }
        }
        for &x in state.machine_lasts() {
            if x != j {
                offer(state.incoming_setup(x, j));
            }
        }
    } else {
        for &x in state.unscheduled() {
            if x != j {
                offer(instance.setup(x, j));
            }
        }
        for &x in state.machine_lasts() {
            if x != j {
                offer(instance.setup(x, j));
            }
        }
    }
    // Fewer than three predecessors: default to o_ij so the terms vanish.
    for slot in smallest.iter_mut().skip(filled) {
        *slot = o_ij;
    }

    match idle_discount {
        Some(t_d) => task_coefficient_idle(o_ij, t_d, smallest[0], smallest[1], smallest[2]),
        None => task_coefficient(o_ij, smallest[0], smallest[1], smallest[2]),
    }
}
