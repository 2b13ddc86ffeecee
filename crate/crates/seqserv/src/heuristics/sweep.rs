//! Conflict sweep: make a schedule respect the server count by postponing
//! setups, never moving anything left and never preempting.
//!
//! The sweep walks a time cursor over event points from `from` to the
//! makespan. At each visited instant, setups starting exactly now are
//! movable; setups already running are committed (non-preemption) and keep
//! their server until they end. When more setups would run than servers
//! exist, each movable setup gets a tolerance coefficient
//!
//! `coefficient = (makespan - machine end) + setup length`
//!
//! and the ones with the largest coefficients are committed until every
//! server is busy (ties: lower machine index commits first); the rest —
//! those with the least tolerance — are postponed and shift their whole
//! pending suffix right by the step to the next event, where they compete
//! again.
//!
//! Every element boundary at or after `from` is visited: the step is the
//! minimum over current elements' remaining time and, on idle machines, the
//! time to their next element. Postponed setups land exactly on the next
//! visited instant. Each step advances time by at least one unit, so the
//! sweep terminates with no setup overlap beyond `servers` anywhere past
//! `from`.

use crate::instance::Time;

use super::builder::{Chains, Elem};

pub(crate) fn resolve_conflicts(chains: &mut Chains, servers: usize, from: Time) {
    let machines = chains.rows.len();
    let mut makespan = chains.makespan();
    let mut time = from;
    let mut cursor = vec![0usize; machines];
    // Reused across iterations: (coefficient, machine) of movable setups.
    let mut movable: Vec<(Time, usize)> = Vec::new();

    while time < makespan {
        let mut step = Time::MAX;
        let mut running = 0usize;
        movable.clear();

        for (k, cur) in cursor.iter_mut().enumerate() {
            let row = &chains.rows[k];
            let mut c = *cur;
            while c < row.len() && row[c].end <= time {
                c += 1;
            }
            *cur = c;
            let Some(el) = row.get(c) else { continue };

            if el.start <= time {
                step = step.min(el.end - time);
                if let Elem::Setup { .. } = el.elem {
                    if el.start == time {
                        let reserve = makespan - row.last().expect("row non-empty").end;
                        movable.push((reserve + (el.end - el.start), k));
                    } else {
                        running += 1;
                    }
                }
            } else {
                // Idle gap: nothing runs, the next element is ahead.
                step = step.min(el.start - time);
            }
        }
        debug_assert!(step < Time::MAX, "an event must exist before the makespan");
        debug_assert!(running <= servers, "committed setups can never exceed servers");

        if movable.len() + running > servers {
            // Commit direction of the whole sweep: largest coefficient
            // first, lower machine index first between equals.
            movable.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            let mut slots = servers.saturating_sub(running);
            for &(_, k) in movable.iter() {
                if slots > 0 {
                    slots -= 1;
                    continue;
                }
                let row = &mut chains.rows[k];
                for p in row[cursor[k]..].iter_mut() {
                    p.start += step;
                    p.end += step;
                }
                makespan = makespan.max(row.last().expect("row non-empty").end);
            }
        }
        time += step;
    }
}
