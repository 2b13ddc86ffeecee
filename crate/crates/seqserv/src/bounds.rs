//! Makespan lower bound.
//!
//! Every schedule must fit the total processing load across `m` machines,
//! and every setup that cannot be avoided must fit across `r` servers. Each
//! task `j` scheduled after some other task needs at least
//! `z_j = min_i o_{i,j}` setup time before it; at most `m` tasks run first
//! on their machines and skip that cost, so dropping the `m` largest values
//! of `z` keeps the bound valid.
//!
//! With `Z'` the remaining values, the bound is
//! `max(sum(p)/m + sum(Z')/m, sum(Z')/r)`, rounded up to the next integer.
//! All arithmetic is exact: sums fit `u64` comfortably and the comparisons
//! run on integer fractions, so no float rounding can tip the ceiling.

use crate::instance::{Instance, Time};

/// Exact non-negative fraction, kept unreduced.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Frac { num, den }
    }

    /// Smallest integer not below the fraction.
    pub fn ceil(self) -> u64 {
        self.num.div_ceil(self.den)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn add(self, other: Frac) -> Frac {
        // Denominators here are m and m, or m and r; u128 keeps the cross
        // products exact before narrowing back.
        let num = u128::from(self.num) * u128::from(other.den)
            + u128::from(other.num) * u128::from(self.den);
        let den = u128::from(self.den) * u128::from(other.den);
        Frac {
            num: u64::try_from(num).expect("fraction overflow"),
            den: u64::try_from(den).expect("fraction overflow"),
        }
    }

    fn max(self, other: Frac) -> Frac {
        let left = u128::from(self.num) * u128::from(other.den);
        let right = u128::from(other.num) * u128::from(self.den);
        if left >= right {
            self
        } else {
            other
        }
    }
}

/// Lower bound with its components.
#[derive(Clone, PartialEq, Debug)]
pub struct LowerBoundReport {
    /// Mean machine load from processing times: `sum(p) / m`.
    pub mbar_p: Frac,
    /// Mean machine load from unavoidable setups: `sum(Z') / m`.
    pub mbar_o: Frac,
    /// Mean server load from unavoidable setups: `sum(Z') / r`.
    pub rbar_o: Frac,
    /// Cheapest setup that can precede each task, in task order; `None`
    /// when every predecessor is forbidden (or there is only one task).
    pub z: Vec<Option<u32>>,
    /// `max(mbar_p + mbar_o, rbar_o)` as an exact fraction.
    pub bound: Frac,
    /// The bound rounded up: the smallest integer makespan it allows.
    pub bound_int: Time,
}

/// Compute the makespan lower bound for an instance.
pub fn lower_bound(instance: &Instance) -> LowerBoundReport {
    let t = instance.tasks();
    let m = instance.machines() as u64;
    let r = instance.servers() as u64;

    // z_j: cheapest setup that can precede task j; None when every
    // predecessor is forbidden (or t == 1).
    let mut z: Vec<Option<u32>> = Vec::with_capacity(t);
    for j in 0..t {
        let mut best: Option<u32> = None;
        for i in 0..t {
            if i == j {
                continue;
            }
            if let Some(len) = instance.setup(i, j).get() {
                best = Some(best.map_or(len, |b| b.min(len)));
            }
        }
        z.push(best);
    }

    // Drop the m largest, counting unbounded entries as largest so they are
    // removed first; any unbounded entry that survives contributes nothing
    // (the bound stays finite and valid).
    let mut sorted = z.clone();
    sorted.sort_unstable_by(|a, b| match (a, b) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (Some(_), None) => std::cmp::Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    });
    let keep = t.saturating_sub(instance.machines());
    let z_prime_sum: u64 = sorted[..keep]
        .iter()
        .map(|v| u64::from(v.unwrap_or(0)))
        .sum();

    let p_sum: u64 = instance
        .processing_times()
        .iter()
        .map(|&p| u64::from(p))
        .sum();

    let mbar_p = Frac::new(p_sum, m);
    let mbar_o = Frac::new(z_prime_sum, m);
    let rbar_o = Frac::new(z_prime_sum, r);
    let bound = mbar_p.add(mbar_o).max(rbar_o);

    LowerBoundReport {
        mbar_p,
        mbar_o,
        rbar_o,
        z,
        bound_int: bound.ceil(),
        bound,
    }
}
