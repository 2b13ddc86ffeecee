//! Problem data: machine and server counts, processing times, setup matrix.

use std::fmt;
use thiserror::Error;

/// Discrete schedule time. All event times are non-negative integers.
pub type Time = u64;

/// A sequence-dependent setup length, possibly infinite.
///
/// `Setup::INF` marks a forbidden predecessor/successor pair: the successor
/// may never directly follow the predecessor on a machine. The derived
/// ordering places `INF` above every finite length, which is what every use
/// site wants (minima skip forbidden pairs, descending sorts push them first).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Setup(u32);

impl Setup {
    /// Marker for a forbidden transition.
    pub const INF: Setup = Setup(u32::MAX);

    /// A finite setup length.
    ///
    /// # Panics
    /// Panics if `len` equals the reserved infinity encoding (`u32::MAX`).
    pub fn finite(len: u32) -> Setup {
        assert!(
            len != u32::MAX,
            "setup length {len} collides with the infinity encoding"
        );
        Setup(len)
    }

    /// True for the forbidden-transition marker.
    pub fn is_inf(self) -> bool {
        self.0 == u32::MAX
    }

    /// The finite length, or `None` for a forbidden transition.
    pub fn get(self) -> Option<u32> {
        if self.is_inf() {
            None
        } else {
            Some(self.0)
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.get() {
            Some(len) => write!(f, "{len}"),
            None => write!(f, "inf"),
        }
    }
}

/// Errors raised when assembling an [`Instance`] from raw parts.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("instance needs at least one server")]
    NoServers,
    #[error("instance needs at least one task")]
    NoTasks,
    #[error("setup matrix has {got} entries, expected {expected} (tasks²)")]
    SetupShape { got: usize, expected: usize },
}

/// An immutable problem instance.
///
/// Tasks, machines and servers are addressed by zero-based indices
/// everywhere in this crate; serialized formats are one-based.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    machines: usize,
    servers: usize,
    processing: Vec<u32>,
    /// Row-major `t × t` matrix; entry `(i, j)` is the setup needed before
    /// task `j` when it directly follows task `i` on a machine. The diagonal
    /// is stored but never read, a task cannot follow itself.
    setups: Vec<Setup>,
}

impl Instance {
    pub fn new(
        machines: usize,
        servers: usize,
        processing: Vec<u32>,
        setups: Vec<Setup>,
    ) -> Result<Self, InstanceError> {
        if machines == 0 {
            return Err(InstanceError::NoMachines);
        }
        if servers == 0 {
            return Err(InstanceError::NoServers);
        }
        if processing.is_empty() {
            return Err(InstanceError::NoTasks);
        }
        let expected = processing.len() * processing.len();
        if setups.len() != expected {
            return Err(InstanceError::SetupShape {
                got: setups.len(),
                expected,
            });
        }
        Ok(Instance {
            machines,
            servers,
            processing,
            setups,
        })
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn tasks(&self) -> usize {
        self.processing.len()
    }

    /// Processing time of task `i`.
    pub fn processing(&self, i: usize) -> u32 {
        self.processing[i]
    }

    pub fn processing_times(&self) -> &[u32] {
        &self.processing
    }

    /// Setup length required before task `j` when it directly follows task
    /// `i` on the same machine.
    pub fn setup(&self, i: usize, j: usize) -> Setup {
        self.setups[i * self.processing.len() + j]
    }

    /// Row-major setup matrix, `tasks() * tasks()` entries.
    pub fn setup_matrix(&self) -> &[Setup] {
        &self.setups
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup_ordering_puts_inf_last() {
        let mut v = vec![Setup::INF, Setup::finite(3), Setup::finite(0)];
        v.sort();
        assert_eq!(v, vec![Setup::finite(0), Setup::finite(3), Setup::INF]);
    }

    #[test]
    fn setup_display() {
        assert_eq!(Setup::finite(7).to_string(), "7");
        assert_eq!(Setup::INF.to_string(), "inf");
    }

    #[test]
    #[should_panic(expected = "infinity encoding")]
    fn finite_rejects_reserved_value() {
        let _ = Setup::finite(u32::MAX);
    }

    #[test]
    fn construction_checks_shape() {
        assert_eq!(
            Instance::new(1, 1, vec![1, 2], vec![Setup::finite(0); 3]).unwrap_err(),
            InstanceError::SetupShape {
                got: 3,
                expected: 4
            }
        );
        assert_eq!(
            Instance::new(0, 1, vec![1], vec![Setup::finite(0)]).unwrap_err(),
            InstanceError::NoMachines
        );
        assert_eq!(
            Instance::new(1, 0, vec![1], vec![Setup::finite(0)]).unwrap_err(),
            InstanceError::NoServers
        );
        assert_eq!(
            Instance::new(1, 1, vec![], vec![]).unwrap_err(),
            InstanceError::NoTasks
        );
    }

    #[test]
    fn accessors_round_trip() {
        let inst = Instance::new(
            2,
            1,
            vec![3, 4],
            vec![
                Setup::finite(0),
                Setup::finite(5),
                Setup::INF,
                Setup::finite(0),
            ],
        )
        .unwrap();
        assert_eq!(inst.machines(), 2);
        assert_eq!(inst.servers(), 1);
        assert_eq!(inst.tasks(), 2);
        assert_eq!(inst.processing(1), 4);
        assert_eq!(inst.setup(0, 1), Setup::finite(5));
        assert!(inst.setup(1, 0).is_inf());
    }
}
