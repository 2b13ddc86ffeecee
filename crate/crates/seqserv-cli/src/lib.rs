//! Support library for the `seqserv` binary: text file formats for
//! instances and schedules, static Gantt SVG rendering, and the benchmark
//! harness. The binary itself only parses arguments and wires these
//! together, so integration tests can drive the same code paths directly.

pub mod bench;
pub mod formats;
pub mod gantt;
