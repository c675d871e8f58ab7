//! Library surface behind the experiment CLI: dataset generation, solver
//! execution, model training, evaluation artifacts and runtime benchmarks.
//! The binary in `main.rs` is a thin argument-parsing shell over these
//! functions so integration tests can drive the same code paths directly.

pub mod bench;
pub mod config;
pub mod dataset;
pub mod evalcmd;
pub mod records;
pub mod seed;
pub mod solve;
pub mod traincmd;
