//! Library side of the `vagflow` command-line tool: configuration parsing,
//! run execution and the built-in benchmark suite.

pub mod bench;
pub mod config;
pub mod run;
pub mod tables;

pub use bench::{run_bench, BenchTest};
pub use config::{parse_config, serialize_config, RunConfig};
pub use run::{cmd_mesh_info, cmd_run, execute, write_artifacts};
