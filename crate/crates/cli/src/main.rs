//! `vagflow`: configuration-driven runs, the built-in benchmark suite, and
//! mesh quality reports.
//!
//! Exit codes: 0 on success, 1 on validation or input errors, 2 when the
//! solver aborts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vagflow_core::error::Error;
use vagflow_cli::bench::BenchTest;

#[derive(Parser)]
#[command(name = "vagflow", version, about = "Free-energy diminishing finite-volume solver for degenerate parabolic equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration file and write its artifacts.
    Run {
        /// Path to a flat key-value configuration file.
        config: PathBuf,
    },
    /// Run one of the built-in benchmark tests over a mesh family.
    Bench {
        /// Test name, e.g. t1_nonlinear, t2a, t2c_2d, t3_quasilinear, t4.
        test: String,
        /// Number of refinement levels (t1_kershaw and t4 take 1).
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Output directory for tables and per-level artifacts.
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
    /// Print the quality report of a mesh file.
    MeshInfo {
        /// Path to a mesh file.
        mesh: PathBuf,
        /// Lumping fraction distributed from each cell to its vertices.
        #[arg(long, default_value_t = 0.1)]
        lumping: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => vagflow_cli::cmd_run(&config).map(|dir| {
            println!("artifacts written to {}", dir.display());
        }),
        Command::Bench { test, levels, out } => BenchTest::parse(&test)
            .and_then(|t| vagflow_cli::run_bench(t, levels, &out))
            .map(|output| {
                print!("{}", vagflow_cli::bench::table_csv(&output));
            }),
        Command::MeshInfo { mesh, lumping } => {
            vagflow_cli::cmd_mesh_info(&mesh, lumping).map(|text| print!("{text}"))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::SolverAbort { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
