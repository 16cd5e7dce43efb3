//! `fvlab`: mesh inspection, identity checks and refinement studies.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "fvlab", version, about = "Finite-volume weak-consistency laboratory")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FVLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Study configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the number of refinement levels.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Override the mesh perturbation seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// A configured mesh family or a single mesh file.
#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Study configuration (TOML).
    #[arg(long, required_unless_present = "mesh")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mesh file in the fvlab text format (geometry and dual partitions only).
    #[arg(long, conflicts_with_all = ["config", "levels", "seed"])]
    pub mesh: Option<PathBuf>,
}

impl Source {
    fn common(&self) -> Option<Common> {
        self.config.clone().map(|config| Common { config, levels: self.levels, seed: self.seed })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print cell counts and regularity parameters of every level, or of a mesh file.
    MeshInfo {
        #[command(flatten)]
        source: Source,
    },
    /// Run a refinement study and write report.csv and rates.csv.
    RunStudy {
        #[command(flatten)]
        common: Common,
        /// Output directory (default: `output` from the config, else `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the identity suite on one level of the configured family, or on a mesh file.
    CheckIdentities {
        #[command(flatten)]
        source: Source,
        /// Level to check.
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
    /// Write one level of the configured mesh family in the text mesh format.
    ExportMesh {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Destination file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::with_threads(cli.threads, || match cli.command {
        Command::MeshInfo { source } => match (&source.mesh, source.common()) {
            (Some(mesh), _) => commands::mesh_file_info(mesh),
            (None, Some(common)) => commands::mesh_info(&common),
            (None, None) => unreachable!("clap requires --config or --mesh"),
        },
        Command::RunStudy { common, out } => commands::run_study(&common, out.as_deref()),
        Command::CheckIdentities { source, level } => match (&source.mesh, source.common()) {
            (Some(mesh), _) => commands::check_mesh_file(mesh),
            (None, Some(common)) => commands::check_identities(&common, level),
            (None, None) => unreachable!("clap requires --config or --mesh"),
        },
        Command::ExportMesh { common, level, out } => commands::export_mesh(&common, level, out.as_deref()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
