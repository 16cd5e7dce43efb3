//! Subcommand implementations and exit-code mapping.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fvlab_core::consistency::{
    audit_regularity, check_level, check_mesh, rates_csv, report_csv, setup_level, IdentityCheck, StudyConfig,
};
use fvlab_core::geometry::{read_mesh, regularity, write_mesh, DualMeshMAC, PrimalMesh};
use fvlab_core::FvError;

use crate::config;
use crate::Common;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_THRESHOLD: u8 = 3;
pub const EXIT_REGULARITY: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<FvError> for Failure {
    fn from(e: FvError) -> Self {
        let code = match e {
            FvError::Regularity { .. } => EXIT_REGULARITY,
            FvError::Parameter(_) | FvError::Parse { .. } => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        Self::new(code, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<F: FnOnce() -> Outcome + Send>(threads: Option<usize>, f: F) -> Outcome {
    match threads {
        None => f(),
        Some(0) => Err(Failure::new(EXIT_CONFIG, "--threads must be positive")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot start {k} threads: {e}")))?
            .install(f),
    }
}

fn load(common: &Common) -> Result<StudyConfig, Failure> {
    let mut cfg = config::load(&common.config).map_err(|m| Failure::new(EXIT_CONFIG, m))?;
    if let Some(levels) = common.levels {
        cfg.levels = levels;
    }
    if let Some(seed) = common.seed {
        cfg.mesh.set_seed(seed);
    }
    cfg.validate().map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot write {}: {e}", path.display())))
}

/// Shortest decimal form after rounding to 12 significant digits.
fn human(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn geometry_lines(s: &mut String, mesh: &PrimalMesh) {
    writeln!(s, "  cells = {}", mesh.n_cells()).unwrap();
    writeln!(s, "  faces = {}", mesh.n_faces()).unwrap();
    writeln!(s, "  vertices = {}", mesh.vertices().len()).unwrap();
    writeln!(s, "  interior_cells = {}", mesh.interior_cells().len()).unwrap();
    writeln!(s, "  delta = {}", human(mesh.space_step())).unwrap();
    writeln!(s, "  theta1 = {}", human(regularity::theta1(mesh))).unwrap();
    writeln!(s, "  theta2 = {}", human(regularity::theta2(mesh))).unwrap();
}

pub fn mesh_info(common: &Common) -> Outcome {
    let cfg = load(common)?;
    let mut out = String::new();
    let mut regs = Vec::new();
    for level in 0..cfg.levels {
        let s = setup_level(&cfg, level)?;
        writeln!(out, "level {level}").unwrap();
        geometry_lines(&mut out, &s.mesh);
        writeln!(out, "  steps = {}", s.grid.n_steps()).unwrap();
        writeln!(out, "  theta3 = {}", human(s.regularity.theta3)).unwrap();
        if let Some(t) = s.regularity.theta_mac {
            writeln!(out, "  theta_mac = {}", human(t)).unwrap();
        }
        regs.push(s.regularity);
    }
    match audit_regularity(&regs, cfg.numerics.regularity_bound) {
        Ok(()) => writeln!(out, "regularity: bounded by {}", cfg.numerics.regularity_bound).unwrap(),
        Err(e) => writeln!(out, "regularity: {e}").unwrap(),
    }
    print!("{out}");
    Ok(())
}

fn read_mesh_file(path: &Path) -> Result<PrimalMesh, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
    read_mesh(&text).map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())))
}

pub fn mesh_file_info(path: &Path) -> Outcome {
    let mesh = read_mesh_file(path)?;
    let mut out = format!("mesh {}\n", path.display());
    geometry_lines(&mut out, &mesh);
    if mesh.is_rectangular().is_ok() {
        let mac = DualMeshMAC::build(&mesh)?;
        writeln!(out, "  theta_mac = {}", human(mac.theta())).unwrap();
    }
    print!("{out}");
    Ok(())
}

pub fn run_study(common: &Common, out: Option<&Path>) -> Outcome {
    let cfg = load(common)?;
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| ".".into());
    let study = fvlab_core::consistency::run_study(&cfg)?;
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot create {}: {e}", dir.display())))?;
    write_file(&dir.join("report.csv"), &report_csv(&study.reports))?;
    write_file(&dir.join("rates.csv"), &rates_csv(&study.rates))?;
    println!("wrote {} and {}", dir.join("report.csv").display(), dir.join("rates.csv").display());
    for r in &study.rates {
        println!("  {:<20} finest-pair slope {:>8.4}  least-squares {:>8.4}", r.series, r.finest_pair(), r.slope);
    }
    let failures = study.threshold_failures(&cfg.thresholds);
    if failures.is_empty() {
        return Ok(());
    }
    let names: Vec<&str> = failures.iter().map(|f| f.0.as_str()).collect();
    let detail: Vec<String> =
        failures.iter().map(|(name, min, got)| format!("{name}: finest-pair slope {got:.4} < {min}")).collect();
    Err(Failure::new(EXIT_THRESHOLD, format!("thresholds not met for {} ({})", names.join(", "), detail.join("; "))))
}

fn print_checks(checks: &[IdentityCheck]) {
    for c in checks {
        println!("ok  {}: {}", c.invariant, c.detail);
    }
}

pub fn check_identities(common: &Common, level: usize) -> Outcome {
    let cfg = load(common)?;
    if level >= cfg.levels {
        return Err(Failure::new(EXIT_CONFIG, format!("level {level} outside 0..{}", cfg.levels)));
    }
    print_checks(&check_level(&cfg, level)?);
    println!("all identities hold on level {level}");
    Ok(())
}

pub fn check_mesh_file(path: &Path) -> Outcome {
    let mesh = read_mesh_file(path)?;
    print_checks(&check_mesh(&mesh)?);
    println!("all identities hold on {}", path.display());
    Ok(())
}

pub fn export_mesh(common: &Common, level: usize, out: Option<&Path>) -> Outcome {
    let cfg = load(common)?;
    let text = write_mesh(&cfg.mesh.build(level)?);
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
