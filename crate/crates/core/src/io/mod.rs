//! Problem input, benchmark generators and result files.

mod benchmarks;
mod log;
mod problem_file;
mod vtk;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use benchmarks::{generate_benchmark, BenchmarkSpec, Hole, BENCHMARK_NAMES};
pub use log::{read_log, write_log, write_summary, ConvergenceLog, RunSummary, LOG_HEADER};
pub use problem_file::{format_problem, load_problem, parse_problem, save_problem, PROBLEM_SCHEMA};
pub use vtk::{format_vtk, parse_vtk, read_vtk, write_vtk, VtkDensity};

use crate::error::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CPD_TOPO_OUT";

/// `$CPD_TOPO_OUT` if set and non-empty.
pub fn default_out_dir() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Write to a sibling temporary file, then rename over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let temp = temp_path(path);
    let mut f = std::fs::File::create(&temp).map_err(|e| Error::io(&temp, e))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .map_err(|e| Error::io(&temp, e))?;
    drop(f);
    std::fs::rename(&temp, path).map_err(|e| {
        let _ = std::fs::remove_file(&temp);
        Error::io(path, e)
    })
}

/// Save the final density and the convergence log of a run.
pub fn save_result(
    dir: impl AsRef<Path>,
    mesh: &crate::mesh::VoxelMesh,
    rho: &[f64],
    record: &crate::cpd::ConvergenceRecord,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    let vtk = dir.join("density.vtk");
    let csv = dir.join("convergence.csv");
    write_vtk(&vtk, mesh, rho)?;
    write_log(&csv, record)?;
    Ok((vtk, csv))
}
