//! Legacy-VTK structured-points export of element densities.
//!
//! Cells are written in element order (x fastest, then y, then z), which is
//! the cell order VTK expects for structured points. Values use Rust's
//! shortest round-trip float formatting, so reading back is exact.

use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::mesh::VoxelMesh;

pub fn format_vtk(mesh: &VoxelMesh, rho: &[f64]) -> Result<String> {
    if rho.len() != mesh.num_elements() {
        return Err(Error::InvalidArgument(format!(
            "density has {} entries for {} elements",
            rho.len(),
            mesh.num_elements()
        )));
    }
    let [nx, ny, nz] = mesh.dims();
    let h = VoxelMesh::H;
    let mut s = String::with_capacity(32 * rho.len() + 256);
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("cpd-topo element densities\n");
    s.push_str("ASCII\n");
    s.push_str("DATASET STRUCTURED_POINTS\n");
    let _ = writeln!(s, "DIMENSIONS {} {} {}", nx + 1, ny + 1, nz + 1);
    s.push_str("ORIGIN 0 0 0\n");
    let _ = writeln!(s, "SPACING {h} {h} {h}");
    let _ = writeln!(s, "CELL_DATA {}", rho.len());
    s.push_str("SCALARS density double 1\n");
    s.push_str("LOOKUP_TABLE default\n");
    for r in rho {
        let _ = writeln!(s, "{r}");
    }
    Ok(s)
}

pub fn write_vtk(path: impl AsRef<Path>, mesh: &VoxelMesh, rho: &[f64]) -> Result<()> {
    write_atomic(path.as_ref(), format_vtk(mesh, rho)?.as_bytes())
}

/// Cell grid dimensions and densities of a file written by [`write_vtk`].
#[derive(Debug, Clone, PartialEq)]
pub struct VtkDensity {
    pub dims: [usize; 3],
    pub density: Vec<f64>,
}

pub fn parse_vtk(text: &str) -> Result<VtkDensity> {
    let err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let mut dims = None;
    let mut count = None;
    let mut density = Vec::new();
    let mut in_data = false;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let mut words = line.split_whitespace();
        match words.next() {
            _ if in_data => {
                for w in line.split_whitespace() {
                    density.push(w.parse().map_err(|_| err(n, "bad scalar value"))?);
                }
            }
            Some("DIMENSIONS") => {
                let v: Vec<usize> = words
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err(n, "bad DIMENSIONS"))?;
                match v[..] {
                    [a, b, c] if a > 1 && b > 1 && c > 1 => dims = Some([a - 1, b - 1, c - 1]),
                    _ => return Err(err(n, "DIMENSIONS needs three values > 1")),
                }
            }
            Some("CELL_DATA") => {
                count = Some(
                    words
                        .next()
                        .and_then(|w| w.parse::<usize>().ok())
                        .ok_or_else(|| err(n, "bad CELL_DATA"))?,
                );
            }
            Some("LOOKUP_TABLE") => in_data = true,
            _ => {}
        }
    }
    let dims = dims.ok_or_else(|| err(1, "missing DIMENSIONS"))?;
    let count = count.ok_or_else(|| err(1, "missing CELL_DATA"))?;
    if count != dims.iter().product::<usize>() || density.len() != count {
        return Err(err(
            text.lines().count(),
            &format!("expected {count} cell values, found {}", density.len()),
        ));
    }
    Ok(VtkDensity { dims, density })
}

pub fn read_vtk(path: impl AsRef<Path>) -> Result<VtkDensity> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vtk(&text)
}
