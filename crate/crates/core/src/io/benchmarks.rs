//! Built-in benchmark problems.
//!
//! Axes: x runs along the span, y is vertical (loads act in −y), z is the
//! depth. Every benchmark is mirror-symmetric about the mid-plane in z.
//!
//! | name                     | default mesh | V_c   | μ     | β     | ω₁    |
//! |--------------------------|--------------|-------|-------|-------|-------|
//! | `cantilever-distributed` | 60×20×4      | 0.3   | 0.89  | 4000  | 1e-6  |
//! | `cantilever-central`     | 40×20×20     | 0.3   | 0.89  | 4000  | 1e-6  |
//! | `mbb-distributed`        | 40×20×20     | 0.1   | 0.89  | 5000  | 1e-3  |
//! | `mbb-central`            | 60×10×10     | 0.155 | 0.943 | 7250  | 1e-5  |
//! | `cantilever-hole`        | 70×30×6      | 0.5   | 0.94  | 7000  | 1e-3  |
//! | `wheel`                  | 40×20×40     | 0.2   | 0.94  | 150   | 1e-5  |

use serde::{Deserialize, Serialize};

use crate::cpd::CpdConfig;
use crate::error::{Error, Result};
use crate::mesh::{Axis, Material, ProblemDef, Region, VoxelMesh};

pub const BENCHMARK_NAMES: [&str; 6] = [
    "cantilever-distributed",
    "cantilever-central",
    "mbb-distributed",
    "mbb-central",
    "cantilever-hole",
    "wheel",
];

/// Through-thickness (z-axis) circular hole, in element-length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub name: String,
    pub dims: [usize; 3],
    pub volume_fraction: f64,
    pub mu: f64,
    pub beta: f64,
    pub omega1: f64,
    /// Total applied load, split equally over the loaded nodes.
    pub load: f64,
    /// Required by `cantilever-hole`, ignored elsewhere.
    pub hole: Option<Hole>,
    pub material: Material,
}

impl BenchmarkSpec {
    /// The named benchmark with its default mesh and parameters.
    pub fn new(name: &str) -> Result<Self> {
        let (dims, vc, mu, beta, omega1) = match name {
            "cantilever-distributed" => ([60, 20, 4], 0.3, 0.89, 4000.0, 1e-6),
            "cantilever-central" => ([40, 20, 20], 0.3, 0.89, 4000.0, 1e-6),
            "mbb-distributed" => ([40, 20, 20], 0.1, 0.89, 5000.0, 1e-3),
            "mbb-central" => ([60, 10, 10], 0.155, 0.943, 7250.0, 1e-5),
            "cantilever-hole" => ([70, 30, 6], 0.5, 0.94, 7000.0, 1e-3),
            "wheel" => ([40, 20, 40], 0.2, 0.94, 150.0, 1e-5),
            _ => return Err(unknown(name)),
        };
        Ok(BenchmarkSpec {
            name: name.to_string(),
            dims,
            volume_fraction: vc,
            mu,
            beta,
            omega1,
            load: 1.0,
            hole: None,
            material: Material::default(),
        })
    }

    pub fn with_dims(mut self, dims: [usize; 3]) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_hole(mut self, hole: Hole) -> Self {
        self.hole = Some(hole);
        self
    }

    /// Default CPD settings with this benchmark's μ, β, ω₁ and V_c.
    pub fn cpd_config(&self) -> CpdConfig {
        CpdConfig {
            mu: self.mu,
            beta: self.beta,
            omega1: self.omega1,
            volume_fraction: Some(self.volume_fraction),
            ..CpdConfig::default()
        }
    }
}

fn unknown(name: &str) -> Error {
    Error::InvalidArgument(format!(
        "unknown benchmark `{name}`; valid names: {}",
        BENCHMARK_NAMES.join(", ")
    ))
}

pub fn generate_benchmark(spec: &BenchmarkSpec) -> Result<ProblemDef> {
    if !BENCHMARK_NAMES.contains(&spec.name.as_str()) {
        return Err(unknown(&spec.name));
    }
    let [nx, ny, nz] = spec.dims;
    let mesh = VoxelMesh::new(nx, ny, nz)?;
    let (fx, fy, fz) = (nx as f64, ny as f64, nz as f64);
    let mut p = ProblemDef::new(mesh, spec.material, spec.volume_fraction);
    let nodes = |p: &ProblemDef, min: [f64; 3], max: [f64; 3]| p.mesh.select_region(&Region::new(min, max));
    // nodes nearest a coordinate: the node itself, or the two straddling it
    let mid = |n: usize| -> (f64, f64) {
        let h = n as f64 / 2.0;
        (h.floor(), h.ceil())
    };
    let load = -spec.load;

    match spec.name.as_str() {
        "cantilever-distributed" | "cantilever-hole" => {
            let left = nodes(&p, [0.0; 3], [0.0, fy, fz]);
            p.fix_nodes(&left);
            let edge = nodes(&p, [fx, 0.0, 0.0], [fx, 0.0, fz]);
            p.distribute_load(&edge, Axis::Y, load);
        }
        "cantilever-central" => {
            let left = nodes(&p, [0.0; 3], [0.0, fy, fz]);
            p.fix_nodes(&left);
            let (y0, y1) = mid(ny);
            let (z0, z1) = mid(nz);
            let center = nodes(&p, [fx, y0, z0], [fx, y1, z1]);
            p.distribute_load(&center, Axis::Y, load);
        }
        "mbb-distributed" => {
            // pinned bottom edges at both ends, line load across the top
            let ends: Vec<usize> = [0.0, fx]
                .iter()
                .flat_map(|&x| nodes(&p, [x, 0.0, 0.0], [x, 0.0, fz]))
                .collect();
            p.fix_nodes(&ends);
            let (x0, x1) = mid(nx);
            let line = nodes(&p, [x0, fy, 0.0], [x1, fy, fz]);
            p.distribute_load(&line, Axis::Y, load);
        }
        "mbb-central" => {
            let corners = bottom_corners(&p, fx, fz);
            p.fix_nodes(&corners);
            let (x0, x1) = mid(nx);
            let (z0, z1) = mid(nz);
            let top = nodes(&p, [x0, fy, z0], [x1, fy, z1]);
            p.distribute_load(&top, Axis::Y, load);
        }
        "wheel" => {
            let corners = bottom_corners(&p, fx, fz);
            p.fix_nodes(&corners);
            let (x0, x1) = mid(nx);
            let (z0, z1) = mid(nz);
            let bottom = nodes(&p, [x0, 0.0, z0], [x1, 0.0, z1]);
            p.distribute_load(&bottom, Axis::Y, load);
        }
        _ => unreachable!(),
    }

    if spec.name == "cantilever-hole" {
        let hole = spec.hole.ok_or_else(|| {
            Error::InvalidArgument("cantilever-hole needs a hole center and radius".into())
        })?;
        p = p.mark_cylindrical_void(Axis::Z, hole.center, hole.radius)?;
    }
    p.validate()?;
    Ok(p)
}

fn bottom_corners(p: &ProblemDef, fx: f64, fz: f64) -> Vec<usize> {
    let mut out = Vec::with_capacity(4);
    for z in [0.0, fz] {
        for x in [0.0, fx] {
            out.extend(p.mesh.select_region(&Region::new([x, 0.0, z], [x, 0.0, z])));
        }
    }
    out
}
