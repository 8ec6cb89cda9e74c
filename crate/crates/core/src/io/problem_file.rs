//! Problem files: TOML with a versioned schema tag.
//!
//! ```toml
//! schema = "cpd-problem/1"
//! volume_fraction = 0.3
//!
//! [mesh]
//! nelx = 60
//! nely = 20
//! nelz = 4
//!
//! [material]
//! youngs = 1.0
//! poisson = 0.3
//! youngs_min = 1e-9          # optional, defaults to 1e-9 · youngs
//!
//! # explicit DOFs (3 · node + axis) ...
//! fixed_dofs = [0, 1, 2]
//!
//! # ... and/or boxes of nodes, fixed along the listed axes (default all)
//! [[support]]
//! min = [0.0, 0.0, 0.0]
//! max = [0.0, 20.0, 4.0]
//! axes = ["x", "y", "z"]
//!
//! [[load]]
//! dof = 3001                 # any DOF index
//! value = -1.0
//!
//! # total force split equally over the nodes in a box
//! [[distributed_load]]
//! min = [60.0, 0.0, 0.0]
//! max = [60.0, 0.0, 4.0]
//! axis = "y"
//! total = -1.0
//!
//! [passive]                  # element indices
//! forced_void = []
//! forced_solid = []
//! ```
//!
//! [`save_problem`] writes only explicit `fixed_dofs`, `load` and `passive`
//! entries, so loading a saved file gives back the same [`ProblemDef`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::error::{Error, Result};
use crate::mesh::{Axis, Material, Passive, ProblemDef, Region, VoxelMesh};

pub const PROBLEM_SCHEMA: &str = "cpd-problem/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    schema: String,
    volume_fraction: f64,
    mesh: MeshSection,
    material: MaterialSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    fixed_dofs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    support: Vec<SupportSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    load: Vec<LoadSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    distributed_load: Vec<DistributedLoadSection>,
    #[serde(default)]
    passive: PassiveSection,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshSection {
    nelx: usize,
    nely: usize,
    nelz: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSection {
    youngs: f64,
    poisson: f64,
    youngs_min: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportSection {
    min: [f64; 3],
    max: [f64; 3],
    #[serde(default = "all_axes")]
    axes: Vec<Axis>,
}

fn all_axes() -> Vec<Axis> {
    vec![Axis::X, Axis::Y, Axis::Z]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadSection {
    dof: usize,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributedLoadSection {
    min: [f64; 3],
    max: [f64; 3],
    axis: Axis,
    total: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PassiveSection {
    #[serde(default)]
    forced_void: Vec<usize>,
    #[serde(default)]
    forced_solid: Vec<usize>,
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// 1-based line where `key` is first assigned or opened as a table, or 1.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.trim_start_matches('[').starts_with(key) && l.starts_with('[')
        })
        .map_or(1, |i| i + 1)
}

pub fn parse_problem(text: &str) -> Result<ProblemDef> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let at = |key: &str, message: String| Error::Parse {
        line: line_of_key(text, key),
        message,
    };
    if file.schema != PROBLEM_SCHEMA {
        return Err(at(
            "schema",
            format!("unsupported schema `{}`, expected `{PROBLEM_SCHEMA}`", file.schema),
        ));
    }
    let m = &file.mesh;
    let mesh = VoxelMesh::new(m.nelx, m.nely, m.nelz).map_err(|e| at("mesh", e.to_string()))?;
    let mut material = Material::new(file.material.youngs, file.material.poisson);
    if let Some(min) = file.material.youngs_min {
        material = material.with_min(min);
    }
    let mut p = ProblemDef::new(mesh, material, file.volume_fraction);
    p.fixed_dofs = file.fixed_dofs;
    p.fixed_dofs.sort_unstable();
    p.fixed_dofs.dedup();
    for s in &file.support {
        let nodes = p.mesh.select_region(&Region::new(s.min, s.max));
        if nodes.is_empty() {
            return Err(at("support", format!("support box {:?}..{:?} holds no nodes", s.min, s.max)));
        }
        p.fix_node_axes(&nodes, &s.axes);
    }
    for l in &file.load {
        p.add_load(l.dof, l.value);
    }
    for d in &file.distributed_load {
        let nodes = p.mesh.select_region(&Region::new(d.min, d.max));
        if nodes.is_empty() {
            return Err(at("distributed_load", format!("load box {:?}..{:?} holds no nodes", d.min, d.max)));
        }
        p.distribute_load(&nodes, d.axis, d.total);
    }
    let n = p.mesh.num_elements();
    for (list, kind) in [
        (&file.passive.forced_void, Passive::ForcedVoid),
        (&file.passive.forced_solid, Passive::ForcedSolid),
    ] {
        for &e in list {
            if e >= n {
                return Err(at("passive", format!("element {e} out of range ({n} elements)")));
            }
            p.passive[e] = kind;
        }
    }
    p.validate().map_err(|e| at("schema", e.to_string()))?;
    Ok(p)
}

pub fn format_problem(problem: &ProblemDef) -> Result<String> {
    let [nelx, nely, nelz] = problem.mesh.dims();
    let of = |kind| {
        problem
            .passive
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == kind)
            .map(|(e, _)| e)
            .collect()
    };
    let file = ProblemFile {
        schema: PROBLEM_SCHEMA.to_string(),
        volume_fraction: problem.volume_fraction,
        mesh: MeshSection { nelx, nely, nelz },
        material: MaterialSection {
            youngs: problem.material.youngs,
            poisson: problem.material.poisson,
            youngs_min: Some(problem.material.youngs_min),
        },
        fixed_dofs: problem.fixed_dofs.clone(),
        support: Vec::new(),
        load: problem
            .loads
            .iter()
            .map(|&(dof, value)| LoadSection { dof, value })
            .collect(),
        distributed_load: Vec::new(),
        passive: PassiveSection {
            forced_void: of(Passive::ForcedVoid),
            forced_solid: of(Passive::ForcedSolid),
        },
    };
    toml::to_string(&file).map_err(|e| Error::InvalidProblem(format!("cannot serialize problem: {e}")))
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemDef> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_problem(&text)
}

pub fn save_problem(path: impl AsRef<Path>, problem: &ProblemDef) -> Result<()> {
    write_atomic(path.as_ref(), format_problem(problem)?.as_bytes())
}
