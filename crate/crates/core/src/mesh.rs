//! Structured voxel meshes and problem definitions.
//!
//! A box domain of `nelx × nely × nelz` unit cubes. Nodes are numbered with
//! x fastest, then y, then z:
//!
//! ```text
//! node(i, j, k)    = i + j (nelx + 1) + k (nelx + 1)(nely + 1)
//! element(i, j, k) = i + j nelx + k nelx nely
//! ```
//!
//! Each node carries three displacement DOFs `3 n + {0, 1, 2}` for x, y, z.
//! The eight nodes of an element are listed counterclockwise on the bottom
//! face (`z = k`) starting from the `(-,-,-)` corner, then the same on the
//! top face.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural-coordinate signs of the eight local nodes.
pub const LOCAL_NODE_SIGNS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Closed axis-aligned box in node coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Region {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Region { min, max }
    }

    /// The plane `coord[axis] = value`, unbounded in the other two axes.
    pub fn plane(axis: Axis, value: f64) -> Self {
        let mut min = [f64::NEG_INFINITY; 3];
        let mut max = [f64::INFINITY; 3];
        min[axis.index()] = value;
        max[axis.index()] = value;
        Region { min, max }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        const EPS: f64 = 1e-9;
        (0..3).all(|d| p[d] >= self.min[d] - EPS && p[d] <= self.max[d] + EPS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelMesh {
    nelx: usize,
    nely: usize,
    nelz: usize,
    connectivity: Vec<[usize; 8]>,
}

impl VoxelMesh {
    /// Element edge length. Meshes are dimensionless.
    pub const H: f64 = 1.0;

    pub fn new(nelx: usize, nely: usize, nelz: usize) -> Result<Self> {
        if nelx == 0 || nely == 0 || nelz == 0 {
            return Err(Error::InvalidArgument(format!(
                "mesh dimensions must be positive, got {nelx}x{nely}x{nelz}"
            )));
        }
        let nx = nelx + 1;
        let nxy = nx * (nely + 1);
        let mut connectivity = Vec::with_capacity(nelx * nely * nelz);
        for k in 0..nelz {
            for j in 0..nely {
                for i in 0..nelx {
                    let n0 = i + j * nx + k * nxy;
                    connectivity.push([
                        n0,
                        n0 + 1,
                        n0 + 1 + nx,
                        n0 + nx,
                        n0 + nxy,
                        n0 + 1 + nxy,
                        n0 + 1 + nx + nxy,
                        n0 + nx + nxy,
                    ]);
                }
            }
        }
        Ok(VoxelMesh {
            nelx,
            nely,
            nelz,
            connectivity,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nelx, self.nely, self.nelz]
    }

    pub fn num_elements(&self) -> usize {
        self.nelx * self.nely * self.nelz
    }

    pub fn num_nodes(&self) -> usize {
        (self.nelx + 1) * (self.nely + 1) * (self.nelz + 1)
    }

    pub fn num_dofs(&self) -> usize {
        3 * self.num_nodes()
    }

    pub fn element_volume(&self) -> f64 {
        Self::H * Self::H * Self::H
    }

    pub fn total_volume(&self) -> f64 {
        self.num_elements() as f64 * self.element_volume()
    }

    pub fn connectivity(&self) -> &[[usize; 8]] {
        &self.connectivity
    }

    pub fn element_nodes(&self, e: usize) -> [usize; 8] {
        self.connectivity[e]
    }

    pub fn element_dofs(&self, e: usize) -> [usize; 24] {
        let mut dofs = [0; 24];
        for (a, &n) in self.connectivity[e].iter().enumerate() {
            dofs[3 * a] = 3 * n;
            dofs[3 * a + 1] = 3 * n + 1;
            dofs[3 * a + 2] = 3 * n + 2;
        }
        dofs
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + j * (self.nelx + 1) + k * (self.nelx + 1) * (self.nely + 1)
    }

    pub fn node_ijk(&self, n: usize) -> [usize; 3] {
        let nx = self.nelx + 1;
        let nxy = nx * (self.nely + 1);
        [n % nx, (n % nxy) / nx, n / nxy]
    }

    pub fn node_coords(&self, n: usize) -> [f64; 3] {
        self.node_ijk(n).map(|c| c as f64 * Self::H)
    }

    pub fn element_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + j * self.nelx + k * self.nelx * self.nely
    }

    pub fn element_ijk(&self, e: usize) -> [usize; 3] {
        let nxy = self.nelx * self.nely;
        [e % self.nelx, (e % nxy) / self.nelx, e / nxy]
    }

    pub fn element_centroid(&self, e: usize) -> [f64; 3] {
        self.element_ijk(e).map(|c| (c as f64 + 0.5) * Self::H)
    }

    /// Nodes whose coordinates lie in the closed box, in ascending order.
    pub fn select_region(&self, region: &Region) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&n| region.contains(self.node_coords(n)))
            .collect()
    }

    /// Face neighbours of element `e` (up to six).
    pub fn face_neighbors(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        let [i, j, k] = self.element_ijk(e);
        let dims = self.dims();
        let ijk = [i, j, k];
        (0..3).flat_map(move |d| {
            let lo = (ijk[d] > 0).then(|| {
                let mut c = ijk;
                c[d] -= 1;
                c
            });
            let hi = (ijk[d] + 1 < dims[d]).then(|| {
                let mut c = ijk;
                c[d] += 1;
                c
            });
            lo.into_iter()
                .chain(hi)
                .map(|c| self.element_index(c[0], c[1], c[2]))
        })
    }
}

pub fn dof(node: usize, axis: Axis) -> usize {
    3 * node + axis.index()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Young's modulus of solid material.
    pub youngs: f64,
    pub poisson: f64,
    /// Modulus assigned to void elements.
    pub youngs_min: f64,
}

impl Material {
    pub fn new(youngs: f64, poisson: f64) -> Self {
        Material {
            youngs,
            poisson,
            youngs_min: 1e-9 * youngs,
        }
    }

    pub fn with_min(mut self, youngs_min: f64) -> Self {
        self.youngs_min = youngs_min;
        self
    }

    /// Interpolated modulus `E_min + (E - E_min) ρ`.
    pub fn interpolate(&self, rho: f64) -> f64 {
        self.youngs_min + (self.youngs - self.youngs_min) * rho
    }
}

impl Default for Material {
    fn default() -> Self {
        Material::new(1.0, 0.3)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Passive {
    #[default]
    Designable,
    ForcedVoid,
    ForcedSolid,
}

/// A supported, loaded voxel structure with a target volume fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDef {
    pub mesh: VoxelMesh,
    /// Sorted, deduplicated fixed DOF indices.
    pub fixed_dofs: Vec<usize>,
    pub loads: Vec<(usize, f64)>,
    pub material: Material,
    pub volume_fraction: f64,
    pub passive: Vec<Passive>,
}

impl ProblemDef {
    pub fn new(mesh: VoxelMesh, material: Material, volume_fraction: f64) -> Self {
        let n = mesh.num_elements();
        ProblemDef {
            mesh,
            fixed_dofs: Vec::new(),
            loads: Vec::new(),
            material,
            volume_fraction,
            passive: vec![Passive::Designable; n],
        }
    }

    /// Fix every DOF of the given nodes.
    pub fn fix_nodes(&mut self, nodes: &[usize]) {
        for &n in nodes {
            self.fixed_dofs.extend([3 * n, 3 * n + 1, 3 * n + 2]);
        }
        self.normalize_fixed();
    }

    pub fn fix_node_axes(&mut self, nodes: &[usize], axes: &[Axis]) {
        for &n in nodes {
            self.fixed_dofs.extend(axes.iter().map(|&a| dof(n, a)));
        }
        self.normalize_fixed();
    }

    fn normalize_fixed(&mut self) {
        self.fixed_dofs.sort_unstable();
        self.fixed_dofs.dedup();
    }

    pub fn add_load(&mut self, dof: usize, value: f64) {
        self.loads.push((dof, value));
    }

    /// Split `total` equally over `nodes` along `axis`.
    pub fn distribute_load(&mut self, nodes: &[usize], axis: Axis, total: f64) {
        let share = total / nodes.len() as f64;
        for &n in nodes {
            self.add_load(dof(n, axis), share);
        }
    }

    pub fn load_vector(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.mesh.num_dofs()];
        for &(d, v) in &self.loads {
            f[d] += v;
        }
        f
    }

    pub fn is_designable(&self, e: usize) -> bool {
        self.passive[e] == Passive::Designable
    }

    pub fn forced_solid_volume(&self) -> f64 {
        let v = self.mesh.element_volume();
        self.passive
            .iter()
            .filter(|&&p| p == Passive::ForcedSolid)
            .count() as f64
            * v
    }

    pub fn target_volume(&self) -> f64 {
        self.volume_fraction * self.mesh.total_volume()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.mesh.num_dofs();
        let n = self.mesh.num_elements();
        if self.passive.len() != n {
            return Err(Error::InvalidProblem(format!(
                "passive mask has {} entries for {n} elements",
                self.passive.len()
            )));
        }
        if self.fixed_dofs.is_empty() {
            return Err(Error::InvalidProblem(
                "no fixed DOFs: the structure is unsupported".into(),
            ));
        }
        if let Some(&d) = self.fixed_dofs.iter().find(|&&d| d >= m) {
            return Err(Error::InvalidProblem(format!(
                "fixed DOF {d} out of range (m = {m})"
            )));
        }
        if let Some(&(d, _)) = self.loads.iter().find(|&&(d, _)| d >= m) {
            return Err(Error::InvalidProblem(format!(
                "load DOF {d} out of range (m = {m})"
            )));
        }
        if !self.loads.iter().any(|&(_, v)| v != 0.0) {
            return Err(Error::InvalidProblem("no nonzero load".into()));
        }
        let mat = &self.material;
        if !(mat.youngs > 0.0) || !(mat.youngs_min > 0.0) || mat.youngs_min >= mat.youngs {
            return Err(Error::InvalidProblem(format!(
                "need 0 < E_min < E, got E = {}, E_min = {}",
                mat.youngs, mat.youngs_min
            )));
        }
        if !(0.0..0.5).contains(&mat.poisson) {
            return Err(Error::InvalidProblem(format!(
                "Poisson ratio {} outside [0, 0.5)",
                mat.poisson
            )));
        }
        if !(self.volume_fraction > 0.0 && self.volume_fraction <= 1.0) {
            return Err(Error::InvalidProblem(format!(
                "volume fraction {} outside (0, 1]",
                self.volume_fraction
            )));
        }
        if self.forced_solid_volume() > self.target_volume() + 1e-9 {
            return Err(Error::InvalidProblem(
                "forced-solid volume exceeds the target volume".into(),
            ));
        }
        if self.passive.iter().all(|&p| p != Passive::Designable) {
            return Err(Error::InvalidProblem("no designable elements".into()));
        }
        Ok(())
    }

    /// Force every element whose centroid lies strictly inside the cylinder
    /// to void. `center` holds the two coordinates orthogonal to `axis`, in
    /// ascending axis order.
    pub fn mark_cylindrical_void(mut self, axis: Axis, center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cylinder radius must be positive, got {radius}"
            )));
        }
        let (a, b) = match axis {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        };
        let inside: Vec<usize> = (0..self.mesh.num_elements())
            .filter(|&e| {
                let c = self.mesh.element_centroid(e);
                let (da, db) = (c[a] - center[0], c[b] - center[1]);
                da * da + db * db < radius * radius
            })
            .collect();
        if inside.len() == self.mesh.num_elements() {
            return Err(Error::InvalidProblem(
                "cylindrical void covers every element".into(),
            ));
        }
        for e in inside {
            self.passive[e] = Passive::ForcedVoid;
        }
        Ok(self)
    }
}
