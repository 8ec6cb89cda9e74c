//! Global stiffness assembly `K(ρ) = Σ_e E(ρ_e) K_e` on a fixed CSR pattern.

use std::sync::Arc;

use rayon::prelude::*;

use super::element::{constitutive_matrix, element_stiffness, ElementStiffness};
use crate::error::{Error, Result};
use crate::mesh::{Material, ProblemDef, VoxelMesh};

/// Sparsity pattern of the full `m × m` stiffness matrix plus, for every
/// element, the value slot of each of its 24×24 local entries.
#[derive(Debug)]
pub struct SparsePattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    slots: Vec<u32>,
}

impl SparsePattern {
    pub fn new(mesh: &VoxelMesh) -> Self {
        let [nx, ny, nz] = mesh.dims().map(|d| d + 1);
        let n = mesh.num_dofs();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for node in 0..mesh.num_nodes() {
            let [i, j, k] = mesh.node_ijk(node);
            let mut nbrs = Vec::with_capacity(27);
            for kk in k.saturating_sub(1)..=(k + 1).min(nz - 1) {
                for jj in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                    for ii in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
                        nbrs.push(mesh.node_index(ii, jj, kk));
                    }
                }
            }
            for _ in 0..3 {
                for &m in &nbrs {
                    col_idx.extend([3 * m as u32, 3 * m as u32 + 1, 3 * m as u32 + 2]);
                }
                row_ptr.push(col_idx.len());
            }
        }

        let mut slots = Vec::with_capacity(mesh.num_elements() * 576);
        for e in 0..mesh.num_elements() {
            let dofs = mesh.element_dofs(e);
            for &gi in &dofs {
                let row = &col_idx[row_ptr[gi]..row_ptr[gi + 1]];
                for &gj in &dofs {
                    let pos = row
                        .binary_search(&(gj as u32))
                        .expect("element DOF pair missing from pattern");
                    slots.push((row_ptr[gi] + pos) as u32);
                }
            }
        }
        SparsePattern {
            n,
            row_ptr,
            col_idx,
            slots,
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    fn element_slots(&self, e: usize) -> &[u32] {
        &self.slots[e * 576..(e + 1) * 576]
    }
}

/// Symmetric CSR matrix sharing its pattern with the assembler.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pattern: Arc<SparsePattern>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.pattern.n
    }

    pub fn pattern(&self) -> &SparsePattern {
        &self.pattern
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1];
        (&self.pattern.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&(j as u32)).map_or(0.0, |p| vals[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`; rows are processed in parallel, each with a fixed
    /// summation order.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let (cols, vals) = self.row(i);
            *yi = cols
                .iter()
                .zip(vals)
                .map(|(&c, &v)| v * x[c as usize])
                .sum();
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c as usize] = v;
            }
        }
        d
    }
}

/// `K(ρ)`, the load vector and the fixed-DOF mask. Boundary conditions are
/// applied at solve time by restricting to the free DOFs.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub stiffness: CsrMatrix,
    pub load: Vec<f64>,
    pub fixed: Vec<bool>,
}

impl GlobalSystem {
    pub fn dim(&self) -> usize {
        self.load.len()
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !self.fixed[i]).collect()
    }

    pub fn with_load(mut self, load: Vec<f64>) -> Self {
        assert_eq!(load.len(), self.dim());
        self.load = load;
        self
    }
}

/// Reusable assembler: pattern, unit-modulus `K_e`, load and supports for
/// one problem.
#[derive(Debug, Clone)]
pub struct Assembler {
    pattern: Arc<SparsePattern>,
    ke: ElementStiffness,
    material: Material,
    load: Vec<f64>,
    fixed: Vec<bool>,
    num_elements: usize,
}

impl Assembler {
    pub fn new(problem: &ProblemDef) -> Result<Self> {
        let mesh = &problem.mesh;
        let h = constitutive_matrix(1.0, problem.material.poisson)?;
        let ke = element_stiffness(&h, VoxelMesh::H)?;
        let mut fixed = vec![false; mesh.num_dofs()];
        for &d in &problem.fixed_dofs {
            fixed[d] = true;
        }
        Ok(Assembler {
            pattern: Arc::new(SparsePattern::new(mesh)),
            ke,
            material: problem.material,
            load: problem.load_vector(),
            fixed,
            num_elements: mesh.num_elements(),
        })
    }

    pub fn element_stiffness(&self) -> &ElementStiffness {
        &self.ke
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn pattern(&self) -> &SparsePattern {
        &self.pattern
    }

    /// `K(ρ)` with the linear interpolation `E_min + (E − E_min) ρ_e`.
    pub fn assemble(&self, rho: &[f64]) -> Result<GlobalSystem> {
        if rho.len() != self.num_elements {
            return Err(Error::InvalidArgument(format!(
                "density has {} entries for {} elements",
                rho.len(),
                self.num_elements
            )));
        }
        let moduli: Vec<f64> = rho.iter().map(|&r| self.material.interpolate(r)).collect();
        self.assemble_moduli(&moduli)
    }

    /// `K = Σ_e moduli[e] K_e` for arbitrary per-element moduli.
    pub fn assemble_moduli(&self, moduli: &[f64]) -> Result<GlobalSystem> {
        if moduli.len() != self.num_elements {
            return Err(Error::InvalidArgument(format!(
                "got {} moduli for {} elements",
                moduli.len(),
                self.num_elements
            )));
        }
        let mut values = vec![0.0; self.pattern.nnz()];
        for (e, &modulus) in moduli.iter().enumerate() {
            let slots = self.pattern.element_slots(e);
            for (i, row) in self.ke.0.iter().enumerate() {
                for (j, &k) in row.iter().enumerate() {
                    values[slots[24 * i + j] as usize] += modulus * k;
                }
            }
        }
        Ok(GlobalSystem {
            stiffness: CsrMatrix {
                pattern: Arc::clone(&self.pattern),
                values,
            },
            load: self.load.clone(),
            fixed: self.fixed.clone(),
        })
    }
}

/// Gather the 24 element DOF values of `u`.
pub fn gather(mesh: &VoxelMesh, e: usize, u: &[f64]) -> [f64; 24] {
    mesh.element_dofs(e).map(|d| u[d])
}

/// `c_e = ½ u_eᵀ (E K_e) u_e`, evaluated at the full solid modulus.
pub fn element_energies(mesh: &VoxelMesh, u: &[f64], ke: &ElementStiffness, youngs: f64) -> Vec<f64> {
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| ke.energy(&gather(mesh, e, u), youngs).max(0.0))
        .collect()
}

/// Strain energy `C = ½ uᵀ K u` and the reported compliance `2C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compliance {
    pub strain_energy: f64,
    pub reported: f64,
}

pub fn compliance(system: &GlobalSystem, u: &[f64]) -> Compliance {
    let ku = system.stiffness.matvec(u);
    let energy = 0.5 * u.iter().zip(&ku).map(|(a, b)| a * b).sum::<f64>();
    Compliance {
        strain_energy: energy,
        reported: 2.0 * energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{dof, Axis, Region};

    fn problem(nx: usize, ny: usize, nz: usize) -> ProblemDef {
        let mesh = VoxelMesh::new(nx, ny, nz).unwrap();
        let left = mesh.select_region(&Region::plane(Axis::X, 0.0));
        let last = mesh.num_nodes() - 1;
        let mut p = ProblemDef::new(mesh, Material::default(), 0.5);
        p.fix_nodes(&left);
        p.add_load(dof(last, Axis::Z), -1.0);
        p
    }

    #[test]
    fn single_element_endpoints() {
        let p = problem(1, 1, 1);
        let a = Assembler::new(&p).unwrap();
        let ke = a.element_stiffness().clone();
        let dofs = p.mesh.element_dofs(0);
        for (rho, scale) in [(1.0, 1.0), (0.0, 1e-9)] {
            let k = a.assemble(&[rho]).unwrap().stiffness;
            for i in 0..24 {
                for j in 0..24 {
                    let expect = scale * ke.get(i, j);
                    assert!((k.get(dofs[i], dofs[j]) - expect).abs() <= 1e-15 * (1.0 + expect.abs()));
                }
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let a = Assembler::new(&problem(2, 1, 1)).unwrap();
        assert!(matches!(a.assemble(&[1.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pattern_is_symmetric() {
        let p = problem(2, 3, 2);
        let pat = SparsePattern::new(&p.mesh);
        for i in 0..pat.n {
            for &c in &pat.col_idx[pat.row_ptr[i]..pat.row_ptr[i + 1]] {
                let c = c as usize;
                let row = &pat.col_idx[pat.row_ptr[c]..pat.row_ptr[c + 1]];
                assert!(row.binary_search(&(i as u32)).is_ok());
            }
        }
    }

    #[test]
    fn zero_and_rigid_energies() {
        let p = problem(2, 2, 1);
        let a = Assembler::new(&p).unwrap();
        let u = vec![0.0; p.mesh.num_dofs()];
        assert!(element_energies(&p.mesh, &u, a.element_stiffness(), 1.0)
            .iter()
            .all(|&c| c == 0.0));
        let mut u = vec![0.0; p.mesh.num_dofs()];
        for n in 0..p.mesh.num_nodes() {
            u[3 * n + 1] = 0.7;
        }
        assert!(element_energies(&p.mesh, &u, a.element_stiffness(), 1.0)
            .iter()
            .all(|&c| c.abs() < 1e-14));
        let sys = a.assemble(&[1.0; 4]).unwrap();
        assert_eq!(compliance(&sys, &vec![0.0; p.mesh.num_dofs()]).reported, 0.0);
    }
}
