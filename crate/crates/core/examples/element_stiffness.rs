//! Hex8 element stiffness and a small cantilever solve.
//!
//! ```text
//! cargo run --example element_stiffness
//! ```

use cpd_topo::fem::{compliance, constitutive_matrix, element_stiffness, solve_displacements, Assembler, SolverOptions};
use cpd_topo::mesh::{dof, Axis, Material, ProblemDef, Region, VoxelMesh};

fn main() -> cpd_topo::Result<()> {
    let h = constitutive_matrix(1.0, 0.3)?;
    let ke = element_stiffness(&h, 1.0)?;
    println!("K_e diagonal (x, y, z of node 0): {:.6} {:.6} {:.6}", ke.get(0, 0), ke.get(1, 1), ke.get(2, 2));
    println!("K_e[0][3] = {:.6}", ke.get(0, 3));

    // rigid translation stores no energy
    let shift: [f64; 24] = std::array::from_fn(|i| if i % 3 == 1 { 1.0 } else { 0.0 });
    println!("energy of a rigid y-shift: {:.1e}", ke.energy(&shift, 1.0));

    let mesh = VoxelMesh::new(8, 2, 2)?;
    let left = mesh.select_region(&Region::plane(Axis::X, 0.0));
    let tip = mesh.node_index(8, 0, 1);
    let mut p = ProblemDef::new(mesh, Material::new(1.0, 0.3), 1.0);
    p.fix_nodes(&left);
    p.add_load(dof(tip, Axis::Y), -1.0);

    let sys = Assembler::new(&p)?.assemble(&vec![1.0; p.mesh.num_elements()])?;
    let sol = solve_displacements(&sys, &SolverOptions::default())?;
    let c = compliance(&sys, &sol.displacements);
    println!(
        "8×2×2 beam: tip deflection {:.4}, compliance {:.4}, relative residual {:.1e}",
        sol.displacements[dof(tip, Axis::Y)],
        c.reported,
        sol.relative_residual
    );
    Ok(())
}
