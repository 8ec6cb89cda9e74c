//! Hex8 linear elasticity on voxel meshes.

mod assembly;
mod element;
mod solver;

pub use assembly::{
    compliance, element_energies, gather, Assembler, Compliance, CsrMatrix, GlobalSystem,
    SparsePattern,
};
pub use element::{
    constitutive_matrix, element_stiffness, shape_functions, shape_gradients_natural,
    strain_displacement, ConstitutiveMatrix, ElementStiffness, StrainDisplacement,
};
pub use solver::{residual, solve_displacements, Solution, SolverKind, SolverOptions};
