//! Topology optimization of linear-elastic voxel structures by the canonical
//! penalty-duality (CPD) method.
//!
//! The design problem alternates two steps. A finite-element solve gives the
//! strain energy `c_e` stored in every element; a 0-1 knapsack then keeps the
//! elements with the most energy per unit volume under the current volume
//! budget. The knapsack is solved through its canonical dual: a per-element
//! cubic for `σ_e`, a scalar multiplier `ς`, and a closed-form recovery of
//! the binary density. The budget shrinks geometrically toward the target.
//!
//! Modules:
//! - [`mesh`]: voxel meshes, supports, loads and passive elements.
//! - [`fem`]: hex8 element matrices, assembly and linear solves.
//! - [`dual`]: the canonical dual knapsack solver and an exhaustive oracle.
//! - [`cpd`]: the volume-evolution driver.
//! - [`simp`]: a SIMP optimality-criteria baseline without filtering.
//! - [`io`]: benchmark generators, problem files, VTK and CSV output.
//! - [`cli`]: the `cpd-topo` command line.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cpd;
pub mod dual;
mod error;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod simp;

pub use error::{Error, Result};
