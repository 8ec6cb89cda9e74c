use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use cpd_topo::cpd::volume_schedule;
use cpd_topo::fem::{
    compliance, constitutive_matrix, element_energies, element_stiffness, shape_functions,
    solve_displacements, Assembler, SolverKind, SolverOptions,
};
use cpd_topo::mesh::{dof, Axis, Material, ProblemDef, Region, VoxelMesh};

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Dense `K(ρ)` assembled from node coordinates alone.
fn dense_oracle(nx: usize, ny: usize, nz: usize, rho: &[f64], mat: &Material) -> DMatrix<f64> {
    let h = constitutive_matrix(1.0, mat.poisson).unwrap();
    let ke = element_stiffness(&h, 1.0).unwrap();
    let node = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let n = 3 * (nx + 1) * (ny + 1) * (nz + 1);
    let mut k_glob = DMatrix::zeros(n, n);
    let mut e = 0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let modulus = mat.youngs_min + (mat.youngs - mat.youngs_min) * rho[e];
                let dofs: Vec<usize> = CORNERS
                    .iter()
                    .flat_map(|c| {
                        let nd = node(i + c[0], j + c[1], k + c[2]);
                        [3 * nd, 3 * nd + 1, 3 * nd + 2]
                    })
                    .collect();
                for a in 0..24 {
                    for b in 0..24 {
                        k_glob[(dofs[a], dofs[b])] += modulus * ke.get(a, b);
                    }
                }
                e += 1;
            }
        }
    }
    k_glob
}

fn clamped_beam(nx: usize, ny: usize, nz: usize) -> ProblemDef {
    let mesh = VoxelMesh::new(nx, ny, nz).unwrap();
    let left = mesh.select_region(&Region::plane(Axis::X, 0.0));
    let tip = mesh.node_index(nx, 0, nz);
    let mut p = ProblemDef::new(mesh, Material::new(2.0, 0.3), 0.5);
    p.fix_nodes(&left);
    p.add_load(dof(tip, Axis::Y), -1.0);
    p.add_load(dof(tip, Axis::Z), 0.25);
    p
}

#[test]
fn assembly_matches_dense_oracle() {
    let p = clamped_beam(2, 1, 1);
    let rho = [1.0, 0.25];
    let sys = Assembler::new(&p).unwrap().assemble(&rho).unwrap();
    let oracle = dense_oracle(2, 1, 1, &rho, &p.material);
    let dense = sys.stiffness.to_dense();
    let scale = oracle.amax();
    for i in 0..oracle.nrows() {
        for j in 0..oracle.ncols() {
            assert!((dense[i][j] - oracle[(i, j)]).abs() <= 1e-13 * scale, "({i},{j})");
        }
    }
}

#[test]
fn solves_match_nalgebra() {
    let p = clamped_beam(3, 2, 2);
    let rho: Vec<f64> = (0..12).map(|e| if e % 5 == 3 { 1e-3 } else { 1.0 }).collect();
    let oracle = dense_oracle(3, 2, 2, &rho, &p.material);
    let f = p.load_vector();
    let free: Vec<usize> = (0..f.len()).filter(|d| p.fixed_dofs.binary_search(d).is_err()).collect();
    let kff = DMatrix::from_fn(free.len(), free.len(), |a, b| oracle[(free[a], free[b])]);
    let ff = DVector::from_iterator(free.len(), free.iter().map(|&d| f[d]));
    let uf = kff.lu().solve(&ff).unwrap();

    let sys = Assembler::new(&p).unwrap().assemble(&rho).unwrap();
    for kind in [SolverKind::Dense, SolverKind::SparseCholesky, SolverKind::Pcg] {
        let opts = SolverOptions { kind, tolerance: 1e-12, ..SolverOptions::default() };
        let u = solve_displacements(&sys, &opts).unwrap().displacements;
        let scale = uf.amax();
        for (a, &d) in free.iter().enumerate() {
            assert!((u[d] - uf[a]).abs() <= 1e-8 * scale, "{kind:?} dof {d}");
        }
        for &d in &p.fixed_dofs {
            assert_eq!(u[d], 0.0);
        }
    }
}

#[test]
fn element_energies_sum_to_compliance() {
    let p = clamped_beam(4, 2, 2);
    let asm = Assembler::new(&p).unwrap();
    let sys = asm.assemble(&vec![1.0; 16]).unwrap();
    let u = solve_displacements(&sys, &SolverOptions::default()).unwrap().displacements;
    let c = element_energies(&p.mesh, &u, asm.element_stiffness(), p.material.youngs);
    let total: f64 = c.iter().sum();
    let comp = compliance(&sys, &u);
    let work: f64 = p.load_vector().iter().zip(&u).map(|(f, x)| f * x).sum();
    assert!((total - comp.strain_energy).abs() <= 1e-10 * total);
    assert!((comp.reported - work).abs() <= 1e-8 * work);
}

#[test]
fn schedule_formula_random_pairs() {
    let mut seed = 12345u64;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..100 {
        let mu = 0.5 + 0.49 * next();
        let vc = 0.05 + 0.9 * next();
        let s = volume_schedule(mu, 1.0, vc);
        let expected = (vc.ln() / mu.ln()).ceil() as usize;
        // ties at an exact power of μ may land either side
        assert!(s.len() == expected || s.len() + 1 == expected, "μ={mu} vc={vc}: {} vs {expected}", s.len());
        assert_eq!(*s.last().unwrap(), vc);
        for (g, v) in s.iter().enumerate().take(s.len() - 1) {
            assert!((v - mu.powi(g as i32 + 1)).abs() <= 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn partition_of_unity(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
        let n = shape_functions([a, b, c]);
        prop_assert!((n.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        prop_assert!(n.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn select_region_is_monotone(
        lo in prop::array::uniform3(0.0f64..3.0),
        grow in prop::array::uniform3(0.0f64..2.0),
        pad in prop::array::uniform3(0.0f64..1.0),
    ) {
        let mesh = VoxelMesh::new(4, 3, 3).unwrap();
        let hi = [lo[0] + grow[0], lo[1] + grow[1], lo[2] + grow[2]];
        let inner = mesh.select_region(&Region::new(lo, hi));
        let outer = mesh.select_region(&Region::new(
            [lo[0] - pad[0], lo[1] - pad[1], lo[2] - pad[2]],
            [hi[0] + pad[0], hi[1] + pad[1], hi[2] + pad[2]],
        ));
        prop_assert!(inner.iter().all(|n| outer.binary_search(n).is_ok()));
    }
}
