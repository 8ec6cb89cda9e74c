//! Linear solvers for the constrained equilibrium `K_ff u_f = f_f`.
//!
//! Fixed DOFs are eliminated: the solution carries exact zeros there.

use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::assembly::GlobalSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Dense Cholesky for small systems, sparse Cholesky otherwise.
    #[default]
    Auto,
    Dense,
    /// Jacobi-preconditioned conjugate gradients.
    Pcg,
    SparseCholesky,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub kind: SolverKind,
    /// PCG stops at relative residual `‖K u − f‖ / ‖f‖` below this; direct
    /// solves must reach this normwise backward error.
    pub tolerance: f64,
    /// PCG iteration cap; `None` means `10 m`.
    pub max_iterations: Option<usize>,
    /// Largest free-DOF count routed to the dense path by `Auto`.
    pub dense_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kind: SolverKind::Auto,
            tolerance: 1e-8,
            max_iterations: None,
            dense_limit: 600,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub displacements: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub fn solve_displacements(system: &GlobalSystem, options: &SolverOptions) -> Result<Solution> {
    let free = system.free_dofs();
    if free.len() == system.dim() {
        return Err(Error::InvalidProblem(
            "no supports: the stiffness matrix is singular".into(),
        ));
    }
    let f_norm = free.iter().map(|&i| system.load[i].powi(2)).sum::<f64>().sqrt();
    if f_norm == 0.0 {
        return Ok(Solution {
            displacements: vec![0.0; system.dim()],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let kind = match options.kind {
        SolverKind::Auto if free.len() <= options.dense_limit => SolverKind::Dense,
        SolverKind::Auto => SolverKind::SparseCholesky,
        k => k,
    };
    let (u, iterations) = match kind {
        SolverKind::Dense => refine(system, &free, options.tolerance * f_norm, dense_cholesky(system, &free)?),
        SolverKind::SparseCholesky => {
            refine(system, &free, options.tolerance * f_norm, sparse_cholesky(system, &free)?)
        }
        SolverKind::Pcg => pcg(system, options)?,
        SolverKind::Auto => unreachable!(),
    };
    let r_norm = residual(system, &u);
    let relative_residual = r_norm / f_norm;
    // Direct solves are judged by normwise backward error, which stays small
    // even when E_min makes K nearly singular.
    let error = match kind {
        SolverKind::Pcg => relative_residual,
        _ => backward_error(system, &u, r_norm),
    };
    if !(error <= options.tolerance) {
        return Err(Error::SolverFailure {
            iterations,
            residual: relative_residual,
        });
    }
    Ok(Solution {
        displacements: u,
        iterations,
        relative_residual,
    })
}

/// `‖r‖ / (‖K‖_F ‖u‖ + ‖f‖)` over the free DOFs.
fn backward_error(system: &GlobalSystem, u: &[f64], r_norm: f64) -> f64 {
    let mut k_sq = 0.0;
    for i in (0..system.dim()).filter(|&i| !system.fixed[i]) {
        let (cols, vals) = system.stiffness.row(i);
        k_sq += cols
            .iter()
            .zip(vals)
            .filter(|(&c, _)| !system.fixed[c as usize])
            .map(|(_, v)| v * v)
            .sum::<f64>();
    }
    let norm = |x: &[f64]| {
        x.iter()
            .zip(&system.fixed)
            .filter(|(_, &f)| !f)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt()
    };
    r_norm / (k_sq.sqrt() * norm(u) + norm(&system.load))
}

/// `‖K u − f‖` restricted to free DOFs.
pub fn residual(system: &GlobalSystem, u: &[f64]) -> f64 {
    let ku = system.stiffness.matvec(u);
    ku.iter()
        .zip(&system.load)
        .zip(&system.fixed)
        .filter(|(_, &fixed)| !fixed)
        .map(|((a, b), _)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Direct solve followed by iterative refinement: with E_min ≪ E the
/// factorization alone can miss the residual target. Returns the solution
/// and the number of solves.
fn refine<S>(system: &GlobalSystem, free: &[usize], target: f64, solve: S) -> (Vec<f64>, usize)
where
    S: Fn(&[f64]) -> Vec<f64>,
{
    let rhs: Vec<f64> = free.iter().map(|&g| system.load[g]).collect();
    let mut x = solve(&rhs);
    let mut u = vec![0.0; system.dim()];
    let mut solves = 1;
    let mut best = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        for (&g, &v) in free.iter().zip(&x) {
            u[g] = v;
        }
        let ku = system.stiffness.matvec(&u);
        let r: Vec<f64> = free.iter().map(|&g| system.load[g] - ku[g]).collect();
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        // stop once comfortably converged or no longer improving
        if norm <= 0.1 * target || norm >= 0.5 * best {
            break;
        }
        best = norm;
        for (xi, di) in x.iter_mut().zip(solve(&r)) {
            *xi += di;
        }
        solves += 1;
    }
    for (&g, &v) in free.iter().zip(&x) {
        u[g] = v;
    }
    (u, solves)
}

const MAX_REFINEMENTS: usize = 5;

/// Factor the free block densely; the returned closure solves with it.
fn dense_cholesky(system: &GlobalSystem, free: &[usize]) -> Result<impl Fn(&[f64]) -> Vec<f64>> {
    let n = free.len();
    let mut local = vec![usize::MAX; system.dim()];
    for (i, &g) in free.iter().enumerate() {
        local[g] = i;
    }
    // lower triangle, row-major
    let mut a = vec![0.0; n * n];
    for (i, &g) in free.iter().enumerate() {
        let (cols, vals) = system.stiffness.row(g);
        for (&c, &v) in cols.iter().zip(vals) {
            let j = local[c as usize];
            if j != usize::MAX {
                a[i * n + j] = v;
            }
        }
    }
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::InvalidProblem(
                "stiffness matrix is not positive definite".into(),
            ));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(move |b: &[f64]| {
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| a[i * n + k] * y[k]).sum();
            y[i] = (y[i] - s) / a[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| a[k * n + i] * y[k]).sum();
            y[i] = (y[i] - s) / a[i * n + i];
        }
        y
    })
}

fn sparse_cholesky(system: &GlobalSystem, free: &[usize]) -> Result<impl Fn(&[f64]) -> Vec<f64>> {
    let n = free.len();
    let mut local = vec![usize::MAX; system.dim()];
    for (i, &g) in free.iter().enumerate() {
        local[g] = i;
    }
    // K is symmetric, so the CSR rows of the free block are its CSC columns.
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0usize);
    for &g in free {
        let (cols, vals) = system.stiffness.row(g);
        for (&c, &v) in cols.iter().zip(vals) {
            let j = local[c as usize];
            if j != usize::MAX {
                row_idx.push(j);
                values.push(v);
            }
        }
        col_ptr.push(row_idx.len());
    }
    let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
    let k = SparseColMat::new(symbolic, values);
    let llt = k.sp_cholesky(Side::Lower).map_err(|e| {
        Error::InvalidProblem(format!("sparse Cholesky failed: {e:?}"))
    })?;
    Ok(move |b: &[f64]| {
        let x = llt.solve(Mat::from_fn(n, 1, |i, _| b[i]));
        (0..n).map(|i| x[(i, 0)]).collect()
    })
}

fn pcg(system: &GlobalSystem, options: &SolverOptions) -> Result<(Vec<f64>, usize)> {
    let m = system.dim();
    let k = &system.stiffness;
    let free = |i: usize| !system.fixed[i];
    let inv_diag: Vec<f64> = k
        .diagonal()
        .iter()
        .enumerate()
        .map(|(i, &d)| if free(i) && d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut x = vec![0.0; m];
    let mut r: Vec<f64> = (0..m)
        .map(|i| if free(i) { system.load[i] } else { 0.0 })
        .collect();
    let b_norm = dot(&r, &r).sqrt();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; m];
    let cap = options.max_iterations.unwrap_or(10 * m);
    // slightly tighter than requested so the recomputed residual passes
    let target = 0.5 * options.tolerance * b_norm;

    for it in 1..=cap {
        k.matvec_into(&p, &mut ap);
        for (i, v) in ap.iter_mut().enumerate() {
            if !free(i) {
                *v = 0.0;
            }
        }
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure {
                iterations: it,
                residual: dot(&r, &r).sqrt() / b_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= target {
            return Ok((x, it));
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure {
        iterations: cap,
        residual: dot(&r, &r).sqrt() / b_norm,
    })
}
