//! SIMP baseline: power-law stiffness `E_min + (E − E_min) ρ^p`, continuous
//! densities, optimality-criteria updates with a bisection on the volume
//! multiplier. There is no density filter.

use std::time::Instant;

use log::{debug, info};

use crate::cpd::{ConvergenceRecord, StepRecord};
use crate::error::{Error, Result};
use crate::fem::{element_energies, solve_displacements, Assembler, SolverOptions};
use crate::mesh::{Passive, ProblemDef};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpConfig {
    pub penalty: f64,
    pub move_limit: f64,
    pub rho_min: f64,
    /// Stop when `‖Δρ‖∞` falls to this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Accepted for parity with filtered SIMP codes; unused.
    pub filter_radius: f64,
    /// Target volume fraction; `None` takes the problem's.
    pub volume_fraction: Option<f64>,
    pub solver: SolverOptions,
}

impl Default for SimpConfig {
    fn default() -> Self {
        SimpConfig {
            penalty: 3.0,
            move_limit: 0.2,
            rho_min: 1e-3,
            tolerance: 0.01,
            max_iterations: 200,
            filter_radius: 1.5,
            volume_fraction: None,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimpResult {
    /// Continuous density per element.
    pub density: Vec<f64>,
    pub displacements: Vec<f64>,
    pub record: ConvergenceRecord,
    /// Compliance `2C` of the final density.
    pub compliance: f64,
    pub converged: bool,
}

impl SimpResult {
    /// Elements with `lo < ρ_e < hi`.
    pub fn gray_count(&self, lo: f64, hi: f64) -> usize {
        self.density.iter().filter(|&&r| r > lo && r < hi).count()
    }
}

pub fn simp_run(problem: &ProblemDef, config: &SimpConfig) -> Result<SimpResult> {
    simp_run_with(problem, config, |_| Ok(()))
}

pub fn simp_run_with<F>(problem: &ProblemDef, config: &SimpConfig, mut on_step: F) -> Result<SimpResult>
where
    F: FnMut(&StepRecord) -> Result<()>,
{
    problem.validate()?;
    let vc = config.volume_fraction.unwrap_or(problem.volume_fraction);
    if !(vc > 0.0 && vc <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target volume fraction must lie in (0, 1], got {vc}"
        )));
    }
    if !(config.penalty >= 1.0) || !(config.move_limit > 0.0 && config.move_limit <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need p ≥ 1 and 0 < move ≤ 1, got p = {}, move = {}",
            config.penalty, config.move_limit
        )));
    }
    let start = Instant::now();
    let mesh = &problem.mesh;
    let n = mesh.num_elements();
    let mat = problem.material;
    let p = config.penalty;
    let assembler = Assembler::new(problem)?;
    let designable: Vec<usize> = (0..n).filter(|&e| problem.is_designable(e)).collect();
    let solid = problem.passive.iter().filter(|&&x| x == Passive::ForcedSolid).count() as f64;
    // designable density sum needed to hit the target
    let target = vc * n as f64 - solid;
    if target < config.rho_min * designable.len() as f64 - 1e-9 {
        return Err(Error::InvalidProblem(format!(
            "target volume {vc} is below the minimum density floor"
        )));
    }
    let start_rho = (target / designable.len() as f64).clamp(config.rho_min, 1.0);
    let mut rho: Vec<f64> = problem
        .passive
        .iter()
        .map(|x| match x {
            Passive::Designable => start_rho,
            Passive::ForcedVoid => 0.0,
            Passive::ForcedSolid => 1.0,
        })
        .collect();

    let mut record = ConvergenceRecord::default();
    let mut converged = false;
    let mut u;
    let mut comp;
    let mut iteration = 0;
    loop {
        iteration += 1;
        let moduli: Vec<f64> = rho
            .iter()
            .map(|&r| mat.youngs_min + (mat.youngs - mat.youngs_min) * r.powf(p))
            .collect();
        let system = assembler.assemble_moduli(&moduli)?;
        u = solve_displacements(&system, &config.solver)?.displacements;
        // unit-modulus ½ u_eᵀ K_e u_e
        let ce = element_energies(mesh, &u, assembler.element_stiffness(), 1.0);
        comp = 2.0 * moduli.iter().zip(&ce).map(|(m, c)| m * c).sum::<f64>();
        if iteration == 1 {
            record.initial_compliance = comp;
        }
        if converged || iteration > config.max_iterations {
            break;
        }

        // −∂(2C)/∂ρ_e
        let sens: Vec<f64> = designable
            .iter()
            .map(|&e| p * rho[e].powf(p - 1.0) * (mat.youngs - mat.youngs_min) * 2.0 * ce[e])
            .collect();
        let (next, bisections) = oc_update(&rho, &designable, &sens, target, config)?;
        let change = designable
            .iter()
            .zip(&next)
            .map(|(&e, &r)| (r - rho[e]).abs())
            .fold(0.0, f64::max);
        for (&e, &r) in designable.iter().zip(&next) {
            rho[e] = r;
        }
        let step = StepRecord {
            gamma: iteration,
            volume: rho.iter().sum::<f64>() / n as f64,
            compliance: comp,
            dual: f64::NAN,
            inner_iterations: bisections,
            change,
            seconds: start.elapsed().as_secs_f64(),
            material_fraction: rho.iter().sum::<f64>() / n as f64,
            duality_gap: f64::NAN,
            gap_scale: f64::NAN,
        };
        debug!("simp iteration {iteration}: compliance = {comp:.6e}, change = {change:.3e}");
        on_step(&step)?;
        record.steps.push(step);
        converged = change <= config.tolerance;
    }
    info!(
        "simp: {} after {} iterations, compliance {comp:.6e}",
        if converged { "converged" } else { "stopped" },
        record.len()
    );
    Ok(SimpResult {
        density: rho,
        displacements: u,
        record,
        compliance: comp,
        converged,
    })
}

/// Optimality-criteria step; returns the new designable densities and the
/// number of bisection iterations.
fn oc_update(
    rho: &[f64],
    designable: &[usize],
    sens: &[f64],
    target: f64,
    config: &SimpConfig,
) -> Result<(Vec<f64>, usize)> {
    let candidate = |lambda: f64| -> Vec<f64> {
        designable
            .iter()
            .zip(sens)
            .map(|(&e, &s)| {
                let r = rho[e];
                let lo = (r - config.move_limit).max(config.rho_min);
                let hi = (r + config.move_limit).min(1.0);
                (r * (s.max(0.0) / lambda).sqrt()).clamp(lo, hi)
            })
            .collect()
    };
    let (mut lo, mut hi) = (1e-40f64, 1e40f64);
    for it in 1..=500 {
        let mid = (lo * hi).sqrt();
        let cand = candidate(mid);
        let vol: f64 = cand.iter().sum();
        if (vol - target).abs() <= 1e-9 * target.max(1.0) {
            return Ok((cand, it));
        }
        if vol > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    // Bracket collapsed: the target is unreachable within the move limits.
    let cand = candidate((lo * hi).sqrt());
    let vol: f64 = cand.iter().sum();
    if (vol - target).abs() <= 1e-6 * designable.len() as f64 {
        return Ok((cand, 500));
    }
    Err(Error::Optimization {
        reason: format!("volume bisection failed: {vol} vs target {target}"),
        record: Box::default(),
    })
}
