//! Volume-evolution driver.
//!
//! Starting from the full design, each outer step shrinks the volume budget
//! by the factor `μ` (never below the target), solves the knapsack for the
//! current element energies through its canonical dual, and re-solves the
//! displacements. Once the target is reached the budget is held until the
//! design stops changing.

use std::time::Instant;

use log::{debug, info, warn};

use crate::dual::{knapsack_solve, KnapsackInstance, KnapsackParams, KnapsackSolution};
use crate::error::{Error, Result};
use crate::fem::{compliance, element_energies, solve_displacements, Assembler, SolverOptions};
use crate::mesh::{Passive, ProblemDef, VoxelMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpdConfig {
    /// Volume reduction rate `μ ∈ (0, 1)`.
    pub mu: f64,
    /// Perturbation parameter `β`, relative to the largest element energy of
    /// each step (energies are divided by their maximum before the dual
    /// solve).
    pub beta: f64,
    /// Target volume fraction; `None` takes the problem's.
    pub volume_fraction: Option<f64>,
    /// Inner (dual) convergence tolerance `ω₁`.
    pub omega1: f64,
    /// Outer design-change tolerance `ω₂` on `‖Δρ‖∞`.
    pub omega2: f64,
    /// Initial multiplier `ς⁰`, in normalized energy units.
    pub varsigma0: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Repair knapsack rounding so every step fits its budget exactly.
    pub feasible_rounding: bool,
    /// Modulus used for the element energies fed to the knapsack.
    pub energy: EnergyWeighting,
    pub solver: SolverOptions,
}

/// How element energies `c_e = ½ u_eᵀ (E_e K_e) u_e` are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyWeighting {
    /// `E_e = E_min + (E − E_min) ρ_e`: the energy actually stored by the
    /// current design, so void elements contribute almost nothing.
    #[default]
    Interpolated,
    /// `E_e = E` for every element, void or not.
    FullModulus,
}

impl Default for CpdConfig {
    fn default() -> Self {
        CpdConfig {
            mu: 0.89,
            beta: 4000.0,
            volume_fraction: None,
            omega1: 1e-6,
            omega2: 1e-6,
            varsigma0: 1.0,
            max_outer: 100,
            max_inner: 500,
            feasible_rounding: false,
            energy: EnergyWeighting::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl CpdConfig {
    fn validate(&self, vc: f64) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidArgument(format!("mu must lie in (0, 1), got {}", self.mu)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {}", self.beta)));
        }
        if !(vc > 0.0 && vc <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "target volume fraction must lie in (0, 1], got {vc}"
            )));
        }
        if !(self.omega1 > 0.0 && self.omega2 > 0.0) {
            return Err(Error::InvalidArgument("omega1 and omega2 must be positive".into()));
        }
        if !(self.varsigma0 > 0.0) {
            return Err(Error::InvalidArgument("initial multiplier must be positive".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidArgument("max_outer must be at least 1".into()));
        }
        Ok(())
    }
}

/// Budgets `μ^γ V₀` for `γ = 1, 2, …`, with the last entry clamped to `V_c`.
/// Empty when `V_c ≥ V₀`.
pub fn volume_schedule(mu: f64, v0: f64, vc: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(mu > 0.0 && mu < 1.0) || !(vc > 0.0) || vc >= v0 {
        return out;
    }
    let mut v = v0;
    loop {
        v *= mu;
        if v <= vc * (1.0 + 1e-12) {
            out.push(vc);
            return out;
        }
        out.push(v);
    }
}

/// One row of the convergence log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub gamma: usize,
    /// Volume budget as a fraction of the domain (`V_γ`).
    pub volume: f64,
    /// Reported compliance `2C`.
    pub compliance: f64,
    /// Final dual value `P_β`; NaN for methods without one.
    pub dual: f64,
    pub inner_iterations: usize,
    /// `‖ρ^{γ+1} − ρ^γ‖∞`.
    pub change: f64,
    /// Wall time since the start of the run.
    pub seconds: f64,
    /// Volume fraction of the design after this step.
    pub material_fraction: f64,
    /// `|P_β + ‖σ‖²/4β − (−cᵀρ̄ − ς(V − vᵀρ̄))|` for the rounded knapsack
    /// solution; NaN for methods without a dual.
    pub duality_gap: f64,
    /// Scale of the gap check, `max(1, cᵀρ̄)`.
    pub gap_scale: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub steps: Vec<StepRecord>,
    /// Compliance of the initial full design.
    pub initial_compliance: f64,
}

impl ConvergenceRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.steps.last()
    }

    /// Number of steps whose budget is strictly below the previous one.
    pub fn volume_reductions(&self) -> usize {
        let mut prev = 1.0;
        let mut n = 0;
        for s in &self.steps {
            if s.volume < prev * (1.0 - 1e-12) {
                n += 1;
            }
            prev = s.volume;
        }
        n
    }
}

#[derive(Debug, Clone)]
pub struct CpdResult {
    /// Binary density per element.
    pub density: Vec<f64>,
    pub displacements: Vec<f64>,
    pub record: ConvergenceRecord,
    pub compliance: f64,
}

impl CpdResult {
    pub fn volume_fraction(&self) -> f64 {
        self.density.iter().sum::<f64>() / self.density.len() as f64
    }
}

pub fn run(problem: &ProblemDef, config: &CpdConfig) -> Result<CpdResult> {
    run_with(problem, config, |_| Ok(()))
}

/// Like [`run`], calling `on_step` after every outer step.
pub fn run_with<F>(problem: &ProblemDef, config: &CpdConfig, mut on_step: F) -> Result<CpdResult>
where
    F: FnMut(&StepRecord) -> Result<()>,
{
    problem.validate()?;
    let vc = config.volume_fraction.unwrap_or(problem.volume_fraction);
    config.validate(vc)?;
    let start = Instant::now();

    let mesh = &problem.mesh;
    let n = mesh.num_elements();
    let v_elem = mesh.element_volume();
    let total = mesh.total_volume();
    let youngs = problem.material.youngs;
    let assembler = Assembler::new(problem)?;
    let designable: Vec<usize> = (0..n).filter(|&e| problem.is_designable(e)).collect();
    let designable_volume = designable.len() as f64 * v_elem;
    let solid_volume = problem.forced_solid_volume();
    if solid_volume > vc * total + 1e-9 {
        return Err(Error::InvalidProblem(
            "forced-solid volume exceeds the target volume".into(),
        ));
    }

    let mut rho: Vec<f64> = problem
        .passive
        .iter()
        .map(|p| if *p == Passive::ForcedVoid { 0.0 } else { 1.0 })
        .collect();
    let system = assembler.assemble(&rho)?;
    let sol = solve_displacements(&system, &config.solver)?;
    let mut u = sol.displacements;
    let weigh = |u: &[f64], rho: &[f64]| -> Vec<f64> {
        let mut c = element_energies(mesh, u, assembler.element_stiffness(), 1.0);
        for (ce, &r) in c.iter_mut().zip(rho) {
            *ce *= match config.energy {
                EnergyWeighting::Interpolated => problem.material.interpolate(r),
                EnergyWeighting::FullModulus => youngs,
            };
        }
        c
    };
    let mut energies = weigh(&u, &rho);
    let mut record = ConvergenceRecord {
        steps: Vec::new(),
        initial_compliance: compliance(&system, &u).reported,
    };
    info!(
        "cpd: {} elements ({} designable), initial compliance {:.6e}",
        n,
        designable.len(),
        record.initial_compliance
    );

    let schedule = volume_schedule(config.mu, 1.0, vc);
    // warm-start multiplier, in unnormalized energy units
    let mut varsigma: Option<f64> = None;
    let fail = |reason: String, record: &ConvergenceRecord| Error::Optimization {
        reason,
        record: Box::new(record.clone()),
    };

    for gamma in 1..=config.max_outer {
        let budget_fraction = schedule.get(gamma - 1).copied().unwrap_or(vc);
        let budget = (budget_fraction * total - solid_volume).min(designable_volume);
        if !(budget > 0.0) {
            return Err(fail(
                format!("volume budget {budget_fraction} leaves no room for designable elements"),
                &record,
            ));
        }
        // β acts on energies relative to the largest one of this step
        let scale = designable
            .iter()
            .map(|&e| energies[e])
            .fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let inst = KnapsackInstance::new(
            designable.iter().map(|&e| energies[e] / scale).collect(),
            vec![v_elem; designable.len()],
            budget,
        )?;
        let mut params = KnapsackParams {
            beta: config.beta,
            varsigma0: varsigma.map_or(config.varsigma0, |v| v / scale),
            tolerance: config.omega1,
            max_iterations: config.max_inner,
            feasible_rounding: config.feasible_rounding,
        };
        let mut ks = knapsack_solve(&inst, &params)?;
        let mut inner = ks.iterations();
        if !ks.converged {
            warn!("cpd step {gamma}: knapsack did not converge, retrying with beta x 10");
            params.beta *= 10.0;
            ks = knapsack_solve(&inst, &params)?;
            inner += ks.iterations();
            if !ks.converged {
                return Err(fail(
                    format!("knapsack did not converge at step {gamma} (budget {budget_fraction})"),
                    &record,
                ));
            }
        }
        if ks.state.varsigma > 0.0 {
            varsigma = Some(ks.state.varsigma * scale);
        }
        let (duality_gap, gap_scale) = complementary_gap(&ks, &inst, scale);

        let mut next = rho.clone();
        for (i, &e) in designable.iter().enumerate() {
            next[e] = ks.rounded[i];
        }
        let change = next
            .iter()
            .zip(&rho)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rho = next;

        let system = assembler.assemble(&rho)?;
        let sol = solve_displacements(&system, &config.solver)
            .map_err(|e| fail(format!("displacement solve failed at step {gamma}: {e}"), &record))?;
        u = sol.displacements;
        energies = weigh(&u, &rho);
        let mut last_compliance = compliance(&system, &u).reported;

        let step = StepRecord {
            gamma,
            volume: budget_fraction,
            compliance: last_compliance,
            dual: scale * ks.dual_value(),
            inner_iterations: inner,
            change,
            seconds: start.elapsed().as_secs_f64(),
            material_fraction: rho.iter().sum::<f64>() * v_elem / total,
            duality_gap,
            gap_scale,
        };
        debug!(
            "cpd step {gamma}: V = {:.4}, compliance = {:.6e}, inner = {inner}, change = {change:.3e}",
            budget_fraction, last_compliance
        );
        on_step(&step)?;
        record.steps.push(step);

        if change <= config.omega2 && budget_fraction <= vc * (1.0 + 1e-12) {
            let density: Vec<f64> = rho.iter().map(|&r| if r >= 0.5 { 1.0 } else { 0.0 }).collect();
            if density != rho {
                let system = assembler.assemble(&density)?;
                u = solve_displacements(&system, &config.solver)?.displacements;
                last_compliance = compliance(&system, &u).reported;
            }
            info!(
                "cpd: converged after {gamma} steps, compliance {:.6e}, volume {:.4}",
                last_compliance,
                density.iter().sum::<f64>() / n as f64
            );
            return Ok(CpdResult {
                density,
                displacements: u,
                record,
                compliance: last_compliance,
            });
        }
    }
    Err(fail(
        format!("no convergence within {} outer steps", config.max_outer),
        &record,
    ))
}

/// Distance between the perturbation-corrected dual value and the primal
/// value of the 0.5-rounded recovered density, and `max(1, |cᵀρ̄|)`, both in
/// the units of the unnormalized energies `scale · inst.energies`.
fn complementary_gap(ks: &KnapsackSolution, inst: &KnapsackInstance, scale: f64) -> (f64, f64) {
    let rho_bar: Vec<f64> = ks.rho.iter().map(|&r| if r >= 0.5 { 1.0 } else { 0.0 }).collect();
    let st = &ks.state;
    let sigma_sq: f64 = st.sigma.iter().map(|s| s * s).sum();
    let lhs = ks.dual_value() + 0.25 * sigma_sq / st.beta;
    let c_rho = -inst.objective(&rho_bar);
    let rhs = -c_rho - st.varsigma * (inst.budget - inst.volume(&rho_bar));
    (scale * (lhs - rhs).abs(), (scale * c_rho).abs().max(1.0))
}

/// Face-connected components of the solid elements (`ρ_e ≥ 0.5`).
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    /// Component label per element; `None` for void.
    pub labels: Vec<Option<usize>>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

pub fn connected_components(rho: &[f64], mesh: &VoxelMesh) -> Components {
    let n = mesh.num_elements();
    let mut labels = vec![None; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for seed in 0..n {
        if rho[seed] < 0.5 || labels[seed].is_some() {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        labels[seed] = Some(id);
        stack.push(seed);
        while let Some(e) = stack.pop() {
            size += 1;
            for nb in mesh.face_neighbors(e) {
                if rho[nb] >= 0.5 && labels[nb].is_none() {
                    labels[nb] = Some(id);
                    stack.push(nb);
                }
            }
        }
        sizes.push(size);
    }
    Components { labels, sizes }
}

/// Whether one solid component touches a supported node and every loaded
/// node.
pub fn supports_and_loads_connected(problem: &ProblemDef, rho: &[f64]) -> bool {
    let mesh = &problem.mesh;
    let comps = connected_components(rho, mesh);
    let mut support_node = vec![false; mesh.num_nodes()];
    for &d in &problem.fixed_dofs {
        support_node[d / 3] = true;
    }
    let mut load_nodes: Vec<usize> = problem
        .loads
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(d, _)| d / 3)
        .collect();
    load_nodes.sort_unstable();
    load_nodes.dedup();

    (0..comps.count()).any(|id| {
        let mut touches_support = false;
        let mut touched = vec![false; mesh.num_nodes()];
        for e in 0..mesh.num_elements() {
            if comps.labels[e] == Some(id) {
                for nd in mesh.element_nodes(e) {
                    touched[nd] = true;
                    touches_support |= support_node[nd];
                }
            }
        }
        touches_support && load_nodes.iter().all(|&nd| touched[nd])
    })
}
