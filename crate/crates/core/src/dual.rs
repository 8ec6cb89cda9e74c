//! Canonical penalty-duality solver for the volume-constrained 0-1 knapsack
//!
//! ```text
//! min  −cᵀρ   s.t.  vᵀρ ≤ V,  ρ ∈ {0, 1}ⁿ
//! ```
//!
//! The integrality constraint is written as `ρ∘ρ − ρ = 0` and penalized by
//! `β ‖ρ∘ρ − ρ‖²`. Its canonical dual is a concave function of the pair
//! `(σ, ς)` with `σ > 0` elementwise and `ς ≥ 0`:
//!
//! ```text
//! P_β(σ, ς) = −¼ Σ_e τ_e² / σ_e − ς V − ‖σ‖² / (4β),   τ_e = σ_e + c_e − ς v_e
//! ```
//!
//! Maximizing over `σ_e` for fixed `ς` gives the cubic
//! `2σ³/β + σ² = θ_e²` with `θ_e = ς v_e − c_e`; maximizing over `ς` for fixed
//! `σ` gives a closed-form multiplier. Alternating the two is block
//! coordinate ascent, and the primal density is recovered as
//! `ρ_e = ½ (1 − θ_e / σ_e)`.
//!
//! Because the cubic forces `σ_e < |θ_e|`, every recovered `ρ_e` lies outside
//! the open interval `(0, 1)`: clamping gives a binary vector directly.

use log::debug;

use crate::error::{Error, Result};

/// Energies `c`, volumes `v` and the budget `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    pub energies: Vec<f64>,
    pub volumes: Vec<f64>,
    pub budget: f64,
}

impl KnapsackInstance {
    pub fn new(energies: Vec<f64>, volumes: Vec<f64>, budget: f64) -> Result<Self> {
        if energies.len() != volumes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} energies for {} volumes",
                energies.len(),
                volumes.len()
            )));
        }
        if energies.is_empty() {
            return Err(Error::InvalidArgument("empty knapsack instance".into()));
        }
        if let Some(c) = energies.iter().find(|&&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "energies must be finite and nonnegative, got {c}"
            )));
        }
        if let Some(v) = volumes.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "volumes must be positive, got {v}"
            )));
        }
        let total: f64 = volumes.iter().sum();
        if !(budget > 0.0 && budget <= total * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "budget {budget} outside (0, {total}]"
            )));
        }
        Ok(KnapsackInstance {
            energies,
            volumes,
            budget,
        })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// `−cᵀρ`.
    pub fn objective(&self, rho: &[f64]) -> f64 {
        -self.energies.iter().zip(rho).map(|(c, r)| c * r).sum::<f64>()
    }

    pub fn volume(&self, rho: &[f64]) -> f64 {
        self.volumes.iter().zip(rho).map(|(v, r)| v * r).sum()
    }

    /// Budget test with a rounding allowance of `1e-9` of the total volume.
    pub fn fits(&self, volume: f64) -> bool {
        volume <= self.budget + 1e-9 * self.total_volume()
    }
}

/// The canonical dual pair `(σ, ς)` at perturbation `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub sigma: Vec<f64>,
    pub varsigma: f64,
    pub beta: f64,
}

impl DualState {
    /// `θ_e = ς v_e − c_e`.
    pub fn theta(&self, inst: &KnapsackInstance, e: usize) -> f64 {
        self.varsigma * inst.volumes[e] - inst.energies[e]
    }

    /// `τ_e = σ_e + c_e − ς v_e`.
    pub fn tau(&self, inst: &KnapsackInstance, e: usize) -> f64 {
        self.sigma[e] - self.theta(inst, e)
    }
}

/// Positive root of `2σ³/β + σ² = θ²`.
///
/// With `w = 1/σ` the cubic is depressed, `θ² w³ − w − 2/β = 0`, and its
/// largest root has the trigonometric (or hyperbolic) form used here. Let
/// `r = 3√3 |θ| / β`; then `σ = (√3 |θ| / 2) / cos(⅓ arccos r)` for `r ≤ 1`
/// and `σ = (√3 |θ| / 2) / cosh(⅓ arcosh r)` beyond. A final Newton step
/// polishes the residual.
pub fn solve_sigma(theta: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation beta must be positive, got {beta}"
        )));
    }
    if theta == 0.0 {
        return Err(Error::DegenerateTheta);
    }
    let t = theta.abs();
    let r = 3.0 * 3f64.sqrt() * t / beta;
    let half = 0.5 * 3f64.sqrt() * t;
    let mut sigma = if r <= 1.0 {
        half / (r.acos() / 3.0).cos()
    } else {
        half / (r.acosh() / 3.0).cosh()
    };
    let a = 2.0 / beta;
    let f = (a * sigma + 1.0) * sigma * sigma - t * t;
    let df = (3.0 * a * sigma + 2.0) * sigma;
    if df > 0.0 {
        let next = sigma - f / df;
        if next > 0.0 {
            sigma = next;
        }
    }
    Ok(sigma)
}

/// Closed-form maximizer of the dual in `ς` for fixed `σ`, clamped at zero:
/// `ς = [Σ v_e (1 + c_e/σ_e) − 2V] / Σ v_e²/σ_e`.
pub fn update_multiplier(sigma: &[f64], inst: &KnapsackInstance) -> f64 {
    let mut num = -2.0 * inst.budget;
    let mut den = 0.0;
    for ((&s, &c), &v) in sigma.iter().zip(&inst.energies).zip(&inst.volumes) {
        num += v * (1.0 + c / s);
        den += v * v / s;
    }
    (num / den).max(0.0)
}

/// `½ (1 − θ_e/σ_e)` without clamping.
pub fn recover_rho_raw(state: &DualState, inst: &KnapsackInstance) -> Vec<f64> {
    (0..inst.len())
        .map(|e| 0.5 * (1.0 - state.theta(inst, e) / state.sigma[e]))
        .collect()
}

/// Recovered density clamped to `[0, 1]`.
pub fn recover_rho(state: &DualState, inst: &KnapsackInstance) -> Vec<f64> {
    recover_rho_raw(state, inst)
        .into_iter()
        .map(|r| r.clamp(0.0, 1.0))
        .collect()
}

/// The β-perturbed canonical dual `P_β(σ, ς)`.
pub fn dual_value(state: &DualState, inst: &KnapsackInstance) -> f64 {
    let mut quad = 0.0;
    let mut sigma_sq = 0.0;
    for e in 0..inst.len() {
        let s = state.sigma[e];
        let tau = state.tau(inst, e);
        quad += tau * tau / s;
        sigma_sq += s * s;
    }
    -0.25 * quad - state.varsigma * inst.budget - 0.25 * sigma_sq / state.beta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnapsackParams {
    pub beta: f64,
    pub varsigma0: f64,
    /// Stop when successive dual values differ by at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Drop the selected elements with the lowest `c_e/v_e` until the rounded
    /// density fits the budget. Off by default: plain 0.5 rounding may exceed
    /// the budget by at most one element.
    pub feasible_rounding: bool,
}

impl Default for KnapsackParams {
    fn default() -> Self {
        KnapsackParams {
            beta: 4000.0,
            varsigma0: 1.0,
            tolerance: 1e-6,
            max_iterations: 500,
            feasible_rounding: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KnapsackSolution {
    /// Recovered density clamped to `[0, 1]`.
    pub rho: Vec<f64>,
    /// Binary density: 0.5 rounding, then the optional budget repair.
    pub rounded: Vec<f64>,
    pub state: DualState,
    /// Dual value after every inner iteration.
    pub history: Vec<f64>,
    pub converged: bool,
    /// Elements dropped by feasible rounding.
    pub dropped: usize,
    /// Elements whose `θ_e` was exactly zero and had `c_e` perturbed.
    pub perturbed: usize,
}

impl KnapsackSolution {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn dual_value(&self) -> f64 {
        *self.history.last().expect("at least one inner iteration")
    }
}

/// Alternate the `σ` and `ς` updates until the dual value settles at a
/// maximizer, then recover `ρ`.
pub fn knapsack_solve(inst: &KnapsackInstance, params: &KnapsackParams) -> Result<KnapsackSolution> {
    if !(params.beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation beta must be positive, got {}",
            params.beta
        )));
    }
    if !(params.varsigma0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "initial multiplier must be positive, got {}",
            params.varsigma0
        )));
    }
    let n = inst.len();
    let c_max = inst.energies.iter().cloned().fold(0.0, f64::max);
    let bump = if c_max > 0.0 { 1e-12 * c_max } else { 1e-12 };

    let v_max = inst.volumes.iter().cloned().fold(0.0, f64::max);
    let mut state = DualState {
        sigma: vec![1.0; n],
        varsigma: params.varsigma0,
        beta: params.beta,
    };
    let mut history = Vec::new();
    let mut converged = false;
    let mut perturbed = 0;
    let max_iterations = params.max_iterations.max(1);

    for _ in 0..max_iterations {
        for e in 0..n {
            let mut theta = state.theta(inst, e);
            if theta == 0.0 {
                theta = -bump;
                perturbed += 1;
                debug!("theta = 0 at element {e}; perturbing its energy by {bump:e}");
            }
            state.sigma[e] = solve_sigma(theta, params.beta)?;
        }
        // σ now matches the previous ς
        let consistent = at_kink(&state, inst, v_max);
        state.varsigma = update_multiplier(&state.sigma, inst);
        let value = dual_value(&state, inst);
        let settled = consistent
            && history
                .last()
                .is_some_and(|&prev: &f64| (value - prev).abs() <= params.tolerance);
        history.push(value);
        if settled {
            converged = true;
            break;
        }
    }

    let rho = recover_rho(&state, inst);
    let mut rounded: Vec<f64> = rho.iter().map(|&r| if r >= 0.5 { 1.0 } else { 0.0 }).collect();
    let dropped = if params.feasible_rounding {
        repair_budget(inst, &mut rounded)
    } else {
        0
    };
    Ok(KnapsackSolution {
        rho,
        rounded,
        state,
        history,
        converged,
        dropped,
        perturbed,
    })
}

/// A stalled dual value alone is not enough: an element with `θ_e ≈ 0` has a
/// tiny `σ_e` that pins `ς` for many iterations before the iteration moves
/// away. At a genuine maximizer the density recovered from a consistent pair
/// (`σ` solved for the current `ς`) is within one element of the budget.
fn at_kink(state: &DualState, inst: &KnapsackInstance, v_max: f64) -> bool {
    let rho = recover_rho(state, inst);
    (inst.volume(&rho) - inst.budget).abs() <= v_max * (1.0 + 1e-9)
}

/// Run `knapsack_solve` for each `β` in turn, warm-starting `ς`, and return
/// the final solve. An unconverged solve is followed by the next `β`.
pub fn knapsack_solve_escalating(
    inst: &KnapsackInstance,
    betas: &[f64],
    params: &KnapsackParams,
) -> Result<KnapsackSolution> {
    let mut params = *params;
    let mut last = None;
    for &beta in betas {
        params.beta = beta;
        let sol = knapsack_solve(inst, &params)?;
        if sol.state.varsigma > 0.0 {
            params.varsigma0 = sol.state.varsigma;
        }
        last = Some(sol);
    }
    last.ok_or_else(|| Error::InvalidArgument("empty beta schedule".into()))
}

fn repair_budget(inst: &KnapsackInstance, rounded: &mut [f64]) -> usize {
    let mut volume = inst.volume(rounded);
    if inst.fits(volume) {
        return 0;
    }
    let mut selected: Vec<usize> = (0..inst.len()).filter(|&e| rounded[e] == 1.0).collect();
    selected.sort_by(|&a, &b| {
        let ra = inst.energies[a] / inst.volumes[a];
        let rb = inst.energies[b] / inst.volumes[b];
        ra.total_cmp(&rb).then(b.cmp(&a))
    });
    let mut dropped = 0;
    for e in selected {
        if inst.fits(volume) {
            break;
        }
        rounded[e] = 0.0;
        volume -= inst.volumes[e];
        dropped += 1;
    }
    dropped
}

/// Exhaustive minimum of `−cᵀρ` over feasible binary `ρ`; ties go to the
/// lexicographically smallest `ρ`.
pub fn brute_force_knapsack(inst: &KnapsackInstance) -> Result<(Vec<f64>, f64)> {
    let n = inst.len();
    if n > 25 {
        return Err(Error::TooLarge(n));
    }
    let value = |mask: u32| -> (f64, f64) {
        let (mut obj, mut vol) = (0.0, 0.0);
        for e in 0..n {
            if mask >> e & 1 == 1 {
                obj -= inst.energies[e];
                vol += inst.volumes[e];
            }
        }
        (obj, vol)
    };
    // ρ_0 is the most significant position in lexicographic order
    let lex_less = |a: u32, b: u32| -> bool {
        let diff = a ^ b;
        diff != 0 && a >> diff.trailing_zeros() & 1 == 0
    };
    let mut best = 0u32;
    let mut best_obj = 0.0;
    for mask in 1..(1u32 << n) {
        let (obj, vol) = value(mask);
        if !inst.fits(vol) {
            continue;
        }
        let tie = (obj - best_obj).abs() <= 1e-12 * (1.0 + best_obj.abs());
        if (!tie && obj < best_obj) || (tie && lex_less(mask, best)) {
            best = mask;
            best_obj = obj;
        }
    }
    let rho = (0..n).map(|e| f64::from(best >> e & 1)).collect();
    Ok((rho, value(best).0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(theta: f64, beta: f64) -> f64 {
        let f = |s: f64| 2.0 * s * s * s / beta + s * s - theta * theta;
        let (mut lo, mut hi) = (0.0, theta.abs());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn sigma_large_beta_limit() {
        let s = solve_sigma(2.0, 1e12).unwrap();
        assert!((s - 2.0).abs() < 1e-5);
    }

    #[test]
    fn sigma_matches_bisection() {
        let s = solve_sigma(1.0, 4000.0).unwrap();
        assert!((s - bisect(1.0, 4000.0)).abs() < 1e-12);
        assert!((s - 0.99975).abs() < 1e-5);
        // hyperbolic branch
        let s = solve_sigma(50.0, 10.0).unwrap();
        assert!((s - bisect(50.0, 10.0)).abs() < 1e-10 * s);
    }

    #[test]
    fn sigma_sign_symmetric() {
        for t in [1e-6, 0.3, 7.0, 1e3] {
            assert_eq!(solve_sigma(t, 100.0).unwrap(), solve_sigma(-t, 100.0).unwrap());
        }
    }

    #[test]
    fn sigma_errors() {
        assert!(matches!(solve_sigma(0.0, 10.0), Err(Error::DegenerateTheta)));
        assert!(solve_sigma(1.0, 0.0).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let inst = KnapsackInstance::new(vec![1.0], vec![1.0], 0.5).unwrap();
        assert_eq!(update_multiplier(&[1.0], &inst), 1.0);
        // V = ½ Σ v (1 + c/σ)
        let inst = KnapsackInstance::new(vec![1.0, 3.0], vec![1.0, 2.0], 0.5 * (1.5 + 2.0 * 1.5))
            .unwrap();
        assert_eq!(update_multiplier(&[2.0, 6.0], &inst), 0.0);
        let inst = KnapsackInstance::new(vec![0.0, 0.0], vec![1.0, 1.0], 2.0).unwrap();
        assert_eq!(update_multiplier(&[10.0, 10.0], &inst), 0.0);
    }

    #[test]
    fn recovery_examples() {
        let inst = KnapsackInstance::new(vec![3.0, 1.0, 1.0], vec![1.0; 3], 1.0).unwrap();
        // ς = 2: θ = (−1, 1, 1)
        let state = DualState {
            sigma: vec![1.0, 1.0, 2.0],
            varsigma: 2.0,
            beta: f64::INFINITY,
        };
        let rho = recover_rho(&state, &inst);
        assert_eq!(rho, vec![1.0, 0.0, 0.25]);
    }

    #[test]
    fn dual_value_examples() {
        let inst = KnapsackInstance::new(vec![1.0], vec![1.0], 0.5).unwrap();
        let state = DualState {
            sigma: vec![1.0],
            varsigma: 1.0,
            beta: f64::INFINITY,
        };
        assert!((dual_value(&state, &inst) + 0.75).abs() < 1e-15);

        // τ = 0 leaves only the multiplier and penalty terms
        let inst = KnapsackInstance::new(vec![0.0, 0.0], vec![2.0, 3.0], 1.0).unwrap();
        let state = DualState {
            sigma: vec![2.0, 3.0],
            varsigma: 1.0,
            beta: 10.0,
        };
        assert!((dual_value(&state, &inst) - (-1.0 - 13.0 / 40.0)).abs() < 1e-15);
    }

    #[test]
    fn small_knapsack() {
        let inst = KnapsackInstance::new(vec![3.0, 2.0, 1.0], vec![1.0; 3], 2.0).unwrap();
        let sol = knapsack_solve(&inst, &KnapsackParams::default()).unwrap();
        assert_eq!(sol.rounded, vec![1.0, 1.0, 0.0]);
        let (rho, obj) = brute_force_knapsack(&inst).unwrap();
        assert_eq!(rho, vec![1.0, 1.0, 0.0]);
        assert_eq!(obj, -5.0);
    }

    #[test]
    fn full_budget_keeps_everything() {
        let inst = KnapsackInstance::new(vec![0.5, 2.0, 1.0, 0.1], vec![1.0; 4], 4.0).unwrap();
        let sol = knapsack_solve(&inst, &KnapsackParams::default()).unwrap();
        assert_eq!(sol.rounded, vec![1.0; 4]);
        let (rho, obj) = brute_force_knapsack(&inst).unwrap();
        assert_eq!(rho, vec![1.0; 4]);
        assert!((obj + 3.6).abs() < 1e-12);
    }

    #[test]
    fn brute_force_ties_and_limits() {
        let inst = KnapsackInstance::new(vec![0.0; 3], vec![1.0; 3], 2.0).unwrap();
        let (rho, obj) = brute_force_knapsack(&inst).unwrap();
        assert_eq!(rho, vec![0.0; 3]);
        assert_eq!(obj, 0.0);
        // equal energies: prefer zeros in leading positions
        let inst = KnapsackInstance::new(vec![1.0; 3], vec![1.0; 3], 1.0).unwrap();
        assert_eq!(brute_force_knapsack(&inst).unwrap().0, vec![0.0, 0.0, 1.0]);
        let inst = KnapsackInstance::new(vec![1.0; 26], vec![1.0; 26], 3.0).unwrap();
        assert!(matches!(brute_force_knapsack(&inst), Err(Error::TooLarge(26))));
    }

    #[test]
    fn instance_validation() {
        assert!(KnapsackInstance::new(vec![1.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(KnapsackInstance::new(vec![-1.0], vec![1.0], 1.0).is_err());
        assert!(KnapsackInstance::new(vec![1.0], vec![0.0], 1.0).is_err());
        assert!(KnapsackInstance::new(vec![1.0], vec![1.0], 2.0).is_err());
        assert!(KnapsackInstance::new(vec![1.0], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn feasible_rounding_drops_weakest() {
        // fractional element at 0.6 of its volume: plain rounding overshoots
        let inst = KnapsackInstance::new(vec![5.0, 4.0, 3.0, 1.0], vec![1.0; 4], 2.6).unwrap();
        let plain = knapsack_solve(&inst, &KnapsackParams::default()).unwrap();
        assert_eq!(plain.rounded, vec![1.0, 1.0, 1.0, 0.0]);
        let params = KnapsackParams {
            feasible_rounding: true,
            ..Default::default()
        };
        let fixed = knapsack_solve(&inst, &params).unwrap();
        assert_eq!(fixed.rounded, vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(fixed.dropped, 1);
    }
}
