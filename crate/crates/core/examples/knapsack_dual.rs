//! Solve a small 0-1 knapsack through its canonical dual and compare with
//! exhaustive search.
//!
//! ```text
//! cargo run --example knapsack_dual
//! ```

use cpd_topo::dual::{brute_force_knapsack, knapsack_solve_escalating, solve_sigma, KnapsackInstance, KnapsackParams};

fn main() -> cpd_topo::Result<()> {
    let energies = vec![0.82, 0.15, 0.47, 0.91, 0.33, 0.68, 0.05, 0.59, 0.24, 0.77];
    let volumes = vec![0.1; 10];
    let inst = KnapsackInstance::new(energies, volumes, 0.4)?;

    let params = KnapsackParams {
        tolerance: 1e-12,
        max_iterations: 5000,
        ..KnapsackParams::default()
    };
    let sol = knapsack_solve_escalating(&inst, &[1e3, 1e4, 1e5], &params)?;
    println!("dual iterations: {}, converged: {}", sol.iterations(), sol.converged);
    println!("multiplier ς = {:.6}", sol.state.varsigma);
    for e in 0..inst.len() {
        println!(
            "  e={e}  c={:.2}  θ={:+.4}  σ={:.4}  ρ={}",
            inst.energies[e],
            sol.state.theta(&inst, e),
            sol.state.sigma[e],
            sol.rounded[e]
        );
    }

    let (best, objective) = brute_force_knapsack(&inst)?;
    println!("dual objective {:.6}, exhaustive {:.6}", inst.objective(&sol.rounded), objective);
    println!("same selection: {}", best == sol.rounded);

    // one σ by hand: positive root of 2σ³/β + σ² = θ²
    let s = solve_sigma(0.3, 4000.0)?;
    println!("σ(θ=0.3, β=4000) = {s:.12}, residual {:.1e}", 2.0 * s.powi(3) / 4000.0 + s * s - 0.09);
    Ok(())
}
