use num_complex::Complex64;
use proptest::prelude::*;

use cpd_topo::dual::{
    brute_force_knapsack, dual_value, knapsack_solve, recover_rho, solve_sigma, update_multiplier,
    DualState, KnapsackInstance, KnapsackParams,
};

/// Complex-arithmetic root `(β/6)(−1 + φ + φᶜ)`, valid for `θ² < β²/27`.
fn sigma_complex(theta: f64, beta: f64) -> f64 {
    let eta = beta * beta / 27.0;
    let t2 = theta * theta;
    let inner = Complex64::new(2.0 * t2 - eta, 2.0 * (t2 * (eta - t2)).sqrt());
    let phi = inner.powf(1.0 / 3.0) / eta.cbrt();
    (beta / 6.0) * (-1.0 + phi.re + phi.conj().re)
}

#[test]
fn sigma_matches_complex_closed_form() {
    for &beta in &[10.0, 150.0, 4000.0, 1e5] {
        let limit = beta / 27f64.sqrt();
        for k in 1..40 {
            let theta = limit * k as f64 / 40.0;
            let a = solve_sigma(theta, beta).unwrap();
            let b = sigma_complex(theta, beta);
            assert!((a - b).abs() <= 1e-9 * a.max(1e-12), "θ={theta} β={beta}: {a} vs {b}");
        }
    }
}

fn cubic(theta: f64, beta: f64, s: f64) -> f64 {
    2.0 * s.powi(3) / beta + s * s - theta * theta
}

fn instance() -> impl Strategy<Value = KnapsackInstance> {
    (3usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01f64..1.0, n),
            prop::collection::vec(0.5f64..2.0, n),
            0.2f64..0.8,
        )
            .prop_map(|(c, v, frac)| {
                let budget = frac * v.iter().sum::<f64>();
                KnapsackInstance::new(c, v, budget).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn cubic_residual_random(lt in -6.0f64..3.0, lb in 1.0f64..6.0, neg in any::<bool>()) {
        let theta = if neg { -(10f64.powf(lt)) } else { 10f64.powf(lt) };
        let beta = 10f64.powf(lb);
        let s = solve_sigma(theta, beta).unwrap();
        prop_assert!(s > 0.0 && s < theta.abs());
        prop_assert!(cubic(theta, beta, s).abs() <= 1e-9 * (theta * theta).max(1.0));
    }

    #[test]
    fn multiplier_update_maximizes_dual(inst in instance(), s0 in 0.1f64..5.0, beta in 10.0f64..1e4) {
        let mut st = DualState { sigma: Vec::new(), varsigma: s0, beta };
        st.sigma = (0..inst.len())
            .map(|e| solve_sigma(st.theta(&inst, e), beta).unwrap())
            .collect();
        let best = update_multiplier(&st.sigma, &inst);
        let at = |v: f64| dual_value(&DualState { varsigma: v, ..st.clone() }, &inst);
        let p = at(best);
        for dv in [-1e-3, 1e-3, -0.1, 0.1] {
            let v = best + dv;
            if v >= 0.0 {
                prop_assert!(at(v) <= p + 1e-9 * p.abs().max(1.0));
            }
        }
    }

    #[test]
    fn dual_ascent_is_monotone(inst in instance()) {
        let params = KnapsackParams { beta: 1e3, tolerance: 1e-12, max_iterations: 2000, ..KnapsackParams::default() };
        let sol = knapsack_solve(&inst, &params).unwrap();
        for w in sol.history.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn scaling_covariance(inst in instance(), s0 in 0.1f64..5.0, k in 0.01f64..100.0) {
        // c → kc, β → kβ, ς → kς scales σ by k and leaves ρ unchanged
        let beta = 1e3;
        let scaled = KnapsackInstance::new(
            inst.energies.iter().map(|c| c * k).collect(),
            inst.volumes.clone(),
            inst.budget,
        ).unwrap();
        let step = |inst: &KnapsackInstance, varsigma: f64, beta: f64| {
            let mut st = DualState { sigma: Vec::new(), varsigma, beta };
            st.sigma = (0..inst.len()).map(|e| solve_sigma(st.theta(inst, e), beta).unwrap()).collect();
            let next = update_multiplier(&st.sigma, inst);
            let rho = recover_rho(&st, inst);
            (st.sigma, next, rho)
        };
        let (sa, na, ra) = step(&inst, s0, beta);
        let (sb, nb, rb) = step(&scaled, s0 * k, beta * k);
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert!((x * k - y).abs() <= 1e-10 * y);
        }
        prop_assert!((na * k - nb).abs() <= 1e-9 * nb.max(1e-12));
        for (x, y) in ra.iter().zip(&rb) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn solution_is_binary_and_nearly_feasible(inst in instance()) {
        let params = KnapsackParams { beta: 1e4, tolerance: 1e-12, max_iterations: 5000, ..KnapsackParams::default() };
        let sol = knapsack_solve(&inst, &params).unwrap();
        prop_assert!(sol.rounded.iter().all(|&r| r == 0.0 || r == 1.0));
        let vmax = inst.volumes.iter().cloned().fold(0.0, f64::max);
        prop_assert!(inst.volume(&sol.rounded) <= inst.budget + vmax + 1e-9);
        let rho = recover_rho(&sol.state, &inst);
        prop_assert!(rho.iter().all(|&r| (0.0..=1.0).contains(&r)));
    }
}

#[test]
fn matches_brute_force_on_equal_volumes() {
    // greedy by energy is optimal when all volumes are equal
    let c = vec![0.9, 0.1, 0.5, 0.7, 0.3, 0.05, 0.6, 0.8];
    let inst = KnapsackInstance::new(c, vec![0.125; 8], 0.5).unwrap();
    let params = KnapsackParams { tolerance: 1e-12, max_iterations: 5000, ..KnapsackParams::default() };
    let sol = knapsack_solve(&inst, &params).unwrap();
    let (rho, best) = brute_force_knapsack(&inst).unwrap();
    assert_eq!(rho, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
    assert_eq!(sol.rounded, rho);
    assert!((inst.objective(&sol.rounded) - best).abs() < 1e-12);
    assert!((best + 3.0).abs() < 1e-12);
}
