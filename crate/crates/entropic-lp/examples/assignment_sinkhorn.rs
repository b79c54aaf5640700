//! Sinkhorn scaling on the Birkhoff polytope: a random assignment instance
//! solved to a doubly stochastic matrix, and the worst-case cost whose gap
//! provably stays above eps until eta reaches n log((1-eps)/eps).
//!
//! ```bash
//! cargo run --example assignment_sinkhorn
//! ```

use entropic_lp::bench::random_assignment;
use entropic_lp::bounds::{assignment_eta_lower_threshold, worst_case_assignment_cost};
use entropic_lp::solver::{marginal_error, solve_sinkhorn};

fn main() {
    // random integer costs
    let n = 4;
    let assignment = random_assignment(n, 9, 7).expect("valid size");
    let (best_perm, optimum) = assignment.brute_force_optimum();
    println!("random {n}x{n} assignment, integer costs in 0..=9");
    println!("brute-force optimum {optimum} at permutation {best_perm:?}");

    // keep eta * max cost moderate: Sinkhorn's contraction collapses once
    // the scaled kernel concentrates on a single permutation
    let eta = 2.0;
    let (sol, state) = solve_sinkhorn(&assignment, eta, 1e-9, 100_000).expect("converges");
    println!(
        "sinkhorn at eta = {eta}: objective {:.6}, gap {:.3e}, {} iterations, marginal error {:.2e}",
        sol.primal_objective,
        sol.primal_objective - optimum,
        sol.iterations,
        marginal_error(&state),
    );
    println!("scaled matrix:");
    for row in state.reconstruct() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        println!("  [{}]", cells.join(", "));
    }

    // the worst-case cost: zeros on the diagonal band, ones elsewhere
    let n = 6;
    let eps = 0.25;
    let worst = worst_case_assignment_cost(n).expect("n >= 2");
    let threshold = assignment_eta_lower_threshold(n, eps).expect("eps in range");
    println!("\nworst-case cost, n = {n}: identity is the unique optimum (value 0)");
    println!("threshold eta for eps = {eps}: n log((1-eps)/eps) = {threshold:.4}");
    for eta in [0.5 * threshold, threshold - 0.01, 2.0 * threshold] {
        let (sol, _) = solve_sinkhorn(&worst, eta, 1e-10, 2_000_000).expect("converges");
        println!(
            "  eta = {eta:>8.4}: gap = {:.4} {}",
            sol.primal_objective,
            if eta <= threshold {
                format!("(must stay >= {eps})")
            } else {
                "(free to drop)".to_string()
            }
        );
    }
}
