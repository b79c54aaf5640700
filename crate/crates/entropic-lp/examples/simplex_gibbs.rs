//! Closed-form Gibbs solutions on the scaled simplex, and how the measured
//! gap tracks the slow and fast bounds as the penalty parameter grows.
//!
//! ```bash
//! cargo run --example simplex_gibbs
//! ```

use entropic_lp::bounds::{fast_bound, slow_bound};
use entropic_lp::solver::solve_gibbs;
use entropic_lp::{profile_instance, SimplexFamily};

fn main() {
    let d = 50;
    let fam = SimplexFamily::new(d, 1.0, 1.0).expect("valid family");
    let inst = fam.to_instance();
    let profile = profile_instance(&inst).expect("profile");

    println!("simplex family: d = {d}, alpha = 1, beta = 1");
    println!(
        "gap = {:.4}, l1 radius = {:.4}, entropic radius = {:.4} (= log {d})",
        profile.gap, profile.l1_radius, profile.entropic_radius
    );
    println!(
        "fast-rate threshold (R1 + RH) / gap = {:.4}\n",
        profile.fast_threshold()
    );

    println!(
        "{:>8}  {:>12}  {:>12}  {:>12}",
        "eta", "gap", "slow bound", "fast bound"
    );
    for k in 0..10 {
        let eta = 0.5 * 2.0_f64.powi(k);
        let sol = solve_gibbs(&inst, eta).expect("gibbs applies");
        let gap = sol.gap.expect("simplex optimum is known");
        let fast = fast_bound(&profile, eta)
            .map(|b| format!("{b:>12.3e}"))
            .unwrap_or_else(|| format!("{:>12}", "n/a"));
        println!(
            "{eta:>8.2}  {gap:>12.3e}  {:>12.3e}  {fast}",
            slow_bound(&profile, eta)
        );
    }

    println!(
        "\nthe gap hugs alpha*beta until eta is of order log d = {:.2},",
        (d as f64).ln()
    );
    println!("then decays exponentially at rate gap/R1 once the threshold is passed");
}
