//! The certificate toolbox end to end: the eta budget for a target
//! accuracy, the no-progress and matching-rate lower bounds on the simplex
//! family, and the tau-relaxed bound for polytopes with near-optimal
//! vertices.
//!
//! ```bash
//! cargo run --example rate_certificates
//! ```

use entropic_lp::bounds::{
    eta_for_epsilon, simplex_no_progress_threshold, simplex_rate_lower_bound, BoundReport,
};
use entropic_lp::solver::solve_gibbs;
use entropic_lp::{profile_instance, SimplexFamily};

fn main() {
    let fam = SimplexFamily::new(10, 1.0, 1.0).expect("valid family");
    let inst = fam.to_instance();
    let profile = profile_instance(&inst).expect("profile");

    // how large must eta be for a target accuracy?
    println!("eta budget on the d = 10 simplex (gap = 1):");
    for eps in [0.5, 0.1, 0.01, 1e-6] {
        let eta = eta_for_epsilon(&profile, eps);
        let sol = solve_gibbs(&inst, eta).expect("gibbs applies");
        println!(
            "  eps = {eps:>7}: eta = {eta:>8.4} achieves gap {:.3e}",
            sol.gap.expect("optimum known")
        );
    }

    // below log(eps d)/alpha the objective provably stays high
    let eps = 0.5;
    let no_progress = simplex_no_progress_threshold(&fam, eps).expect("eps d > 1");
    let sol = solve_gibbs(&inst, no_progress).expect("gibbs applies");
    println!(
        "\nno-progress threshold at eps = {eps}: eta = {no_progress:.4}, objective {:.4} >= {:.4}",
        sol.primal_objective,
        (1.0 - eps) * 1.0
    );

    // and above (1 + log d)/alpha the decay rate is tight up to a factor 9
    println!("\nmatching-rate window (measured gap vs lower bound vs 9x envelope):");
    for eta in [3.5, 5.0, 8.0] {
        let sol = solve_gibbs(&inst, eta).expect("gibbs applies");
        let lower = simplex_rate_lower_bound(&fam, eta).expect("eta above threshold");
        println!(
            "  eta = {eta}: {:.4e} in [{:.4e}, {:.4e}]",
            sol.primal_objective,
            lower,
            9.0 * lower
        );
    }

    // a near-optimal vertex wrecks the raw gap; tau absorbs it
    let brittle = entropic_lp::LpInstance::new(
        vec![vec![1.0; 4]],
        vec![1.0],
        vec![0.0, 0.001, 1.0, 1.0],
        false,
    )
    .expect("well-formed");
    let brittle_profile = profile_instance(&brittle).expect("profile");
    println!(
        "\nbrittle instance: gap = {:.4}, threshold = {:.0}",
        brittle_profile.gap,
        brittle_profile.fast_threshold()
    );
    let report = BoundReport::new(&brittle_profile, 6.0, Some(0.01));
    let tau = report.tau_variant.expect("tau requested");
    println!(
        "  tau = 0.01: gap_tau = {:.3}, threshold = {:.2}, bound at eta = 6: {:.4}",
        tau.delta_tau.expect("suboptimal vertices remain"),
        tau.threshold,
        tau.bound.expect("eta above tau threshold")
    );
    let sol = solve_gibbs(&brittle, 6.0).expect("gibbs applies");
    println!(
        "  measured gap at eta = 6: {:.4e} (within the tau bound)",
        sol.gap.expect("optimum known")
    );
}
