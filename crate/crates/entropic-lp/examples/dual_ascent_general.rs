//! Solving a general standard-form LP through the smooth dual of the
//! penalized program, and checking every bound against the measurement.
//!
//! ```bash
//! cargo run --example dual_ascent_general
//! ```

use entropic_lp::bench::{run_solve, RouteChoice};
use entropic_lp::model::InstanceSpec;

fn main() {
    // a small transportation-flavored LP in the raw file format
    let spec: InstanceSpec = serde_json::from_str(
        r#"{
            "A": [[1.0, 1.0, 1.0, 1.0, 1.0],
                  [0.4, 1.3, 0.0, 2.0, 0.7],
                  [1.1, 0.2, 0.9, 0.0, 1.5]],
            "b": [3.0, 2.64, 2.22],
            "c": [0.3, -0.2, 0.8, 0.1, -0.5]
        }"#,
    )
    .expect("valid instance document");
    let inst = spec.build();

    for eta in [1.0, 4.0, 16.0, 64.0] {
        let doc = run_solve(&inst, eta, RouteChoice::Dual, 1e-8).expect("solves");
        let fast = doc
            .report
            .report
            .fast_bound
            .map(|b| format!("{b:.3e}"))
            .unwrap_or_else(|| "n/a".to_string());
        println!(
            "eta = {eta:>5}: objective {:>9.6}, gap {:.3e}, slow bound {:.3e}, fast bound {fast}, {} Newton steps",
            doc.solution.primal_objective,
            doc.report.measured_gap,
            doc.report.report.slow_bound,
            doc.solution.iterations,
        );
        assert!(doc.report.all_ok(), "a bound was violated");
    }

    let doc = run_solve(&inst, 64.0, RouteChoice::Dual, 1e-8).expect("solves");
    println!(
        "\nat eta = 64 the solution sits {:.3e} from the optimal face in l1",
        doc.report.measured_face_distance
    );
    println!(
        "profile: gap {:.4}, R1 {:.4}, RH {:.4}, threshold {:.4}",
        doc.profile.gap,
        doc.profile.l1_radius,
        doc.profile.entropic_radius,
        doc.profile.fast_threshold
    );
}
