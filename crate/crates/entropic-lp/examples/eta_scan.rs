//! An eta scan over the d = 100 simplex family, written as CSV: the
//! experiment behind the slow-rate/fast-rate phase transition.
//!
//! ```bash
//! cargo run --example eta_scan
//! ```

use entropic_lp::bench::{
    run_scan_to_output, EtaGrid, InstanceSource, OutputFormat, RouteChoice, ScanConfig, Spacing,
};
use entropic_lp::SimplexFamily;

fn main() {
    let fam = SimplexFamily::new(100, 1.0, 1.0).expect("valid family");
    let path = std::env::temp_dir().join("entropic_lp_simplex_scan.csv");
    let config = ScanConfig {
        source: InstanceSource::Instance(fam.to_instance()),
        grid: EtaGrid::new(0.1, 20.0, 16, Spacing::Log).expect("valid grid"),
        route: RouteChoice::Auto,
        tol: 1e-8,
        workers: Some(4),
        out: Some(path.clone()),
        format: OutputFormat::Csv,
    };
    let outcome = run_scan_to_output(&config).expect("scan runs");
    println!("wrote {} rows to {}", outcome.rows.len(), path.display());

    println!(
        "\n{:>10}  {:>12}  {:>12}  {:>12}",
        "eta", "gap", "lower bound", "fast bound"
    );
    for row in &outcome.rows {
        let cell = |v: Option<f64>| {
            v.map(|x| format!("{x:>12.3e}"))
                .unwrap_or_else(|| format!("{:>12}", ""))
        };
        println!(
            "{:>10.4}  {:>12.3e}  {}  {}",
            row.eta,
            row.gap.unwrap(),
            cell(row.lower_bound),
            cell(row.fast_bound)
        );
    }
    println!(
        "\nplateau until eta ~ log d = {:.2}, decay beyond",
        100.0_f64.ln()
    );
}
