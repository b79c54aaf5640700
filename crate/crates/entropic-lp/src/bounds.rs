//! Convergence-rate bounds for the entropic penalty: the always-valid slow
//! rate, the exponential fast rate with its applicability threshold, the
//! distance-to-face corollary, the tau-relaxed gap variant, and the matching
//! lower-bound constructions on the simplex and the Birkhoff polytope.

use serde::Serialize;
use thiserror::Error;

use crate::model::{tau_gap, AssignmentInstance, PolytopeProfile, SimplexFamily};
use crate::solver::PenalizedSolution;

/// Absolute slack allowed when comparing measured quantities against the
/// theoretical bounds; the inequalities are exact but solver output is only
/// tolerance-accurate.
pub const CHECK_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("epsilon must lie in {range}, got {value}")]
    EpsilonOutOfRange { value: f64, range: &'static str },
    #[error("threshold is not meaningful: epsilon * d = {0} <= 1")]
    ThresholdNotMeaningful(f64),
    #[error("worst-case assignment cost needs n >= 2, got {0}")]
    SizeTooSmall(usize),
}

/// Slow rate: `g(eta) <= RH / eta` for every positive `eta`.
pub fn slow_bound(profile: &PolytopeProfile, eta: f64) -> f64 {
    assert!(eta > 0.0, "eta must be positive");
    profile.entropic_radius / eta
}

/// Fast rate `Delta exp(-eta Delta/R1 + (R1+RH)/R1)`, applicable once
/// `eta >= (R1+RH)/Delta`; `None` below the threshold.
pub fn fast_bound(profile: &PolytopeProfile, eta: f64) -> Option<f64> {
    assert!(eta > 0.0, "eta must be positive");
    if eta < profile.fast_threshold() {
        return None;
    }
    let exponent = exponential_rate_exponent(profile.gap, profile, eta);
    Some(profile.gap * exponent.exp())
}

/// Distance-to-face bound `2 R1 exp(-eta Delta/R1 + (R1+RH)/R1)`, with the
/// same applicability threshold as the fast rate.
pub fn face_distance_bound(profile: &PolytopeProfile, eta: f64) -> Option<f64> {
    assert!(eta > 0.0, "eta must be positive");
    if eta < profile.fast_threshold() {
        return None;
    }
    let exponent = exponential_rate_exponent(profile.gap, profile, eta);
    Some(2.0 * profile.l1_radius * exponent.exp())
}

/// Shared exponent `-eta * delta / R1 + (R1 + RH) / R1`. Nonpositive in the
/// applicable region, so exponentiating can only underflow, never overflow.
fn exponential_rate_exponent(delta: f64, profile: &PolytopeProfile, eta: f64) -> f64 {
    -eta * delta / profile.l1_radius
        + (profile.l1_radius + profile.entropic_radius) / profile.l1_radius
}

/// Smallest `eta` guaranteeing an additive `epsilon` gap:
/// `(R1/Delta log(Delta/epsilon))_+ + (R1+RH)/Delta`.
pub fn eta_for_epsilon(profile: &PolytopeProfile, epsilon: f64) -> f64 {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let log_term = (profile.l1_radius / profile.gap) * (profile.gap / epsilon).ln();
    log_term.max(0.0) + profile.fast_threshold()
}

/// No-progress threshold on the simplex family: for any
/// `eta <= log(epsilon d)/alpha`, the penalized objective stays at least
/// `(1 - epsilon) alpha beta`. Requires `epsilon d > 1` for the threshold to
/// be positive.
pub fn simplex_no_progress_threshold(
    fam: &SimplexFamily,
    epsilon: f64,
) -> Result<f64, BoundsError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(BoundsError::EpsilonOutOfRange {
            value: epsilon,
            range: "(0, 1)",
        });
    }
    let scaled = epsilon * fam.dimension() as f64;
    if scaled <= 1.0 {
        return Err(BoundsError::ThresholdNotMeaningful(scaled));
    }
    Ok(scaled.ln() / fam.alpha())
}

/// Matching-rate lower bound on the simplex family:
/// `(1/9) alpha beta exp(-eta alpha + 1 + log d)` for
/// `eta >= (1 + log d)/alpha`; `None` below that threshold.
pub fn simplex_rate_lower_bound(fam: &SimplexFamily, eta: f64) -> Option<f64> {
    let d = fam.dimension() as f64;
    if eta < (1.0 + d.ln()) / fam.alpha() {
        return None;
    }
    Some((fam.alpha() * fam.beta() / 9.0) * (-eta * fam.alpha() + 1.0 + d.ln()).exp())
}

/// Gap floor for the simplex family at arbitrary `eta`, stitched from the
/// no-progress regime (`eta alpha < log d`) and the matching-rate regime
/// (`eta alpha >= 1 + log d`). `None` in the sliver between them.
pub fn simplex_gap_floor(fam: &SimplexFamily, eta: f64) -> Option<f64> {
    if let Some(bound) = simplex_rate_lower_bound(fam, eta) {
        return Some(bound);
    }
    let d = fam.dimension() as f64;
    let epsilon = (eta * fam.alpha()).exp() / d;
    (epsilon < 1.0).then(|| (1.0 - epsilon) * fam.alpha() * fam.beta())
}

/// Worst-case assignment cost: zeros on the diagonal and first
/// superdiagonal, ones elsewhere. The unique LP optimum is the identity with
/// value zero.
pub fn worst_case_assignment_cost(n: usize) -> Result<AssignmentInstance, BoundsError> {
    if n < 2 {
        return Err(BoundsError::SizeTooSmall(n));
    }
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if j == i || j == i + 1 { 0.0 } else { 1.0 })
                .collect()
        })
        .collect();
    Ok(AssignmentInstance::new(cost).expect("worst-case matrix is square"))
}

/// Below `n log((1-epsilon)/epsilon)` the penalized solution of the
/// worst-case assignment instance keeps a gap of at least `epsilon`.
pub fn assignment_eta_lower_threshold(n: usize, epsilon: f64) -> Result<f64, BoundsError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(BoundsError::EpsilonOutOfRange {
            value: epsilon,
            range: "(0, 1/2)",
        });
    }
    Ok(n as f64 * ((1.0 - epsilon) / epsilon).ln())
}

/// Gap floor implied by the threshold theorem at a given `eta` on the
/// worst-case assignment instance: the largest `epsilon` whose threshold
/// still dominates `eta`, namely `1 / (1 + exp(eta/n))`.
pub fn assignment_gap_floor(n: usize, eta: f64) -> f64 {
    1.0 / (1.0 + (eta / n as f64).exp())
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

/// Every bound evaluated for one `(instance, eta)` pair.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub eta: f64,
    /// `RH / eta`.
    pub slow_bound: f64,
    /// `(R1 + RH) / Delta`.
    pub fast_threshold: f64,
    /// Fast rate; absent below the threshold.
    pub fast_bound: Option<f64>,
    /// Distance-to-face bound; absent below the threshold.
    pub face_distance_bound: Option<f64>,
    /// `Delta / R1`, the supremum of valid exponential rates.
    pub rate_constant_sup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_variant: Option<TauVariant>,
}

/// The tau-relaxed fast bound.
#[derive(Debug, Clone, Serialize)]
pub struct TauVariant {
    pub tau: f64,
    /// Relaxed gap; `None` when every vertex is tau-optimal.
    pub delta_tau: Option<f64>,
    /// `(R1 + RH) / delta_tau`.
    pub threshold: f64,
    /// `delta_tau exp(-eta delta_tau/R1 + (R1+RH)/R1) + tau`; absent below
    /// the threshold. When every vertex is tau-optimal the gap is at most
    /// `tau` outright.
    pub bound: Option<f64>,
}

impl BoundReport {
    pub fn new(profile: &PolytopeProfile, eta: f64, tau: Option<f64>) -> Self {
        let tau_variant = tau.map(|tau| {
            let relaxed = tau_gap(profile, tau);
            if relaxed.delta_tau.is_finite() {
                let threshold = (profile.l1_radius + profile.entropic_radius) / relaxed.delta_tau;
                let bound = (eta >= threshold).then(|| {
                    relaxed.delta_tau
                        * exponential_rate_exponent(relaxed.delta_tau, profile, eta).exp()
                        + tau
                });
                TauVariant {
                    tau,
                    delta_tau: Some(relaxed.delta_tau),
                    threshold,
                    bound,
                }
            } else {
                TauVariant {
                    tau,
                    delta_tau: None,
                    threshold: 0.0,
                    bound: Some(tau),
                }
            }
        });
        BoundReport {
            eta,
            slow_bound: slow_bound(profile, eta),
            fast_threshold: profile.fast_threshold(),
            fast_bound: fast_bound(profile, eta),
            face_distance_bound: face_distance_bound(profile, eta),
            rate_constant_sup: profile.gap / profile.l1_radius,
            tau_variant,
        }
    }
}

/// A [`BoundReport`] compared against a measured solution.
#[derive(Debug, Clone, Serialize)]
pub struct CheckedReport {
    #[serde(flatten)]
    pub report: BoundReport,
    /// `c^T x_eta - optimal_value`.
    pub measured_gap: f64,
    /// `d_1(x_eta, F)`, the l1 distance to the optimal face.
    pub measured_face_distance: f64,
    pub slow_ok: bool,
    /// Absent when the fast bound does not apply at this `eta`.
    pub fast_ok: Option<bool>,
    pub face_ok: Option<bool>,
}

impl CheckedReport {
    pub fn all_ok(&self) -> bool {
        self.slow_ok && self.fast_ok.unwrap_or(true) && self.face_ok.unwrap_or(true)
    }
}

/// Evaluate every bound at the solution's `eta` and flag violations beyond
/// [`CHECK_SLACK`]. Violations are report content, not errors.
pub fn check_report(profile: &PolytopeProfile, solution: &PenalizedSolution) -> CheckedReport {
    let report = BoundReport::new(profile, solution.eta, None);
    let measured_gap = solution.primal_objective - profile.optimal_value;
    let measured_face_distance = face_distance(profile, &solution.x_eta);
    let slow_ok = measured_gap <= report.slow_bound + CHECK_SLACK;
    let fast_ok = report
        .fast_bound
        .map(|bound| measured_gap <= bound + CHECK_SLACK);
    let face_ok = report
        .face_distance_bound
        .map(|bound| measured_face_distance <= bound + CHECK_SLACK);
    CheckedReport {
        report,
        measured_gap,
        measured_face_distance,
        slow_ok,
        fast_ok,
        face_ok,
    }
}

// ---------------------------------------------------------------------------
// distance to the optimal face
// ---------------------------------------------------------------------------

/// l1 distance from `x` to the optimal face (the convex hull of the optimal
/// vertices). Exact for one or two optimal vertices; for larger faces the
/// minimization over convex weights is solved as an auxiliary
/// entropy-penalized LP at a tiny penalty, then polished along
/// vertex-directed segments. The result is always attained by a feasible
/// point of the face, so it can only overestimate the true distance, and by
/// no more than the polish tolerance.
pub fn face_distance(profile: &PolytopeProfile, x: &[f64]) -> f64 {
    let face: Vec<&Vec<f64>> = profile
        .optimal_vertices
        .iter()
        .map(|&i| &profile.vertices[i])
        .collect();
    match face.len() {
        0 => unreachable!("profiles always have an optimal vertex"),
        1 => l1_distance(x, face[0]),
        2 => segment_distance(x, face[0], face[1]).0,
        _ => polytope_face_distance(x, &face),
    }
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Exact min over `lambda in [0,1]` of `||x - (lambda u + (1-lambda) w)||_1`
/// by scanning the breakpoints of the piecewise-linear objective. Returns
/// the distance and the minimizing `lambda`.
fn segment_distance(x: &[f64], u: &[f64], w: &[f64]) -> (f64, f64) {
    let mut breakpoints = vec![0.0, 1.0];
    for j in 0..x.len() {
        let denom = u[j] - w[j];
        if denom.abs() > 1e-300 {
            let lambda = (x[j] - w[j]) / denom;
            if lambda > 0.0 && lambda < 1.0 {
                breakpoints.push(lambda);
            }
        }
    }
    let eval = |lambda: f64| {
        x.iter()
            .zip(u.iter().zip(w))
            .map(|(xi, (ui, wi))| (xi - (lambda * ui + (1.0 - lambda) * wi)).abs())
            .sum::<f64>()
    };
    breakpoints
        .into_iter()
        .map(|l| (eval(l), l))
        .min_by(|a, b| a.partial_cmp(b).expect("distances are finite"))
        .expect("breakpoint list is nonempty")
}

/// Min over convex weights `w` of `||x - V w||_1` for three or more face
/// vertices: standard-form reformulation with split residuals, solved by the
/// dual-ascent machinery at a tiny penalty, then evaluated at the recovered
/// feasible weights after a few exact segment polish sweeps.
fn polytope_face_distance(x: &[f64], face: &[&Vec<f64>]) -> f64 {
    use crate::model::LpInstance;
    use crate::solver::solve_dual_ascent;

    let n = x.len();
    let k = face.len();
    // variables [weights (k), positive residual (n), negative residual (n)]
    let mut rows = Vec::with_capacity(n + 1);
    for j in 0..n {
        let mut row = vec![0.0; k + 2 * n];
        for (idx, v) in face.iter().enumerate() {
            row[idx] = v[j];
        }
        row[k + j] = 1.0;
        row[k + n + j] = -1.0;
        rows.push(row);
    }
    let mut sum_row = vec![0.0; k + 2 * n];
    sum_row[..k].fill(1.0);
    rows.push(sum_row);

    let mut rhs = x.to_vec();
    rhs.push(1.0);
    let mut cost = vec![0.0; k + 2 * n];
    cost[k..].fill(1.0);

    let aux = LpInstance::new(rows, rhs, cost, false).expect("auxiliary LP is well-formed");
    let mut weights = match solve_dual_ascent(&aux, 4.0e7, 1e-8) {
        Ok(solution) => {
            let mut w: Vec<f64> = solution.x_eta[..k].to_vec();
            // renormalize the slightly infeasible interior weights
            let total: f64 = w.iter().sum();
            for wi in &mut w {
                *wi /= total;
            }
            w
        }
        // fall back to the barycenter; the polish below still descends
        Err(_) => vec![1.0 / k as f64; k],
    };

    let combine = |w: &[f64]| -> Vec<f64> {
        let mut z = vec![0.0; n];
        for (wi, v) in w.iter().zip(face) {
            for (zj, vj) in z.iter_mut().zip(v.iter()) {
                *zj += wi * vj;
            }
        }
        z
    };

    // exact line searches toward each face vertex; monotone, so the feasible
    // evaluation below never degrades
    for _ in 0..3 {
        for (target, vertex) in face.iter().enumerate() {
            let z = combine(&weights);
            let (_, lambda) = segment_distance(x, vertex, &z);
            if lambda > 0.0 {
                for (idx, wi) in weights.iter_mut().enumerate() {
                    *wi = (1.0 - lambda) * *wi + if idx == target { lambda } else { 0.0 };
                }
            }
        }
    }
    l1_distance(x, &combine(&weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{profile, LpInstance, PolytopeProfile};
    use crate::solver::{max_entropy_point, solve_gibbs, solve_sinkhorn};

    fn profiled(inst: &LpInstance) -> PolytopeProfile {
        profile(inst, |i| max_entropy_point(i).map_err(|e| e.to_string())).unwrap()
    }

    fn simplex_profile(d: usize, alpha: f64, beta: f64) -> (LpInstance, PolytopeProfile) {
        let inst = SimplexFamily::new(d, alpha, beta).unwrap().to_instance();
        let prof = profiled(&inst);
        (inst, prof)
    }

    #[test]
    fn slow_bound_values() {
        let inst = worst_case_assignment_cost(4).unwrap().to_instance();
        let prof = profiled(&inst);
        assert!((slow_bound(&prof, 8.0) - 4.0 * 4.0_f64.ln() / 8.0).abs() < 1e-7);
        assert!(slow_bound(&prof, 1e12) < 1e-10);

        let (_, prof) = simplex_profile(2, 1.0, 1.0);
        assert!((slow_bound(&prof, 1.0) - 2.0_f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn fast_bound_at_threshold_equals_gap() {
        let (_, prof) = simplex_profile(4, 1.0, 1.0);
        let threshold = prof.fast_threshold();
        let bound = fast_bound(&prof, threshold).unwrap();
        assert!((bound - prof.gap).abs() < 1e-9);
        assert!(fast_bound(&prof, threshold * 0.999).is_none());
        // twice the threshold: exp(-(1 + log 4))
        let bound = fast_bound(&prof, 2.0 * threshold).unwrap();
        assert!((bound - 0.09196986029286057).abs() < 1e-9);
    }

    #[test]
    fn fast_bound_never_exceeds_gap() {
        let (_, prof) = simplex_profile(7, 0.4, 1.5);
        let threshold = prof.fast_threshold();
        for k in 0..40 {
            let eta = threshold * (1.0 + 0.25 * k as f64);
            let bound = fast_bound(&prof, eta).unwrap();
            assert!(bound <= prof.gap * (1.0 + 1e-12));
        }
    }

    #[test]
    fn eta_for_epsilon_clips_log_term() {
        let (_, prof) = simplex_profile(3, 1.0, 1.0);
        // epsilon at or above the gap: only the threshold term survives
        assert!((eta_for_epsilon(&prof, prof.gap * 2.0) - prof.fast_threshold()).abs() < 1e-9);
        // epsilon = gap / e: log term contributes exactly R1/gap
        let expected = prof.l1_radius / prof.gap + prof.fast_threshold();
        assert!((eta_for_epsilon(&prof, prof.gap / std::f64::consts::E) - expected).abs() < 1e-9);
    }

    #[test]
    fn eta_for_epsilon_matches_assignment_budget() {
        // with Delta = 1, R1 = n, RH = n log n the formula collapses to
        // n log(1/eps) + n (1 + log n)
        let inst = worst_case_assignment_cost(3).unwrap().to_instance();
        let prof = profiled(&inst);
        assert!((prof.gap - 1.0).abs() < 1e-9);
        let n = 3.0_f64;
        let eps = 0.1_f64;
        let expected = n * (1.0 / eps).ln() + n * (1.0 + n.ln());
        assert!((eta_for_epsilon(&prof, eps) - expected).abs() < 1e-6);
    }

    #[test]
    fn face_bound_examples() {
        let (_, prof) = simplex_profile(2, 1.0, 1.0);
        let threshold = prof.fast_threshold();
        let at = face_distance_bound(&prof, threshold).unwrap();
        assert!((at - 2.0 * prof.l1_radius).abs() < 1e-9);
        let doubled = face_distance_bound(&prof, 2.0 * threshold).unwrap();
        assert!((doubled - 0.3678794411714423).abs() < 1e-9);
        assert!(face_distance_bound(&prof, 0.5 * threshold).is_none());
    }

    #[test]
    fn no_progress_threshold_examples() {
        let fam = SimplexFamily::new(100, 1.0, 1.0).unwrap();
        let threshold = simplex_no_progress_threshold(&fam, 0.5).unwrap();
        assert!((threshold - 50.0_f64.ln()).abs() < 1e-12);

        // the contract: at the threshold the Gibbs objective keeps at least
        // (1 - eps) alpha beta
        let sol = solve_gibbs(&fam.to_instance(), threshold).unwrap();
        assert!(sol.primal_objective >= 0.5 - 1e-10);

        // doubling alpha halves the threshold
        let steep = SimplexFamily::new(100, 2.0, 1.0).unwrap();
        let halved = simplex_no_progress_threshold(&steep, 0.5).unwrap();
        assert!((halved - threshold / 2.0).abs() < 1e-12);

        assert!(simplex_no_progress_threshold(&fam, 1.5).is_err());
        let tiny = SimplexFamily::new(3, 1.0, 1.0).unwrap();
        assert!(matches!(
            simplex_no_progress_threshold(&tiny, 0.2),
            Err(BoundsError::ThresholdNotMeaningful(_))
        ));
    }

    #[test]
    fn rate_lower_bound_examples() {
        let fam = SimplexFamily::new(10, 1.0, 1.0).unwrap();
        let threshold = (1.0 + 10.0_f64.ln()) / 1.0;
        let at = simplex_rate_lower_bound(&fam, threshold).unwrap();
        assert!((at - 1.0 / 9.0).abs() < 1e-12);
        let mid = simplex_rate_lower_bound(&fam, 5.0).unwrap();
        assert!((mid - 0.020350709876371314).abs() < 1e-15);
        assert!(simplex_rate_lower_bound(&fam, 0.9 * threshold).is_none());

        // measured Gibbs objective dominates the bound
        let inst = fam.to_instance();
        for &eta in &[threshold, 5.0, 8.0] {
            let sol = solve_gibbs(&inst, eta).unwrap();
            let bound = simplex_rate_lower_bound(&fam, eta).unwrap();
            assert!(sol.primal_objective >= bound - 1e-10);
        }
    }

    #[test]
    fn integral_costs_guarantee_unit_gap() {
        // integral polytope + integer costs: the gap is at least one
        let cost = vec![
            vec![2.0, 7.0, 1.0],
            vec![4.0, 0.0, 3.0],
            vec![5.0, 1.0, 6.0],
        ];
        let inst = AssignmentInstance::new(cost).unwrap().to_instance();
        assert!(inst.integral_cost());
        let prof = profiled(&inst);
        assert!(prof.gap >= 1.0 - 1e-9);
    }

    #[test]
    fn exponential_rate_envelope_below_sup() {
        // restated corollary: g(eta) <= K exp(-M eta) for any M below the
        // rate constant gap/R1, with K the fast-bound prefactor
        let (inst, prof) = simplex_profile(10, 1.0, 1.0);
        let rate = 0.9 * prof.gap / prof.l1_radius;
        let prefactor = prof.gap * ((prof.l1_radius + prof.entropic_radius) / prof.l1_radius).exp();
        let threshold = prof.fast_threshold();
        for k in 0..12 {
            let eta = threshold * (1.0 + 0.5 * k as f64);
            let sol = solve_gibbs(&inst, eta).unwrap();
            let gap = sol.gap.unwrap();
            assert!(
                gap <= prefactor * (-rate * eta).exp() + 1e-6,
                "envelope violated at eta={eta}"
            );
        }
    }

    #[test]
    fn rate_bounds_share_their_exponent() {
        // fast bound / lower bound = 9 for the simplex family at any valid
        // eta, since Delta/R1 = alpha and (R1+RH)/R1 = 1 + log d
        let fam = SimplexFamily::new(10, 1.0, 1.0).unwrap();
        let (_, prof) = simplex_profile(10, 1.0, 1.0);
        for &eta in &[3.4, 5.0, 8.0] {
            let upper = fast_bound(&prof, eta).unwrap();
            let lower = simplex_rate_lower_bound(&fam, eta).unwrap();
            assert!((upper / lower - 9.0).abs() < 1e-6);
        }
    }

    #[test]
    fn simplex_gap_floor_covers_both_regimes() {
        let fam = SimplexFamily::new(100, 1.0, 1.0).unwrap();
        // plateau regime: eta well below log d
        let floor = simplex_gap_floor(&fam, 1.0).unwrap();
        assert!(floor > 0.9);
        // decay regime
        let floor = simplex_gap_floor(&fam, 10.0).unwrap();
        assert!((floor - simplex_rate_lower_bound(&fam, 10.0).unwrap()).abs() < 1e-15);
        // the sliver in between yields no bound
        assert!(simplex_gap_floor(&fam, 0.5 * (100.0_f64.ln() + 1.0 + 100.0_f64.ln())).is_none());
    }

    #[test]
    fn worst_case_cost_matrix_shape() {
        let instance = worst_case_assignment_cost(2).unwrap();
        assert_eq!(instance.cost(), &[vec![0.0, 0.0], vec![1.0, 0.0]]);

        let n3 = worst_case_assignment_cost(3).unwrap();
        let identity_cost = n3.permutation_cost(&[0, 1, 2]);
        assert_eq!(identity_cost, 0.0);
        // brute force: every non-identity permutation costs at least 1
        let (best, value) = n3.brute_force_optimum();
        assert_eq!(best, vec![0, 1, 2]);
        assert_eq!(value, 0.0);
        let mut perms_checked = 0;
        let mut perm = vec![0usize, 1, 2];
        loop {
            if perm != [0, 1, 2] {
                assert!(n3.permutation_cost(&perm) >= 1.0);
            }
            perms_checked += 1;
            // lexicographic successor
            let mut i = 2;
            while i > 0 && perm[i - 1] >= perm[i] {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            let mut j = 2;
            while perm[j] <= perm[i - 1] {
                j -= 1;
            }
            perm.swap(i - 1, j);
            perm[i..].reverse();
        }
        assert_eq!(perms_checked, 6);

        assert!(worst_case_assignment_cost(1).is_err());
    }

    #[test]
    fn assignment_threshold_examples() {
        let threshold = assignment_eta_lower_threshold(10, 0.1).unwrap();
        assert!((threshold - 10.0 * 9.0_f64.ln()).abs() < 1e-12);
        // epsilon -> 1/2 sends the threshold to zero
        assert!(assignment_eta_lower_threshold(7, 0.4999999).unwrap() < 1e-5);
        assert!(assignment_eta_lower_threshold(7, 0.5).is_err());
        assert!(assignment_eta_lower_threshold(7, 0.0).is_err());
    }

    #[test]
    fn assignment_threshold_contract_empirically() {
        // n = 6, eps = 0.2: Sinkhorn at the threshold keeps a gap >= eps
        let n = 6;
        let eps = 0.2;
        let eta = assignment_eta_lower_threshold(n, eps).unwrap();
        let instance = worst_case_assignment_cost(n).unwrap();
        let (sol, _) = solve_sinkhorn(&instance, eta, 1e-10, 200_000).unwrap();
        // optimal value is zero, so the objective is the gap
        assert!(sol.primal_objective >= eps - 1e-8);
    }

    #[test]
    fn gap_floor_matches_threshold_inverse() {
        let n = 6;
        for &eps in &[0.1, 0.25, 0.4] {
            let eta = assignment_eta_lower_threshold(n, eps).unwrap();
            let floor = assignment_gap_floor(n, eta);
            assert!((floor - eps).abs() < 1e-12);
        }
    }

    #[test]
    fn check_report_passes_on_simplex_above_threshold() {
        let (inst, prof) = simplex_profile(4, 1.0, 1.0);
        let eta = 2.0 * prof.fast_threshold();
        let sol = solve_gibbs(&inst, eta).unwrap();
        let checked = check_report(&prof, &sol);
        assert!(checked.slow_ok);
        assert_eq!(checked.fast_ok, Some(true));
        assert_eq!(checked.face_ok, Some(true));
        assert!(checked.all_ok());
    }

    #[test]
    fn check_report_below_threshold_leaves_fast_na() {
        let inst = worst_case_assignment_cost(4).unwrap();
        let prof = profiled(&inst.to_instance());
        let eta = 2.0; // far below (R1+RH)/Delta = 4 + 4 log 4
        let (sol, _) = solve_sinkhorn(&inst, eta, 1e-8, 100_000).unwrap();
        let checked = check_report(&prof, &sol);
        assert!(checked.report.fast_bound.is_none());
        assert!(checked.fast_ok.is_none());
        assert!(checked.slow_ok);
        // gap stays above the theorem floor
        let floor = assignment_gap_floor(4, eta);
        assert!(checked.measured_gap >= floor - 1e-8);
    }

    #[test]
    fn tau_variant_bound_holds_with_near_optimal_vertex() {
        // simplex with an almost-optimal vertex at 0.001
        let inst = LpInstance::new(
            vec![vec![1.0; 4]],
            vec![1.0],
            vec![0.0, 0.001, 1.0, 1.0],
            false,
        )
        .unwrap();
        let prof = profiled(&inst);
        assert!((prof.gap - 0.001).abs() < 1e-12);
        let tau = 0.01;
        for &eta in &[2.5, 4.0, 8.0] {
            let report = BoundReport::new(&prof, eta, Some(tau));
            let variant = report.tau_variant.unwrap();
            let delta_tau = variant.delta_tau.unwrap();
            assert!((delta_tau - 0.999).abs() < 1e-12);
            let sol = solve_gibbs(&inst, eta).unwrap();
            let gap = sol.primal_objective - prof.optimal_value;
            if let Some(bound) = variant.bound {
                assert!(gap <= bound + 1e-9, "eta={eta}: gap {gap} > bound {bound}");
            }
        }
        // a tau that swallows every vertex bounds the gap by tau itself
        let report = BoundReport::new(&prof, 1.0, Some(2.0));
        let variant = report.tau_variant.unwrap();
        assert!(variant.delta_tau.is_none());
        assert_eq!(variant.bound, Some(2.0));
    }

    #[test]
    fn segment_face_distance_is_exact() {
        let u = vec![1.0, 0.0, 0.0];
        let w = vec![0.0, 1.0, 0.0];
        let x = vec![0.3, 0.3, 0.4];
        let (d, _) = segment_distance(&x, &u, &w);
        assert!((d - 0.8).abs() < 1e-12);

        // distance to one endpoint when the minimizer is at the boundary
        let x = vec![1.2, 0.0, 0.0];
        let (d, lambda) = segment_distance(&x, &u, &w);
        assert!((d - 0.2).abs() < 1e-12);
        assert!((lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn face_distance_with_three_optima_matches_grid_search() {
        // three optimal vertices (zero cost on three coordinates)
        let inst = LpInstance::new(
            vec![vec![1.0; 4]],
            vec![1.0],
            vec![0.0, 0.0, 0.0, 1.0],
            false,
        )
        .unwrap();
        let prof = profiled(&inst);
        assert_eq!(prof.optimal_vertices.len(), 3);
        let face: Vec<&Vec<f64>> = prof
            .optimal_vertices
            .iter()
            .map(|&i| &prof.vertices[i])
            .collect();

        let x = vec![0.15, 0.35, 0.25, 0.25];
        let measured = face_distance(&prof, &x);

        // independent oracle: dense grid over the weight simplex
        let mut grid_best = f64::INFINITY;
        let steps = 400;
        for a in 0..=steps {
            for b in 0..=(steps - a) {
                let w0 = a as f64 / steps as f64;
                let w1 = b as f64 / steps as f64;
                let w2 = 1.0 - w0 - w1;
                let z: Vec<f64> = (0..4)
                    .map(|j| w0 * face[0][j] + w1 * face[1][j] + w2 * face[2][j])
                    .collect();
                grid_best = grid_best.min(l1_distance(&x, &z));
            }
        }
        assert!(
            measured <= grid_best + 1e-8,
            "measured {measured} worse than grid {grid_best}"
        );
        assert!(
            measured >= grid_best - 0.02,
            "measured {measured} below grid floor {grid_best}"
        );
    }
}
