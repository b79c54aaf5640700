//! Solvers for the entropy-penalized program `min c^T x - eta^{-1} H(x)`
//! over `{A x = b, x >= 0}`, by three routes: the closed-form Gibbs vector on
//! simplex feasible sets, log-domain Sinkhorn scaling on the Birkhoff
//! polytope, and damped Newton ascent on the exponential-penalty dual for
//! general instances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Mat};
use crate::model::{entropy_unchecked, AssignmentInstance, LpInstance, ModelError};

/// Default marginal / feasibility tolerance.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-8;
/// Default gradient-norm stopping tolerance for the dual Newton solver.
pub const DEFAULT_GRAD_TOL: f64 = 1e-10;
/// Default Sinkhorn iteration cap.
pub const DEFAULT_SINKHORN_MAX_ITER: usize = 100_000;
/// Newton iteration cap per continuation stage.
const NEWTON_MAX_ITER: usize = 200;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("penalization parameter must be positive, got {0}")]
    NonPositiveEta(f64),
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTol(f64),
    #[error("instance is not a scaled simplex; the Gibbs route does not apply")]
    NotSimplex,
    #[error("Sinkhorn did not reach tol within {iterations} iterations (marginal error {marginal_error:.3e})")]
    SinkhornStalled {
        marginal_error: f64,
        iterations: usize,
        /// Last iterate, so the caller can decide whether it is usable.
        partial: Box<(PenalizedSolution, ScalingState)>,
    },
    #[error("dual ascent stalled after {iterations} Newton steps (gradient norm {grad_norm:.3e})")]
    DualAscentStalled { iterations: usize, grad_norm: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which algorithm produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Gibbs,
    Sinkhorn,
    DualAscent,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Gibbs => "gibbs",
            Route::Sinkhorn => "sinkhorn",
            Route::DualAscent => "dual_ascent",
        }
    }
}

/// Optimum of the penalized program at one value of `eta`.
///
/// `x_eta` is strictly positive in exact arithmetic; at very large `eta`
/// entries may underflow to zero in double precision and are left as-is.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenalizedSolution {
    pub x_eta: Vec<f64>,
    pub eta: f64,
    /// `c^T x_eta`.
    pub primal_objective: f64,
    /// `c^T (x_eta - x*)` when the LP optimum is known.
    pub gap: Option<f64>,
    /// `c^T x_eta - eta^{-1} H(x_eta)`.
    pub penalized_objective: f64,
    /// `||A x_eta - b||_inf`.
    pub feasibility_residual: f64,
    pub iterations: usize,
    pub route: Route,
}

impl PenalizedSolution {
    /// Fill in the gap against a known LP optimal value.
    pub fn with_optimal_value(mut self, optimal: f64) -> Self {
        self.gap = Some(self.primal_objective - optimal);
        self
    }
}

/// Diagonal scalings of the Sinkhorn fixed point `X = D1 A D2` with
/// `A_ij = exp(-eta C_ij)`, kept in log domain. At convergence every
/// reconstructed entry lies in `(0, 1]` up to the marginal tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingState {
    pub log_u: Vec<f64>,
    pub log_v: Vec<f64>,
    pub kernel_log: Vec<Vec<f64>>,
}

impl ScalingState {
    pub fn size(&self) -> usize {
        self.log_u.len()
    }

    /// Reconstruct the scaled matrix `X_ij = exp(log_u_i + kernel_log_ij + log_v_j)`.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (self.log_u[i] + self.kernel_log[i][j] + self.log_v[j]).exp())
                    .collect()
            })
            .collect()
    }

    fn flatten_row_major(&self) -> Vec<f64> {
        self.reconstruct().into_iter().flatten().collect()
    }
}

/// Worst marginal violation of the reconstructed matrix:
/// `max(||X 1 - 1||_inf, ||X^T 1 - 1||_inf)`.
pub fn marginal_error(state: &ScalingState) -> f64 {
    let x = state.reconstruct();
    let n = state.size();
    let mut worst = 0.0_f64;
    for row in &x {
        worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
    }
    for j in 0..n {
        let col_sum: f64 = x.iter().map(|row| row[j]).sum();
        worst = worst.max((col_sum - 1.0).abs());
    }
    worst
}

fn logsumexp(values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.collect();
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + vals.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

// ---------------------------------------------------------------------------
// Gibbs route
// ---------------------------------------------------------------------------

/// Closed-form minimizer of the penalized program on the scaled simplex
/// `{sum x_i = beta, x >= 0}`:
/// `x_i = beta exp(-eta c_i) / sum_j exp(-eta c_j)`, evaluated in log domain.
///
/// Defined for `eta >= 0`; at `eta = 0` it degenerates to the uniform
/// (maximum-entropy) point.
pub fn gibbs_point(cost: &[f64], beta: f64, eta: f64) -> Vec<f64> {
    let log_weights: Vec<f64> = cost.iter().map(|c| -eta * c).collect();
    let lse = logsumexp(log_weights.iter().cloned());
    log_weights
        .iter()
        .map(|lw| beta * (lw - lse).exp())
        .collect()
}

/// Solve the penalized program on a scaled-simplex instance via the Gibbs
/// closed form. Rejects instances whose feasible set is not a simplex.
pub fn solve_gibbs(inst: &LpInstance, eta: f64) -> Result<PenalizedSolution, SolverError> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(SolverError::NonPositiveEta(eta));
    }
    let beta = inst.as_simplex().ok_or(SolverError::NotSimplex)?;
    let x = gibbs_point(inst.cost(), beta, eta);
    let primal_objective = inst.objective(&x);
    // the LP optimum on the simplex is beta * min_i c_i
    let optimal = beta * inst.cost().iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PenalizedSolution {
        penalized_objective: primal_objective - entropy_unchecked(&x) / eta,
        feasibility_residual: inst.feasibility_residual(&x),
        gap: Some(primal_objective - optimal),
        primal_objective,
        x_eta: x,
        eta,
        iterations: 1,
        route: Route::Gibbs,
    })
}

// ---------------------------------------------------------------------------
// Sinkhorn route
// ---------------------------------------------------------------------------

/// Log-domain Sinkhorn scaling on the Birkhoff polytope: alternate row and
/// column normalizations of `exp(-eta C)` until both marginals are within
/// `tol` of the all-ones vector.
pub fn solve_sinkhorn(
    assignment: &AssignmentInstance,
    eta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(PenalizedSolution, ScalingState), SolverError> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(SolverError::NonPositiveEta(eta));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(SolverError::NonPositiveTol(tol));
    }
    let n = assignment.size();
    let kernel_log: Vec<Vec<f64>> = assignment
        .cost()
        .iter()
        .map(|row| row.iter().map(|c| -eta * c).collect())
        .collect();
    let mut state = ScalingState {
        log_u: vec![0.0; n],
        log_v: vec![0.0; n],
        kernel_log,
    };

    let mut iterations = 0;
    let mut error = marginal_error(&state);
    while error > tol && iterations < max_iter {
        // rows first, then columns (fixed order for determinism)
        for i in 0..n {
            state.log_u[i] = -logsumexp((0..n).map(|j| state.kernel_log[i][j] + state.log_v[j]));
        }
        for j in 0..n {
            state.log_v[j] = -logsumexp((0..n).map(|i| state.log_u[i] + state.kernel_log[i][j]));
        }
        iterations += 1;
        error = marginal_error(&state);
    }

    let solution = sinkhorn_solution(assignment, &state, eta, error, iterations);
    if error > tol {
        return Err(SolverError::SinkhornStalled {
            marginal_error: error,
            iterations,
            partial: Box::new((solution, state)),
        });
    }
    Ok((solution, state))
}

fn sinkhorn_solution(
    assignment: &AssignmentInstance,
    state: &ScalingState,
    eta: f64,
    error: f64,
    iterations: usize,
) -> PenalizedSolution {
    let x = state.flatten_row_major();
    let primal_objective: f64 = assignment
        .cost()
        .iter()
        .flatten()
        .zip(&x)
        .map(|(c, xi)| c * xi)
        .sum();
    PenalizedSolution {
        penalized_objective: primal_objective - entropy_unchecked(&x) / eta,
        feasibility_residual: error,
        gap: None,
        primal_objective,
        x_eta: x,
        eta,
        iterations,
        route: Route::Sinkhorn,
    }
}

// ---------------------------------------------------------------------------
// dual ascent route
// ---------------------------------------------------------------------------

/// Primal point induced by dual multipliers:
/// `x_i(y) = exp(-eta (c_i - (A^T y)_i) - 1)`.
/// The `-1` shift is the stationarity map of the vanilla entropy penalty.
fn primal_from_dual(inst: &LpInstance, y: &[f64], eta: f64) -> Vec<f64> {
    let aty = inst.matrix().mul_transpose_vec(y);
    inst.cost()
        .iter()
        .zip(&aty)
        .map(|(c, a)| (-eta * (c - a) - 1.0).exp())
        .collect()
}

/// Dual objective `b^T y - eta^{-1} sum_i x_i(y)`, or `-inf` when the
/// exponentials overflow (used to reject line-search trial points).
fn dual_objective(inst: &LpInstance, y: &[f64], eta: f64) -> f64 {
    let aty = inst.matrix().mul_transpose_vec(y);
    let mut mass = 0.0;
    for (c, a) in inst.cost().iter().zip(&aty) {
        let log_x = -eta * (c - a) - 1.0;
        if log_x > 700.0 {
            return f64::NEG_INFINITY;
        }
        mass += log_x.exp();
    }
    let bty: f64 = inst.rhs().iter().zip(y).map(|(b, yi)| b * yi).sum();
    bty - mass / eta
}

/// Maximize the smooth concave dual of the penalized program by damped
/// Newton with backtracking, and recover the primal through the
/// stationarity map. Stops when the dual gradient (the primal feasibility
/// residual) falls below `min(tol, 1e-10)` in max-norm.
///
/// For large `eta` the solve warm-starts along a doubling continuation
/// ladder, which keeps every Newton system well scaled.
pub fn solve_dual_ascent(
    inst: &LpInstance,
    eta: f64,
    tol: f64,
) -> Result<PenalizedSolution, SolverError> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(SolverError::NonPositiveEta(eta));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(SolverError::NonPositiveTol(tol));
    }
    let grad_tol = tol.min(DEFAULT_GRAD_TOL);

    let mut stages = Vec::new();
    let mut stage = eta.min(4.0);
    while stage < eta {
        stages.push(stage);
        stage *= 2.0;
    }
    stages.push(eta);

    let m = inst.num_rows();
    let mut y = vec![0.0; m];
    let mut total_iterations = 0;
    for &stage_eta in &stages {
        // intermediate stages only need to park y near the next basin
        let stage_tol = if stage_eta == eta { grad_tol } else { 1e-6 };
        total_iterations += newton_ascent(inst, &mut y, stage_eta, stage_tol);
    }

    let x = primal_from_dual(inst, &y, eta);
    let residual = inst.feasibility_residual(&x);
    if residual > tol {
        return Err(SolverError::DualAscentStalled {
            iterations: total_iterations,
            grad_norm: residual,
        });
    }
    let primal_objective = inst.objective(&x);
    Ok(PenalizedSolution {
        penalized_objective: primal_objective - entropy_unchecked(&x) / eta,
        feasibility_residual: residual,
        gap: None,
        primal_objective,
        x_eta: x,
        eta,
        iterations: total_iterations,
        route: Route::DualAscent,
    })
}

/// Run adaptively damped Newton (Levenberg-Marquardt style) until the dual
/// gradient is below `grad_tol`, the iteration cap is hit, or no numerically
/// measurable progress remains. Leaves `y` at the best iterate seen
/// (smallest gradient norm) and returns the number of iterations taken; the
/// caller judges the final residual against its contract.
///
/// Two effects make a plain Newton/Armijo loop stall here. Degenerate
/// vertices leave near-singular curvature directions along which the raw
/// Newton step overshoots by orders of magnitude (the exponentials of the
/// primal map blow up third-order terms), so the damping parameter grows
/// until the local model is trustworthy and shrinks again after successes.
/// And close to the optimum the per-step ascent falls below the f64
/// resolution of the objective while the gradient is still far from its
/// floor, so step acceptance also recognizes a strict decrease of the
/// gradient norm, which is measured at absolute precision.
fn newton_ascent(inst: &LpInstance, y: &mut Vec<f64>, eta: f64, grad_tol: f64) -> usize {
    let m = inst.num_rows();
    let a = inst.matrix();
    let grad_norm_at = |y: &[f64]| {
        let x = primal_from_dual(inst, y, eta);
        let ax = a.mul_vec(&x);
        linalg::inf_norm_diff(&ax, inst.rhs())
    };

    let mut best_y = y.clone();
    let mut best_norm = grad_norm_at(&best_y);
    let mut damping = 1e-12;
    let mut stagnant = 0;
    let mut iterations = 0;
    'outer: for iter in 0..NEWTON_MAX_ITER {
        iterations = iter + 1;
        let x = primal_from_dual(inst, y, eta);
        let ax = a.mul_vec(&x);
        let grad: Vec<f64> = inst.rhs().iter().zip(&ax).map(|(b, v)| b - v).collect();
        let grad_norm = linalg::inf_norm(&grad);
        if grad_norm < best_norm {
            best_norm = grad_norm;
            best_y.copy_from_slice(y);
        }
        if grad_norm <= grad_tol {
            *y = best_y;
            return iterations;
        }

        // Hessian of the dual is -eta A diag(x) A^T
        let mut hess = Mat::zeros(m, m);
        for r in 0..m {
            for s in r..m {
                let mut acc = 0.0;
                for (k, &xk) in x.iter().enumerate() {
                    acc += a.get(r, k) * a.get(s, k) * xk;
                }
                let v = eta * acc;
                hess.set(r, s, v);
                hess.set(s, r, v);
            }
        }
        let scale = hess.max_abs().max(1.0);
        let current = dual_objective(inst, y, eta);
        let noise = 1e-12 * (1.0 + current.abs());

        // A trial is progress if it measurably raises the objective or, when
        // the objective is numerically flat, strictly shrinks the gradient.
        let try_step = |y: &[f64], direction: &[f64], step: f64, required: f64| {
            let trial: Vec<f64> = y
                .iter()
                .zip(direction)
                .map(|(yi, d)| yi + step * d)
                .collect();
            let value = dual_objective(inst, &trial, eta);
            if !value.is_finite() {
                return None;
            }
            // measurable ascent wins outright; otherwise tolerate objective
            // changes inside the rounding noise band if the gradient
            // strictly contracts (phi saturates its f64 resolution several
            // orders of magnitude before the gradient does)
            if value >= current + required && value > current + noise {
                let trial_norm = grad_norm_at(&trial);
                return Some((trial, trial_norm));
            }
            if value >= current - noise {
                let trial_norm = grad_norm_at(&trial);
                if trial_norm < grad_norm {
                    return Some((trial, trial_norm));
                }
            }
            None
        };

        for _attempt in 0..32 {
            let mut damped = hess.clone();
            for r in 0..m {
                damped.set(r, r, damped.get(r, r) + damping * scale);
            }
            let direction = linalg::solve_square_with_tol(&damped, &grad, 1e-15)
                .filter(|d| d.iter().all(|v| v.is_finite()))
                .unwrap_or_else(|| grad.iter().map(|g| g / (damping * scale)).collect());
            let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
            if slope > 0.0 {
                // cap the first trial so no coordinate of log x moves more
                // than ~40 units; full steps stay admissible near the optimum
                let log_shift = eta * linalg::inf_norm(&a.mul_transpose_vec(&direction));
                let start_step = if log_shift > 40.0 {
                    40.0 / log_shift
                } else {
                    1.0
                };
                let mut step = start_step;
                for _ in 0..8 {
                    if let Some((trial, trial_norm)) =
                        try_step(y, &direction, step, 1e-4 * step * slope)
                    {
                        *y = trial;
                        damping = (damping * 0.25).max(1e-12);
                        if trial_norm > 0.9 * grad_norm {
                            stagnant += 1;
                            if stagnant >= 8 {
                                break 'outer;
                            }
                        } else {
                            stagnant = 0;
                        }
                        continue 'outer;
                    }
                    step *= 0.5;
                }
            }
            damping = (damping * 10.0).min(1e12);
        }
        // every damping level failed: no measurable progress remains
        break;
    }
    let final_norm = grad_norm_at(y);
    if final_norm < best_norm {
        best_y.copy_from_slice(y);
    }
    *y = best_y;
    iterations
}

/// Maximum-entropy point of the feasible set: the penalized optimum with a
/// zero cost vector, which is independent of `eta`.
pub fn max_entropy_point(inst: &LpInstance) -> Result<Vec<f64>, SolverError> {
    let zero_cost = inst.with_cost(vec![0.0; inst.num_vars()])?;
    let solution = solve_dual_ascent(&zero_cost, 1.0, 1e-9)?;
    Ok(solution.x_eta)
}

/// Max-norm violation of the first-order optimality condition: the smallest
/// (least-squares) multiplier fit of
/// `c_i + eta^{-1}(log x_i + 1) = (A^T y)_i`.
/// Small values certify that `x` solves the penalized program.
pub fn kkt_residual(inst: &LpInstance, x: &[f64], eta: f64) -> f64 {
    let targets: Vec<f64> = inst
        .cost()
        .iter()
        .zip(x)
        .map(|(c, &xi)| c + (xi.ln() + 1.0) / eta)
        .collect();
    if targets.iter().any(|t| !t.is_finite()) {
        return f64::INFINITY;
    }
    let y = linalg::fit_multipliers(inst.matrix(), &targets);
    let fitted = inst.matrix().mul_transpose_vec(&y);
    linalg::inf_norm_diff(&fitted, &targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{profile, SimplexFamily};
    use crate::{bounds, model};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simplex(d: usize, alpha: f64, beta: f64) -> LpInstance {
        SimplexFamily::new(d, alpha, beta).unwrap().to_instance()
    }

    #[test]
    fn gibbs_two_point_hand_value() {
        let sol = solve_gibbs(&simplex(2, 1.0, 1.0), 2.0_f64.ln()).unwrap();
        assert!((sol.x_eta[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((sol.x_eta[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(sol.route, Route::Gibbs);
        assert!(sol.gap.unwrap() > 0.0);
    }

    #[test]
    fn gibbs_small_eta_is_near_uniform() {
        let d = 7;
        let sol = solve_gibbs(&simplex(d, 1.0, 2.0), 1e-9).unwrap();
        for &x in &sol.x_eta {
            assert!((x - 2.0 / d as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn gibbs_large_eta_concentrates() {
        let sol = solve_gibbs(&simplex(3, 1.0, 1.0), 10.0).unwrap();
        assert!((sol.x_eta[0] - 0.9999092083843409).abs() < 1e-15);
    }

    #[test]
    fn gibbs_survives_huge_eta() {
        // log-domain evaluation must not overflow
        let sol = solve_gibbs(&simplex(4, 1.0, 1.0), 5000.0).unwrap();
        assert!((sol.x_eta[0] - 1.0).abs() < 1e-12);
        assert!(sol.x_eta.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn gibbs_rejects_bad_inputs() {
        assert!(matches!(
            solve_gibbs(&simplex(3, 1.0, 1.0), 0.0),
            Err(SolverError::NonPositiveEta(_))
        ));
        let not_simplex =
            LpInstance::new(vec![vec![1.0, 2.0]], vec![1.0], vec![0.0, 1.0], false).unwrap();
        assert!(matches!(
            solve_gibbs(&not_simplex, 1.0),
            Err(SolverError::NotSimplex)
        ));
    }

    #[test]
    fn sinkhorn_zero_cost_gives_uniform() {
        let assignment = AssignmentInstance::new(vec![vec![0.0; 3]; 3]).unwrap();
        let (sol, _) = solve_sinkhorn(&assignment, 2.5, 1e-10, 100).unwrap();
        for &x in &sol.x_eta {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sinkhorn_single_cell() {
        let assignment = AssignmentInstance::new(vec![vec![4.2]]).unwrap();
        let (sol, _) = solve_sinkhorn(&assignment, 1.0, 1e-10, 10).unwrap();
        assert!((sol.x_eta[0] - 1.0).abs() < 1e-12);
        assert!(sol.iterations <= 1);
    }

    #[test]
    fn sinkhorn_reconstruction_matches_solution() {
        let assignment = AssignmentInstance::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (sol, state) = solve_sinkhorn(&assignment, 3.0, 1e-10, 10_000).unwrap();
        let flat: Vec<f64> = state.reconstruct().into_iter().flatten().collect();
        assert_eq!(sol.x_eta, flat);
    }

    #[test]
    fn sinkhorn_stall_reports_partial_state() {
        let assignment = bounds::worst_case_assignment_cost(4).unwrap();
        match solve_sinkhorn(&assignment, 8.0, 1e-12, 2) {
            Err(SolverError::SinkhornStalled {
                marginal_error,
                iterations,
                partial,
            }) => {
                assert_eq!(iterations, 2);
                assert!(marginal_error > 1e-12);
                assert_eq!(partial.0.x_eta.len(), 16);
            }
            other => panic!("expected stall, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn marginal_error_examples() {
        // exactly doubly stochastic reconstruction
        let uniform = ScalingState {
            log_u: vec![-(2.0_f64.ln()); 2],
            log_v: vec![0.0; 2],
            kernel_log: vec![vec![0.0; 2]; 2],
        };
        assert!(marginal_error(&uniform) < 1e-15);

        // unscaled all-ones kernel: every row sums to 2
        let unscaled = ScalingState {
            log_u: vec![0.0; 2],
            log_v: vec![0.0; 2],
            kernel_log: vec![vec![0.0; 2]; 2],
        };
        assert!((marginal_error(&unscaled) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dual_ascent_matches_gibbs_on_simplices() {
        for &(d, alpha, beta, eta) in &[
            (2usize, 1.0, 1.0, 0.5),
            (5, 0.7, 2.0, 3.0),
            (12, 2.0, 0.5, 20.0),
            (30, 1.0, 1.0, 45.0),
        ] {
            let inst = simplex(d, alpha, beta);
            let gibbs = solve_gibbs(&inst, eta).unwrap();
            let dual = solve_dual_ascent(&inst, eta, 1e-8).unwrap();
            let diff = linalg::inf_norm_diff(&gibbs.x_eta, &dual.x_eta);
            assert!(diff < 1e-8, "d={d} eta={eta}: diff {diff:.2e}");
        }
    }

    #[test]
    fn dual_ascent_on_singleton_feasible_set() {
        // A invertible: the one feasible point is the solution at every eta
        let inst = LpInstance::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.3, 0.7],
            vec![5.0, -2.0],
            false,
        )
        .unwrap();
        for &eta in &[0.5, 1.0, 10.0, 40.0] {
            let sol = solve_dual_ascent(&inst, eta, 1e-10).unwrap();
            assert!((sol.x_eta[0] - 0.3).abs() < 1e-9);
            assert!((sol.x_eta[1] - 0.7).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_ascent_agrees_with_sinkhorn_on_birkhoff() {
        let cost = vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        let assignment = AssignmentInstance::new(cost).unwrap();
        let inst = assignment.to_instance();
        for &eta in &[1.0, 5.0] {
            let (sink, _) = solve_sinkhorn(&assignment, eta, 1e-10, 100_000).unwrap();
            let dual = solve_dual_ascent(&inst, eta, 1e-8).unwrap();
            let diff = linalg::inf_norm_diff(&sink.x_eta, &dual.x_eta);
            assert!(diff < 1e-6, "eta={eta}: diff {diff:.2e}");
        }
    }

    #[test]
    fn worst_case_cross_solver_agreement() {
        let assignment = bounds::worst_case_assignment_cost(3).unwrap();
        let inst = assignment.to_instance();
        let (sink, _) = solve_sinkhorn(&assignment, 5.0, 1e-10, 100_000).unwrap();
        let dual = solve_dual_ascent(&inst, 5.0, 1e-8).unwrap();
        assert!(linalg::inf_norm_diff(&sink.x_eta, &dual.x_eta) < 1e-6);
    }

    #[test]
    fn kkt_residual_small_for_all_routes() {
        let inst = simplex(6, 1.3, 0.8);
        let gibbs = solve_gibbs(&inst, 4.0).unwrap();
        assert!(kkt_residual(&inst, &gibbs.x_eta, 4.0) < 1e-6);

        let dual = solve_dual_ascent(&inst, 4.0, 1e-8).unwrap();
        assert!(kkt_residual(&inst, &dual.x_eta, 4.0) < 1e-6);

        let assignment = bounds::worst_case_assignment_cost(3).unwrap();
        let (sink, _) = solve_sinkhorn(&assignment, 2.0, 1e-10, 100_000).unwrap();
        assert!(kkt_residual(&assignment.to_instance(), &sink.x_eta, 2.0) < 1e-6);
    }

    #[test]
    fn max_entropy_point_is_uniform_on_simplex() {
        let inst = simplex(5, 1.0, 2.0);
        let x = max_entropy_point(&inst).unwrap();
        for &xi in &x {
            assert!((xi - 0.4).abs() < 1e-9);
        }
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> LpInstance {
        let m = rng.random_range(1..=3usize);
        let n = rng.random_range(m + 1..=7usize);
        let mut a = vec![vec![1.0; n]];
        for _ in 1..m {
            a.push((0..n).map(|_| rng.random_range(0.0..2.0)).collect());
        }
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.2)).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|row| row.iter().zip(&x0).map(|(r, x)| r * x).sum())
            .collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        LpInstance::new(a, b, c, false).unwrap()
    }

    #[test]
    fn slow_rate_envelope_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let inst = random_instance(&mut rng);
            let prof = match profile(&inst, |i| max_entropy_point(i).map_err(|e| e.to_string())) {
                Ok(p) => p,
                Err(model::ModelError::ConstantObjective) => continue,
                Err(e) => panic!("profile failed: {e}"),
            };
            // the gap is positive whenever the objective is non-constant,
            // and no vertex can out-entropy the max-entropy point
            assert!(prof.gap > 0.0);
            let max_vertex_entropy = prof
                .vertices
                .iter()
                .map(|v| entropy_unchecked(v))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(entropy_unchecked(&prof.max_entropy_point) >= max_vertex_entropy - 1e-8);
            for &eta in &[0.5, 2.0, 10.0, 40.0] {
                let sol = solve_dual_ascent(&inst, eta, 1e-8).unwrap();
                let gap = sol.primal_objective - prof.optimal_value;
                assert!(
                    gap <= prof.entropic_radius / eta + 1e-6,
                    "slow rate violated at eta={eta}: gap {gap}"
                );
            }
        }
    }

    #[test]
    fn objective_is_monotone_in_eta() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let inst = random_instance(&mut rng);
            let etas = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
            let mut prev = f64::INFINITY;
            for &eta in &etas {
                let sol = solve_dual_ascent(&inst, eta, 1e-9).unwrap();
                assert!(
                    sol.primal_objective <= prev + 1e-9,
                    "objective increased at eta={eta}"
                );
                prev = sol.primal_objective;
            }
        }
    }
}
