//! LP instances in standard form, entropy functions, and exact polytope
//! analysis: vertex enumeration, suboptimality gap, l1 radius, and entropic
//! radius.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, BasisSolve, Mat};

/// Deduplication tolerance for enumerated vertices (max-norm).
pub const VERTEX_DEDUP_TOL: f64 = 1e-9;

/// Absolute tolerance used to classify a vertex as optimal.
pub const OPT_CLASS_TOL: f64 = 1e-9;

/// Default cap on the number of basis subsets examined during vertex
/// enumeration. Covers dense instances up to roughly n = 14 columns and the
/// Birkhoff polytope up to n = 5.
pub const DEFAULT_BASIS_BUDGET: u128 = 4_000_000;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0} contains a non-finite entry")]
    NonFinite(&'static str),
    #[error("entropy argument has negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("binary entropy argument {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("{0}")]
    ShapeMismatch(String),
    #[error("feasible set is empty")]
    Infeasible,
    #[error("feasible set is unbounded")]
    Unbounded,
    #[error("boundedness could not be certified within the enumeration cap")]
    BoundednessUndecided,
    #[error("basis enumeration needs {bases} subsets, budget is {budget}")]
    BudgetExceeded { bases: u128, budget: u128 },
    #[error("objective is constant over the feasible set (all vertices optimal)")]
    ConstantObjective,
    #[error("max-entropy solve failed: {0}")]
    MaxEntropySolve(String),
    #[error(
        "simplex family needs d >= 2, alpha > 0, beta > 0 (got d={d}, alpha={alpha}, beta={beta})"
    )]
    BadSimplexFamily { d: usize, alpha: f64, beta: f64 },
    #[error("assignment cost matrix must be square and nonempty")]
    BadAssignmentMatrix,
}

// ---------------------------------------------------------------------------
// entropy
// ---------------------------------------------------------------------------

/// Shannon entropy `H(x) = sum_i x_i log(1/x_i)` with the continuity
/// convention `0 log(1/0) = 0`. Entries must be nonnegative and finite.
pub fn entropy(x: &[f64]) -> Result<f64, ModelError> {
    for (index, &value) in x.iter().enumerate() {
        if !value.is_finite() {
            return Err(ModelError::NonFinite("entropy argument"));
        }
        if value < 0.0 {
            return Err(ModelError::NegativeEntry { index, value });
        }
    }
    Ok(entropy_unchecked(x))
}

/// Entropy without validation; callers guarantee nonnegative finite entries.
pub(crate) fn entropy_unchecked(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum()
}

/// Binary entropy `h(lambda) = lambda log(1/lambda) + (1-lambda) log(1/(1-lambda))`
/// on `[0, 1]`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(lambda: f64) -> Result<f64, ModelError> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(ModelError::LambdaOutOfRange(lambda));
    }
    Ok(binary_entropy_unchecked(lambda))
}

pub(crate) fn binary_entropy_unchecked(lambda: f64) -> f64 {
    let mut h = 0.0;
    if lambda > 0.0 {
        h -= lambda * lambda.ln();
    }
    let rest = 1.0 - lambda;
    if rest > 0.0 {
        h -= rest * rest.ln();
    }
    h
}

// ---------------------------------------------------------------------------
// instances
// ---------------------------------------------------------------------------

/// A standard-form linear program `min c^T x  s.t.  A x = b, x >= 0`.
///
/// The feasible set is assumed nonempty and bounded with a non-constant
/// objective; [`LpInstance::validate`] checks all three.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawLp", into = "RawLp")]
pub struct LpInstance {
    matrix: Mat,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    integral_cost: bool,
}

/// Wire form of [`LpInstance`]: `{"A": [...], "b": [...], "c": [...], "integral_cost": bool}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawLp {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub integral_cost: bool,
}

impl TryFrom<RawLp> for LpInstance {
    type Error = ModelError;
    fn try_from(raw: RawLp) -> Result<Self, ModelError> {
        LpInstance::new(raw.a, raw.b, raw.c, raw.integral_cost)
    }
}

impl From<LpInstance> for RawLp {
    fn from(inst: LpInstance) -> RawLp {
        let a = (0..inst.matrix.rows())
            .map(|r| inst.matrix.row(r).to_vec())
            .collect();
        RawLp {
            a,
            b: inst.rhs,
            c: inst.cost,
            integral_cost: inst.integral_cost,
        }
    }
}

impl LpInstance {
    pub fn new(
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        integral_cost: bool,
    ) -> Result<Self, ModelError> {
        if a.is_empty() || a[0].is_empty() {
            return Err(ModelError::ShapeMismatch(
                "constraint matrix must have at least one row and one column".into(),
            ));
        }
        let matrix = {
            let cols = a[0].len();
            if a.iter().any(|row| row.len() != cols) {
                return Err(ModelError::ShapeMismatch("ragged constraint matrix".into()));
            }
            Mat::from_rows(&a)
        };
        if b.len() != matrix.rows() {
            return Err(ModelError::ShapeMismatch(format!(
                "rhs has length {}, expected {}",
                b.len(),
                matrix.rows()
            )));
        }
        if c.len() != matrix.cols() {
            return Err(ModelError::ShapeMismatch(format!(
                "cost has length {}, expected {}",
                c.len(),
                matrix.cols()
            )));
        }
        if (0..matrix.rows()).any(|r| matrix.row(r).iter().any(|v| !v.is_finite())) {
            return Err(ModelError::NonFinite("constraint matrix"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("rhs"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("cost"));
        }
        Ok(LpInstance {
            matrix,
            rhs: b,
            cost: c,
            integral_cost,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn num_vars(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn integral_cost(&self) -> bool {
        self.integral_cost
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, xi)| c * xi).sum()
    }

    /// Same feasible set under a different objective.
    pub fn with_cost(&self, cost: Vec<f64>) -> Result<LpInstance, ModelError> {
        if cost.len() != self.num_vars() {
            return Err(ModelError::ShapeMismatch(format!(
                "cost has length {}, expected {}",
                cost.len(),
                self.num_vars()
            )));
        }
        if cost.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("cost"));
        }
        let integral_cost = cost.iter().all(|v| v.fract() == 0.0);
        Ok(LpInstance {
            matrix: self.matrix.clone(),
            rhs: self.rhs.clone(),
            cost,
            integral_cost,
        })
    }

    /// Max-norm constraint violation `||A x - b||_inf`.
    pub fn feasibility_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.mul_vec(x);
        linalg::inf_norm_diff(&ax, &self.rhs)
    }

    /// Detect a scaled-simplex feasible set: a single constraint row with
    /// identical positive coefficients, i.e. `sum_i x_i = beta` up to scaling.
    /// Returns the simplex scale `beta`.
    pub fn as_simplex(&self) -> Option<f64> {
        if self.matrix.rows() != 1 {
            return None;
        }
        let row = self.matrix.row(0);
        let lead = row[0];
        if lead <= 0.0 {
            return None;
        }
        if row.iter().any(|&v| (v - lead).abs() > 1e-12 * lead.abs()) {
            return None;
        }
        let beta = self.rhs[0] / lead;
        (beta > 0.0).then_some(beta)
    }

    /// Detect the Birkhoff polytope pattern: `2k` constraints over `k^2`
    /// row-major variables (k row sums followed by k column sums, rhs all
    /// ones). Returns the side length `k`.
    pub fn as_birkhoff(&self) -> Option<usize> {
        let m = self.matrix.rows();
        let n = self.matrix.cols();
        if m < 2 || !m.is_multiple_of(2) {
            return None;
        }
        let k = m / 2;
        if k * k != n {
            return None;
        }
        if self.rhs.iter().any(|&v| (v - 1.0).abs() > 1e-12) {
            return None;
        }
        for i in 0..k {
            let row = self.matrix.row(i);
            for (idx, &v) in row.iter().enumerate() {
                let expected = if idx / k == i { 1.0 } else { 0.0 };
                if (v - expected).abs() > 1e-12 {
                    return None;
                }
            }
        }
        for j in 0..k {
            let row = self.matrix.row(k + j);
            for (idx, &v) in row.iter().enumerate() {
                let expected = if idx % k == j { 1.0 } else { 0.0 };
                if (v - expected).abs() > 1e-12 {
                    return None;
                }
            }
        }
        Some(k)
    }

    /// Check nonemptiness, boundedness, and a non-constant objective.
    pub fn validate(&self) -> Result<(), ModelError> {
        let vertices = enumerate_vertices(self, VERTEX_DEDUP_TOL)?;
        self.check_bounded(&vertices)?;
        let values: Vec<f64> = vertices.iter().map(|v| self.objective(v)).collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= OPT_CLASS_TOL {
            return Err(ModelError::ConstantObjective);
        }
        Ok(())
    }

    /// Layered boundedness certificate. First the cheap checks: a zero column
    /// makes the instance unbounded outright, and `1` lying in the row space
    /// of `A` bounds `1^T x` (hence every coordinate). If both are
    /// inconclusive, fall back to scanning every feasible basis for a
    /// nonnegative ray direction.
    fn check_bounded(&self, vertices: &[Vec<f64>]) -> Result<(), ModelError> {
        if vertices.is_empty() {
            return Err(ModelError::Infeasible);
        }
        let n = self.num_vars();
        for col in 0..n {
            if (0..self.num_rows()).all(|r| self.matrix.get(r, col) == 0.0) {
                return Err(ModelError::Unbounded);
            }
        }
        let ones = vec![1.0; n];
        let y = linalg::fit_multipliers(&self.matrix, &ones);
        let fitted = self.matrix.mul_transpose_vec(&y);
        if linalg::inf_norm_diff(&fitted, &ones) <= 1e-8 {
            return Ok(());
        }
        self.ray_check()
    }

    /// Exhaustive recession-ray scan: the polytope is unbounded iff some
    /// feasible basis admits an entering column whose basic direction stays
    /// nonnegative.
    fn ray_check(&self) -> Result<(), ModelError> {
        const RAY_CHECK_CAP: u128 = 200_000;
        let rank = self.matrix.rank();
        let n = self.num_vars();
        if binomial(n, rank) > RAY_CHECK_CAP {
            return Err(ModelError::BoundednessUndecided);
        }
        let mut subset: Vec<usize> = (0..rank).collect();
        loop {
            let basis = self.columns(&subset);
            if let BasisSolve::Solution(xb) = linalg::solve_basis_system(
                &basis,
                &self.rhs,
                VERTEX_DEDUP_TOL * (1.0 + linalg::inf_norm(&self.rhs)),
            ) {
                if xb.iter().all(|&v| v >= -VERTEX_DEDUP_TOL) {
                    // feasible basis: test every nonbasic entering column
                    for j in 0..n {
                        if subset.contains(&j) {
                            continue;
                        }
                        let aj: Vec<f64> = (0..self.num_rows())
                            .map(|r| self.matrix.get(r, j))
                            .collect();
                        if let BasisSolve::Solution(step) =
                            linalg::solve_basis_system(&basis, &aj, 1e-7)
                        {
                            if step.iter().all(|&v| v <= VERTEX_DEDUP_TOL) {
                                return Err(ModelError::Unbounded);
                            }
                        }
                    }
                }
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
        Ok(())
    }

    /// Stack the selected columns into an `m x |cols|` matrix.
    fn columns(&self, cols: &[usize]) -> Mat {
        let m = self.num_rows();
        let mut out = Mat::zeros(m, cols.len());
        for r in 0..m {
            for (k, &c) in cols.iter().enumerate() {
                out.set(r, k, self.matrix.get(r, c));
            }
        }
        out
    }
}

/// The scaled-simplex lower-bound family: `min c^T x  s.t.  sum x_i = beta`
/// with `c_0 = 0` and `c_i = alpha` otherwise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(try_from = "SimplexFamilyParams")]
pub struct SimplexFamily {
    d: usize,
    alpha: f64,
    beta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct SimplexFamilyParams {
    d: usize,
    alpha: f64,
    beta: f64,
}

impl TryFrom<SimplexFamilyParams> for SimplexFamily {
    type Error = ModelError;
    fn try_from(p: SimplexFamilyParams) -> Result<Self, ModelError> {
        SimplexFamily::new(p.d, p.alpha, p.beta)
    }
}

impl SimplexFamily {
    pub fn new(d: usize, alpha: f64, beta: f64) -> Result<Self, ModelError> {
        if d < 2 || !alpha.is_finite() || !beta.is_finite() || alpha <= 0.0 || beta <= 0.0 {
            return Err(ModelError::BadSimplexFamily { d, alpha, beta });
        }
        Ok(SimplexFamily { d, alpha, beta })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn to_instance(&self) -> LpInstance {
        let mut c = vec![self.alpha; self.d];
        c[0] = 0.0;
        let integral = self.alpha.fract() == 0.0;
        LpInstance::new(vec![vec![1.0; self.d]], vec![self.beta], c, integral)
            .expect("simplex family expands to a well-formed instance")
    }

    /// Recognize an instance of this family: a scaled-simplex feasible set
    /// whose cost has a single zero entry and a common positive level
    /// elsewhere. The cost pattern is what the family's lower bounds rely on.
    pub fn from_instance(inst: &LpInstance) -> Option<SimplexFamily> {
        let beta = inst.as_simplex()?;
        let cost = inst.cost();
        let alpha = cost.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if alpha <= 0.0 {
            return None;
        }
        let mut zeros = 0;
        for &c in cost {
            if c == 0.0 {
                zeros += 1;
            } else if (c - alpha).abs() > 1e-12 * alpha {
                return None;
            }
        }
        if zeros != 1 {
            return None;
        }
        SimplexFamily::new(cost.len(), alpha, beta).ok()
    }
}

/// An assignment problem `min <C, X>` over the Birkhoff polytope.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "AssignmentParams")]
pub struct AssignmentInstance {
    #[serde(rename = "C")]
    cost: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
struct AssignmentParams {
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
}

impl TryFrom<AssignmentParams> for AssignmentInstance {
    type Error = ModelError;
    fn try_from(p: AssignmentParams) -> Result<Self, ModelError> {
        AssignmentInstance::new(p.c)
    }
}

impl AssignmentInstance {
    pub fn new(cost: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = cost.len();
        if n == 0 || cost.iter().any(|row| row.len() != n) {
            return Err(ModelError::BadAssignmentMatrix);
        }
        if cost.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("assignment cost matrix"));
        }
        Ok(AssignmentInstance { cost })
    }

    pub fn size(&self) -> usize {
        self.cost.len()
    }

    pub fn cost(&self) -> &[Vec<f64>] {
        &self.cost
    }

    pub fn integral_cost(&self) -> bool {
        self.cost.iter().flatten().all(|v| v.fract() == 0.0)
    }

    /// Expand to standard form over the Birkhoff polytope: `n` row-sum
    /// constraints, then `n` column-sum constraints, variables row-major.
    pub fn to_instance(&self) -> LpInstance {
        let n = self.size();
        let mut a = vec![vec![0.0; n * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                a[i][i * n + j] = 1.0;
                a[n + j][i * n + j] = 1.0;
            }
        }
        let c: Vec<f64> = self.cost.iter().flatten().cloned().collect();
        LpInstance::new(a, vec![1.0; 2 * n], c, self.integral_cost())
            .expect("assignment expands to a well-formed instance")
    }

    /// Recover the assignment view of a standard-form instance whose
    /// constraints match the Birkhoff pattern.
    pub fn from_lp(inst: &LpInstance) -> Option<AssignmentInstance> {
        let n = inst.as_birkhoff()?;
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|i| inst.cost()[i * n..(i + 1) * n].to_vec())
            .collect();
        AssignmentInstance::new(cost).ok()
    }

    /// Exact optimum by brute force over all permutations. Only sensible for
    /// small `n` (n! work).
    pub fn brute_force_optimum(&self) -> (Vec<usize>, f64) {
        let n = self.size();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = perm.clone();
        let mut best_value = self.permutation_cost(&perm);
        while next_permutation(&mut perm) {
            let value = self.permutation_cost(&perm);
            if value < best_value {
                best_value = value;
                best = perm.clone();
            }
        }
        (best, best_value)
    }

    pub fn permutation_cost(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.cost[i][j]).sum()
    }
}

/// Instance file schema: either a raw `{A, b, c}` document or one of the
/// built-in constructors `{"simplex": {...}}` / `{"assignment": {"C": ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    Simplex { simplex: SimplexFamily },
    Assignment { assignment: AssignmentInstance },
    Raw(LpInstance),
}

impl InstanceSpec {
    pub fn build(&self) -> LpInstance {
        match self {
            InstanceSpec::Simplex { simplex } => simplex.to_instance(),
            InstanceSpec::Assignment { assignment } => assignment.to_instance(),
            InstanceSpec::Raw(inst) => inst.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// vertex enumeration
// ---------------------------------------------------------------------------

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Advance `subset` to the next k-combination of `0..n` in lexicographic
/// order; returns false after the last one.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Enumerate all vertices (basic feasible solutions) of the feasible set,
/// deduplicated within `tol` in max-norm and returned in lexicographic order.
/// Uses the default basis budget; see [`enumerate_vertices_with_budget`].
pub fn enumerate_vertices(inst: &LpInstance, tol: f64) -> Result<Vec<Vec<f64>>, ModelError> {
    enumerate_vertices_with_budget(inst, tol, DEFAULT_BASIS_BUDGET)
}

/// Vertex enumeration with an explicit cap on the number of basis subsets
/// `C(n, rank(A))` examined.
///
/// Instances matching the Birkhoff pattern skip basis enumeration: by the
/// Birkhoff-von Neumann theorem their vertices are exactly the permutation
/// matrices, which is far cheaper to walk directly. Tests cross-check the
/// two paths on small sizes.
pub fn enumerate_vertices_with_budget(
    inst: &LpInstance,
    tol: f64,
    budget: u128,
) -> Result<Vec<Vec<f64>>, ModelError> {
    if let Some(k) = inst.as_birkhoff() {
        if k <= 8 {
            return Ok(birkhoff_vertices(k));
        }
    }
    enumerate_vertices_by_bases(inst, tol, budget)
}

/// All permutation matrices of side `k`, flattened row-major, in the
/// canonical lexicographic vector order.
fn birkhoff_vertices(k: usize) -> Vec<Vec<f64>> {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut vertices = Vec::new();
    loop {
        let mut vertex = vec![0.0; k * k];
        for (i, &j) in perm.iter().enumerate() {
            vertex[i * k + j] = 1.0;
        }
        vertices.push(vertex);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    vertices.sort_by(|a, b| a.partial_cmp(b).expect("vertices are finite"));
    vertices
}

/// The generic basis-subset oracle behind [`enumerate_vertices`].
fn enumerate_vertices_by_bases(
    inst: &LpInstance,
    tol: f64,
    budget: u128,
) -> Result<Vec<Vec<f64>>, ModelError> {
    let n = inst.num_vars();
    let rank = inst.matrix.rank();
    if rank == 0 {
        // A = 0: feasible iff b = 0, and then the origin is the only vertex.
        if linalg::inf_norm(inst.rhs()) > tol {
            return Err(ModelError::Infeasible);
        }
        return Ok(vec![vec![0.0; n]]);
    }
    let bases = binomial(n, rank);
    if bases > budget {
        return Err(ModelError::BudgetExceeded { bases, budget });
    }

    let consistency_tol = tol * (1.0 + linalg::inf_norm(inst.rhs()));
    // Parallelize over the first basis column; each worker walks the
    // lexicographic combinations sharing that lead and dedups locally.
    let buckets: Vec<HashMap<Vec<i64>, Vec<f64>>> = (0..=(n - rank))
        .into_par_iter()
        .map(|lead| {
            let mut found: HashMap<Vec<i64>, Vec<f64>> = HashMap::new();
            let mut subset: Vec<usize> =
                std::iter::once(lead).chain(lead + 1..lead + rank).collect();
            loop {
                let basis = inst.columns(&subset);
                if let BasisSolve::Solution(xb) =
                    linalg::solve_basis_system(&basis, inst.rhs(), consistency_tol)
                {
                    if xb.iter().all(|&v| v >= -tol) {
                        let mut vertex = vec![0.0; n];
                        for (k, &col) in subset.iter().enumerate() {
                            vertex[col] = if xb[k] <= 0.0 { 0.0 } else { xb[k] };
                        }
                        let key: Vec<i64> =
                            vertex.iter().map(|&v| (v / tol).round() as i64).collect();
                        found.entry(key).or_insert(vertex);
                    }
                }
                // lexicographic successors of [lead+1, ..] never revisit
                // columns at or below the lead, so this walks exactly the
                // subsets owned by this worker
                if rank == 1 || !next_combination(&mut subset[1..], n) {
                    break;
                }
            }
            found
        })
        .collect();

    let mut candidates: Vec<Vec<f64>> =
        buckets.into_iter().flat_map(HashMap::into_values).collect();
    if candidates.is_empty() {
        return Err(ModelError::Infeasible);
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("vertices are finite"));

    // Quantized keys can split points straddling a bucket boundary; merge any
    // survivors that are still within tol of an already kept vertex.
    let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(candidates.len());
    'outer: for cand in candidates {
        for kept in vertices.iter().rev() {
            if cand[0] - kept[0] > 2.0 * tol {
                break;
            }
            if linalg::inf_norm_diff(&cand, kept) <= tol {
                continue 'outer;
            }
        }
        vertices.push(cand);
    }
    Ok(vertices)
}

// ---------------------------------------------------------------------------
// polytope profile
// ---------------------------------------------------------------------------

/// Exact structural profile of a bounded feasible polytope: its vertices, the
/// optimal/suboptimal split, and the three quantities driving the convergence
/// bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeProfile {
    pub vertices: Vec<Vec<f64>>,
    pub vertex_objectives: Vec<f64>,
    pub optimal_value: f64,
    pub optimal_vertices: Vec<usize>,
    pub suboptimal_vertices: Vec<usize>,
    /// Suboptimality gap: smallest objective excess of a strictly suboptimal
    /// vertex.
    pub gap: f64,
    /// Largest l1 norm over the polytope.
    pub l1_radius: f64,
    /// Largest entropy difference between two feasible points.
    pub entropic_radius: f64,
    pub max_entropy_point: Vec<f64>,
}

impl PolytopeProfile {
    /// Threshold `(R1 + RH) / gap` above which the fast rate applies.
    pub fn fast_threshold(&self) -> f64 {
        (self.l1_radius + self.entropic_radius) / self.gap
    }
}

/// Profile an instance. The max-entropy point (needed for the entropic
/// radius) is produced by `max_entropy_solver`, typically a penalized solve
/// with zero cost; injecting it keeps this module independent of any solver.
pub fn profile<F>(inst: &LpInstance, max_entropy_solver: F) -> Result<PolytopeProfile, ModelError>
where
    F: FnOnce(&LpInstance) -> Result<Vec<f64>, String>,
{
    let vertices = enumerate_vertices(inst, VERTEX_DEDUP_TOL)?;
    inst.check_bounded(&vertices)?;

    let vertex_objectives: Vec<f64> = vertices.iter().map(|v| inst.objective(v)).collect();
    let optimal_value = vertex_objectives
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let mut optimal_vertices = Vec::new();
    let mut suboptimal_vertices = Vec::new();
    for (i, &val) in vertex_objectives.iter().enumerate() {
        if val - optimal_value <= OPT_CLASS_TOL {
            optimal_vertices.push(i);
        } else {
            suboptimal_vertices.push(i);
        }
    }
    if suboptimal_vertices.is_empty() {
        return Err(ModelError::ConstantObjective);
    }
    let gap = suboptimal_vertices
        .iter()
        .map(|&i| vertex_objectives[i] - optimal_value)
        .fold(f64::INFINITY, f64::min);

    // x >= 0 on the feasible set, so the l1 norm is linear and maximized at a
    // vertex.
    let l1_radius = vertices
        .iter()
        .map(|v| v.iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);

    let max_entropy_point = max_entropy_solver(inst).map_err(ModelError::MaxEntropySolve)?;
    let max_entropy = entropy_unchecked(&max_entropy_point);
    let min_vertex_entropy = vertices
        .iter()
        .map(|v| entropy_unchecked(v))
        .fold(f64::INFINITY, f64::min);
    let entropic_radius = (max_entropy - min_vertex_entropy).max(0.0);

    Ok(PolytopeProfile {
        vertices,
        vertex_objectives,
        optimal_value,
        optimal_vertices,
        suboptimal_vertices,
        gap,
        l1_radius,
        entropic_radius,
        max_entropy_point,
    })
}

/// Result of relaxing the suboptimality gap by a tolerance `tau`.
#[derive(Debug, Clone, Serialize)]
pub struct TauGap {
    pub tau: f64,
    /// Gap between the tau-optimal vertices and the rest;
    /// `f64::INFINITY` when every vertex is tau-optimal.
    pub delta_tau: f64,
    /// Indices of vertices within `tau` of the optimal value.
    pub tolerant_set: Vec<usize>,
}

/// Relaxed suboptimality gap: vertices within `tau` of the optimum count as
/// optimal, and the gap is measured from that enlarged set to the rest.
pub fn tau_gap(profile: &PolytopeProfile, tau: f64) -> TauGap {
    assert!(tau > 0.0, "tau must be positive");
    let mut tolerant_set = Vec::new();
    let mut best_outside = f64::INFINITY;
    let mut worst_inside = f64::NEG_INFINITY;
    for (i, &val) in profile.vertex_objectives.iter().enumerate() {
        if val - profile.optimal_value <= tau {
            tolerant_set.push(i);
            worst_inside = worst_inside.max(val);
        } else {
            best_outside = best_outside.min(val);
        }
    }
    let delta_tau = if best_outside.is_finite() {
        best_outside - worst_inside
    } else {
        f64::INFINITY
    };
    TauGap {
        tau,
        delta_tau,
        tolerant_set,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn segment_instance() -> LpInstance {
        LpInstance::new(vec![vec![1.0, 1.0]], vec![1.0], vec![0.0, 1.0], false).unwrap()
    }

    #[test]
    fn entropy_point_mass_is_zero() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_uniform_is_log_d() {
        let h = entropy(&[0.25, 0.25, 0.25, 0.25]).unwrap();
        assert!((h - 4.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn entropy_hand_computed_value() {
        // (2/3) log(3/2) + (1/3) log 3
        let h = entropy(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((h - 0.6365141682948128).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_bad_input() {
        assert!(entropy(&[0.5, -0.1]).is_err());
        assert!(entropy(&[f64::NAN]).is_err());
        assert!(entropy(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn binary_entropy_boundary_and_symmetry() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let half = binary_entropy(0.5).unwrap();
        assert!((half - 2.0_f64.ln()).abs() < 1e-15);
        let h = binary_entropy(0.1).unwrap();
        assert!((h - 0.3250829733914483).abs() < 1e-15);
        assert!(binary_entropy(1.2).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn simplex_vertices_are_scaled_unit_points() {
        let fam = SimplexFamily::new(3, 1.0, 2.0).unwrap();
        let vertices = enumerate_vertices(&fam.to_instance(), VERTEX_DEDUP_TOL).unwrap();
        assert_eq!(vertices.len(), 3);
        for v in &vertices {
            assert!((v.iter().sum::<f64>() - 2.0).abs() < 1e-12);
            assert_eq!(v.iter().filter(|&&x| x > 1e-9).count(), 1);
        }
    }

    #[test]
    fn segment_vertices_are_endpoints() {
        let vertices = enumerate_vertices(&segment_instance(), VERTEX_DEDUP_TOL).unwrap();
        assert_eq!(vertices, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn birkhoff_vertices_are_permutation_matrices() {
        let cost = vec![
            vec![0.3, 1.0, 2.0],
            vec![1.5, 0.2, 0.7],
            vec![0.9, 0.4, 1.1],
        ];
        let inst = AssignmentInstance::new(cost).unwrap().to_instance();
        let vertices = enumerate_vertices(&inst, VERTEX_DEDUP_TOL).unwrap();
        assert_eq!(vertices.len(), 6);
        for v in &vertices {
            for &x in v {
                assert!(x.abs() < 1e-9 || (x - 1.0).abs() < 1e-9);
            }
            assert!((v.iter().sum::<f64>() - 3.0).abs() < 1e-9);
        }

        // the generic basis oracle agrees with the permutation shortcut
        let by_bases =
            enumerate_vertices_by_bases(&inst, VERTEX_DEDUP_TOL, DEFAULT_BASIS_BUDGET).unwrap();
        assert_eq!(by_bases.len(), vertices.len());
        for (a, b) in by_bases.iter().zip(&vertices) {
            assert!(linalg::inf_norm_diff(a, b) <= VERTEX_DEDUP_TOL);
        }
    }

    #[test]
    fn infeasible_instance_is_detected() {
        // x1 + x2 = -1 has no nonnegative solution
        let inst =
            LpInstance::new(vec![vec![1.0, 1.0]], vec![-1.0], vec![1.0, 0.0], false).unwrap();
        assert!(matches!(
            enumerate_vertices(&inst, VERTEX_DEDUP_TOL),
            Err(ModelError::Infeasible)
        ));
    }

    #[test]
    fn unbounded_instance_is_rejected() {
        // x1 - x2 = 1 is feasible but unbounded along (1, 1)
        let inst =
            LpInstance::new(vec![vec![1.0, -1.0]], vec![1.0], vec![1.0, 0.0], false).unwrap();
        assert!(matches!(inst.validate(), Err(ModelError::Unbounded)));
    }

    #[test]
    fn zero_column_means_unbounded() {
        let inst = LpInstance::new(
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            false,
        )
        .unwrap();
        assert!(matches!(inst.validate(), Err(ModelError::Unbounded)));
    }

    #[test]
    fn budget_rejects_oversized_enumeration() {
        let fam = SimplexFamily::new(40, 1.0, 1.0).unwrap();
        let err =
            enumerate_vertices_with_budget(&fam.to_instance(), VERTEX_DEDUP_TOL, 10).unwrap_err();
        assert!(matches!(err, ModelError::BudgetExceeded { bases: 40, .. }));
    }

    fn uniform_max_entropy(inst: &LpInstance) -> Result<Vec<f64>, String> {
        // test stub: exact for simplex-like sets; tests that need the real
        // solver live at the crate level
        let beta = inst.as_simplex().ok_or("not a simplex")?;
        let d = inst.num_vars();
        Ok(vec![beta / d as f64; d])
    }

    #[test]
    fn profile_matches_simplex_closed_forms() {
        let fam = SimplexFamily::new(5, 0.7, 2.0).unwrap();
        let prof = profile(&fam.to_instance(), uniform_max_entropy).unwrap();
        assert!((prof.gap - 0.7 * 2.0).abs() < 1e-12);
        assert!((prof.l1_radius - 2.0).abs() < 1e-12);
        assert!((prof.entropic_radius - 2.0 * 5.0_f64.ln()).abs() < 1e-12);
        assert_eq!(prof.optimal_vertices.len(), 1);
        assert_eq!(prof.suboptimal_vertices.len(), 4);
        assert_eq!(prof.fast_threshold(), (2.0 + 2.0 * 5.0_f64.ln()) / 1.4);
    }

    #[test]
    fn profile_rejects_constant_objective() {
        let inst = LpInstance::new(vec![vec![1.0; 3]], vec![1.0], vec![2.0; 3], false).unwrap();
        assert!(matches!(
            profile(&inst, uniform_max_entropy),
            Err(ModelError::ConstantObjective)
        ));
    }

    #[test]
    fn tau_gap_on_three_level_objective() {
        // simplex with vertex objective values {0, 0.01, 1}
        let inst =
            LpInstance::new(vec![vec![1.0; 3]], vec![1.0], vec![0.0, 0.01, 1.0], false).unwrap();
        let prof = profile(&inst, uniform_max_entropy).unwrap();
        let relaxed = tau_gap(&prof, 0.05);
        assert_eq!(relaxed.tolerant_set.len(), 2);
        assert!((relaxed.delta_tau - 0.99).abs() < 1e-12);

        // tau below the gap keeps the optimal set and cannot shrink the gap
        let tight = tau_gap(&prof, 0.005);
        assert_eq!(tight.tolerant_set, prof.optimal_vertices);
        assert!(tight.delta_tau >= prof.gap);

        // tau above the spread swallows every vertex
        let all = tau_gap(&prof, 2.0);
        assert_eq!(all.tolerant_set.len(), 3);
        assert!(all.delta_tau.is_infinite());
    }

    #[test]
    fn instance_spec_parses_all_three_forms() {
        let raw: InstanceSpec = serde_json::from_str(
            r#"{"A": [[1.0, 1.0]], "b": [1.0], "c": [0.0, 1.0], "integral_cost": true}"#,
        )
        .unwrap();
        let inst = raw.build();
        assert_eq!(inst.num_vars(), 2);
        assert!(inst.integral_cost());

        let simplex: InstanceSpec =
            serde_json::from_str(r#"{"simplex": {"d": 4, "alpha": 1.0, "beta": 2.0}}"#).unwrap();
        assert_eq!(simplex.build().num_vars(), 4);

        let assignment: InstanceSpec =
            serde_json::from_str(r#"{"assignment": {"C": [[0.0, 1.0], [1.0, 0.0]]}}"#).unwrap();
        let inst = assignment.build();
        assert_eq!(inst.num_vars(), 4);
        assert_eq!(inst.as_birkhoff(), Some(2));
    }

    #[test]
    fn instance_spec_rejects_invalid_documents() {
        assert!(serde_json::from_str::<InstanceSpec>(
            r#"{"simplex": {"d": 1, "alpha": 1.0, "beta": 1.0}}"#
        )
        .is_err());
        assert!(
            serde_json::from_str::<InstanceSpec>(r#"{"A": [[1.0]], "b": [], "c": [1.0]}"#).is_err()
        );
    }

    #[test]
    fn simplex_detection() {
        let fam = SimplexFamily::new(4, 1.0, 3.0).unwrap();
        assert_eq!(fam.to_instance().as_simplex(), Some(3.0));
        // scaled row: 2 x1 + 2 x2 = 4 is the simplex sum x = 2
        let scaled =
            LpInstance::new(vec![vec![2.0, 2.0]], vec![4.0], vec![0.0, 1.0], false).unwrap();
        assert_eq!(scaled.as_simplex(), Some(2.0));
        assert!(segment_instance().as_birkhoff().is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        // entropy is weakly convex up to the binary-entropy correction term
        #[test]
        fn weak_convexity_surrogate(
            x in proptest::collection::vec(0.0..3.0f64, 1..8),
            mut y in proptest::collection::vec(0.0..3.0f64, 1..8),
            lambda in 0.0..=1.0f64,
        ) {
            y.resize(x.len(), 0.0);
            let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            let r = x.iter().sum::<f64>().max(y.iter().sum::<f64>());
            let lhs = entropy_unchecked(&mix);
            let rhs = lambda * entropy_unchecked(&x)
                + (1.0 - lambda) * entropy_unchecked(&y)
                + r * binary_entropy_unchecked(lambda);
            prop_assert!(lhs <= rhs + 1e-12, "lhs {} rhs {}", lhs, rhs);
        }

        // alpha*h(lambda) + beta*lambda is nondecreasing on [0, beta/(alpha+beta)]
        #[test]
        fn entropy_line_is_monotone(alpha in 1e-3..10.0f64, beta in 1e-3..10.0f64) {
            let upper = beta / (alpha + beta);
            let f = |l: f64| alpha * binary_entropy_unchecked(l) + beta * l;
            let mut prev = f(0.0);
            for k in 1..=400 {
                let l = upper * k as f64 / 400.0;
                let cur = f(l);
                prop_assert!(cur >= prev - 1e-12, "dip at lambda={}", l);
                prev = cur;
            }
        }

        // h(rho)/rho <= log(1/rho) + 1 on (0, 1]
        #[test]
        fn binary_entropy_ratio_bound(rho in 1e-12..=1.0f64) {
            let lhs = binary_entropy_unchecked(rho) / rho;
            let rhs = (1.0 / rho).ln() + 1.0;
            prop_assert!(lhs <= rhs + 1e-12);
        }

        // every enumerated vertex is feasible, and no vertex is the midpoint
        // of two others (extreme-point soundness)
        #[test]
        fn vertex_oracle_soundness(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = rng.random_range(1..=3usize);
            let n = rng.random_range(m + 1..=6usize);
            let mut a = vec![vec![1.0; n]];
            for _ in 1..m {
                a.push((0..n).map(|_| rng.random_range(0.0..2.0)).collect());
            }
            let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.2)).collect();
            let b: Vec<f64> = a.iter().map(|row| row.iter().zip(&x0).map(|(r, x)| r * x).sum()).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let inst = LpInstance::new(a, b, c, false).unwrap();
            let vertices = enumerate_vertices(&inst, VERTEX_DEDUP_TOL).unwrap();
            prop_assert!(!vertices.is_empty());
            for v in &vertices {
                prop_assert!(v.iter().all(|&x| x >= 0.0));
                prop_assert!(inst.feasibility_residual(v) <= 1e-7);
            }
            for (i, v) in vertices.iter().enumerate() {
                for (j, u) in vertices.iter().enumerate() {
                    for (k, w) in vertices.iter().enumerate().skip(j + 1) {
                        if i == j || i == k { continue; }
                        let mid: Vec<f64> = u.iter().zip(w).map(|(a, b)| 0.5 * (a + b)).collect();
                        let coincides = linalg::inf_norm_diff(v, &mid) <= VERTEX_DEDUP_TOL;
                        prop_assert!(!coincides, "vertex {} is a midpoint of {} and {}", i, j, k);
                    }
                }
            }
        }
    }
}
