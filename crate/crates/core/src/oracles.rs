//! Linear-minimization oracles and the Frank-Wolfe gap.
//!
//! Every oracle solves `min_v ⟨u, v⟩ + g(v)` in closed form for one of the
//! regularizer/constraint structures shipped with the crate.

use crate::error::{domain, Error, Result};
use crate::numerics::{is_finite, lp_norm, project_simplex, DenseMatrix, DenseVector};

/// Minimizer of the linearized subproblem together with `g` at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct LmoResult {
    pub v: DenseVector,
    pub g_of_v: f64,
    /// Set when every feasible point is optimal (zero linear term on a set
    /// constraint) and the oracle picked one by convention.
    pub degenerate: bool,
}

/// Matrix-valued oracle output used by the factorization blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixLmoResult {
    pub v: DenseMatrix,
    pub g_of_v: f64,
}

/// Feasibility slack used for the ℓq ball constraint.
pub const BALL_TOL: f64 = 1e-10;
/// Feasibility slack used for simplex constraints.
pub const SIMPLEX_TOL: f64 = 1e-10;
/// Feasibility slack used for box constraints.
pub const BOX_TOL: f64 = 1e-12;

/// Minimizer of `⟨u, x⟩` over the unit ℓq ball, `q > 1`.
///
/// The published closed form reads
/// `x_i = −‖u‖_q^{−1/(q−1)} sign(u_i)|u_i|^{1/(q−1)}`; that normalizer only
/// lands on the sphere when `q = 2`. The optimality conditions give the dual
/// norm `‖u‖_{q'}` (`1/q + 1/q' = 1`) instead, which is what is used here, so
/// `‖x‖_q = 1` and `⟨u, x⟩ = −‖u‖_{q'}`.
///
/// `u = 0` returns the origin with `degenerate` set.
pub fn lmo_lq_ball(u: &DenseVector, q: f64) -> Result<LmoResult> {
    if !(q > 1.0) || !q.is_finite() {
        return domain(format!("lq ball oracle requires finite q > 1, got {q}"));
    }
    if !is_finite(u) {
        return domain("non-finite linear term");
    }
    let scale = u.amax();
    if scale == 0.0 {
        return Ok(LmoResult { v: DenseVector::zeros(u.len()), g_of_v: 0.0, degenerate: true });
    }
    let power = 1.0 / (q - 1.0);
    // |u_i/scale|^{1/(q−1)} stays in [0, 1], then normalize in the q-norm.
    let mut v = u.map(|ui| -ui.signum() * (ui.abs() / scale).powf(power));
    let norm = lp_norm(&v, q)?;
    v /= norm;
    Ok(LmoResult { v, g_of_v: 0.0, degenerate: false })
}

/// `λ Σ x_i log x_i` with `0 log 0 = 0`.
pub fn entropy(x: &DenseVector, lambda: f64) -> f64 {
    lambda * x.iter().map(|&xi| if xi > 0.0 { xi * xi.ln() } else { 0.0 }).sum::<f64>()
}

/// Minimizer of `⟨u, x⟩ + λ Σ x_i log x_i` over the simplex: a softmax of
/// `−u/λ`, evaluated after subtracting the largest exponent.
pub fn lmo_entropy_simplex(u: &DenseVector, lambda: f64) -> Result<LmoResult> {
    if !(lambda > 0.0) {
        return domain(format!("entropy oracle requires lambda > 0, got {lambda}"));
    }
    if u.is_empty() || !is_finite(u) {
        return domain("entropy oracle needs a finite, non-empty linear term");
    }
    let shift = u.iter().map(|&ui| -ui / lambda).fold(f64::NEG_INFINITY, f64::max);
    let mut v = u.map(|ui| (-ui / lambda - shift).exp());
    let total = v.sum();
    v /= total;
    let g_of_v = entropy(&v, lambda);
    Ok(LmoResult { v, g_of_v, degenerate: false })
}

/// Minimizer of `⟨G, U⟩ + λ‖U‖_F²` over the box `0 ≤ U ≤ α`. The problem
/// separates per entry: `U_ij = clamp(−G_ij/(2λ), 0, α)`.
pub fn lmo_box_quadratic(g: &DenseMatrix, lambda: f64, alpha: f64) -> Result<MatrixLmoResult> {
    if !(lambda > 0.0) || !(alpha > 0.0) {
        return domain("box oracle requires lambda > 0 and alpha > 0");
    }
    let v = g.map(|gij| (-gij / (2.0 * lambda)).clamp(0.0, alpha));
    let g_of_v = lambda * v.norm_squared();
    Ok(MatrixLmoResult { v, g_of_v })
}

/// Minimizer of `⟨G, V⟩ + λ‖V‖_F²` over matrices whose columns lie in the
/// simplex. Column `j` is the projection of `−G_{:,j}/(2λ)` onto the simplex.
pub fn lmo_simplex_quadratic(g: &DenseMatrix, lambda: f64) -> Result<MatrixLmoResult> {
    if !(lambda > 0.0) {
        return domain("simplex oracle requires lambda > 0");
    }
    let mut v = DenseMatrix::zeros(g.nrows(), g.ncols());
    for (j, col) in g.column_iter().enumerate() {
        let target = col.map(|x| -x / (2.0 * lambda)).into_owned();
        v.set_column(j, &project_simplex(&target)?);
    }
    let g_of_v = lambda * v.norm_squared();
    Ok(MatrixLmoResult { v, g_of_v })
}

/// Relative rounding allowance for [`fw_gap`].
pub const GAP_ROUNDING_TOL: f64 = 1e-12;

/// Frank-Wolfe gap `⟨grad, x − v⟩ + g(x) − g(v)`.
///
/// Small negative values produced by rounding (within `1e-12` of the
/// magnitude of the summed terms) are clamped to zero; anything more
/// negative means `v` was not a minimizer and is reported as an error.
pub fn fw_gap(grad: &DenseVector, x: &DenseVector, v: &DenseVector, g_of_x: f64, g_of_v: f64) -> Result<f64> {
    if grad.len() != x.len() || x.len() != v.len() {
        return Err(Error::Shape(format!("fw_gap: grad {}, x {}, v {}", grad.len(), x.len(), v.len())));
    }
    let gx = grad.dot(x);
    let gv = grad.dot(v);
    let gap = (gx - gv) + (g_of_x - g_of_v);
    if !gap.is_finite() {
        return Err(Error::OracleViolation(format!("non-finite gap {gap}")));
    }
    if gap >= 0.0 {
        return Ok(gap);
    }
    let scale = gx.abs() + gv.abs() + g_of_x.abs() + g_of_v.abs();
    if gap >= -GAP_ROUNDING_TOL * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::OracleViolation(format!("negative Frank-Wolfe gap {gap:e}")))
    }
}
