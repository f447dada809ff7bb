//! Dense linear-algebra helpers shared by the oracles, problems and solver.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};

pub type DenseVector = DVector<f64>;
pub type DenseMatrix = DMatrix<f64>;

/// Iteration cap for [`spectral_norm`].
pub const POWER_ITERATION_CAP: usize = 10_000;

/// `(Σ|v_i|^p)^{1/p}`, or `max |v_i|` for `p = ∞`.
///
/// Entries are rescaled by the largest magnitude before exponentiation so
/// that large `p` does not overflow.
pub fn lp_norm(v: &DenseVector, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return domain(format!("lp_norm requires p >= 1, got {p}"));
    }
    let scale = v.amax();
    if scale == 0.0 {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(scale);
    }
    if p == 1.0 {
        return Ok(v.iter().map(|x| x.abs()).sum());
    }
    if p == 2.0 {
        return Ok(v.norm());
    }
    let sum: f64 = v.iter().map(|x| (x.abs() / scale).powf(p)).sum();
    Ok(scale * sum.powf(1.0 / p))
}

/// Largest singular value of `a` by power iteration on `AᵀA`.
///
/// The start vector is drawn from a ChaCha stream seeded with `seed`. The
/// loop stops once the Rayleigh residual `‖AᵀAv − μv‖` drops below
/// `rel_tol · μ`.
pub fn spectral_norm(a: &DenseMatrix, rel_tol: f64, seed: u64) -> Result<f64> {
    if !(rel_tol > 0.0) {
        return domain("spectral_norm requires rel_tol > 0");
    }
    if a.ncols() == 0 || a.nrows() == 0 || a.amax() == 0.0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DenseVector::from_fn(a.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let nv = v.norm();
    if nv == 0.0 {
        v.fill(1.0);
    }
    v /= v.norm();

    let mut av = DenseVector::zeros(a.nrows());
    let mut w = DenseVector::zeros(a.ncols());
    for _ in 0..POWER_ITERATION_CAP {
        av.gemv(1.0, a, &v, 0.0);
        w.gemv_tr(1.0, a, &av, 0.0);
        let mu = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            // v landed in the null space; A ≠ 0 so restart along e_1 is safe.
            v.fill(0.0);
            v[0] = 1.0;
            continue;
        }
        let residual = (&w - &v * mu).norm();
        v.copy_from(&w);
        v /= wn;
        if residual <= rel_tol * mu {
            av.gemv(1.0, a, &v, 0.0);
            return Ok(av.norm());
        }
    }
    Err(Error::NoConvergence { iterations: POWER_ITERATION_CAP })
}

/// Euclidean projection onto the probability simplex `{v ≥ 0, Σv = 1}`.
pub fn project_simplex(y: &DenseVector) -> Result<DenseVector> {
    let n = y.len();
    if n == 0 {
        return domain("cannot project an empty vector onto the simplex");
    }
    let mut sorted: Vec<f64> = y.iter().copied().collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    Ok(y.map(|yi| (yi - theta).max(0.0)))
}

/// `(1 − τ)·x + τ·v`.
pub fn convex_combination(x: &DenseVector, v: &DenseVector, tau: f64) -> DenseVector {
    x.zip_map(v, |a, b| (1.0 - tau) * a + tau * b)
}

pub fn is_finite(v: &DenseVector) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// A `rows × cols` matrix (`rows ≥ cols`) with orthonormal columns.
///
/// Built from the QR factorization of a standard-normal matrix with the
/// columns of `Q` sign-corrected by `sign(R_ii)`, which makes the result
/// Haar distributed.
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    assert!(rows >= cols, "random_orthonormal needs rows >= cols");
    let g = DenseMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
