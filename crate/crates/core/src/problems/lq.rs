use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    generalized_gaussian, holder_constant_lp, lq_ball_diameter, CompositeProblem, LpResidual, ProblemConstants,
};
use crate::error::{domain, Result};
use crate::numerics::{lp_norm, random_orthonormal, DenseMatrix, DenseVector};
use crate::oracles::{lmo_lq_ball, LmoResult, BALL_TOL};

/// `min 1/p ‖Ax − b‖_p^p` subject to `‖x‖_q ≤ 1`.
///
/// `A = U D Uᵀ` with `U` Haar-orthogonal and `D` uniform on `[1, 100]`, and
/// `b = A x̄` for `x̄` uniform on the sphere `‖x‖_q = 10`.
#[derive(Debug, Clone)]
pub struct LpLqInstance {
    pub residual: LpResidual,
    pub q: f64,
    pub seed: u64,
    /// Diagonal of `D`; `A`'s eigenvalues.
    pub eigenvalues: DenseVector,
    pub x_bar: DenseVector,
    /// `‖A‖₂`, known exactly from the construction.
    pub norm_a: f64,
}

impl LpLqInstance {
    pub fn generate(n: usize, q: f64, p: f64, seed: u64) -> Result<Self> {
        if n < 2 {
            return domain("lq-ball instances need n >= 2");
        }
        if !(q > 1.0) || !q.is_finite() {
            return domain(format!("q must be a finite value > 1, got {q}"));
        }
        if !(p > 1.0 && p <= 2.0) {
            return domain(format!("p must lie in (1, 2], got {p}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_orthonormal(n, n, &mut rng);
        let eigenvalues = DenseVector::from_fn(n, |_, _| rng.random_range(1.0..=100.0));

        let mut ud = u.clone();
        for (j, mut col) in ud.column_iter_mut().enumerate() {
            col *= eigenvalues[j];
        }
        let mut a = DenseMatrix::zeros(n, n);
        a.gemm(1.0, &ud, &u.transpose(), 0.0);
        let a = (&a + a.transpose()) * 0.5;

        let direction = DenseVector::from_fn(n, |_, _| generalized_gaussian(&mut rng, q));
        let x_bar = &direction * (10.0 / lp_norm(&direction, q)?);
        let b = &a * &x_bar;
        let norm_a = eigenvalues.max();

        Ok(Self { residual: LpResidual { a, b, p }, q, seed, eigenvalues, x_bar, norm_a })
    }

    pub fn p(&self) -> f64 {
        self.residual.p
    }

    pub fn holder_constant(&self) -> f64 {
        holder_constant_lp(self.p(), self.residual.a.nrows(), self.norm_a).expect("p validated at generation")
    }
}

impl CompositeProblem for LpLqInstance {
    fn dim(&self) -> usize {
        self.residual.a.ncols()
    }

    fn f_value(&self, x: &DenseVector) -> f64 {
        self.residual.value(x)
    }

    fn f_grad(&self, x: &DenseVector) -> DenseVector {
        self.residual.grad(x)
    }

    fn f_value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        self.residual.value_grad(x)
    }

    fn g_value(&self, x: &DenseVector) -> f64 {
        match lp_norm(x, self.q) {
            Ok(norm) if norm <= 1.0 + BALL_TOL => 0.0,
            _ => f64::INFINITY,
        }
    }

    fn lmo(&self, grad: &DenseVector) -> Result<LmoResult> {
        lmo_lq_ball(grad, self.q)
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            nu: Some(self.p() - 1.0),
            m_nu: Some(self.holder_constant()),
            kappa: None,
            rho: None,
            d_g: Some(lq_ball_diameter(self.dim(), self.q)),
        }
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn initial_point(&self) -> DenseVector {
        DenseVector::zeros(self.dim())
    }

    /// Uniform direction on the q-sphere scaled by a uniform radius.
    fn sample_feasible(&self, rng: &mut ChaCha8Rng) -> DenseVector {
        let d = DenseVector::from_fn(self.dim(), |_, _| generalized_gaussian(rng, self.q));
        let radius: f64 = rng.random();
        let norm = lp_norm(&d, self.q).unwrap_or(1.0);
        d * (radius / norm)
    }
}
