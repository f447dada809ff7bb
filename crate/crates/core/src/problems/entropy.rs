use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dirichlet, holder_constant_lp, CompositeProblem, LpResidual, ProblemConstants};
use crate::error::{domain, Result};
use crate::numerics::{random_orthonormal, DenseMatrix, DenseVector};
use crate::oracles::{entropy, lmo_entropy_simplex, LmoResult, SIMPLEX_TOL};

/// `min 1/p ‖Ax − b‖_p^p + λ Σ x_i log x_i` over the simplex.
///
/// `A = V D Uᵀ` is `m × n` with `D` uniform on `[0, 100]`; `b` is uniform on
/// `[0, 1]`.
#[derive(Debug, Clone)]
pub struct EntropyInstance {
    pub residual: LpResidual,
    pub lambda: f64,
    pub seed: u64,
    pub singular_values: DenseVector,
    pub norm_a: f64,
}

impl EntropyInstance {
    pub fn generate(m: usize, n: usize, p: f64, lambda: f64, seed: u64) -> Result<Self> {
        if m == 0 || m > n {
            return domain(format!("entropy instances need 1 <= m <= n, got m={m}, n={n}"));
        }
        if !(p > 1.0 && p <= 2.0) {
            return domain(format!("p must lie in (1, 2], got {p}"));
        }
        if !(lambda > 0.0) {
            return domain(format!("lambda must be positive, got {lambda}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_orthonormal(n, m, &mut rng);
        let v = random_orthonormal(m, m, &mut rng);
        let singular_values = DenseVector::from_fn(m, |_, _| rng.random_range(0.0..=100.0));
        let b = DenseVector::from_fn(m, |_, _| rng.random_range(0.0..=1.0));

        let mut vd = v;
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= singular_values[j];
        }
        let mut a = DenseMatrix::zeros(m, n);
        a.gemm(1.0, &vd, &u.transpose(), 0.0);
        let norm_a = singular_values.max();

        Ok(Self { residual: LpResidual { a, b, p }, lambda, seed, singular_values, norm_a })
    }

    pub fn p(&self) -> f64 {
        self.residual.p
    }

    /// Hölder modulus of `∇f` from the ℓp-residual bound with `m` rows.
    pub fn holder_constant(&self) -> f64 {
        holder_constant_lp(self.p(), self.residual.a.nrows(), self.norm_a).expect("p validated at generation")
    }
}

impl CompositeProblem for EntropyInstance {
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
        let nonneg = x.iter().all(|&xi| xi >= 0.0);
        if nonneg && (x.sum() - 1.0).abs() <= SIMPLEX_TOL {
            entropy(x, self.lambda)
        } else {
            f64::INFINITY
        }
    }

    fn lmo(&self, grad: &DenseVector) -> Result<LmoResult> {
        lmo_entropy_simplex(grad, self.lambda)
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            nu: Some(self.p() - 1.0),
            m_nu: Some(self.holder_constant()),
            kappa: Some(self.lambda),
            rho: Some(2.0),
            d_g: Some(2f64.sqrt()),
        }
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn initial_point(&self) -> DenseVector {
        let n = self.dim();
        DenseVector::from_element(n, 1.0 / n as f64)
    }

    /// Dirichlet(1) draws, i.e. uniform on the simplex.
    fn sample_feasible(&self, rng: &mut ChaCha8Rng) -> DenseVector {
        dirichlet(rng, self.dim(), 1.0)
    }
}
