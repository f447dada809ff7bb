//! Problem families: an ℓp residual over the unit ℓq ball, an
//! entropy-regularized ℓp residual over the simplex, and simplex-constrained
//! nonnegative matrix factorization.

mod entropy;
mod lq;
mod nmf;

pub use entropy::EntropyInstance;
pub use lq::LpLqInstance;
pub use nmf::{nmf_value_and_grads, FactorLaw, NmfInstance};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{DenseMatrix, DenseVector};
use crate::oracles::LmoResult;

/// Constants certified for a problem instance. Absent fields are unknown.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Hölder exponent of ∇f, in (0, 1].
    pub nu: Option<f64>,
    /// Hölder modulus of ∇f with respect to the Euclidean norm.
    pub m_nu: Option<f64>,
    /// Uniform-convexity modulus of the linearized subproblem.
    pub kappa: Option<f64>,
    /// Uniform-convexity exponent, ≥ 2.
    pub rho: Option<f64>,
    /// Euclidean diameter of dom g.
    pub d_g: Option<f64>,
}

/// `φ = f + g` exposed through first-order and linear-minimization oracles.
///
/// Points are flat vectors and the geometry is Euclidean throughout.
pub trait CompositeProblem: Send + Sync {
    fn dim(&self) -> usize;

    fn f_value(&self, x: &DenseVector) -> f64;

    fn f_grad(&self, x: &DenseVector) -> DenseVector;

    /// `f` and `∇f` together; override when they share work.
    fn f_value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        (self.f_value(x), self.f_grad(x))
    }

    /// `g(x)`, `+∞` outside dom g.
    fn g_value(&self, x: &DenseVector) -> f64;

    /// Solves `min_v ⟨grad, v⟩ + g(v)`.
    fn lmo(&self, grad: &DenseVector) -> Result<LmoResult>;

    fn constants(&self) -> ProblemConstants;

    fn is_convex(&self) -> bool;

    /// Starting point used by the experiment harness.
    fn initial_point(&self) -> DenseVector;

    /// A random point of dom g, used by the sampling diagnostics.
    fn sample_feasible(&self, rng: &mut ChaCha8Rng) -> DenseVector;

    fn phi(&self, x: &DenseVector) -> f64 {
        self.f_value(x) + self.g_value(x)
    }
}

/// Hölder modulus of `∇(1/p ‖Ax − b‖_p^p)` in the Euclidean norm,
/// `2^{2−p} m^{(p−1)(2−p)/(2p)} ‖A‖₂^p`, with exponent `ν = p − 1`.
pub fn holder_constant_lp(p: f64, m: usize, spec_norm_a: f64) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return domain(format!("Hölder constant needs p in (1, 2], got {p}"));
    }
    if m == 0 || !(spec_norm_a > 0.0) {
        return domain("Hölder constant needs m >= 1 and ‖A‖₂ > 0");
    }
    let m = m as f64;
    Ok(2f64.powf(2.0 - p) * m.powf((p - 1.0) * (2.0 - p) / (2.0 * p)) * spec_norm_a.powf(p))
}

/// `f(x) = 1/p ‖Ax − b‖_p^p` with its gradient `Aᵀ(|r|^{p−1} ∘ sign r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpResidual {
    pub a: DenseMatrix,
    pub b: DenseVector,
    pub p: f64,
}

impl LpResidual {
    fn residual(&self, x: &DenseVector) -> DenseVector {
        let mut r = self.b.clone();
        r.gemv(1.0, &self.a, x, -1.0);
        r
    }

    fn value_of(&self, r: &DenseVector) -> f64 {
        let p = self.p;
        if p == 2.0 {
            0.5 * r.norm_squared()
        } else {
            r.iter().map(|ri| ri.abs().powf(p)).sum::<f64>() / p
        }
    }

    fn grad_of(&self, r: &DenseVector) -> DenseVector {
        let p = self.p;
        let psi = if p == 2.0 {
            r.clone()
        } else {
            r.map(|ri| if ri == 0.0 { 0.0 } else { ri.signum() * ri.abs().powf(p - 1.0) })
        };
        self.a.tr_mul(&psi)
    }

    pub fn value(&self, x: &DenseVector) -> f64 {
        self.value_of(&self.residual(x))
    }

    /// Gradient of the residual term at `x`.
    pub fn grad(&self, x: &DenseVector) -> DenseVector {
        self.grad_of(&self.residual(x))
    }

    pub fn value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        let r = self.residual(x);
        (self.value_of(&r), self.grad_of(&r))
    }
}

/// Euclidean diameter of the unit ℓq ball in `n` dimensions,
/// `2 n^{max(0, 1/q − 1/2)}`.
pub fn lq_ball_diameter(n: usize, q: f64) -> f64 {
    2.0 * (n as f64).powf((1.0 / q - 0.5).max(0.0))
}

/// A draw from the density `∝ exp(−|t|^q)`: `±G^{1/q}` with `G ~ Gamma(1/q, 1)`.
pub(crate) fn generalized_gaussian(rng: &mut ChaCha8Rng, q: f64) -> f64 {
    let gamma = Gamma::new(1.0 / q, 1.0).expect("valid gamma parameters");
    let magnitude = gamma.sample(rng).powf(1.0 / q);
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

/// A Dirichlet(shape, …, shape) draw of length `n`.
pub(crate) fn dirichlet(rng: &mut ChaCha8Rng, n: usize, shape: f64) -> DenseVector {
    let gamma = Gamma::new(shape, 1.0).expect("valid gamma parameters");
    loop {
        let w = DenseVector::from_fn(n, |_, _| gamma.sample(rng));
        let total = w.sum();
        if total > 0.0 && total.is_finite() {
            return w / total;
        }
    }
}

/// Self-describing recipe for a problem instance. Instances are persisted by
/// their recipe and regenerated from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    LqBall {
        n: usize,
        q: f64,
        p: f64,
    },
    Entropy {
        m: usize,
        n: usize,
        p: f64,
        lambda: f64,
    },
    Nmf {
        n: usize,
        m: usize,
        k: usize,
        alpha: f64,
        lambda: f64,
        #[serde(default)]
        v_law: FactorLaw,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub family: Family,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn generate(&self) -> Result<Instance> {
        Ok(match self.family {
            Family::LqBall { n, q, p } => Instance::LqBall(LpLqInstance::generate(n, q, p, self.seed)?),
            Family::Entropy { m, n, p, lambda } => {
                Instance::Entropy(EntropyInstance::generate(m, n, p, lambda, self.seed)?)
            }
            Family::Nmf { n, m, k, alpha, lambda, v_law } => {
                Instance::Nmf(NmfInstance::generate_with_law(n, m, k, alpha, lambda, v_law, self.seed)?)
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A generated instance of one of the shipped families.
#[derive(Debug, Clone)]
pub enum Instance {
    LqBall(LpLqInstance),
    Entropy(EntropyInstance),
    Nmf(NmfInstance),
}

impl Instance {
    fn inner(&self) -> &dyn CompositeProblem {
        match self {
            Instance::LqBall(i) => i,
            Instance::Entropy(i) => i,
            Instance::Nmf(i) => i,
        }
    }
}

impl CompositeProblem for Instance {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn f_value(&self, x: &DenseVector) -> f64 {
        self.inner().f_value(x)
    }
    fn f_grad(&self, x: &DenseVector) -> DenseVector {
        self.inner().f_grad(x)
    }
    fn f_value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        self.inner().f_value_grad(x)
    }
    fn g_value(&self, x: &DenseVector) -> f64 {
        self.inner().g_value(x)
    }
    fn lmo(&self, grad: &DenseVector) -> Result<LmoResult> {
        self.inner().lmo(grad)
    }
    fn constants(&self) -> ProblemConstants {
        self.inner().constants()
    }
    fn is_convex(&self) -> bool {
        self.inner().is_convex()
    }
    fn initial_point(&self) -> DenseVector {
        self.inner().initial_point()
    }
    fn sample_feasible(&self, rng: &mut ChaCha8Rng) -> DenseVector {
        self.inner().sample_feasible(rng)
    }
}
