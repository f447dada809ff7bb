use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{dirichlet, CompositeProblem, ProblemConstants};
use crate::error::{domain, Error, Result};
use crate::numerics::{DenseMatrix, DenseVector};
use crate::oracles::{lmo_box_quadratic, lmo_simplex_quadratic, LmoResult, BOX_TOL, SIMPLEX_TOL};

/// Column sums of the Gaussian factor below this magnitude are resampled.
const COLUMN_SUM_FLOOR: f64 = 1e-8;

/// Law of the entries of the factor `Ṽ` that is rescaled into `V*`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorLaw {
    /// Standard normal; `V*` has signed entries and heavy-tailed magnitudes.
    #[default]
    Normal,
    /// `|N(0, 1)|`; every column of `V*` lies in the simplex.
    HalfNormal,
}

/// `min ½‖X − UV‖_F² + λ(‖U‖_F² + ‖V‖_F²)` with `0 ≤ U ≤ α` entrywise and
/// every column of `V` in the simplex.
///
/// The flat variable is `vec(U)` (`n × k`, column-major) followed by
/// `vec(V)` (`k × m`, column-major), so the Euclidean norm of the flat vector
/// is the Frobenius norm of the pair.
#[derive(Debug, Clone)]
pub struct NmfInstance {
    pub x: DenseMatrix,
    pub k: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    pub u_star: DenseMatrix,
    pub v_star: DenseMatrix,
}

impl NmfInstance {
    pub fn generate(n: usize, m: usize, k: usize, alpha: f64, lambda: f64, seed: u64) -> Result<Self> {
        Self::generate_with_law(n, m, k, alpha, lambda, FactorLaw::Normal, seed)
    }

    pub fn generate_with_law(
        n: usize,
        m: usize,
        k: usize,
        alpha: f64,
        lambda: f64,
        law: FactorLaw,
        seed: u64,
    ) -> Result<Self> {
        if k == 0 || k > n.min(m) {
            return domain(format!("nmf instances need 1 <= k <= min(n, m), got k={k}, n={n}, m={m}"));
        }
        if !(alpha > 0.0) || !(lambda > 0.0) {
            return domain("nmf instances need alpha > 0 and lambda > 0");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u_star = DenseMatrix::from_fn(n, k, |_, _| rng.random_range(0.0..=alpha));
        let mut v_tilde = DenseMatrix::zeros(k, m);
        for mut col in v_tilde.column_iter_mut() {
            loop {
                for entry in col.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *entry = match law {
                        FactorLaw::Normal => z,
                        FactorLaw::HalfNormal => z.abs(),
                    };
                }
                if col.sum().abs() >= COLUMN_SUM_FLOOR {
                    break;
                }
            }
        }
        let mut v_star = v_tilde;
        for mut col in v_star.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        let noise = Normal::new(0.0, 0.01).expect("valid noise law");
        let e = DenseMatrix::from_fn(n, m, |_, _| rng.sample(noise));
        let x = &u_star * &v_star + e;
        Ok(Self { x, k, alpha, lambda, seed, u_star, v_star })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    /// Splits a flat point into `(U, V)`.
    pub fn unpack(&self, z: &DenseVector) -> (DenseMatrix, DenseMatrix) {
        let (n, m, k) = (self.n(), self.m(), self.k);
        let u = DenseMatrix::from_column_slice(n, k, &z.as_slice()[..n * k]);
        let v = DenseMatrix::from_column_slice(k, m, &z.as_slice()[n * k..]);
        (u, v)
    }

    pub fn pack(u: &DenseMatrix, v: &DenseMatrix) -> DenseVector {
        DenseVector::from_iterator(u.len() + v.len(), u.iter().chain(v.iter()).copied())
    }

    fn u_feasible(&self, u: &DenseMatrix) -> bool {
        u.iter().all(|&e| e >= -BOX_TOL && e <= self.alpha + BOX_TOL)
    }

    fn v_feasible(&self, v: &DenseMatrix) -> bool {
        v.iter().all(|&e| e >= -SIMPLEX_TOL) && v.column_iter().all(|c| (c.sum() - 1.0).abs() <= SIMPLEX_TOL)
    }
}

/// `½‖X − UV‖_F²` with `G_U = (UV − X)Vᵀ` and `G_V = Uᵀ(UV − X)`.
pub fn nmf_value_and_grads(
    inst: &NmfInstance,
    u: &DenseMatrix,
    v: &DenseMatrix,
) -> Result<(f64, DenseMatrix, DenseMatrix)> {
    let (n, m, k) = (inst.n(), inst.m(), inst.k);
    if u.shape() != (n, k) || v.shape() != (k, m) {
        return Err(Error::Shape(format!(
            "expected U {n}x{k} and V {k}x{m}, got U {:?} and V {:?}",
            u.shape(),
            v.shape()
        )));
    }
    let mut r = inst.x.clone();
    r.gemm(1.0, u, v, -1.0);
    let value = 0.5 * r.norm_squared();
    let g_u = &r * v.transpose();
    let g_v = u.tr_mul(&r);
    Ok((value, g_u, g_v))
}

impl CompositeProblem for NmfInstance {
    fn dim(&self) -> usize {
        self.k * (self.n() + self.m())
    }

    fn f_value(&self, z: &DenseVector) -> f64 {
        self.f_value_grad(z).0
    }

    fn f_grad(&self, z: &DenseVector) -> DenseVector {
        self.f_value_grad(z).1
    }

    fn f_value_grad(&self, z: &DenseVector) -> (f64, DenseVector) {
        let (u, v) = self.unpack(z);
        let (value, g_u, g_v) = nmf_value_and_grads(self, &u, &v).expect("unpack yields conforming shapes");
        (value, Self::pack(&g_u, &g_v))
    }

    fn g_value(&self, z: &DenseVector) -> f64 {
        let (u, v) = self.unpack(z);
        if self.u_feasible(&u) && self.v_feasible(&v) {
            self.lambda * z.norm_squared()
        } else {
            f64::INFINITY
        }
    }

    /// The subproblem separates over the two blocks.
    fn lmo(&self, grad: &DenseVector) -> Result<LmoResult> {
        if grad.len() != self.dim() {
            return Err(Error::Shape(format!("gradient length {} != {}", grad.len(), self.dim())));
        }
        let (g_u, g_v) = self.unpack(grad);
        let u = lmo_box_quadratic(&g_u, self.lambda, self.alpha)?;
        let v = lmo_simplex_quadratic(&g_v, self.lambda)?;
        Ok(LmoResult { v: Self::pack(&u.v, &v.v), g_of_v: u.g_of_v + v.g_of_v, degenerate: false })
    }

    /// `M` is not certified; the quadratic penalty gives `κ = 2λ`, `ρ = 2`.
    fn constants(&self) -> ProblemConstants {
        let (n, m, k) = (self.n() as f64, self.m() as f64, self.k as f64);
        ProblemConstants {
            nu: Some(1.0),
            m_nu: None,
            kappa: Some(2.0 * self.lambda),
            rho: Some(2.0),
            d_g: Some((self.alpha * self.alpha * n * k + 2.0 * m).sqrt()),
        }
    }

    fn is_convex(&self) -> bool {
        false
    }

    fn initial_point(&self) -> DenseVector {
        let u = DenseMatrix::from_element(self.n(), self.k, 1.0);
        let v = DenseMatrix::from_element(self.k, self.m(), 1.0 / self.k as f64);
        Self::pack(&u, &v)
    }

    fn sample_feasible(&self, rng: &mut ChaCha8Rng) -> DenseVector {
        let u = DenseMatrix::from_fn(self.n(), self.k, |_, _| rng.random_range(0.0..=self.alpha));
        let mut v = DenseMatrix::zeros(self.k, self.m());
        for j in 0..self.m() {
            v.set_column(j, &dirichlet(rng, self.k, 1.0));
        }
        Self::pack(&u, &v)
    }
}
