//! Closed-form theoretical quantities used to audit solver traces.
//!
//! Every rate statement for both step rules comes from the recurrence
//! `γ_{t+1} ≤ γ_t − c β_t min{1, β_t^α / A}` with `β_t = δ_t` and
//! `γ_t = φ(x_t) − φ*`. [`RecurrenceConstants`] holds `(c, α, A)` for each
//! algorithm/regime pair and [`RateEnvelope`] turns them into the envelope
//! `γ̄_t`, the `δ*_t` bounds and iteration-complexity bounds.

use std::f64::consts::E;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::problems::CompositeProblem;

/// `e^{1/e}`, the constant in the `δ*_t` bounds.
pub fn e_to_inv_e() -> f64 {
    E.powf(1.0 / E)
}

/// `L(ε) = ((1−ν)/(1+ν) · 1/(2ε))^{(1−ν)/(1+ν)} M^{2/(1+ν)}`, equal to `M`
/// when `ν = 1`.
pub fn holder_envelope(eps: f64, nu: f64, m_nu: f64) -> f64 {
    if nu == 1.0 {
        return m_nu;
    }
    let e = (1.0 - nu) / (1.0 + nu);
    (e / (2.0 * eps)).powf(e) * m_nu.powf(2.0 / (1.0 + nu))
}

/// `L̃ = max{L(δ/2), L(δ²/(4d²))^{(1+ν)/(2ν)}}`: any `L ≥ L̃` passes the
/// sufficient-decrease test.
pub fn tilde_l(delta: f64, dist: f64, nu: f64, m_nu: f64) -> f64 {
    let first = holder_envelope(delta / 2.0, nu, m_nu);
    let second = holder_envelope(delta * delta / (4.0 * dist * dist), nu, m_nu).powf((1.0 + nu) / (2.0 * nu));
    first.max(second)
}

/// The same certificate written directly in `δ`, `d` and `M`.
pub fn tilde_l_expanded(delta: f64, dist: f64, nu: f64, m_nu: f64) -> f64 {
    let e = (1.0 - nu) / (1.0 + nu);
    let first = (e / delta).powf(e) * m_nu.powf(2.0 / (1.0 + nu));
    let second = (2.0 * e).powf((1.0 - nu) / (2.0 * nu)) * (dist / delta).powf((1.0 - nu) / nu) * m_nu.powf(1.0 / nu);
    first.max(second)
}

/// Which structural assumption supplies the rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    BoundedDomain { d_g: f64 },
    UniformlyConvex { kappa: f64, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Step `min{1, (δ/(M d^{1+ν}))^{1/ν}}`.
    ParamDependent,
    /// Adaptive line search.
    Adaptive,
}

/// Constants of one rate statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBoundSpec {
    pub nu: f64,
    pub m_nu: f64,
    pub regime: Regime,
}

impl RateBoundSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) || !(self.m_nu > 0.0) || !self.m_nu.is_finite() {
            return domain(format!("rate bounds need nu in (0, 1] and M > 0, got nu={}, M={}", self.nu, self.m_nu));
        }
        match self.regime {
            Regime::BoundedDomain { d_g } if !(d_g > 0.0) || !d_g.is_finite() => {
                domain(format!("bounded-domain regime needs a finite D_g > 0, got {d_g}"))
            }
            Regime::UniformlyConvex { kappa, rho } if !(kappa > 0.0) || !(rho >= 2.0) => {
                domain(format!("uniformly convex regime needs kappa > 0 and rho >= 2, got {kappa}, {rho}"))
            }
            _ => Ok(()),
        }
    }

    /// `(c, α, A)` of the rate statement for `alg`.
    pub fn constants(&self, alg: Algorithm) -> Result<RecurrenceConstants> {
        self.validate()?;
        let nu = self.nu;
        let (c, m_eff) = match alg {
            Algorithm::ParamDependent => (nu / (1.0 + nu), self.m_nu),
            Algorithm::Adaptive => (0.25, 2.0 * self.m_nu),
        };
        let (alpha, a) = match self.regime {
            Regime::BoundedDomain { d_g } => (1.0 / nu, m_eff.powf(1.0 / nu) * d_g.powf((1.0 + nu) / nu)),
            Regime::UniformlyConvex { kappa, rho } => {
                let alpha = (rho - 1.0 - nu) / (rho * nu);
                (alpha.max(0.0), (rho / kappa).powf((1.0 + nu) / (rho * nu)) * m_eff.powf(1.0 / nu))
            }
        };
        Ok(RecurrenceConstants { c, alpha, a })
    }

    fn is_linear(&self) -> bool {
        matches!(self.regime, Regime::UniformlyConvex { rho, .. } if self.nu == 1.0 && rho == 2.0)
    }
}

/// `L̄(δ)`, an upper bound on every `L̃_t` with `δ_t ≥ δ`.
pub fn bar_l(delta: f64, spec: &RateBoundSpec) -> f64 {
    let nu = spec.nu;
    let m = spec.m_nu;
    let e = (1.0 - nu) / (1.0 + nu);
    let first = (e / delta).powf(e) * m.powf(2.0 / (1.0 + nu));
    let prefactor = (2.0 * e).powf((1.0 - nu) / (2.0 * nu)) * m.powf(1.0 / nu);
    let second = match spec.regime {
        Regime::BoundedDomain { d_g } => prefactor * (d_g / delta).powf((1.0 - nu) / nu),
        Regime::UniformlyConvex { kappa, rho } => {
            prefactor * (rho / (kappa * delta.powf(rho - 1.0))).powf((1.0 - nu) / (rho * nu))
        }
    };
    first.max(second)
}

/// `(c, α, A)` in `γ_{t+1} ≤ γ_t − c β_t min{1, β_t^α / A}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceConstants {
    pub c: f64,
    pub alpha: f64,
    pub a: f64,
}

impl RecurrenceConstants {
    /// `t₀ = ⌈(1/c)·(ln(γ₀/(c A^{1/α})))₊⌉`; zero in the linear case.
    pub fn t0(&self, gap0: f64) -> usize {
        if self.alpha == 0.0 {
            return 0;
        }
        let arg = gap0 / (self.c * self.a.powf(1.0 / self.alpha));
        (arg.ln().max(0.0) / self.c).ceil() as usize
    }

    /// Sublinear envelope `(γ_{t₀}^{−α} + c α (s − t₀)/A)^{−1/α}` at `s ≥ t₀`.
    pub fn gamma_bar_sublinear(&self, gap_t0: f64, t0: usize, s: usize) -> f64 {
        let steps = s as f64 - t0 as f64;
        (gap_t0.powf(-self.alpha) + self.c * self.alpha * steps / self.a).powf(-1.0 / self.alpha)
    }

    /// Linear envelope `γ₀ exp(−c min{1, 1/A} s)`.
    pub fn gamma_bar_linear(&self, gap0: f64, s: usize) -> f64 {
        gap0 * (-self.c * (1.0 / self.a).min(1.0) * s as f64).exp()
    }

    /// `max{γ₀/(c k), (A γ₀/(c k))^{1/(1+α)}}` after `k` steps.
    pub fn nonconvex_delta_star(&self, gap0: f64, k: f64) -> f64 {
        let base = gap0 / (self.c * k);
        base.max((self.a * base).powf(1.0 / (1.0 + self.alpha)))
    }
}

/// `t̃₀ = ⌈(log₂(L_{−1}/L̃₀))₊⌉`, the warm-up of the adaptive rule.
pub fn warmup_shift(l_init: f64, tilde_l0: f64) -> usize {
    (l_init / tilde_l0).log2().max(0.0).ceil() as usize
}

/// Rate envelope of one run, built from its objective gaps `φ(x_t) − φ*`.
///
/// Indices passed to the query methods are absolute iteration counts `t`.
/// For the adaptive rule the theorem's clock starts at `t̃₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEnvelope {
    pub constants: RecurrenceConstants,
    pub linear: bool,
    /// `t̃₀` (zero for the parameter-dependent rule).
    pub shift: usize,
    /// `t₀`, counted from `shift`.
    pub t0: usize,
    /// `φ(x_{t̃₀}) − φ*`.
    pub gap_shift: f64,
    /// `φ(x_{t̃₀+t₀}) − φ*`, when the run got that far.
    pub gap_t0: Option<f64>,
}

impl RateEnvelope {
    /// `gaps[t] = φ(x_t) − φ*`; `tilde_l0` and `l_init` are required for the
    /// adaptive rule.
    pub fn new(
        spec: &RateBoundSpec,
        alg: Algorithm,
        gaps: &[f64],
        tilde_l0: Option<f64>,
        l_init: Option<f64>,
    ) -> Result<Self> {
        let constants = spec.constants(alg)?;
        if gaps.is_empty() {
            return domain("rate envelope needs at least one objective gap");
        }
        let shift = match alg {
            Algorithm::ParamDependent => 0,
            Algorithm::Adaptive => match (l_init, tilde_l0) {
                (Some(l), Some(t)) if l > 0.0 && t > 0.0 => warmup_shift(l, t),
                _ => return domain("adaptive envelopes need L_init > 0 and the run's first certificate"),
            },
        };
        let gap_shift = match gaps.get(shift) {
            Some(&g) => g.max(0.0),
            None => return domain(format!("trace ends before the warm-up shift {shift}")),
        };
        let linear = spec.is_linear();
        let t0 = constants.t0(gap_shift);
        let gap_t0 = gaps.get(shift + t0).map(|&g| g.max(0.0));
        Ok(Self { constants, linear, shift, t0, gap_shift, gap_t0 })
    }

    /// The linear-rate envelope; only defined for `(ν, ρ) = (1, 2)`.
    pub fn linear(
        spec: &RateBoundSpec,
        alg: Algorithm,
        gaps: &[f64],
        tilde_l0: Option<f64>,
        l_init: Option<f64>,
    ) -> Result<Self> {
        if !spec.is_linear() {
            return domain("the linear-rate envelope needs nu = 1 and a uniformly convex regime with rho = 2");
        }
        Self::new(spec, alg, gaps, tilde_l0, l_init)
    }

    /// `γ̄_s` on the theorem's clock; `None` before `t₀` or when `γ_{t₀}`
    /// is unknown.
    pub fn gamma_bar(&self, s: usize) -> Option<f64> {
        if self.linear {
            return Some(self.constants.gamma_bar_linear(self.gap_shift, s));
        }
        if s < self.t0 {
            return None;
        }
        let g = self.gap_t0?;
        if g == 0.0 {
            return Some(0.0);
        }
        Some(self.constants.gamma_bar_sublinear(g, self.t0, s))
    }

    /// First absolute `t` at which the objective envelope applies.
    pub fn phi_gap_start(&self) -> usize {
        self.shift + if self.linear { 0 } else { self.t0 }
    }

    /// Upper bound on `φ(x_t) − φ*` (convex `f`).
    pub fn phi_gap_bound(&self, t: usize) -> Option<f64> {
        if t < self.phi_gap_start() {
            return None;
        }
        self.gamma_bar(t - self.shift)
    }

    /// First absolute `t` at which the `δ*_t` bound applies (convex `f`).
    pub fn delta_star_start(&self) -> Option<f64> {
        let RecurrenceConstants { c, alpha, a } = self.constants;
        if self.linear {
            return Some(self.shift as f64 + 2.0 * a.max(1.0) / c);
        }
        let g = self.gap_t0?;
        Some(self.shift as f64 + self.t0 as f64 + 2.0 * a / (c * g.powf(alpha)))
    }

    /// `e^{1/e} γ̄_{⌊(s + t₀ + 1)/2⌋}` with `s = t − t̃₀` (`⌊(s + 2)/2⌋` in the
    /// linear case).
    pub fn delta_star_bound(&self, t: usize) -> Option<f64> {
        if (t as f64) < self.delta_star_start()? {
            return None;
        }
        let s = t - self.shift;
        let idx = if self.linear { (s + 2) / 2 } else { (s + self.t0 + 1) / 2 };
        Some(e_to_inv_e() * self.gamma_bar(idx)?)
    }

    /// Upper bound on `δ*_t` that holds without convexity, for `t ≥ t̃₀`.
    pub fn nonconvex_delta_star_bound(&self, t: usize) -> Option<f64> {
        if t < self.shift {
            return None;
        }
        Some(self.constants.nonconvex_delta_star(self.gap_shift, (t + 1 - self.shift) as f64))
    }
}

/// Iterations after which `δ_t ≤ ε` is guaranteed.
///
/// `shift` is `t̃₀` (zero for the parameter-dependent rule), `gap_shift` is
/// `φ(x_{t̃₀}) − φ*` and `gap_t0` is `φ(x_{t̃₀+t₀}) − φ*`, defaulting to
/// `gap_shift`. The convex bound is linear in `ln(1/ε)` when `(ν, ρ) = (1, 2)`
/// under uniform convexity and polynomial otherwise.
pub fn complexity_bound(
    eps: f64,
    spec: &RateBoundSpec,
    alg: Algorithm,
    convex: bool,
    shift: usize,
    gap_shift: f64,
    gap_t0: Option<f64>,
) -> Result<f64> {
    if !(eps > 0.0) {
        return domain(format!("complexity bound needs eps > 0, got {eps}"));
    }
    let RecurrenceConstants { c, alpha, a } = spec.constants(alg)?;
    let shift = shift as f64;
    if !convex {
        return Ok(shift + gap_shift / (c * eps) * (a / eps.powf(alpha)).max(1.0));
    }
    if spec.is_linear() {
        return Ok(shift + 2.0 / c * a.max(1.0) * (gap_shift / eps).ln().max(1.0));
    }
    let t0 = RecurrenceConstants { c, alpha, a }.t0(gap_shift) as f64;
    let g = gap_t0.unwrap_or(gap_shift);
    let tail = ((e_to_inv_e() * g / eps).powf(alpha) - 1.0) / alpha;
    Ok(shift + t0 + 2.0 * a / (c * g.powf(alpha)) * tail.max(1.0))
}

/// Largest relative violation of `‖∇f(x) − ∇f(y)‖₂ ≤ M ‖x − y‖₂^ν` over
/// `n_pairs` sampled feasible pairs, `max (‖Δ∇f‖ − M‖Δx‖^ν)/M`.
pub fn check_holder<P: CompositeProblem + ?Sized>(problem: &P, nu: f64, m_nu: f64, n_pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n_pairs {
        let x = problem.sample_feasible(&mut rng);
        let mut y = problem.sample_feasible(&mut rng);
        // Every fourth pair is pulled close together to probe small distances.
        if i % 4 == 3 {
            y = &x + (&y - &x) * 1e-3;
        }
        let lhs = (problem.f_grad(&x) - problem.f_grad(&y)).norm();
        let rhs = m_nu * (&x - &y).norm().powf(nu);
        worst = worst.max((lhs - rhs) / m_nu);
    }
    worst
}

/// Largest violation of the uniform-convexity inequality of the linearized
/// subproblem, `(κ/ρ)‖v − v*‖^ρ − [ℓ(v) − ℓ(v*)]` with
/// `ℓ(v) = ⟨∇f(x), v⟩ + g(v)`, over `n_samples` sampled `(x, v)`.
///
/// Each violation is divided by `max(1, |ℓ(v)| + |ℓ(v*)|)` so rounding in
/// the subproblem values does not register.
pub fn check_uniform_convexity<P: CompositeProblem + ?Sized>(
    problem: &P,
    kappa: f64,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n_samples {
        let x = problem.sample_feasible(&mut rng);
        let grad = problem.f_grad(&x);
        let star = problem.lmo(&grad)?;
        let w = problem.sample_feasible(&mut rng);
        // Mix far and near points; both stay in dom g by convexity.
        let s = [1.0, 0.1, 0.01][i % 3];
        let v = &star.v + (&w - &star.v) * s;
        let value_v = grad.dot(&v) + problem.g_value(&v);
        let value_star = grad.dot(&star.v) + star.g_of_v;
        let lower = kappa / rho * (&v - &star.v).norm().powf(rho);
        let scale = (value_v.abs() + value_star.abs()).max(1.0);
        worst = worst.max((lower - (value_v - value_star)) / scale);
    }
    Ok(worst)
}

/// Smallest sampled ratio `ρ [ℓ(v) − ℓ(v*)] / ‖v − v*‖^ρ`: the largest `κ`
/// consistent with the samples. Informational only; it is not a
/// certificate.
pub fn estimate_uniform_convexity_modulus<P: CompositeProblem + ?Sized>(
    problem: &P,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for i in 0..n_samples {
        let x = problem.sample_feasible(&mut rng);
        let grad = problem.f_grad(&x);
        let star = problem.lmo(&grad)?;
        let w = problem.sample_feasible(&mut rng);
        let s = [1.0, 0.1, 0.01][i % 3];
        let v = &star.v + (&w - &star.v) * s;
        let dist = (&v - &star.v).norm();
        if dist == 0.0 {
            continue;
        }
        let excess = grad.dot(&v) + problem.g_value(&v) - grad.dot(&star.v) - star.g_of_v;
        best = best.min(rho * excess / dist.powf(rho));
    }
    Ok(best)
}
