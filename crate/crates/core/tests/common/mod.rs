//! Reference routines written independently of the library, and the
//! sampled property checks shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use condgrad::numerics::{project_simplex, DenseMatrix, DenseVector};
use condgrad::oracles::{lmo_box_quadratic, lmo_entropy_simplex, lmo_lq_ball, lmo_simplex_quadratic};
use condgrad::problems::{EntropyInstance, LpLqInstance, NmfInstance};
use condgrad::theory::{bar_l, check_holder, tilde_l, warmup_shift, RateBoundSpec};
use condgrad::{CompositeProblem, SolverTrace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }

    pub fn assert(&self) {
        assert!(self.pass, "{}: {}", self.name, self.detail);
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DenseVector {
    DenseVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
    DenseMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn dirichlet(rng: &mut ChaCha8Rng, n: usize, shape: f64) -> DenseVector {
    let gamma = Gamma::new(shape, 1.0).unwrap();
    loop {
        let w = DenseVector::from_fn(n, |_, _| gamma.sample(rng));
        if w.sum() > 0.0 {
            return &w / w.sum();
        }
    }
}

fn q_norm(v: &DenseVector, q: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q)
}

/// A point of the unit ℓq ball; on the sphere when `radius` is 1.
pub fn lq_point(rng: &mut ChaCha8Rng, n: usize, q: f64, radius: f64) -> DenseVector {
    let z = gaussian_vector(rng, n);
    &z * (radius / q_norm(&z, q))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).collect()
}

/// Projection onto the simplex by trying every support set and keeping the
/// closest feasible stationary point.
pub fn project_simplex_enumerate(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let theta = (support.iter().map(|&i| y[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut v = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            v[i] = y[i] - theta;
            if v[i] < 0.0 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let d: f64 = v.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, v));
        }
    }
    best.expect("singletons are always feasible").1
}

/// `min ⟨g, v⟩ + λ‖v‖²` over the grid `{v ∈ Δ₃ : v ∈ hℤ³}`.
pub fn simplex_quadratic_grid_min(g: [f64; 3], lambda: f64, h: f64) -> f64 {
    let steps = (1.0 / h).round() as usize;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let v = [i as f64 * h, j as f64 * h, (steps - i - j) as f64 * h];
            let val: f64 = (0..3).map(|k| g[k] * v[k] + lambda * v[k] * v[k]).sum();
            best = best.min(val);
        }
    }
    best
}

/// Central differences with a step scaled to each coordinate.
pub fn fd_gradient(f: impl Fn(&DenseVector) -> f64, x: &DenseVector, h: f64) -> DenseVector {
    DenseVector::from_fn(x.len(), |i, _| {
        let step = h * x[i].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += step;
        xm[i] -= step;
        (f(&xp) - f(&xm)) / (2.0 * step)
    })
}

/// `max_w [h(v) − h(w)]` scaled by `1 + |h(v)|` over sampled feasible `w`:
/// half drawn by `sample`, half on segments from `v` towards such draws.
fn worst_lmo_slack(
    rng: &mut ChaCha8Rng,
    n_candidates: usize,
    v: &DenseVector,
    h: impl Fn(&DenseVector) -> f64,
    mut sample: impl FnMut(&mut ChaCha8Rng) -> DenseVector,
) -> f64 {
    let hv = h(v);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n_candidates {
        let far = sample(rng);
        let w = if i % 2 == 0 {
            far
        } else {
            let s = 10f64.powf(rng.random_range(-5.0..-1.0));
            v * (1.0 - s) + far * s
        };
        worst = worst.max((hv - h(&w)) / (1.0 + hv.abs()));
    }
    worst
}

fn flat(m: &DenseMatrix) -> DenseVector {
    DenseVector::from_column_slice(m.as_slice())
}

/// Every oracle's output beats `n_candidates` feasible points up to 1e−9.
pub fn lmo_sampled_optimality(n_candidates: usize, seed: u64) -> Check {
    const SLACK: f64 = 1e-9;
    let mut r = rng(seed);
    let mut report = Vec::new();
    let mut worst_all = f64::NEG_INFINITY;
    let mut record = |name: String, w: f64| {
        worst_all = worst_all.max(w);
        report.push(format!("{name}={w:.1e}"));
    };

    for q in [1.3, 2.0, 3.0] {
        let n = 20;
        let u = gaussian_vector(&mut r, n);
        let v = lmo_lq_ball(&u, q).unwrap().v;
        let w = worst_lmo_slack(
            &mut r,
            n_candidates,
            &v,
            |w| u.dot(w),
            |r| {
                let radius = if r.random::<bool>() { 1.0 } else { r.random::<f64>() };
                lq_point(r, n, q, radius)
            },
        );
        record(format!("lq_ball(q={q})"), w);
    }

    let lambda = 0.7;
    let u = &gaussian_vector(&mut r, 20) * 3.0;
    let v = lmo_entropy_simplex(&u, lambda).unwrap().v;
    let ent = |w: &DenseVector| lambda * w.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>();
    let w = worst_lmo_slack(
        &mut r,
        n_candidates,
        &v,
        |w| u.dot(w) + ent(w),
        |r| {
            let shape = [0.1, 1.0, 10.0][r.random_range(0..3)];
            dirichlet(r, 20, shape)
        },
    );
    record("entropy_simplex".into(), w);

    let (lambda, alpha) = (0.3, 2.0);
    let g = &gaussian_matrix(&mut r, 6, 4) * 0.5;
    let v = flat(&lmo_box_quadratic(&g, lambda, alpha).unwrap().v);
    let gf = flat(&g);
    let w = worst_lmo_slack(
        &mut r,
        n_candidates,
        &v,
        |w| gf.dot(w) + lambda * w.norm_squared(),
        |r| DenseVector::from_fn(24, |_, _| r.random_range(0.0..=alpha)),
    );
    record("box_quadratic".into(), w);

    let g = &gaussian_matrix(&mut r, 5, 4) * 0.5;
    let v = flat(&lmo_simplex_quadratic(&g, lambda).unwrap().v);
    let gf = flat(&g);
    let w = worst_lmo_slack(
        &mut r,
        n_candidates,
        &v,
        |w| gf.dot(w) + lambda * w.norm_squared(),
        |r| {
            let mut w = DenseVector::zeros(20);
            for j in 0..4 {
                w.rows_mut(5 * j, 5).copy_from(&dirichlet(r, 5, 1.0));
            }
            w
        },
    );
    record("simplex_quadratic".into(), w);

    let families: Vec<(&str, Box<dyn CompositeProblem>)> = vec![
        ("lq_instance", Box::new(LpLqInstance::generate(30, 1.5, 1.5, seed).unwrap())),
        ("entropy_instance", Box::new(EntropyInstance::generate(10, 30, 2.0, 0.5, seed).unwrap())),
        ("nmf_instance", Box::new(NmfInstance::generate(8, 7, 3, 2.0, 0.05, seed).unwrap())),
    ];
    for (name, p) in &families {
        let x = p.sample_feasible(&mut r);
        let grad = p.f_grad(&x);
        let lmo = p.lmo(&grad).unwrap();
        let w = worst_lmo_slack(&mut r, n_candidates, &lmo.v, |w| grad.dot(w) + p.g_value(w), |r| p.sample_feasible(r));
        record((*name).into(), w);
    }

    Check::new(
        "lmo sampled optimality",
        worst_all <= SLACK,
        format!("worst relative slack {worst_all:.2e}; {}", report.join(" ")),
    )
}

/// Sampled Hölder check of `M_{p−1}` on ℓq-ball instances.
pub fn holder_sampling(n_pairs: usize, seed: u64) -> Check {
    let mut parts = Vec::new();
    let mut pass = true;
    for p in [1.3, 1.5, 2.0] {
        let inst = LpLqInstance::generate(40, 1.5, p, seed).unwrap();
        let v = check_holder(&inst, p - 1.0, inst.holder_constant(), n_pairs, seed);
        pass &= v <= 1e-8;
        parts.push(format!("p={p}: {v:.3e}"));
    }
    Check::new("Hölder sampling", pass, parts.join(", "))
}

/// Gradients of all three families against central differences.
pub fn gradients_vs_finite_differences(seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut probe = |name: &str, p: &dyn CompositeProblem, x: DenseVector| {
        let g = p.f_grad(&x);
        let fd = fd_gradient(|y| p.f_value(y), &x, 1e-6);
        let rel = (&g - &fd).norm() / g.norm().max(1e-300);
        worst = worst.max(rel);
        parts.push(format!("{name}={rel:.1e}"));
    };
    for p in [1.3, 1.5, 2.0] {
        let inst = LpLqInstance::generate(5, 1.5, p, seed).unwrap();
        let x = lq_point(&mut r, 5, 1.5, 0.5);
        probe(&format!("lq(p={p})"), &inst, x);
    }
    for p in [1.5, 2.0] {
        let inst = EntropyInstance::generate(4, 6, p, 1.0, seed).unwrap();
        let x = dirichlet(&mut r, 6, 2.0);
        probe(&format!("entropy(p={p})"), &inst, x);
    }
    let inst = NmfInstance::generate(6, 5, 2, 2.0, 0.01, seed).unwrap();
    let x = inst.sample_feasible(&mut r);
    probe("nmf", &inst, x);
    Check::new(
        "gradient vs finite differences",
        worst <= 1e-5,
        format!("worst relative error {worst:.2e}; {}", parts.join(" ")),
    )
}

/// Sort-based projection against support enumeration on random inputs.
pub fn simplex_projection_vs_enumeration(n_inputs: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..n_inputs {
        let scale = [0.1, 1.0, 5.0][i % 3];
        let y = &gaussian_vector(&mut r, 5) * scale;
        let fast = project_simplex(&y).unwrap();
        let slow = project_simplex_enumerate(y.as_slice());
        let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    Check::new(
        "simplex projection vs enumeration",
        worst <= 1e-10,
        format!("{n_inputs} inputs, max abs error {worst:.2e}"),
    )
}

/// `L̃` against its expanded closed form on a 5 × 5 × 4 parameter grid.
pub fn tilde_l_dual_formula() -> Check {
    let m: f64 = 3.7;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for nu in [0.1f64, 0.3, 0.5, 0.7, 0.9] {
        for delta in [1e-3f64, 0.1, 1.0, 10.0, 1e3] {
            for dist in [0.01, 1.0, 5.0, 100.0] {
                let e = (1.0 - nu) / (1.0 + nu);
                let a = (e / delta).powf(e) * m.powf(2.0 / (1.0 + nu));
                let b =
                    (2.0 * e).powf((1.0 - nu) / (2.0 * nu)) * (dist / delta).powf((1.0 - nu) / nu) * m.powf(1.0 / nu);
                let expected = a.max(b);
                let got = tilde_l(delta, dist, nu, m);
                worst = worst.max((got - expected).abs() / expected);
                count += 1;
            }
        }
    }
    Check::new(
        "tilde_L dual formula",
        worst <= 1e-12,
        format!("{count} grid points, max relative difference {worst:.2e}"),
    )
}

/// First `t` where `φ(x_{t+1}) > φ(x_t) + 1e−12(1 + |φ(x_t)|)`, with the
/// excess.
pub fn monotone_violation(trace: &SolverTrace) -> Option<(usize, f64)> {
    trace.records.windows(2).find_map(|w| {
        let excess = w[1].phi - w[0].phi - 1e-12 * (1.0 + w[0].phi.abs());
        (excess > 0.0).then_some((w[0].t, excess))
    })
}

/// First accepted adaptive step violating
/// `φ⁺ ≤ φ − (δ/4) min{1, δ/(k L d²)} + 1e−12(1 + |φ|)`.
///
/// With `τ = min{1, δ/(2Ld²)}` the sufficient-decrease test guarantees the
/// inequality for `k = 2`; `k = 1` is twice as strong whenever `τ < 1`.
/// Accepted steps can sit on the slack itself, so a few ulps of `φ` are
/// allowed for forming the bound.
pub fn decrease_identity_violation(trace: &SolverTrace, k: f64) -> Option<(usize, f64)> {
    trace.records.windows(2).find_map(|w| {
        let r = &w[0];
        let l = r.lipschitz?;
        let drop = r.delta / 4.0 * (r.delta / (k * l * r.dist * r.dist)).min(1.0);
        let excess = w[1].phi - (r.phi - drop) - (1e-12 + 8.0 * f64::EPSILON) * (1.0 + r.phi.abs());
        (excess > 0.0).then_some((r.t, excess))
    })
}

/// `max_t [φ(x_t) − φ* − δ_t]`, normalized by `1 + |φ*|`.
pub fn gap_lower_bound_excess(trace: &SolverTrace, phi_star: f64) -> f64 {
    trace
        .records
        .iter()
        .map(|r| (r.phi - phi_star - r.delta) / (1.0 + phi_star.abs()))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Line-search certificate audit of an adaptive run.
#[derive(Debug, Clone, Copy)]
pub struct CertificateAudit {
    /// `t̃₀`.
    pub shift: usize,
    /// Largest `L_t / (2 max_{i≤t} L̃_i)` for `t ≥ t̃₀`; at most 1 when the
    /// certificate holds.
    pub worst_l_ratio: f64,
    /// Largest `Σ_{i≤t} inner_i − (2t + 2 + [log₂(2L̄(δ*_t)/L_{−1})]₊)`.
    pub worst_inner_excess: f64,
}

pub fn audit_certificates(trace: &SolverTrace, spec: &RateBoundSpec, l_init: f64) -> CertificateAudit {
    let (nu, m) = (spec.nu, spec.m_nu);
    let first = &trace.records[0];
    let shift = warmup_shift(l_init, tilde_l(first.delta, first.dist, nu, m));
    let mut max_tilde = 0.0f64;
    let mut total_inner = 0usize;
    let mut worst_l_ratio = f64::NEG_INFINITY;
    let mut worst_inner_excess = f64::NEG_INFINITY;
    for r in &trace.records {
        let (Some(l), Some(inner)) = (r.lipschitz, r.inner) else { continue };
        max_tilde = max_tilde.max(tilde_l(r.delta, r.dist, nu, m));
        if r.t >= shift {
            worst_l_ratio = worst_l_ratio.max(l / (2.0 * max_tilde));
        }
        total_inner += inner;
        let budget = 2.0 * r.t as f64 + 2.0 + (2.0 * bar_l(r.delta_star, spec) / l_init).log2().max(0.0);
        worst_inner_excess = worst_inner_excess.max(total_inner as f64 - budget);
    }
    CertificateAudit { shift, worst_l_ratio, worst_inner_excess }
}

/// Least-squares fit of `y` against `0, 1, …`: `(slope, R²)`.
pub fn linear_fit(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = y.iter().enumerate().map(|(i, v)| (i as f64 - xm) * (v - ym)).sum();
    let sxx: f64 = (0..y.len()).map(|i| (i as f64 - xm).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) })
}
