//! The conditional gradient loop `x_{t+1} = (1 − τ_t) x_t + τ_t v_t` with
//! pluggable step-size rules.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{convex_combination, DenseVector};
use crate::oracles::fw_gap;
use crate::problems::CompositeProblem;

/// Maximum number of trials in one adaptive line search.
pub const LINE_SEARCH_CAP: usize = 200;

/// Relative slack allowed in the sufficient-decrease test.
pub const DECREASE_SLACK: f64 = 1e-12;

/// Gaps at or below `STATIONARY_TOL · (1 + |φ|)` count as zero.
pub const STATIONARY_TOL: f64 = 1e-15;

/// Step-size policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRule {
    /// `τ = min{1, (δ/(M‖x − v‖^{1+ν}))^{1/ν}}`; needs the Hölder constants.
    ParamDependent { nu: f64, m_nu: f64 },
    /// Backtracking on a quadratic upper model, started from `L_{−1} = l_init`.
    #[serde(rename = "adaptive")]
    AdaptiveLineSearch { l_init: f64 },
    /// `2/(k + 2)` at schedule index `k = t + start`.
    Diminishing {
        #[serde(default = "default_start")]
        start: usize,
    },
    /// `6(k + 1)/((k + 2)(2k + 3))` at schedule index `k = t + start`.
    #[serde(rename = "nesterov")]
    NesterovDiminishing {
        #[serde(default = "default_start")]
        start: usize,
    },
    /// `min{1, δ/(L‖x − v‖²)}` with a user-supplied `L`.
    ShortStep { l: f64 },
}

/// Open-loop schedules are indexed from 1 unless told otherwise, so the
/// first step keeps weight on `x_0`.
pub const DEFAULT_SCHEDULE_START: usize = 1;

fn default_start() -> usize {
    DEFAULT_SCHEDULE_START
}

impl StepRule {
    pub fn diminishing() -> Self {
        StepRule::Diminishing { start: DEFAULT_SCHEDULE_START }
    }

    pub fn nesterov() -> Self {
        StepRule::NesterovDiminishing { start: DEFAULT_SCHEDULE_START }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepRule::ParamDependent { nu, m_nu } => {
                if !(nu > 0.0 && nu <= 1.0) || !(m_nu > 0.0) || !m_nu.is_finite() {
                    return domain(format!(
                        "parameter-dependent rule needs nu in (0, 1] and M > 0, got nu={nu}, M={m_nu}"
                    ));
                }
            }
            StepRule::AdaptiveLineSearch { l_init } => {
                if !(l_init > 0.0) || !l_init.is_finite() {
                    return domain(format!("adaptive rule needs a finite L_init > 0, got {l_init}"));
                }
            }
            StepRule::ShortStep { l } => {
                if !(l > 0.0) || !l.is_finite() {
                    return domain(format!("short-step rule needs a finite L > 0, got {l}"));
                }
            }
            StepRule::Diminishing { .. } | StepRule::NesterovDiminishing { .. } => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepRule::ParamDependent { .. } => "param_dependent",
            StepRule::AdaptiveLineSearch { .. } => "adaptive",
            StepRule::Diminishing { .. } => "diminishing",
            StepRule::NesterovDiminishing { .. } => "nesterov",
            StepRule::ShortStep { .. } => "short_step",
        }
    }
}

/// `min{1, (δ/(M d^{1+ν}))^{1/ν}}`.
pub fn step_param_dependent(delta: f64, dist: f64, nu: f64, m_nu: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Ok(0.0);
    }
    if dist == 0.0 {
        return Err(Error::OracleViolation(format!("positive gap {delta:e} with v = x")));
    }
    let ratio = delta / (m_nu * dist.powf(1.0 + nu));
    Ok(ratio.powf(1.0 / nu).min(1.0))
}

pub fn step_diminishing(t: usize) -> f64 {
    2.0 / (t as f64 + 2.0)
}

pub fn step_nesterov(t: usize) -> f64 {
    let t = t as f64;
    6.0 * (t + 1.0) / ((t + 2.0) * (2.0 * t + 3.0))
}

/// `min{1, δ/(L d²)}`.
pub fn step_short(delta: f64, dist: f64, l: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Ok(0.0);
    }
    if dist == 0.0 {
        return Err(Error::OracleViolation(format!("positive gap {delta:e} with v = x")));
    }
    Ok((delta / (l * dist * dist)).min(1.0))
}

/// Accepted trial of [`adaptive_line_search`].
#[derive(Debug, Clone)]
pub struct LineSearchStep {
    pub x_next: DenseVector,
    pub phi_next: f64,
    pub l: f64,
    pub tau: f64,
    /// Number of trials, counting the accepted one.
    pub inner: usize,
}

/// Doubling search for `L_t`, starting from `L_prev / 2`.
///
/// Trial `i` uses `L = 2^{i−1} L_prev` and `τ = min{1, δ/(2 L d²)}` and is
/// accepted once `φ(x⁺) ≤ φ(x) − τδ/2 + Lτ²d²/2`, up to a relative slack of
/// [`DECREASE_SLACK`].
pub fn adaptive_line_search<P: CompositeProblem + ?Sized>(
    problem: &P,
    x: &DenseVector,
    v: &DenseVector,
    delta: f64,
    phi_x: f64,
    l_prev: f64,
) -> Result<LineSearchStep> {
    if !(delta > 0.0) || !(l_prev > 0.0) {
        return domain(format!("line search needs delta > 0 and L_prev > 0, got {delta:e}, {l_prev:e}"));
    }
    let dist_sq = (x - v).norm_squared();
    if dist_sq == 0.0 {
        return Err(Error::OracleViolation(format!("positive gap {delta:e} with v = x")));
    }
    let slack = DECREASE_SLACK * (1.0 + phi_x.abs());
    let mut l = 0.5 * l_prev;
    for i in 0..LINE_SEARCH_CAP {
        if i > 0 {
            l *= 2.0;
        }
        let tau = (delta / (2.0 * l * dist_sq)).min(1.0);
        let candidate = convex_combination(x, v, tau);
        let phi_next = problem.phi(&candidate);
        if phi_next <= phi_x - 0.5 * tau * delta + 0.5 * l * tau * tau * dist_sq + slack {
            return Ok(LineSearchStep { x_next: candidate, phi_next, l, tau, inner: i + 1 });
        }
    }
    Err(Error::LineSearch { trials: LINE_SEARCH_CAP, last_l: l })
}

/// Stopping rules; at least one must be set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    /// Stop once `δ_t/δ_0 ≤ rel_gap_tol`.
    pub rel_gap_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub max_seconds: Option<f64>,
}

impl Termination {
    pub fn rel_gap(tol: f64) -> Self {
        Self { rel_gap_tol: Some(tol), ..Self::default() }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = Some(max_iter);
        self
    }

    pub fn with_max_seconds(mut self, secs: f64) -> Self {
        self.max_seconds = Some(secs);
        self
    }

    fn validate(&self) -> Result<()> {
        let tol_ok = self.rel_gap_tol.is_some_and(|t| t > 0.0 && t.is_finite());
        let secs_ok = self.max_seconds.is_some_and(|s| s.is_finite());
        if let Some(t) = self.rel_gap_tol {
            if !(t >= 0.0) {
                return domain(format!("rel_gap_tol must be nonnegative, got {t}"));
            }
        }
        if !tol_ok && self.max_iter.is_none() && !secs_ok {
            return domain("termination needs a positive tolerance, an iteration cap or a time limit");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// `δ_t/δ_0` fell below the tolerance.
    Converged,
    /// `δ_t = 0`: the iterate is stationary.
    Stationary,
    MaxIterations,
    TimeLimit,
}

impl Status {
    /// Whether the run ended on an optimality criterion.
    pub fn is_success(self) -> bool {
        matches!(self, Status::Converged | Status::Stationary)
    }
}

/// State at iterate `t` and the step taken from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub phi: f64,
    pub delta: f64,
    /// `min_{i≤t} δ_i`.
    pub delta_star: f64,
    /// `‖x_t − v_t‖₂`.
    pub dist: f64,
    /// Step from `x_t`; absent on the final record.
    pub tau: Option<f64>,
    /// Accepted `L_t` (adaptive rule only).
    pub lipschitz: Option<f64>,
    /// Line-search trials at step `t` (adaptive rule only).
    pub inner: Option<usize>,
    /// Seconds since the solve started, measured when the record is emitted.
    pub elapsed: f64,
}

#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub status: Status,
    /// Smallest objective value seen.
    pub best_phi: f64,
    pub x_final: DenseVector,
}

impl SolverTrace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.t)
    }

    pub fn delta0(&self) -> f64 {
        self.records[0].delta
    }

    pub fn elapsed(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.elapsed)
    }
}

/// Runs the conditional gradient method from `x0`.
pub fn solve<P: CompositeProblem + ?Sized>(
    problem: &P,
    rule: StepRule,
    x0: &DenseVector,
    term: Termination,
) -> Result<SolverTrace> {
    solve_with_observer(problem, rule, x0, term, |_| {})
}

/// [`solve`], handing every record to `observer` as soon as it is final.
pub fn solve_with_observer<P, F>(
    problem: &P,
    rule: StepRule,
    x0: &DenseVector,
    term: Termination,
    mut observer: F,
) -> Result<SolverTrace>
where
    P: CompositeProblem + ?Sized,
    F: FnMut(&TraceRecord),
{
    rule.validate()?;
    term.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::Shape(format!("x0 has length {}, problem dimension is {}", x0.len(), problem.dim())));
    }
    if !problem.g_value(x0).is_finite() {
        return domain("x0 lies outside dom g");
    }

    let start = Instant::now();
    let mut x = x0.clone();
    let mut records = Vec::new();
    let mut delta0 = 0.0;
    let mut delta_star = f64::INFINITY;
    let mut best_phi = f64::INFINITY;
    let mut l_prev = match rule {
        StepRule::AdaptiveLineSearch { l_init } => l_init,
        _ => 0.0,
    };
    let mut carried_phi: Option<f64> = None;

    for t in 0.. {
        let (f_x, grad) = problem.f_value_grad(&x);
        let g_x = problem.g_value(&x);
        if !g_x.is_finite() {
            return Err(Error::OracleViolation(format!("iterate {t} left dom g")));
        }
        let phi = carried_phi.take().unwrap_or(f_x + g_x);
        best_phi = best_phi.min(phi);
        let lmo = problem.lmo(&grad)?;
        let delta = fw_gap(&grad, &x, &lmo.v, g_x, lmo.g_of_v)?;
        let dist = (&x - &lmo.v).norm();
        if t == 0 {
            delta0 = delta;
        }
        delta_star = delta_star.min(delta);

        let mut record =
            TraceRecord { t, phi, delta, delta_star, dist, tau: None, lipschitz: None, inner: None, elapsed: 0.0 };

        let status = if delta <= STATIONARY_TOL * (1.0 + phi.abs()) {
            Some(Status::Stationary)
        } else if term.rel_gap_tol.is_some_and(|tol| delta <= tol * delta0) {
            Some(Status::Converged)
        } else if term.max_iter.is_some_and(|cap| t >= cap) {
            Some(Status::MaxIterations)
        } else if term.max_seconds.is_some_and(|s| start.elapsed().as_secs_f64() >= s) {
            Some(Status::TimeLimit)
        } else {
            None
        };
        if let Some(status) = status {
            record.elapsed = start.elapsed().as_secs_f64();
            observer(&record);
            records.push(record);
            return Ok(SolverTrace { records, status, best_phi, x_final: x });
        }

        let tau = match rule {
            StepRule::ParamDependent { nu, m_nu } => step_param_dependent(delta, dist, nu, m_nu)?,
            StepRule::Diminishing { start } => step_diminishing(t + start),
            StepRule::NesterovDiminishing { start } => step_nesterov(t + start),
            StepRule::ShortStep { l } => step_short(delta, dist, l)?,
            StepRule::AdaptiveLineSearch { .. } => {
                let step = adaptive_line_search(problem, &x, &lmo.v, delta, phi, l_prev)?;
                l_prev = step.l;
                record.lipschitz = Some(step.l);
                record.inner = Some(step.inner);
                carried_phi = Some(step.phi_next);
                x = step.x_next;
                step.tau
            }
        };
        if !matches!(rule, StepRule::AdaptiveLineSearch { .. }) {
            x = convex_combination(&x, &lmo.v, tau);
        }
        record.tau = Some(tau);
        record.elapsed = start.elapsed().as_secs_f64();
        observer(&record);
        records.push(record);
    }
    unreachable!("the iteration loop only exits by returning")
}
