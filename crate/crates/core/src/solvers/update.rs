//! One-iteration update rules of the first-order algorithms.
//!
//! Every rule works on the reduced problem (active atoms only) and keeps
//! the images `Dx`, `Dx_prev` and `Du` of its primal vectors up to date so
//! that no rule needs more than one product with `Dᵀ` and one sparse
//! product with `D` per step (plus backtracking retries).

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use crate::problem::Penalty;

use super::SolverConfig;

/// Active part of a problem: reduced dictionary and penalty.
#[derive(Clone, Copy, Debug)]
pub struct Subproblem<'a> {
    pub dict: &'a Dictionary,
    pub y: &'a [f64],
    pub lambda: f64,
    pub penalty: &'a Penalty,
}

impl Subproblem<'_> {
    /// `½‖Dx − y‖² + λΩ(x)` given `dx = Dx`.
    pub fn objective(&self, x: &[f64], dx: &[f64]) -> f64 {
        0.5 * residual_sq(dx, self.y) + self.lambda * self.penalty.value(x)
    }
}

fn residual_sq(dx: &[f64], y: &[f64]) -> f64 {
    dx.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Iterates and cached images of one run.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub x: Vec<f64>,
    /// `x_{t−1}` (TwIST, SpaRSA, FISTA, Chambolle–Pock).
    pub x_prev: Vec<f64>,
    /// Extrapolated point (FISTA, Chambolle–Pock).
    pub u: Vec<f64>,
    pub dx: Vec<f64>,
    pub dx_prev: Vec<f64>,
    pub du: Vec<f64>,
    /// Dual point `θ_t` of the last update.
    pub theta: Vec<f64>,
    /// `D_tᵀθ_t` over the active atoms.
    pub grad: Vec<f64>,
    /// Step constant `L_t`.
    pub step: f64,
    /// FISTA momentum `l_t`.
    pub momentum: f64,
    pub tau: f64,
    pub sigma: f64,
    /// Number of updates applied so far.
    pub iter: usize,
}

impl SolverState {
    /// Zero start for `k` atoms in dimension `n`. `op_norm` is `‖D‖`,
    /// needed by TwIST and Chambolle–Pock.
    pub fn new(k: usize, n: usize, cfg: &SolverConfig, op_norm: Option<f64>) -> Self {
        let norm = op_norm.unwrap_or(1.0).max(f64::MIN_POSITIVE);
        let step = match cfg.algorithm {
            super::Algorithm::Twist => norm * norm,
            _ => cfg.l0,
        };
        SolverState {
            x: vec![0.0; k],
            x_prev: vec![0.0; k],
            u: vec![0.0; k],
            dx: vec![0.0; n],
            dx_prev: vec![0.0; n],
            du: vec![0.0; n],
            theta: vec![0.0; n],
            grad: vec![0.0; k],
            step,
            momentum: 1.0,
            tau: cfg.cp_step_safety / norm,
            sigma: cfg.cp_step_safety / norm,
            iter: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Objective of the current iterate.
    pub fn objective(&self, sub: &Subproblem) -> f64 {
        sub.objective(&self.x, &self.dx)
    }

    /// Drops the coordinates whose `keep` flag is false, removing their
    /// contribution from the cached images. `dict` is the dictionary
    /// before compaction.
    pub fn retain(&mut self, dict: &Dictionary, keep: &[bool]) {
        for (j, &k) in keep.iter().enumerate() {
            if k {
                continue;
            }
            let col = dict.column(j);
            for (v, img) in [
                (self.x[j], &mut self.dx),
                (self.x_prev[j], &mut self.dx_prev),
                (self.u[j], &mut self.du),
            ] {
                if v != 0.0 {
                    img.iter_mut().zip(col).for_each(|(d, a)| *d -= v * a);
                }
            }
        }
        for buf in [&mut self.x, &mut self.x_prev, &mut self.u, &mut self.grad] {
            let mut it = keep.iter();
            buf.retain(|_| *it.next().unwrap());
        }
    }
}

/// Outcome of a backtracking search.
#[derive(Clone, Debug)]
pub struct Backtrack {
    pub z: Vec<f64>,
    pub dz: Vec<f64>,
    pub step: f64,
    /// `½‖Dz − y‖²`
    pub f_z: f64,
    /// Quadratic majorizer `f(p) + ⟨∇f(p), z − p⟩ + (L/2)‖z − p‖²`.
    pub bound: f64,
}

const MAX_BACKTRACKS: usize = 200;

/// Proximal step from `point` with the smallest `L = step·factorᵏ` for
/// which the quadratic majorization holds.
pub fn backtrack(
    sub: &Subproblem,
    point: &[f64],
    f_point: f64,
    grad: &[f64],
    step: f64,
    factor: f64,
) -> Result<Backtrack> {
    let mut l = step;
    let mut dz = vec![0.0; sub.y.len()];
    for _ in 0..MAX_BACKTRACKS {
        let mut z: Vec<f64> = point.iter().zip(grad).map(|(p, g)| p - g / l).collect();
        sub.penalty.prox_in_place(&mut z, sub.lambda / l);
        sub.dict.apply_into(&z, &mut dz)?;
        let f_z = 0.5 * residual_sq(&dz, sub.y);
        let mut lin = 0.0;
        let mut quad = 0.0;
        for ((zi, pi), gi) in z.iter().zip(point).zip(grad) {
            let d = zi - pi;
            lin += gi * d;
            quad += d * d;
        }
        let bound = f_point + lin + 0.5 * l * quad;
        if !f_z.is_finite() || !bound.is_finite() {
            return Err(Error::Numerical("non-finite value during backtracking".into()));
        }
        if f_z <= bound + 1e-12 * bound.abs().max(1.0) {
            return Ok(Backtrack {
                z,
                dz,
                step: l,
                f_z,
                bound,
            });
        }
        l *= factor;
    }
    Err(Error::Numerical(format!("backtracking did not terminate (L = {l:e})")))
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("non-finite {what}")))
    }
}

/// `θ_t = Dv − y` and `grad = Dᵀθ_t` for `dv = Dv`.
fn residual_dual(state: &mut SolverState, sub: &Subproblem, use_u: bool) -> Result<f64> {
    let dv = if use_u { &state.du } else { &state.dx };
    for ((t, d), y) in state.theta.iter_mut().zip(dv).zip(sub.y) {
        *t = d - y;
    }
    state.grad.resize(sub.dict.cols(), 0.0);
    sub.dict.correlate_into(&state.theta, &mut state.grad)?;
    check_finite(&state.grad, "gradient")?;
    Ok(0.5 * norm_sq(&state.theta))
}

fn accept(state: &mut SolverState, bt: Backtrack) {
    std::mem::swap(&mut state.x_prev, &mut state.x);
    std::mem::swap(&mut state.dx_prev, &mut state.dx);
    state.x = bt.z;
    state.dx = bt.dz;
    state.step = bt.step;
}

/// ISTA: `θ_t = Dx_{t−1} − y`, `x_t = prox(x_{t−1} − Dᵀθ_t/L_t)`.
pub fn update_ista(state: &mut SolverState, sub: &Subproblem, cfg: &SolverConfig) -> Result<()> {
    let f_x = residual_dual(state, sub, false)?;
    let bt = backtrack(sub, &state.x, f_x, &state.grad, state.step, cfg.backtrack_factor)?;
    accept(state, bt);
    state.iter += 1;
    Ok(())
}

/// FISTA: proximal step from `u_{t−1}`, then
/// `u_t = x_t + ((l_{t−1} − 1)/l_t)(x_t − x_{t−1})`.
pub fn update_fista(state: &mut SolverState, sub: &Subproblem, cfg: &SolverConfig) -> Result<()> {
    let f_u = residual_dual(state, sub, true)?;
    let bt = backtrack(sub, &state.u, f_u, &state.grad, state.step, cfg.backtrack_factor)?;
    accept(state, bt);
    let l_prev = state.momentum;
    let l = 0.5 * (1.0 + (1.0 + 4.0 * l_prev * l_prev).sqrt());
    let c = (l_prev - 1.0) / l;
    extrapolate(&mut state.u, &state.x, &state.x_prev, c);
    extrapolate(&mut state.du, &state.dx, &state.dx_prev, c);
    state.momentum = l;
    state.iter += 1;
    Ok(())
}

/// `out = a + c(a − b)`
fn extrapolate(out: &mut Vec<f64>, a: &[f64], b: &[f64], c: f64) {
    out.clear();
    out.extend(a.iter().zip(b).map(|(ai, bi)| ai + c * (ai - bi)));
}

/// TwIST: `x_t = (1−α)x_{t−2} + (α−β)x_{t−1} + β prox(x_{t−1} − Dᵀθ_t/L)`
/// with the fixed `L = ‖D‖²`. The first update is a plain IST step, and
/// the IST step also replaces any two-step update that would increase
/// the objective.
pub fn update_twist(state: &mut SolverState, sub: &Subproblem, cfg: &SolverConfig) -> Result<()> {
    let f_x = residual_dual(state, sub, false)?;
    let l = state.step;
    let mut p: Vec<f64> = state.x.iter().zip(&state.grad).map(|(x, g)| x - g / l).collect();
    sub.penalty.prox_in_place(&mut p, sub.lambda / l);
    let mut dp = vec![0.0; sub.y.len()];
    sub.dict.apply_into(&p, &mut dp)?;
    check_finite(&dp, "iterate")?;

    let (a, b) = (cfg.twist_alpha, cfg.twist_beta);
    let (mut next, mut dnext) = (p, dp);
    if state.iter > 0 {
        let combine = |old: &[f64], cur: &[f64], prox: &[f64]| -> Vec<f64> {
            old.iter()
                .zip(cur)
                .zip(prox)
                .map(|((o, c), q)| (1.0 - a) * o + (a - b) * c + b * q)
                .collect()
        };
        let cand = combine(&state.x_prev, &state.x, &next);
        let dcand = combine(&state.dx_prev, &state.dx, &dnext);
        let f_cur = f_x + sub.lambda * sub.penalty.value(&state.x);
        if sub.objective(&cand, &dcand) <= f_cur {
            next = cand;
            dnext = dcand;
        }
    }
    std::mem::swap(&mut state.x_prev, &mut state.x);
    std::mem::swap(&mut state.dx_prev, &mut state.dx);
    state.x = next;
    state.dx = dnext;
    state.iter += 1;
    Ok(())
}

/// Barzilai–Borwein curvature `‖D s‖²/‖s‖²` for `s = x_{t−1} − x_{t−2}`,
/// or `None` for a zero displacement.
pub fn bb_step(state: &SolverState) -> Option<f64> {
    let ss: f64 = state
        .x
        .iter()
        .zip(&state.x_prev)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if ss == 0.0 {
        return None;
    }
    let dd: f64 = state
        .dx
        .iter()
        .zip(&state.dx_prev)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Some(dd / ss)
}

/// SpaRSA: ISTA step whose `L_t` starts from the Barzilai–Borwein
/// estimate (clamped to `[bb_l_min, bb_l_max]`) and is then increased
/// until the majorization holds.
pub fn update_sparsa(state: &mut SolverState, sub: &Subproblem, cfg: &SolverConfig) -> Result<()> {
    let f_x = residual_dual(state, sub, false)?;
    let l = if state.iter == 0 {
        cfg.l0
    } else {
        bb_step(state).map_or(state.step, |l| l.clamp(cfg.bb_l_min, cfg.bb_l_max))
    };
    let bt = backtrack(sub, &state.x, f_x, &state.grad, l, cfg.backtrack_factor)?;
    accept(state, bt);
    state.iter += 1;
    Ok(())
}

/// Chambolle–Pock:
/// `θ_t = (θ_{t−1} + σ(Du_{t−1} − y))/(1 + σ)`,
/// `x_t = prox_{λτ}(x_{t−1} − τDᵀθ_t)`, `φ = 1/sqrt(1 + 2γτ)`,
/// `τ ← φτ`, `σ ← σ/φ`, `u_t = x_t + φ(x_t − x_{t−1})`.
pub fn update_cp(state: &mut SolverState, sub: &Subproblem, cfg: &SolverConfig) -> Result<()> {
    let (tau, sigma) = (state.tau, state.sigma);
    for ((t, du), y) in state.theta.iter_mut().zip(&state.du).zip(sub.y) {
        *t = (*t + sigma * (du - y)) / (1.0 + sigma);
    }
    state.grad.resize(sub.dict.cols(), 0.0);
    sub.dict.correlate_into(&state.theta, &mut state.grad)?;
    let mut next: Vec<f64> = state.x.iter().zip(&state.grad).map(|(x, g)| x - tau * g).collect();
    sub.penalty.prox_in_place(&mut next, sub.lambda * tau);
    let mut dnext = vec![0.0; sub.y.len()];
    sub.dict.apply_into(&next, &mut dnext)?;
    check_finite(&dnext, "iterate")?;

    let phi = 1.0 / (1.0 + 2.0 * cfg.cp_gamma * tau).sqrt();
    state.tau = phi * tau;
    state.sigma = sigma / phi;
    std::mem::swap(&mut state.x_prev, &mut state.x);
    std::mem::swap(&mut state.dx_prev, &mut state.dx);
    state.x = next;
    state.dx = dnext;
    extrapolate(&mut state.u, &state.x, &state.x_prev, phi);
    extrapolate(&mut state.du, &state.dx, &state.dx_prev, phi);
    state.iter += 1;
    Ok(())
}
