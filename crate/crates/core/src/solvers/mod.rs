//! First-order solvers with optional static or dynamic screening.

mod update;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use update::{
    backtrack, bb_step, update_cp, update_fista, update_ista, update_sparsa, update_twist,
    Backtrack, SolverState, Subproblem,
};

use crate::dictionary::{Dictionary, IndexSet};
use crate::error::{Error, Result};
use crate::instrument::{SolveTrace, Strategy};
use crate::linalg::{count_nonzero, norm_sq};
use crate::problem::{expand, Penalty, Problem};
use crate::screening::{ScreenPass, Screener, TestKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Ista,
    Fista,
    Twist,
    Sparsa,
    ChambollePock,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Ista,
        Algorithm::Fista,
        Algorithm::Twist,
        Algorithm::Sparsa,
        Algorithm::ChambollePock,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ista => "ista",
            Algorithm::Fista => "fista",
            Algorithm::Twist => "twist",
            Algorithm::Sparsa => "sparsa",
            Algorithm::ChambollePock => "cp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ista" => Algorithm::Ista,
            "fista" => Algorithm::Fista,
            "twist" => Algorithm::Twist,
            "sparsa" => Algorithm::Sparsa,
            "cp" | "chambolle-pock" | "chambollepock" => Algorithm::ChambollePock,
            _ => return Err(Error::InvalidArgument(format!("unknown algorithm '{s}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    /// Ignored when `strategy` is `None`.
    pub test_kind: TestKind,
    pub max_iters: usize,
    /// Stop when `|F(x_{t−1}) − F(x_t)|/F(x_t) < rel_tol` (checked only
    /// once the iterate is nonzero).
    pub rel_tol: f64,
    /// When set, replaces the relative-variation rule: stop once the
    /// duality gap of the full problem (from the scaled residual) is at
    /// most this value. Costs two full products per iteration.
    pub gap_tol: Option<f64>,
    pub l0: f64,
    pub backtrack_factor: f64,
    pub twist_alpha: f64,
    pub twist_beta: f64,
    pub cp_gamma: f64,
    pub cp_step_safety: f64,
    pub bb_l_min: f64,
    pub bb_l_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::Fista,
            strategy: Strategy::None,
            test_kind: TestKind::Safe,
            max_iters: 200,
            rel_tol: 1e-7,
            gap_tol: None,
            l0: 1.0,
            backtrack_factor: 2.0,
            twist_alpha: 1.78,
            twist_beta: 1.78,
            cp_gamma: 0.0,
            cp_step_safety: 0.99,
            bb_l_min: 1e-10,
            bb_l_max: 1e10,
        }
    }
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, strategy: Strategy, test_kind: TestKind) -> Self {
        SolverConfig {
            algorithm,
            strategy,
            test_kind,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1");
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol must be > 0");
        }
        if self.gap_tol.is_some_and(|g| !(g > 0.0)) {
            return bad("gap_tol must be > 0");
        }
        if !(self.backtrack_factor > 1.0) {
            return bad("backtrack_factor must be > 1");
        }
        if !(self.l0 > 0.0) {
            return bad("L0 must be > 0");
        }
        if !(self.cp_step_safety > 0.0 && self.cp_step_safety < 1.0) {
            return bad("cp_step_safety must lie in (0, 1)");
        }
        if !(self.cp_gamma >= 0.0) {
            return bad("cp_gamma must be >= 0");
        }
        if !(self.bb_l_min > 0.0 && self.bb_l_min <= self.bb_l_max) {
            return bad("need 0 < bb_l_min <= bb_l_max");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Solution in original coordinates; screened entries are exactly 0.
    pub x_star: Vec<f64>,
    pub iterations: usize,
    pub trace: SolveTrace,
    pub final_objective: f64,
    pub eliminated: IndexSet,
    pub lambda_star: f64,
    /// Whether the stopping tolerance (rather than `max_iters`) ended the run.
    pub converged: bool,
}

/// State exposed to [`run_observed`] after each iteration's screening.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub t: usize,
    /// Dual point `θ_t` the screening pass used.
    pub theta: &'a [f64],
    /// Active atoms after screening at iteration `t`.
    pub kept: &'a IndexSet,
    /// Reduced iterate, aligned with `kept`.
    pub x: &'a [f64],
    pub objective: f64,
    pub screen: Option<&'a ScreenPass>,
}

pub fn run(p: &Problem, cfg: &SolverConfig) -> Result<SolveResult> {
    run_observed(p, cfg, |_| {})
}

/// Runs the solver, calling `observe` once per iteration.
pub fn run_observed<F>(p: &Problem, cfg: &SolverConfig, mut observe: F) -> Result<SolveResult>
where
    F: FnMut(&IterationView),
{
    let start = Instant::now();
    cfg.validate()?;
    if cfg.strategy != Strategy::None && cfg.test_kind.problem_kind() != p.kind() {
        return Err(Error::Incompatible(format!(
            "test '{}' cannot screen a {} problem",
            cfg.test_kind,
            p.kind().as_str()
        )));
    }
    let k = p.n_atoms();
    let n = p.dict().rows();
    let y = p.y();
    let y_corr = p.dict().correlate(y)?;
    let ed = p.extreme_dual_from(&y_corr);
    let mut trace = SolveTrace::new(p.kind(), cfg.strategy, k, n, p.group_count());

    if p.lambda() > ed.lambda_star {
        trace.init_flops = 0;
        trace.total_seconds = start.elapsed().as_secs_f64();
        return Ok(SolveResult {
            x_star: vec![0.0; k],
            iterations: 0,
            trace,
            final_objective: 0.5 * norm_sq(y),
            eliminated: IndexSet::full(k),
            lambda_star: ed.lambda_star,
            converged: true,
        });
    }

    let screener = match cfg.strategy {
        Strategy::None => None,
        _ => Some(Screener::with_correlations(
            p,
            cfg.test_kind,
            &ed,
            y_corr.clone(),
        )?),
    };
    let op_norm = match cfg.algorithm {
        Algorithm::Twist | Algorithm::ChambollePock => Some(p.dict().operator_norm()),
        _ => None,
    };

    let mut work = Workspace {
        dict: Cow::Borrowed(p.dict()),
        penalty: p.penalty(),
        kept: IndexSet::full(k),
        eliminated: IndexSet::empty(),
        state: SolverState::new(k, n, cfg, op_norm),
    };

    if let (Strategy::Static, Some(s)) = (cfg.strategy, &screener) {
        let pass = s.screen(y, y, &y_corr, &work.kept, work.penalty.layout())?;
        work.apply(&pass.mask)?;
    }
    drop(y_corr);

    let mut f_prev = 0.5 * norm_sq(y);
    let mut t = 0;
    let mut converged = false;
    while t < cfg.max_iters {
        t += 1;
        if !work.kept.is_empty() {
            let sub = Subproblem {
                dict: &work.dict,
                y,
                lambda: p.lambda(),
                penalty: &work.penalty,
            };
            match cfg.algorithm {
                Algorithm::Ista => update_ista(&mut work.state, &sub, cfg)?,
                Algorithm::Fista => update_fista(&mut work.state, &sub, cfg)?,
                Algorithm::Twist => update_twist(&mut work.state, &sub, cfg)?,
                Algorithm::Sparsa => update_sparsa(&mut work.state, &sub, cfg)?,
                Algorithm::ChambollePock => update_cp(&mut work.state, &sub, cfg)?,
            }
        }
        let mut pass = None;
        if let (Strategy::Dynamic, Some(s)) = (cfg.strategy, &screener) {
            if !work.kept.is_empty() {
                let ps = s.screen(
                    y,
                    &work.state.theta,
                    &work.state.grad,
                    &work.kept,
                    work.penalty.layout(),
                )?;
                work.apply(&ps.mask)?;
                pass = Some(ps);
            }
        }
        let sub = Subproblem {
            dict: &work.dict,
            y,
            lambda: p.lambda(),
            penalty: &work.penalty,
        };
        let obj = work.state.objective(&sub);
        if !obj.is_finite() {
            return Err(Error::Numerical(format!("non-finite objective at iteration {t}")));
        }
        trace.push(
            t,
            work.kept.len(),
            count_nonzero(&work.state.x),
            obj,
            start.elapsed().as_secs_f64(),
        );
        observe(&IterationView {
            t,
            theta: &work.state.theta,
            kept: &work.kept,
            x: &work.state.x,
            objective: obj,
            screen: pass.as_ref(),
        });
        if work.kept.is_empty() {
            converged = true;
            break;
        }
        let done = match cfg.gap_tol {
            Some(g) => {
                let x_full = expand(&work.state.x, &work.kept, k)?;
                let theta = p.residual_dual_point(&x_full)?;
                p.duality_gap(&x_full, &theta)? <= g
            }
            // λ < λ* here, so a zero iterate is never optimal; primal-dual
            // methods may idle at zero while the dual builds up
            None => {
                count_nonzero(&work.state.x) > 0 && (f_prev - obj).abs() / obj < cfg.rel_tol
            }
        };
        if done {
            converged = true;
            break;
        }
        f_prev = obj;
    }

    let x_star = expand(&work.state.x, &work.kept, k)?;
    let final_objective = p.objective(&x_star)?;
    trace.total_seconds = start.elapsed().as_secs_f64();
    Ok(SolveResult {
        x_star,
        iterations: t,
        trace,
        final_objective,
        eliminated: work.eliminated,
        lambda_star: ed.lambda_star,
        converged,
    })
}

struct Workspace<'a> {
    dict: Cow<'a, Dictionary>,
    penalty: Penalty,
    kept: IndexSet,
    eliminated: IndexSet,
    state: SolverState,
}

impl Workspace<'_> {
    /// Removes the atoms flagged in `mask` (aligned with `kept`).
    fn apply(&mut self, mask: &[bool]) -> Result<()> {
        if !mask.iter().any(|&m| m) {
            return Ok(());
        }
        let keep: Vec<bool> = mask.iter().map(|m| !m).collect();
        self.state.retain(&self.dict, &keep);
        match &mut self.dict {
            Cow::Borrowed(d) => {
                let positions = IndexSet::full(keep.len()).filter_by_mask(&keep, true);
                self.dict = Cow::Owned(d.select(&positions)?);
            }
            Cow::Owned(d) => d.retain_columns(&keep)?,
        }
        self.penalty.retain(&keep);
        self.eliminated = self.eliminated.union(&self.kept.filter_by_mask(mask, true));
        self.kept = self.kept.filter_by_mask(mask, false);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn identity_problem(lambda: f64) -> Problem {
        let d = Arc::new(Dictionary::identity_columns(2, 2).unwrap());
        Problem::lasso(d, vec![1.0, 0.0], lambda).unwrap()
    }

    #[test]
    fn trivial_regime_returns_zero() {
        let p = identity_problem(1.5);
        for s in Strategy::ALL {
            let r = run(&p, &SolverConfig::new(Algorithm::Ista, s, TestKind::Safe)).unwrap();
            assert_eq!(r.iterations, 0);
            assert_eq!(r.x_star, vec![0.0, 0.0]);
            assert_eq!(r.eliminated.len(), 2);
            assert_eq!(r.final_objective, 0.5);
        }
    }

    #[test]
    fn identity_instance_converges_to_closed_form() {
        let p = identity_problem(0.8);
        for a in Algorithm::ALL {
            for s in Strategy::ALL {
                for test in TestKind::LASSO {
                    let mut cfg = SolverConfig::new(a, s, test);
                    cfg.max_iters = 5000;
                    cfg.rel_tol = 1e-14;
                    let r = run(&p, &cfg).unwrap();
                    assert!((r.x_star[0] - 0.2).abs() < 1e-6, "{a} {s} {test}: {:?}", r.x_star);
                    assert_eq!(r.x_star[1], 0.0);
                    assert!((r.final_objective - 0.48).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn rejects_mismatched_test() {
        let p = identity_problem(0.8);
        let cfg = SolverConfig::new(Algorithm::Ista, Strategy::Dynamic, TestKind::GroupSafe);
        assert!(matches!(run(&p, &cfg), Err(Error::Incompatible(_))));
        // the test is irrelevant without screening
        let cfg = SolverConfig::new(Algorithm::Ista, Strategy::None, TestKind::GroupSafe);
        assert!(run(&p, &cfg).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        c.max_iters = 0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::default();
        c.backtrack_factor = 1.0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::default();
        c.rel_tol = 0.0;
        assert!(c.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn algorithm_parse() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("chambolle-pock".parse::<Algorithm>().unwrap(), Algorithm::ChambollePock);
    }
}
