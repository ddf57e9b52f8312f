//! Lasso and Group-Lasso problem definitions.
//!
//! Both problems minimize `½‖Dx − y‖² + λ Ω(x)`, with `Ω = ‖·‖₁` for the
//! Lasso and `Ω = Σ_g ω_g ‖x_g‖` for the Group-Lasso. Their common dual is
//! `max ½‖y‖² − (λ²/2)‖θ − y/λ‖²` under `|a_iᵀθ| ≤ 1` (Lasso) or
//! `‖D_gᵀθ‖ ≤ ω_g` (Group-Lasso).

use std::sync::Arc;

use crate::dictionary::{Dictionary, GroupPartition, IndexSet};
use crate::error::{check_len, Error, Result};
use crate::linalg::{dist_sq, dot, norm, norm_sq};

/// Default tolerance for dual-feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Tolerance on `‖y‖ = 1`.
pub const UNIT_OBS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Lasso,
    GroupLasso,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Lasso => "lasso",
            ProblemKind::GroupLasso => "group-lasso",
        }
    }
}

/// Regularizer restricted to the currently active coordinates.
///
/// Group members are stored as positions into the active coordinate
/// vector; `ids` maps each local group back to the partition.
#[derive(Clone, Debug, PartialEq)]
pub enum Penalty {
    L1,
    Group(GroupLayout),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupLayout {
    pub members: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    pub ids: Vec<usize>,
}

impl GroupLayout {
    pub fn from_partition(p: &GroupPartition) -> Self {
        GroupLayout {
            members: p.groups().iter().map(|g| g.as_slice().to_vec()).collect(),
            weights: p.weights().to_vec(),
            ids: (0..p.len()).collect(),
        }
    }
}

impl Penalty {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Penalty::L1 => x.iter().map(|v| v.abs()).sum(),
            Penalty::Group(l) => l
                .members
                .iter()
                .zip(&l.weights)
                .map(|(m, w)| w * m.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt())
                .sum(),
        }
    }

    /// In-place proximal step with threshold `t`.
    pub fn prox_in_place(&self, x: &mut [f64], t: f64) {
        match self {
            Penalty::L1 => x.iter_mut().for_each(|v| *v = soft_threshold(*v, t)),
            Penalty::Group(l) => {
                for (m, w) in l.members.iter().zip(&l.weights) {
                    let n = m.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt();
                    let shrink = if n == 0.0 { 0.0 } else { ((n - t * w) / n).max(0.0) };
                    for &i in m {
                        x[i] *= shrink;
                    }
                }
            }
        }
    }

    /// Drops the coordinates whose `keep` flag is false and renumbers the
    /// remaining ones. Groups left without members disappear.
    pub fn retain(&mut self, keep: &[bool]) {
        if let Penalty::Group(l) = self {
            let mut new_pos = vec![usize::MAX; keep.len()];
            let mut next = 0;
            for (i, &k) in keep.iter().enumerate() {
                if k {
                    new_pos[i] = next;
                    next += 1;
                }
            }
            let mut members = Vec::new();
            let mut weights = Vec::new();
            let mut ids = Vec::new();
            for ((m, w), id) in l.members.iter().zip(&l.weights).zip(&l.ids) {
                let nm: Vec<usize> = m
                    .iter()
                    .filter(|&&i| keep[i])
                    .map(|&i| new_pos[i])
                    .collect();
                if !nm.is_empty() {
                    members.push(nm);
                    weights.push(*w);
                    ids.push(*id);
                }
            }
            *l = GroupLayout {
                members,
                weights,
                ids,
            };
        }
    }

    pub fn layout(&self) -> Option<&GroupLayout> {
        match self {
            Penalty::L1 => None,
            Penalty::Group(l) => Some(l),
        }
    }

    pub fn group_count(&self) -> usize {
        match self {
            Penalty::L1 => 0,
            Penalty::Group(l) => l.members.len(),
        }
    }
}

#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Component-wise soft-thresholding `sign(x)·max(|x| − t, 0)`.
pub fn prox_l1(x: &[f64], t: f64) -> Result<Vec<f64>> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidArgument(format!("threshold must be >= 0, got {t}")));
    }
    Ok(x.iter().map(|&v| soft_threshold(v, t)).collect())
}

/// Group soft-thresholding; groups with zero norm map to zero.
pub fn prox_group(x: &[f64], t: f64, partition: &GroupPartition) -> Result<Vec<f64>> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidArgument(format!("threshold must be >= 0, got {t}")));
    }
    check_len(partition.n_atoms(), x.len())?;
    let mut out = x.to_vec();
    Penalty::Group(GroupLayout::from_partition(partition)).prox_in_place(&mut out, t);
    Ok(out)
}

/// Scatters a reduced vector back to `k` original coordinates.
pub fn expand(x_reduced: &[f64], kept: &IndexSet, k: usize) -> Result<Vec<f64>> {
    check_len(kept.len(), x_reduced.len())?;
    if kept.max().is_some_and(|m| m >= k) {
        return Err(Error::InvalidIndexSet(format!("index out of range for {k} atoms")));
    }
    let mut out = vec![0.0; k];
    for (v, i) in x_reduced.iter().zip(kept.iter()) {
        out[i] = *v;
    }
    Ok(out)
}

/// Scale of `θ` closest to `y/λ` that satisfies the dual constraints,
/// given the largest constraint ratio of `θ` (`‖Dᵀθ‖∞` for the Lasso,
/// `max_g ‖D_gᵀθ‖/ω_g` for the Group-Lasso). Zero `θ` yields zero.
pub fn dual_scale_factor(theta: &[f64], y: &[f64], lambda: f64, max_ratio: f64) -> f64 {
    let tn = norm_sq(theta);
    if tn == 0.0 {
        return 0.0;
    }
    let mu = dot(theta, y) / (lambda * tn);
    if max_ratio > 0.0 {
        let bound = 1.0 / max_ratio;
        mu.clamp(-bound, bound)
    } else {
        mu
    }
}

/// `λ*` and the dual quantities attached to it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremeDual {
    pub lambda_star: f64,
    /// Lasso: `a_* = ±a_i` with `a_*ᵀy = λ*`.
    pub star_atom: Option<Vec<f64>>,
    /// Lasso: index of the atom behind `a_*`.
    pub star_index: Option<usize>,
    /// Group-Lasso: `g*`.
    pub star_group: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum Regularizer {
    L1,
    Group(Arc<GroupPartition>),
}

/// A Lasso or Group-Lasso instance with unit-norm observation.
#[derive(Clone, Debug)]
pub struct Problem {
    dict: Arc<Dictionary>,
    y: Vec<f64>,
    lambda: f64,
    reg: Regularizer,
}

impl Problem {
    pub fn lasso(dict: Arc<Dictionary>, y: Vec<f64>, lambda: f64) -> Result<Self> {
        Self::new(dict, y, lambda, Regularizer::L1)
    }

    pub fn group_lasso(
        dict: Arc<Dictionary>,
        partition: Arc<GroupPartition>,
        y: Vec<f64>,
        lambda: f64,
    ) -> Result<Self> {
        check_len(dict.cols(), partition.n_atoms())?;
        Self::new(dict, y, lambda, Regularizer::Group(partition))
    }

    fn new(dict: Arc<Dictionary>, y: Vec<f64>, lambda: f64, reg: Regularizer) -> Result<Self> {
        check_len(dict.rows(), y.len())?;
        let yn = norm(&y);
        if (yn - 1.0).abs() > UNIT_OBS_TOL {
            return Err(Error::InvalidArgument(format!(
                "observation must have unit norm, got {yn}"
            )));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
        }
        Ok(Problem { dict, y, lambda, reg })
    }

    /// Same data with another regularization weight.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.dict.clone(), self.y.clone(), lambda, self.reg.clone())
    }

    pub fn kind(&self) -> ProblemKind {
        match self.reg {
            Regularizer::L1 => ProblemKind::Lasso,
            Regularizer::Group(_) => ProblemKind::GroupLasso,
        }
    }

    pub fn dict(&self) -> &Dictionary {
        &self.dict
    }

    pub fn dict_arc(&self) -> &Arc<Dictionary> {
        &self.dict
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn partition(&self) -> Option<&GroupPartition> {
        match &self.reg {
            Regularizer::L1 => None,
            Regularizer::Group(p) => Some(p),
        }
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.reg
    }

    pub fn n_atoms(&self) -> usize {
        self.dict.cols()
    }

    pub fn group_count(&self) -> usize {
        self.partition().map_or(0, |p| p.len())
    }

    /// Penalty over the full coordinate set.
    pub fn penalty(&self) -> Penalty {
        match &self.reg {
            Regularizer::L1 => Penalty::L1,
            Regularizer::Group(p) => Penalty::Group(GroupLayout::from_partition(p)),
        }
    }

    /// `F(x) = ½‖Dx − y‖² + λΩ(x)` for a full-length `x`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let dx = self.dict.apply(x)?;
        Ok(0.5 * dist_sq(&dx, &self.y) + self.lambda * self.penalty().value(x))
    }

    pub fn extreme_dual(&self) -> ExtremeDual {
        let corr = self.dict.correlate(&self.y).expect("dimensions checked");
        self.extreme_dual_from(&corr)
    }

    /// Same as [`Problem::extreme_dual`] from precomputed `Dᵀy`.
    pub fn extreme_dual_from(&self, corr: &[f64]) -> ExtremeDual {
        match &self.reg {
            Regularizer::L1 => {
                let mut best = 0;
                for (i, c) in corr.iter().enumerate() {
                    if c.abs() > corr[best].abs() {
                        best = i;
                    }
                }
                let sign = if corr[best] < 0.0 { -1.0 } else { 1.0 };
                let atom = self.dict.column(best).iter().map(|v| sign * v).collect();
                ExtremeDual {
                    lambda_star: corr[best].abs(),
                    star_atom: Some(atom),
                    star_index: Some(best),
                    star_group: None,
                }
            }
            Regularizer::Group(p) => {
                let ratios = group_ratios(p, corr);
                let mut best = 0;
                for (g, r) in ratios.iter().enumerate() {
                    if *r > ratios[best] {
                        best = g;
                    }
                }
                ExtremeDual {
                    lambda_star: ratios[best],
                    star_atom: None,
                    star_index: None,
                    star_group: Some(best),
                }
            }
        }
    }

    /// Largest dual-constraint ratio of `θ`: `max_i |a_iᵀθ|` or
    /// `max_g ‖D_gᵀθ‖/ω_g`. Feasibility means a ratio of at most one.
    pub fn max_constraint(&self, theta: &[f64]) -> Result<f64> {
        let corr = self.dict.correlate(theta)?;
        Ok(match &self.reg {
            Regularizer::L1 => corr.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Regularizer::Group(p) => group_ratios(p, &corr).into_iter().fold(0.0, f64::max),
        })
    }

    pub fn dual_feasible(&self, theta: &[f64], tol: f64) -> bool {
        self.max_constraint(theta)
            .map(|m| m <= 1.0 + tol)
            .unwrap_or(false)
    }

    /// `½‖y‖² − (λ²/2)‖θ − y/λ‖²`.
    pub fn dual_objective(&self, theta: &[f64]) -> f64 {
        let l = self.lambda;
        let d: f64 = theta
            .iter()
            .zip(&self.y)
            .map(|(t, y)| (t - y / l) * (t - y / l))
            .sum();
        0.5 * norm_sq(&self.y) - 0.5 * l * l * d
    }

    /// `F(x) − G(θ)` for a dual-feasible `θ`.
    pub fn duality_gap(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        let m = self.max_constraint(theta)?;
        if m > 1.0 + 1e-9 {
            return Err(Error::InfeasibleDual(m));
        }
        let primal = self.objective(x)?;
        let gap = primal - self.dual_objective(theta);
        if gap < -1e-12 * primal.abs().max(1.0) {
            return Err(Error::Numerical(format!("negative duality gap {gap:e}")));
        }
        Ok(gap.max(0.0))
    }

    /// Feasible dual point obtained by scaling the residual `(y − Dx)/λ`.
    pub fn residual_dual_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dx = self.dict.apply(x)?;
        let r: Vec<f64> = self
            .y
            .iter()
            .zip(&dx)
            .map(|(y, d)| (y - d) / self.lambda)
            .collect();
        let m = self.max_constraint(&r)?;
        let mu = dual_scale_factor(&r, &self.y, self.lambda, m);
        Ok(r.iter().map(|v| mu * v).collect())
    }
}

/// `‖D_gᵀθ‖/ω_g` per group from the correlations `Dᵀθ`.
pub fn group_ratios(p: &GroupPartition, corr: &[f64]) -> Vec<f64> {
    p.groups()
        .iter()
        .zip(p.weights())
        .map(|(g, w)| g.iter().map(|i| corr[i] * corr[i]).sum::<f64>().sqrt() / w)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_lasso(y: Vec<f64>, lambda: f64) -> Problem {
        let d = Arc::new(Dictionary::identity_columns(2, 2).unwrap());
        Problem::lasso(d, y, lambda).unwrap()
    }

    #[test]
    fn objective_examples() {
        let p = identity_lasso(vec![1.0, 0.0], 0.8);
        assert!((p.objective(&[0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((p.objective(&[0.2, 0.0]).unwrap() - 0.48).abs() < 1e-15);
        assert!(p.objective(&[0.0]).is_err());
    }

    #[test]
    fn group_objective_by_hand() {
        let d = Arc::new(Dictionary::identity_columns(2, 2).unwrap());
        let part = Arc::new(
            GroupPartition::new(&d, vec![IndexSet::full(2)], Some(vec![2f64.sqrt()])).unwrap(),
        );
        let p = Problem::group_lasso(d, part, vec![1.0, 0.0], 0.5).unwrap();
        // ½‖(0.3,0.4) − (1,0)‖² + 0.5·√2·0.5
        let expect = 0.5 * (0.49 + 0.16) + 0.5 * 2f64.sqrt() * 0.5;
        assert!((p.objective(&[0.3, 0.4]).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(prox_l1(&[2.0, -0.5, 0.0], 1.0).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(prox_l1(&[2.0, -0.5], 0.0).unwrap(), vec![2.0, -0.5]);
        assert!(prox_l1(&[1.0], -1.0).is_err());
    }

    #[test]
    fn group_soft_threshold_examples() {
        let d = Dictionary::identity_columns(2, 2).unwrap();
        let part = GroupPartition::new(&d, vec![IndexSet::full(2)], Some(vec![2.0])).unwrap();
        let out = prox_group(&[3.0, 4.0], 1.0, &part).unwrap();
        assert!((out[0] - 1.8).abs() < 1e-15 && (out[1] - 2.4).abs() < 1e-15);
        assert_eq!(prox_group(&[0.0, 0.0], 1.0, &part).unwrap(), vec![0.0, 0.0]);
        assert_eq!(prox_group(&[3.0, 4.0], 0.0, &part).unwrap(), vec![3.0, 4.0]);
        assert!(prox_group(&[3.0, 4.0], -1.0, &part).is_err());
    }

    #[test]
    fn extreme_dual_examples() {
        let p = identity_lasso(vec![0.6, 0.8], 0.5);
        let ed = p.extreme_dual();
        assert!((ed.lambda_star - 0.8).abs() < 1e-15);
        assert_eq!(ed.star_atom.unwrap(), vec![0.0, 1.0]);

        let p = identity_lasso(vec![0.6, -0.8], 0.5);
        let ed = p.extreme_dual();
        let a = ed.star_atom.unwrap();
        assert_eq!(a, vec![0.0, -1.0]);
        assert!(dot(&a, p.y()) > 0.0);

        let d = Arc::new(Dictionary::identity_columns(2, 2).unwrap());
        let part = Arc::new(
            GroupPartition::new(&d, vec![IndexSet::full(2)], Some(vec![2f64.sqrt()])).unwrap(),
        );
        let p = Problem::group_lasso(d, part, vec![0.6, 0.8], 0.5).unwrap();
        let ed = p.extreme_dual();
        assert!((ed.lambda_star - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ed.star_group, Some(0));
    }

    #[test]
    fn extreme_dual_ties_pick_lowest_index() {
        let p = identity_lasso(vec![0.5f64.sqrt(), 0.5f64.sqrt()], 0.5);
        assert_eq!(p.extreme_dual().star_index, Some(0));
    }

    #[test]
    fn feasibility_examples() {
        let p = identity_lasso(vec![0.6, 0.8], 0.5);
        let ls = p.extreme_dual().lambda_star;
        assert!(p.dual_feasible(&[0.0, 0.0], 0.0));
        let th: Vec<f64> = p.y().iter().map(|v| v / ls).collect();
        assert!(p.dual_feasible(&th, 1e-12));
        let th2: Vec<f64> = th.iter().map(|v| 2.0 * v).collect();
        assert!(!p.dual_feasible(&th2, 1e-12));
    }

    #[test]
    fn duality_gap_examples() {
        let p = identity_lasso(vec![1.0, 0.0], 0.8);
        // x* = (0.2, 0), θ* = (y − x*)/λ = (1, 0)
        assert!(p.duality_gap(&[0.2, 0.0], &[1.0, 0.0]).unwrap() < 1e-12);
        assert!((p.duality_gap(&[0.0, 0.0], &[0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            p.duality_gap(&[0.0, 0.0], &[3.0, 0.0]),
            Err(Error::InfeasibleDual(_))
        ));
    }

    #[test]
    fn zero_is_optimal_above_lambda_star() {
        let p = identity_lasso(vec![0.6, 0.8], 0.9);
        let th: Vec<f64> = p.y().iter().map(|v| v / p.lambda()).collect();
        assert!(p.duality_gap(&[0.0, 0.0], &th).unwrap() < 1e-10);
    }

    #[test]
    fn expand_examples() {
        let kept = IndexSet::new(vec![1, 3]).unwrap();
        assert_eq!(expand(&[5.0, 7.0], &kept, 4).unwrap(), vec![0.0, 5.0, 0.0, 7.0]);
        assert_eq!(expand(&[], &IndexSet::empty(), 3).unwrap(), vec![0.0; 3]);
        assert_eq!(
            expand(&[1.0, 2.0], &IndexSet::full(2), 2).unwrap(),
            vec![1.0, 2.0]
        );
        assert!(expand(&[1.0], &kept, 4).is_err());
    }

    #[test]
    fn problem_validation() {
        let d = Arc::new(Dictionary::identity_columns(2, 2).unwrap());
        assert!(Problem::lasso(d.clone(), vec![1.0, 1.0], 0.5).is_err());
        assert!(Problem::lasso(d.clone(), vec![1.0, 0.0], 0.0).is_err());
        assert!(Problem::lasso(d, vec![1.0, 0.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn penalty_retain_drops_groups() {
        let mut pen = Penalty::Group(GroupLayout {
            members: vec![vec![0, 1], vec![2], vec![3, 4]],
            weights: vec![1.0, 2.0, 3.0],
            ids: vec![0, 1, 2],
        });
        pen.retain(&[true, true, false, true, true]);
        match pen {
            Penalty::Group(l) => {
                assert_eq!(l.members, vec![vec![0, 1], vec![2, 3]]);
                assert_eq!(l.weights, vec![1.0, 3.0]);
                assert_eq!(l.ids, vec![0, 2]);
            }
            Penalty::L1 => unreachable!(),
        }
    }
}
