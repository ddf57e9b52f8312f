//! Safe screening: dual scaling, safe regions and the screening tests.
//!
//! Every test bounds the dual optimum `θ*` inside a region built from an
//! arbitrary dual point `θ` and screens atom `i` when the maximum of
//! `|a_iᵀθ|` (or `‖D_gᵀθ‖/ω_g`) over the region stays below one. All
//! regions share the same structure: a fixed center `c` (independent of
//! `θ`), and a radius that only depends on `θ` through the dual-scaled
//! point `v = μθ`.
//!
//! | test       | center `c`                          | radius                      |
//! |------------|-------------------------------------|-----------------------------|
//! | SAFE/GSAFE | `y/λ`                               | `R = ‖y/λ − v‖`             |
//! | DST3/GST3  | projection of `y/λ` on the tangent  | `sqrt(R² − ‖y/λ − c‖²)`     |
//! |            | hyperplane of the `λ*` constraint   |                             |
//! | Dome       | `SAFE sphere ∩ {θ : a_*ᵀθ ≤ 1}`     | uses the DST3 radius        |

use std::fmt;
use std::str::FromStr;

use crate::dictionary::{GroupPartition, IndexSet};
use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dist_sq, dot, norm_inf, norm_sq};
use crate::problem::{dual_scale_factor, ExtremeDual, GroupLayout, Problem, ProblemKind};

/// Slack allowed on a negative squared radius before it is reported as a
/// numerical failure instead of being clamped to zero.
pub const RADIUS_CLAMP_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestKind {
    Safe,
    Dst3,
    Dome,
    GroupSafe,
    GroupSt3,
}

impl TestKind {
    pub const LASSO: [TestKind; 3] = [TestKind::Safe, TestKind::Dst3, TestKind::Dome];
    pub const GROUP: [TestKind; 2] = [TestKind::GroupSafe, TestKind::GroupSt3];

    pub fn problem_kind(self) -> ProblemKind {
        match self {
            TestKind::Safe | TestKind::Dst3 | TestKind::Dome => ProblemKind::Lasso,
            TestKind::GroupSafe | TestKind::GroupSt3 => ProblemKind::GroupLasso,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::Safe => "safe",
            TestKind::Dst3 => "dst3",
            TestKind::Dome => "dome",
            TestKind::GroupSafe => "gsafe",
            TestKind::GroupSt3 => "gst3",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "safe" => TestKind::Safe,
            "dst3" | "st3" => TestKind::Dst3,
            "dome" | "ddome" => TestKind::Dome,
            "gsafe" | "group-safe" => TestKind::GroupSafe,
            "gst3" | "group-st3" => TestKind::GroupSt3,
            _ => return Err(Error::InvalidArgument(format!("unknown screening test '{s}'"))),
        })
    }
}

/// Sphere `{θ : ‖θ − c‖ ≤ r}` known to contain the dual optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereRegion {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `Dᵀc` over the original dictionary.
    pub center_correlations: Vec<f64>,
}

/// Parameters of the dome `SAFE sphere ∩ {θ : a_*ᵀθ ≤ 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomeParams {
    pub lambda: f64,
    pub lambda_star: f64,
    /// `a_*ᵀa_i` for every original atom.
    pub star_correlations: Vec<f64>,
    /// `yᵀa_i` for every original atom.
    pub y_correlations: Vec<f64>,
    /// DST3 radius `sqrt(R² − (λ*/λ − 1)²)`.
    pub radius: f64,
}

/// Cumulative set of eliminated atoms and its complement.
#[derive(Clone, Debug, PartialEq)]
pub struct ScreenState {
    pub eliminated: IndexSet,
    pub kept: IndexSet,
    pub test_kind: TestKind,
}

impl ScreenState {
    pub fn new(k: usize, test_kind: TestKind) -> Self {
        ScreenState {
            eliminated: IndexSet::empty(),
            kept: IndexSet::full(k),
            test_kind,
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.eliminated.len() + self.kept.len()
    }
}

/// Adds the atoms flagged in `mask` (aligned with `state.kept`) to the
/// eliminated set.
pub fn screen_update(state: &ScreenState, mask: &[bool]) -> Result<ScreenState> {
    check_len(state.kept.len(), mask.len())?;
    let newly = state.kept.filter_by_mask(mask, true);
    Ok(ScreenState {
        eliminated: state.eliminated.union(&newly),
        kept: state.kept.filter_by_mask(mask, false),
        test_kind: state.test_kind,
    })
}

/// Lasso dual scaling: `μ = [θᵀy/(λ‖θ‖²)]` projected on `±1/corr_inf`.
pub fn dual_scale_lasso(p: &Problem, theta: &[f64], corr_inf: f64) -> (f64, Vec<f64>) {
    let mu = dual_scale_factor(theta, p.y(), p.lambda(), corr_inf);
    (mu, theta.iter().map(|t| mu * t).collect())
}

/// Group-Lasso dual scaling. `group_corr_norms[j]` is `‖D_gᵀθ‖` for the
/// partition group `group_ids[j]`; only those groups constrain `μ`.
pub fn dual_scale_group(
    p: &Problem,
    theta: &[f64],
    group_corr_norms: &[f64],
    group_ids: &[usize],
) -> Result<(f64, Vec<f64>)> {
    check_len(group_ids.len(), group_corr_norms.len())?;
    let part = p
        .partition()
        .ok_or_else(|| Error::Incompatible("group dual scaling on a Lasso problem".into()))?;
    let w = part.weights();
    let max_ratio = group_corr_norms
        .iter()
        .zip(group_ids)
        .map(|(n, &g)| n / w[g])
        .fold(0.0, f64::max);
    let mu = dual_scale_factor(theta, p.y(), p.lambda(), max_ratio);
    Ok((mu, theta.iter().map(|t| mu * t).collect()))
}

fn y_over_lambda(p: &Problem) -> Vec<f64> {
    p.y().iter().map(|v| v / p.lambda()).collect()
}

/// `sqrt(a)` for `a ≥ −RADIUS_CLAMP_SLACK`, clamping tiny negatives.
fn clamped_sqrt(a: f64) -> Result<f64> {
    if !a.is_finite() || a < -RADIUS_CLAMP_SLACK {
        return Err(Error::Numerical(format!("negative squared radius {a:e}")));
    }
    Ok(a.max(0.0).sqrt())
}

fn require_nontrivial(p: &Problem, ed: &ExtremeDual) -> Result<()> {
    if p.lambda() > ed.lambda_star {
        return Err(Error::TrivialRegime {
            lambda: p.lambda(),
            lambda_star: ed.lambda_star,
        });
    }
    Ok(())
}

fn require_kind(p: &Problem, kind: ProblemKind) -> Result<()> {
    if p.kind() != kind {
        return Err(Error::Incompatible(format!(
            "test requires a {} problem",
            kind.as_str()
        )));
    }
    Ok(())
}

/// `‖y/λ − μθ‖` with Lasso dual scaling over the full dictionary.
fn safe_sphere_radius(p: &Problem, theta: &[f64]) -> Result<f64> {
    let corr = p.dict().correlate(theta)?;
    let (_, v) = dual_scale_lasso(p, theta, norm_inf(&corr));
    Ok(dist_sq(&y_over_lambda(p), &v).sqrt())
}

fn group_sphere_radius(p: &Problem, theta: &[f64]) -> Result<f64> {
    let part = p.partition().expect("group problem");
    let corr = p.dict().correlate(theta)?;
    let norms: Vec<f64> = part
        .groups()
        .iter()
        .map(|g| g.iter().map(|i| corr[i] * corr[i]).sum::<f64>().sqrt())
        .collect();
    let ids: Vec<usize> = (0..part.len()).collect();
    let (_, v) = dual_scale_group(p, theta, &norms, &ids)?;
    Ok(dist_sq(&y_over_lambda(p), &v).sqrt())
}

/// SAFE sphere: center `y/λ`, radius `‖y/λ − μθ‖`.
pub fn region_safe(p: &Problem, theta: &[f64]) -> Result<SphereRegion> {
    require_kind(p, ProblemKind::Lasso)?;
    let center = y_over_lambda(p);
    Ok(SphereRegion {
        radius: safe_sphere_radius(p, theta)?,
        center_correlations: p.dict().correlate(&center)?,
        center,
    })
}

fn star_atom(ed: &ExtremeDual) -> Result<&[f64]> {
    ed.star_atom
        .as_deref()
        .ok_or_else(|| Error::Incompatible("extreme dual has no star atom".into()))
}

/// Dynamic ST3 sphere: center `y/λ − (λ*/λ − 1)a_*`,
/// radius `sqrt(‖μθ − y/λ‖² − (λ*/λ − 1)²)`.
pub fn region_dst3(p: &Problem, theta: &[f64], ed: &ExtremeDual) -> Result<SphereRegion> {
    require_kind(p, ProblemKind::Lasso)?;
    require_nontrivial(p, ed)?;
    let a_star = star_atom(ed)?;
    let shift = ed.lambda_star / p.lambda() - 1.0;
    let mut center = y_over_lambda(p);
    axpy(-shift, a_star, &mut center);
    let big_r = safe_sphere_radius(p, theta)?;
    let radius = clamped_sqrt(big_r * big_r - shift * shift * norm_sq(a_star))?;
    Ok(SphereRegion {
        radius,
        center_correlations: p.dict().correlate(&center)?,
        center,
    })
}

/// Group-SAFE sphere: center `y/λ`, radius `‖y/λ − μθ‖` with group scaling.
pub fn region_gsafe(p: &Problem, theta: &[f64]) -> Result<SphereRegion> {
    require_kind(p, ProblemKind::GroupLasso)?;
    let center = y_over_lambda(p);
    Ok(SphereRegion {
        radius: group_sphere_radius(p, theta)?,
        center_correlations: p.dict().correlate(&center)?,
        center,
    })
}

/// Normal `n = D_{g*}D_{g*}ᵀy/λ*` of the tangent hyperplane at `y/λ*`.
fn group_star_normal(p: &Problem, ed: &ExtremeDual) -> Result<Vec<f64>> {
    let part = p.partition().expect("group problem");
    let g_star = ed
        .star_group
        .ok_or_else(|| Error::Incompatible("extreme dual has no star group".into()))?;
    let d = p.dict();
    let mut n = vec![0.0; d.rows()];
    for i in part.group(g_star).iter() {
        let c = dot(d.column(i), p.y()) / ed.lambda_star;
        axpy(c, d.column(i), &mut n);
    }
    Ok(n)
}

/// Center of the dynamic Group-ST3 sphere: the projection of `y/λ` on
/// the hyperplane `{θ : nᵀθ = ω_{g*}²}`.
fn group_st3_center(p: &Problem, ed: &ExtremeDual, n: &[f64]) -> Vec<f64> {
    let part = p.partition().expect("group problem");
    let w = part.weights()[ed.star_group.expect("star group")];
    let nn = norm_sq(n);
    let mut c = y_over_lambda(p);
    let coef = (dot(n, &c) - w * w) / nn;
    axpy(-coef, n, &mut c);
    c
}

/// Dynamic Group-ST3 sphere.
pub fn region_gst3(p: &Problem, theta: &[f64], ed: &ExtremeDual) -> Result<SphereRegion> {
    require_kind(p, ProblemKind::GroupLasso)?;
    require_nontrivial(p, ed)?;
    let n = group_star_normal(p, ed)?;
    let center = group_st3_center(p, ed, &n);
    let offset_sq = dist_sq(&y_over_lambda(p), &center);
    let big_r = group_sphere_radius(p, theta)?;
    let radius = clamped_sqrt(big_r * big_r - offset_sq)?;
    Ok(SphereRegion {
        radius,
        center_correlations: p.dict().correlate(&center)?,
        center,
    })
}

/// Dome parameters at dual point `θ`.
pub fn dome_params(p: &Problem, theta: &[f64], ed: &ExtremeDual) -> Result<DomeParams> {
    let st3 = region_dst3(p, theta, ed)?;
    let a_star = star_atom(ed)?;
    Ok(DomeParams {
        lambda: p.lambda(),
        lambda_star: ed.lambda_star,
        star_correlations: p.dict().correlate(a_star)?,
        y_correlations: p.dict().correlate(p.y())?,
        radius: st3.radius,
    })
}

/// Sphere test for the Lasso: screen `i` iff `1 − |a_iᵀc| > r`.
pub fn test_sphere_lasso(region: &SphereRegion, kept: &IndexSet) -> Vec<bool> {
    kept.iter()
        .map(|i| 1.0 - region.center_correlations[i].abs() > region.radius)
        .collect()
}

/// Bounds `(Q^l(t), Q^u(t))` of the dome test for `t = a_*ᵀa_i`.
///
/// With `δ = λ*/λ − 1`, `R = sqrt(r² + δ²)` (the SAFE radius) and
/// `ψ = δ/R`, the maximum of `a_iᵀθ` over the dome is
/// `a_iᵀy/λ − δt + r·sqrt(1 − t²)` when `t ≥ −ψ` and `a_iᵀy/λ + R`
/// otherwise. At the static point `v = y/λ*` one has `ψ = λ*` and
/// `λ(1 − R) = λ − 1 + λ/λ*`.
pub fn dome_bounds(lambda: f64, lambda_star: f64, radius: f64, t: f64) -> (f64, f64) {
    let delta = lambda_star / lambda - 1.0;
    let big_r = (radius * radius + delta * delta).sqrt();
    let psi = if big_r > 0.0 { delta / big_r } else { 0.0 };
    let flat = lambda * (1.0 - big_r);
    let curved = lambda * radius * (1.0 - t * t).max(0.0).sqrt();
    let slope = (lambda_star - lambda) * t;
    let lower = if t > psi { -flat } else { slope - lambda + curved };
    let upper = if t < -psi { flat } else { slope + lambda - curved };
    (lower, upper)
}

/// Dome test: screen `i` iff `Q^l(a_*ᵀa_i) < yᵀa_i < Q^u(a_*ᵀa_i)`.
pub fn test_dome(dp: &DomeParams, kept: &IndexSet) -> Vec<bool> {
    if dp.radius >= 1.0 {
        return vec![false; kept.len()];
    }
    kept.iter()
        .map(|i| {
            let (lo, hi) = dome_bounds(dp.lambda, dp.lambda_star, dp.radius, dp.star_correlations[i]);
            let u = dp.y_correlations[i];
            lo < u && u < hi
        })
        .collect()
}

/// Group sphere test over `kept_groups`: screen `g` iff
/// `(ω_g − ‖D_gᵀc‖)/‖D_g‖ > r`.
pub fn test_sphere_group(
    region: &SphereRegion,
    partition: &GroupPartition,
    kept_groups: &[usize],
) -> Vec<bool> {
    kept_groups
        .iter()
        .map(|&g| group_sphere_score(partition, &region.center_correlations, g) > region.radius)
        .collect()
}

fn group_sphere_score(partition: &GroupPartition, center_corr: &[f64], g: usize) -> f64 {
    let cn = partition
        .group(g)
        .iter()
        .map(|i| center_corr[i] * center_corr[i])
        .sum::<f64>()
        .sqrt();
    (partition.weights()[g] - cn) / partition.spectral_norms()[g]
}

/// Expands a group mask to the atoms of `kept` (all atoms of a kept group
/// must be present in `kept`).
pub fn expand_group_mask(
    partition: &GroupPartition,
    kept: &IndexSet,
    kept_groups: &[usize],
    group_mask: &[bool],
) -> Vec<bool> {
    let mut screened = vec![false; partition.len()];
    for (&g, &m) in kept_groups.iter().zip(group_mask) {
        screened[g] = m;
    }
    kept.iter().map(|i| screened[partition.group_of(i)]).collect()
}

/// Groups having at least one atom in `kept`, in increasing order.
pub fn kept_groups(partition: &GroupPartition, kept: &IndexSet) -> Vec<usize> {
    let mut v: Vec<usize> = kept.iter().map(|i| partition.group_of(i)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Precomputed, per-run screening engine.
///
/// The center of every region is fixed for a given problem, so its
/// correlations with the atoms are computed once; each call to
/// [`Screener::screen`] then costs `O(|kept| + N)` on top of the
/// correlations `D_tᵀθ` that the solver already produced.
#[derive(Clone, Debug)]
pub struct Screener {
    kind: TestKind,
    lambda: f64,
    lambda_star: f64,
    /// `‖y/λ − c‖²`
    offset_sq: f64,
    /// Per atom (Lasso) or per group (Group-Lasso) sphere score; screen
    /// when the score exceeds the radius.
    score: Vec<f64>,
    star_corr: Vec<f64>,
    y_corr: Vec<f64>,
    weights: Vec<f64>,
    group_of: Vec<usize>,
    /// `a_*` (Lasso) or `g*` (Group-Lasso): its constraint is tight at
    /// `y/λ*`, so no test may remove it; guarded against rounding.
    protected: Option<usize>,
}

/// What a screening pass computed, for diagnostics and tests.
#[derive(Clone, Debug, PartialEq)]
pub struct ScreenPass {
    pub mu: f64,
    /// `‖y/λ − μθ‖`
    pub sphere_radius: f64,
    /// Radius of the test's own region.
    pub radius: f64,
    /// Aligned with the kept atoms; `true` means eliminate.
    pub mask: Vec<bool>,
}

impl Screener {
    /// Requires `λ ≤ λ*` and a test matching the problem kind.
    pub fn new(p: &Problem, kind: TestKind, ed: &ExtremeDual) -> Result<Self> {
        let y_corr = p.dict().correlate(p.y())?;
        Self::with_correlations(p, kind, ed, y_corr)
    }

    /// As [`Screener::new`] with `Dᵀy` supplied by the caller.
    pub fn with_correlations(
        p: &Problem,
        kind: TestKind,
        ed: &ExtremeDual,
        y_corr: Vec<f64>,
    ) -> Result<Self> {
        if kind.problem_kind() != p.kind() {
            return Err(Error::Incompatible(format!(
                "test '{kind}' cannot screen a {} problem",
                p.kind().as_str()
            )));
        }
        require_nontrivial(p, ed)?;
        check_len(p.n_atoms(), y_corr.len())?;
        let d = p.dict();
        let lambda = p.lambda();
        let mut out = Screener {
            kind,
            lambda,
            lambda_star: ed.lambda_star,
            offset_sq: 0.0,
            score: Vec::new(),
            star_corr: Vec::new(),
            y_corr: Vec::new(),
            weights: Vec::new(),
            group_of: Vec::new(),
            protected: ed.star_index.or(ed.star_group),
        };
        match kind {
            TestKind::Safe => {
                out.score = y_corr.iter().map(|c| 1.0 - (c / lambda).abs()).collect();
            }
            TestKind::Dst3 | TestKind::Dome => {
                let a_star = star_atom(ed)?;
                let shift = ed.lambda_star / lambda - 1.0;
                let star_corr = d.correlate(a_star)?;
                out.offset_sq = shift * shift * norm_sq(a_star);
                if kind == TestKind::Dst3 {
                    out.score = y_corr
                        .iter()
                        .zip(&star_corr)
                        .map(|(yc, sc)| 1.0 - (yc / lambda - shift * sc).abs())
                        .collect();
                } else {
                    out.star_corr = star_corr;
                    out.y_corr = y_corr;
                }
            }
            TestKind::GroupSafe | TestKind::GroupSt3 => {
                let part = p.partition().expect("group problem");
                let center_corr: Vec<f64> = if kind == TestKind::GroupSafe {
                    y_corr.iter().map(|c| c / lambda).collect()
                } else {
                    let n = group_star_normal(p, ed)?;
                    let center = group_st3_center(p, ed, &n);
                    out.offset_sq = dist_sq(&y_over_lambda(p), &center);
                    d.correlate(&center)?
                };
                out.score = (0..part.len())
                    .map(|g| group_sphere_score(part, &center_corr, g))
                    .collect();
                out.weights = part.weights().to_vec();
                out.group_of = (0..part.n_atoms()).map(|i| part.group_of(i)).collect();
            }
        }
        Ok(out)
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    /// Screens the kept atoms from dual point `theta`.
    ///
    /// `corr` holds `a_iᵀθ` for the kept atoms (same order as `kept`);
    /// it sets the dual scaling with respect to the current problem.
    /// `layout` is required for group tests and must describe `kept`.
    pub fn screen(
        &self,
        y: &[f64],
        theta: &[f64],
        corr: &[f64],
        kept: &IndexSet,
        layout: Option<&GroupLayout>,
    ) -> Result<ScreenPass> {
        check_len(kept.len(), corr.len())?;
        check_len(y.len(), theta.len())?;
        let max_ratio = match self.kind {
            TestKind::GroupSafe | TestKind::GroupSt3 => {
                let l = layout.ok_or_else(|| {
                    Error::Incompatible("group screening needs the group layout".into())
                })?;
                l.members
                    .iter()
                    .zip(&l.weights)
                    .map(|(m, w)| m.iter().map(|&j| corr[j] * corr[j]).sum::<f64>().sqrt() / w)
                    .fold(0.0, f64::max)
            }
            _ => norm_inf(corr),
        };
        let mu = dual_scale_factor(theta, y, self.lambda, max_ratio);
        let sphere_sq: f64 = y
            .iter()
            .zip(theta)
            .map(|(yi, ti)| {
                let d = yi / self.lambda - mu * ti;
                d * d
            })
            .sum();
        let radius = clamped_sqrt(sphere_sq - self.offset_sq)?;
        let mask = self.mask_for_radius(kept, radius);
        Ok(ScreenPass {
            mu,
            sphere_radius: sphere_sq.sqrt(),
            radius,
            mask,
        })
    }

    /// Screening decisions for a given region radius.
    pub fn mask_for_radius(&self, kept: &IndexSet, radius: f64) -> Vec<bool> {
        let mut mask = self.raw_mask(kept, radius);
        if let Some(p) = self.protected {
            for (m, i) in mask.iter_mut().zip(kept.iter()) {
                let id = if self.group_of.is_empty() { i } else { self.group_of[i] };
                if id == p {
                    *m = false;
                }
            }
        }
        mask
    }

    fn raw_mask(&self, kept: &IndexSet, radius: f64) -> Vec<bool> {
        match self.kind {
            TestKind::Safe | TestKind::Dst3 => kept.iter().map(|i| self.score[i] > radius).collect(),
            TestKind::GroupSafe | TestKind::GroupSt3 => kept
                .iter()
                .map(|i| self.score[self.group_of[i]] > radius)
                .collect(),
            TestKind::Dome => {
                if radius >= 1.0 {
                    return vec![false; kept.len()];
                }
                kept.iter()
                    .map(|i| {
                        let (lo, hi) =
                            dome_bounds(self.lambda, self.lambda_star, radius, self.star_corr[i]);
                        let u = self.y_corr[i];
                        lo < u && u < hi
                    })
                    .collect()
            }
        }
    }

    /// Group weights indexed by partition group (empty for Lasso tests).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::Dictionary;
    use std::sync::Arc;

    fn identity_problem(lambda: f64) -> Problem {
        let d = Arc::new(Dictionary::identity_columns(2, 2).unwrap());
        Problem::lasso(d, vec![1.0, 0.0], lambda).unwrap()
    }

    fn singleton_group_problem(lambda: f64) -> Problem {
        let d = Arc::new(Dictionary::identity_columns(2, 2).unwrap());
        let part = Arc::new(GroupPartition::singletons(&d).unwrap());
        Problem::group_lasso(d, part, vec![1.0, 0.0], lambda).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn dual_scale_lasso_examples() {
        let p = identity_problem(0.8);
        let (mu, v) = dual_scale_lasso(&p, &[1.0, 0.0], 1.0);
        assert!(close(mu, 1.0));
        assert_eq!(v, vec![1.0, 0.0]);
        // θ = −y: μ = −1/λ*
        let (mu, v) = dual_scale_lasso(&p, &[-1.0, 0.0], 1.0);
        assert!(close(mu, -1.0));
        assert!(close(v[0], 1.0));
        let (mu, _) = dual_scale_lasso(&p, &[1.0, 0.0], 0.0);
        assert!(close(mu, 1.25));
        assert_eq!(dual_scale_lasso(&p, &[0.0, 0.0], 1.0), (0.0, vec![0.0, 0.0]));
    }

    #[test]
    fn dual_scale_group_matches_lasso_on_singletons() {
        let pl = identity_problem(0.8);
        let pg = singleton_group_problem(0.8);
        for theta in [[1.0, 0.0], [0.3, -0.7], [-2.0, 0.5]] {
            let corr = pl.dict().correlate(&theta).unwrap();
            let a = dual_scale_lasso(&pl, &theta, norm_inf(&corr));
            let norms: Vec<f64> = corr.iter().map(|c| c.abs()).collect();
            let b = dual_scale_group(&pg, &theta, &norms, &[0, 1]).unwrap();
            assert!(close(a.0, b.0));
        }
        let (mu, _) = dual_scale_group(&pg, &[1.0, 0.0], &[0.0, 0.0], &[0, 1]).unwrap();
        assert!(close(mu, 1.25));
        let (mu, _) = dual_scale_group(&pg, &[0.0, 0.0], &[0.0, 0.0], &[0, 1]).unwrap();
        assert_eq!(mu, 0.0);
    }

    #[test]
    fn safe_region_examples() {
        let p = identity_problem(0.8);
        let r = region_safe(&p, &[1.0, 0.0]).unwrap();
        assert!(close(r.center[0], 1.25) && close(r.radius, 0.25));
        // θ = 0 -> r = ‖y/λ‖
        let r0 = region_safe(&p, &[0.0, 0.0]).unwrap();
        assert!(close(r0.radius, 1.25));
        // λ = λ*: zero radius, screens |a_iᵀy| < λ*
        let p1 = identity_problem(1.0);
        let r1 = region_safe(&p1, &[1.0, 0.0]).unwrap();
        assert!(close(r1.radius, 0.0));
        assert_eq!(test_sphere_lasso(&r1, &IndexSet::full(2)), vec![false, true]);
    }

    #[test]
    fn sphere_screens_nothing_with_radius_one() {
        let p = identity_problem(0.8);
        let mut r = region_safe(&p, &[1.0, 0.0]).unwrap();
        r.radius = 1.0;
        assert_eq!(test_sphere_lasso(&r, &IndexSet::full(2)), vec![false, false]);
    }

    #[test]
    fn dst3_region_examples() {
        let p = identity_problem(0.8);
        let ed = p.extreme_dual();
        let r = region_dst3(&p, &[1.0, 0.0], &ed).unwrap();
        assert!(close(r.center[0], 1.0) && close(r.center[1], 0.0));
        assert!(close(r.radius, 0.0));
        assert_eq!(test_sphere_lasso(&r, &IndexSet::full(2)), vec![false, true]);
        // λ = λ*: no shift
        let p1 = identity_problem(1.0);
        let r1 = region_dst3(&p1, &[0.3, 0.1], &p1.extreme_dual()).unwrap();
        assert!(close(r1.center[0], 1.0));
        // λ > λ*
        let p2 = identity_problem(1.5);
        assert!(matches!(
            region_dst3(&p2, &[1.0, 0.0], &p2.extreme_dual()),
            Err(Error::TrivialRegime { .. })
        ));
    }

    #[test]
    fn dome_identity_example() {
        let p = identity_problem(0.8);
        let ed = p.extreme_dual();
        let dp = dome_params(&p, &[1.0, 0.0], &ed).unwrap();
        assert!(close(dp.radius, 0.0));
        let (lo, hi) = dome_bounds(0.8, 1.0, 0.0, 0.0);
        assert!(close(lo, -0.8) && close(hi, 0.8));
        let (_, hi1) = dome_bounds(0.8, 1.0, 0.0, 1.0);
        assert!(close(hi1, 1.0));
        assert_eq!(test_dome(&dp, &IndexSet::full(2)), vec![false, true]);
        let mut big = dp.clone();
        big.radius = 1.0;
        assert_eq!(test_dome(&big, &IndexSet::full(2)), vec![false, false]);
    }

    #[test]
    fn dome_bounds_reduce_to_static_form() {
        // static point: R = 1/λ − 1/λ*, so ψ = λ* and λ(1 − R) = λ − 1 + λ/λ*
        let (lambda, ls): (f64, f64) = (0.5, 0.8);
        let delta = ls / lambda - 1.0;
        let big_r = 1.0 / lambda - 1.0 / ls;
        let r = (big_r * big_r - delta * delta).sqrt();
        let flat = lambda - 1.0 + lambda / ls;
        for t in [-0.95, -0.81, 0.81, 0.95] {
            let (lo, hi) = dome_bounds(lambda, ls, r, t);
            if t < -ls {
                assert!((hi - flat).abs() < 1e-12);
            }
            if t > ls {
                assert!((lo + flat).abs() < 1e-12);
            }
        }
        for t in [-0.7, 0.0, 0.7] {
            let (lo, hi) = dome_bounds(lambda, ls, r, t);
            let curved = lambda * r * (1.0 - t * t).sqrt();
            assert!((hi - ((ls - lambda) * t + lambda - curved)).abs() < 1e-12);
            assert!((lo - ((ls - lambda) * t - lambda + curved)).abs() < 1e-12);
        }
    }

    #[test]
    fn gsafe_and_gst3_examples() {
        let p = singleton_group_problem(0.8);
        let part = p.partition().unwrap().clone();
        let r = region_gsafe(&p, &[1.0, 0.0]).unwrap();
        assert!(close(r.center[0], 1.25) && close(r.radius, 0.25));
        assert_eq!(test_sphere_group(&r, &part, &[0, 1]), vec![false, true]);
        let r0 = region_gsafe(&p, &[0.0, 0.0]).unwrap();
        assert!(close(r0.radius, 1.25));

        let ed = p.extreme_dual();
        let r3 = region_gst3(&p, &[1.0, 0.0], &ed).unwrap();
        assert!(close(r3.center[0], 1.0) && close(r3.center[1], 0.0));
        assert!(close(r3.radius, 0.0));
        assert_eq!(test_sphere_group(&r3, &part, &[0, 1]), vec![false, true]);
    }

    #[test]
    fn screen_update_examples() {
        let s = ScreenState::new(4, TestKind::Safe);
        assert_eq!(screen_update(&s, &[false; 4]).unwrap(), s);
        let all = screen_update(&s, &[true; 4]).unwrap();
        assert!(all.kept.is_empty());
        assert_eq!(all.eliminated.len(), 4);
        let s1 = screen_update(&s, &[true, false, false, false]).unwrap();
        let s2 = screen_update(&s1, &[false, false, true]).unwrap();
        let direct = screen_update(&s, &[true, false, false, true]).unwrap();
        assert_eq!(s2, direct);
        assert!(screen_update(&s, &[true]).is_err());
    }

    #[test]
    fn screener_rejects_mismatched_tests() {
        let p = identity_problem(0.8);
        let ed = p.extreme_dual();
        assert!(Screener::new(&p, TestKind::GroupSafe, &ed).is_err());
        let pg = singleton_group_problem(0.8);
        assert!(Screener::new(&pg, TestKind::Dome, &pg.extreme_dual()).is_err());
        let p2 = identity_problem(1.2);
        assert!(Screener::new(&p2, TestKind::Safe, &p2.extreme_dual()).is_err());
    }

    #[test]
    fn test_kind_parsing() {
        for k in TestKind::LASSO.iter().chain(&TestKind::GROUP) {
            assert_eq!(k.as_str().parse::<TestKind>().unwrap(), *k);
        }
        assert!("nope".parse::<TestKind>().is_err());
    }
}
