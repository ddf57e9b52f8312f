//! Reference solver and screening-safety verifier.
//!
//! Deliberately simple and slow: cyclic coordinate descent for the Lasso
//! and proximal block-coordinate descent for the Group-Lasso, stopped on
//! a certified duality gap.

use crate::dictionary::IndexSet;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq};
use crate::problem::{soft_threshold, Problem, Regularizer};
use crate::screening::ScreenState;

/// Entries of magnitude at most this are treated as zero.
pub const SUPPORT_EPS: f64 = 1e-9;

/// Largest gap for which [`verify_screen_safety`] trusts a reference.
pub const SAFETY_GAP: f64 = 1e-10;

const DEFAULT_MAX_SWEEPS: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub x_ref: Vec<f64>,
    pub gap: f64,
    pub support: IndexSet,
    pub objective: f64,
    pub sweeps: usize,
}

pub fn solve_reference(p: &Problem, gap_tol: f64) -> Result<OracleResult> {
    solve_reference_with(p, gap_tol, DEFAULT_MAX_SWEEPS)
}

pub fn solve_reference_with(p: &Problem, gap_tol: f64, max_sweeps: usize) -> Result<OracleResult> {
    if !(gap_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("gap_tol must be > 0, got {gap_tol}")));
    }
    let d = p.dict();
    let k = d.cols();
    let lambda = p.lambda();
    let mut x = vec![0.0; k];
    // r = y − Dx
    let mut r = p.y().to_vec();
    let col_sq: Vec<f64> = (0..k).map(|j| norm_sq(d.column(j))).collect();

    let mut sweeps = 0;
    loop {
        let theta = p.residual_dual_point(&x)?;
        let gap = p.duality_gap(&x, &theta)?;
        if gap <= gap_tol {
            return Ok(finish(p, x, gap, sweeps)?);
        }
        if sweeps >= max_sweeps {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                gap,
            });
        }
        // a few sweeps between certificates
        for _ in 0..10 {
            match p.regularizer() {
                Regularizer::L1 => {
                    for j in 0..k {
                        if col_sq[j] == 0.0 {
                            continue;
                        }
                        let a = d.column(j);
                        let rho = dot(a, &r) + col_sq[j] * x[j];
                        let new = soft_threshold(rho, lambda) / col_sq[j];
                        let delta = new - x[j];
                        if delta != 0.0 {
                            r.iter_mut().zip(a).for_each(|(ri, ai)| *ri -= delta * ai);
                            x[j] = new;
                        }
                    }
                }
                Regularizer::Group(part) => {
                    for (g, members) in part.groups().iter().enumerate() {
                        let lg = part.spectral_norms()[g].powi(2);
                        if lg == 0.0 {
                            continue;
                        }
                        let z: Vec<f64> = members
                            .iter()
                            .map(|i| x[i] + dot(d.column(i), &r) / lg)
                            .collect();
                        let zn = norm_sq(&z).sqrt();
                        let t = lambda * part.weights()[g] / lg;
                        let shrink = if zn > t { 1.0 - t / zn } else { 0.0 };
                        for (i, zi) in members.iter().zip(&z) {
                            let delta = shrink * zi - x[i];
                            if delta != 0.0 {
                                r.iter_mut()
                                    .zip(d.column(i))
                                    .for_each(|(ri, ai)| *ri -= delta * ai);
                                x[i] += delta;
                            }
                        }
                    }
                }
            }
            sweeps += 1;
        }
        // refresh the residual to keep rounding from drifting
        let dx = d.apply(&x)?;
        r.iter_mut()
            .zip(p.y().iter().zip(&dx))
            .for_each(|(ri, (yi, di))| *ri = yi - di);
    }
}

fn finish(p: &Problem, x: Vec<f64>, gap: f64, sweeps: usize) -> Result<OracleResult> {
    let support = IndexSet::from_unsorted(
        x.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > SUPPORT_EPS)
            .map(|(i, _)| i)
            .collect(),
    );
    Ok(OracleResult {
        objective: p.objective(&x)?,
        x_ref: x,
        gap,
        support,
        sweeps,
    })
}

/// True iff every eliminated atom is zero in the reference solution.
/// A reference whose gap exceeds [`SAFETY_GAP`] is not trusted and
/// yields `false`.
pub fn verify_screen_safety(p: &Problem, state: &ScreenState, reference: &OracleResult) -> bool {
    if reference.gap > SAFETY_GAP || reference.x_ref.len() != p.n_atoms() {
        return false;
    }
    state
        .eliminated
        .iter()
        .all(|i| i < reference.x_ref.len() && reference.x_ref[i].abs() <= SUPPORT_EPS)
}
