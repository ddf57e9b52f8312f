#![allow(dead_code)]

use std::sync::Arc;

use screenlab::datagen::{generate, DictionaryKind, GenSpec, ObservationKind};
use screenlab::{Problem, Result};

/// Lasso instance at `ratio · λ*`.
pub fn lasso(dict: DictionaryKind, n: usize, k: usize, seed: u64, ratio: f64) -> Result<Problem> {
    lasso_with(GenSpec::new(dict, n, k, seed), ratio)
}

pub fn lasso_with(spec: GenSpec, ratio: f64) -> Result<Problem> {
    let inst = generate(&spec)?;
    let p = Problem::lasso(Arc::new(inst.dict), inst.observation.y, 1.0)?;
    let ls = p.extreme_dual().lambda_star;
    p.with_lambda(ratio * ls)
}

/// Group-Lasso instance with contiguous groups of `size` at `ratio · λ*`.
pub fn group(spec: GenSpec, size: usize, ratio: f64) -> Result<Problem> {
    let inst = generate(&spec.with_groups(size))?;
    let part = inst.partition.expect("partition requested");
    let p = Problem::group_lasso(Arc::new(inst.dict), Arc::new(part), inst.observation.y, 1.0)?;
    let ls = p.extreme_dual().lambda_star;
    p.with_lambda(ratio * ls)
}

/// Gaussian dictionaries with atom-like observations for even seeds,
/// Pnoise with Bernoulli-Gaussian observations for odd ones.
pub fn mixed_group_spec(n: usize, k: usize, seed: u64) -> GenSpec {
    if seed % 2 == 0 {
        GenSpec::new(DictionaryKind::Gaussian, n, k, seed)
    } else {
        GenSpec::new(DictionaryKind::Pnoise, n, k, seed)
            .with_observation(ObservationKind::BernoulliGaussian)
    }
}

/// Gaussian dictionaries with atom-like observations for even seeds and
/// unit-sphere observations for odd ones.
pub fn gaussian_lasso_spec(n: usize, k: usize, seed: u64) -> GenSpec {
    let obs = if seed % 2 == 0 {
        ObservationKind::LikeAtoms
    } else {
        ObservationKind::UnitSphere
    };
    GenSpec::new(DictionaryKind::Gaussian, n, k, seed).with_observation(obs)
}

pub fn mixed_dict(seed: u64) -> DictionaryKind {
    if seed % 2 == 0 {
        DictionaryKind::Gaussian
    } else {
        DictionaryKind::Pnoise
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    screenlab::bench::percentile(v, 0.5)
}
